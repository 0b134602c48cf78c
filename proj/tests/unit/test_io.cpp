/*
 * (C) Copyright 2026 The hvbem Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "hvbem/error.hpp"
#include "hvbem/fixtures.hpp"
#include "hvbem/io.hpp"

using namespace hvbem;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / "hvbem_io_test") { fs::create_directories(path); }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("solution round trip is exact") {
    Solution s;
    s.u = {1.0, -0.1, 1.0 / 3.0, 6.02214076e23, std::nextafter(1.0, 2.0)};
    s.V = {0.25, -1e-300};
    s.iterations = 17;
    s.residual = 3.3e-9;
    TempDir dir;
    write_solution(s, dir / "s.txt");
    const Solution r = read_solution(dir / "s.txt");
    CHECK(r.u == s.u);
    CHECK(r.V == s.V);
    CHECK(r.iterations == 17);
    CHECK(r.residual == s.residual);
    CHECK(lines(format_solution(s)).front() == "hvbem-solution 1");
  }

  TEST_CASE("malformed solutions") {
    CHECK_THROWS_AS(parse_solution("hvbem-solution 2\nn 0\nfloating 0\n"), Error);
    CHECK_THROWS_AS(parse_solution("hvbem-solution 1\nn 2\nfloating 0\nu 1\n"), Error);
    CHECK_THROWS_AS(parse_solution("hvbem-solution 1\nn 1\nfloating 0\nu one\n"), Error);
    CHECK_THROWS_AS(read_solution("/nonexistent/solution.txt"), Error);
    try {
      parse_solution("hvbem-solution 1\nn 1\nfloating 0\nu 1\nu 2\n", "case.txt");
      FAIL("expected a parse error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Parse);
      CHECK(std::string(e.what()).find("case.txt") != std::string::npos);
    }
  }

  TEST_CASE("surface field files") {
    const SurfaceMesh mesh = fixtures::charged_sphere(1);
    const std::size_t n = mesh.num_collocation();
    Solution s;
    s.u.assign(n, 1.0);
    SurfaceField f;
    f.potential.assign(n, 1.0);
    f.e_plus.assign(n, Vec3{1, 0, 0});
    f.e_minus.assign(n, Vec3{});
    f.magnitude.assign(n, 1.0);
    TempDir dir;

    write_surface_field_csv(mesh, s, f, dir / "f.csv");
    const auto csv = lines(read_text_file(dir / "f.csv"));
    CHECK(csv.front() == "vertex,x,y,z,u,phi,Ex_plus,Ey_plus,Ez_plus,Ex_minus,Ey_minus,Ez_minus,E_magnitude");
    CHECK(csv.size() == n + 1);

    write_surface_field_vtk(mesh, s, f, dir / "f.vtk");
    const std::string vtk = read_text_file(dir / "f.vtk");
    CHECK(vtk.rfind("# vtk DataFile Version", 0) == 0);
    CHECK(vtk.find("POINTS " + std::to_string(mesh.num_vertices())) != std::string::npos);
    CHECK(vtk.find("CELLS " + std::to_string(mesh.num_triangles()) + " " +
                   std::to_string(7 * mesh.num_triangles())) != std::string::npos);
    CHECK(vtk.find("SCALARS E_magnitude") != std::string::npos);

    f.magnitude.pop_back();
    CHECK_THROWS_AS(write_surface_field_csv(mesh, s, f, dir / "g.csv"), Error);
  }

  TEST_CASE("field line csv") {
    FieldLine line;
    line.points = {{0, 0, 0}, {0, 0, 1}};
    line.arc_lengths = {0, 1};
    line.e_magnitudes = {2, 4};
    TempDir dir;
    write_fieldline_csv(line, IonizationModel({{0, 0}, {10, 10}}, 1.0), dir / "l.csv");
    const auto csv = lines(read_text_file(dir / "l.csv"));
    REQUIRE(csv.size() == 3);
    CHECK(csv[0] == "x,y,z,s,E,alpha,cumulative_integral");
    std::istringstream last(csv[2]);
    std::vector<double> v;
    for (std::string cell; std::getline(last, cell, ',');) v.push_back(std::stod(cell));
    CHECK(v == std::vector<double>{0, 0, 1, 1, 4, 4, 3});
  }

  TEST_CASE("text files") {
    TempDir dir;
    write_text_file(dir / "a.txt", "abc\n");
    CHECK(read_text_file(dir / "a.txt") == "abc\n");
    CHECK_THROWS_AS(read_text_file(dir / "missing.txt"), Error);
    CHECK_THROWS_AS(write_text_file("/nonexistent/dir/a.txt", "x"), Error);
  }
}
