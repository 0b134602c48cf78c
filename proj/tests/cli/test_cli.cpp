/*
 * (C) Copyright 2026 The hvbem Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
// Runs the hvbem executable end to end and inspects its exit codes and files.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

const fs::path kScratch = fs::path(HVBEM_SCRATCH_DIR) / "cli";

int run(const std::string& args, std::string* stderr_text = nullptr) {
  fs::create_directories(kScratch);
  const fs::path err = kScratch / "stderr.txt";
  const std::string cmd = std::string(HVBEM_CLI) + " " + args + " > " + (kScratch / "stdout.txt").string() +
                          " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  if (stderr_text) {
    std::ifstream in(err);
    *stderr_text = std::string(std::istreambuf_iterator<char>(in), {});
  }
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

std::string dir(const std::string& name) { return (kScratch / name).string(); }
std::string gas(const std::string& name) { return std::string(HVBEM_DATA_DIR) + "/" + name; }

// Solved concentric case shared by the trace tests.
const std::string& concentric_case() {
  static const std::string path = [] {
    const std::string d = dir("concentric");
    REQUIRE(run("solve --fixture concentric --level 3 --out " + d) == 0);
    return d;
  }();
  return path;
}

}  // namespace

TEST_CASE("solve the charged sphere") {
  REQUIRE(run("solve --fixture sphere --level 2 --out " + dir("sphere")) == 0);
  const fs::path d = dir("sphere");
  for (const char* f : {"mesh.bemesh", "config.cfg", "solution.txt", "surface_field.csv", "surface_field.vtk",
                        "timing.txt"})
    CHECK(fs::exists(d / f));
  CHECK(slurp(d / "solution.txt").find("\nV ") == std::string::npos);
  const auto rows = read_csv(d / "surface_field.csv");
  REQUIRE(rows.size() == 163);
  CHECK(rows[0].back() == "E_magnitude");
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(std::stod(rows[i].back()) == doctest::Approx(1.0).epsilon(0.02));
  const std::string timing = slurp(d / "timing.txt");
  for (const char* phase : {"\nassembly ", "\nsolve ", "\nsurface_field "}) CHECK(timing.find(phase) != std::string::npos);
}

TEST_CASE("floating shell potential") {
  REQUIRE(run("solve --fixture floating-shell --level 2 --out " + dir("shell")) == 0);
  std::istringstream in(slurp(fs::path(dir("shell")) / "solution.txt"));
  std::vector<double> v;
  for (std::string key; in >> key;) {
    std::string value;
    in >> value;
    if (key == "V") v.push_back(std::stod(value));
  }
  REQUIRE(v.size() == 1);
  CHECK(v[0] == doctest::Approx(1.0 / 3.0).epsilon(0.01));
}

TEST_CASE("input errors exit with 1") {
  std::string err;
  CHECK(run("solve --mesh " + dir("missing.bemesh") + " --out " + dir("x"), &err) == 1);
  CHECK(err.find("missing.bemesh") != std::string::npos);

  fs::create_directories(kScratch);
  std::ofstream(kScratch / "broken.bemesh") << "bemesh 1\nvertex 0 0 0\ntriangle 0 1 2 3 4 5 1\n";
  CHECK(run("solve --mesh " + dir("broken.bemesh") + " --out " + dir("x"), &err) == 1);
  CHECK(err.find("broken.bemesh") != std::string::npos);

  CHECK(run("solve --fixture sphere --level 1 --set solver.tolerance=1 --out " + dir("x")) == 1);
  CHECK(run("solve --fixture sphere --level 1 --blocks 0 --out " + dir("x")) == 1);
  CHECK(run("frobnicate") == 1);
}

TEST_CASE("non-convergence exits with 3") {
  std::string err;
  CHECK(run("solve --fixture floating-shell --level 1 --set solver.max_iters=2 --set solver.restart=1 --out " +
                dir("stall"),
            &err) == 3);
  CHECK(err.find("residual") != std::string::npos);
}

TEST_CASE("a fixture written by gen solves to the same result") {
  REQUIRE(run("gen --fixture dielectric --level 1 --out " + dir("dielectric.bemesh")) == 0);
  REQUIRE(run("solve --mesh " + dir("dielectric.bemesh") + " --out " + dir("from_file")) == 0);
  REQUIRE(run("solve --fixture dielectric --level 1 --out " + dir("from_fixture")) == 0);
  CHECK(slurp(fs::path(dir("from_file")) / "solution.txt") ==
        slurp(fs::path(dir("from_fixture")) / "solution.txt"));
}

TEST_CASE("solution files are identical across workers and blocks") {
  REQUIRE(run("solve --fixture floating-shell --level 1 --workers 1 --blocks 1 --dump-matrix --out " + dir("w1")) == 0);
  REQUIRE(run("solve --fixture floating-shell --level 1 --workers 4 --blocks 8 --dump-matrix --out " + dir("w4")) == 0);
  const fs::path a = dir("w1"), b = dir("w4");
  CHECK(slurp(a / "solution.txt") == slurp(b / "solution.txt"));
  CHECK(slurp(a / "surface_field.csv") == slurp(b / "surface_field.csv"));
  CHECK(fs::file_size(a / "matrix.bin") > 0);
}

TEST_CASE("radial lines between concentric spheres") {
  const std::string c = concentric_case();
  REQUIRE(run("trace --case " + c + " --gas " + gas("alpha_equals_e.gas") + " --top-k 4 --out " + dir("radial")) == 0);
  const auto rows = read_csv(fs::path(dir("radial")) / "trace_summary.csv");
  REQUIRE(rows.size() == 5);
  CHECK(rows[0][7] == "termination");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i][7] == "SurfaceHit");
    CHECK(std::stod(rows[i][6]) == doctest::Approx(0.5).epsilon(0.02));
    CHECK(std::stod(rows[i][8]) == doctest::Approx(1.0).epsilon(0.01));
    CHECK(fs::exists(fs::path(dir("radial")) / ("line_" + std::to_string(i - 1) + ".csv")));
  }
}

TEST_CASE("a gas without ionization never incepts") {
  const std::string c = concentric_case();
  REQUIRE(run("trace --case " + c + " --gas " + gas("zero.gas") + " --top-k 3 --out " + dir("zero")) == 0);
  const auto rows = read_csv(fs::path(dir("zero")) / "trace_summary.csv");
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i][9] == "false");
    CHECK(std::stod(rows[i][8]) == 0.0);
  }
}

TEST_CASE("starts in a field-free region exit with 4") {
  REQUIRE(run("solve --fixture sphere --level 1 --out " + dir("sphere1")) == 0);
  std::ofstream(kScratch / "starts.txt") << "# inside the conductor\n0 0 0\n0.1 0 0 -1\n";
  CHECK(run("trace --case " + dir("sphere1") + " --gas " + gas("zero.gas") + " --starts " + dir("starts.txt")) == 4);

  // One good start is enough to succeed.
  std::ofstream(kScratch / "mixed.txt") << "0 0 0\n1.5 0 0\n";
  CHECK(run("trace --case " + dir("sphere1") + " --gas " + gas("zero.gas") + " --starts " + dir("mixed.txt")) == 0);
}

TEST_CASE("bench with a single rung") {
  REQUIRE(run("bench --fixture sphere --levels 1 --no-speedup") == 0);
  const std::string out = slurp(kScratch / "stdout.txt");
  CHECK(out.find("exponent n/a") != std::string::npos);
}
