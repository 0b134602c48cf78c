/*
 * (C) Copyright 2026 The hvbem Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "hvbem/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "hvbem/error.hpp"

namespace hvbem {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path);
}

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string format_solution(const Solution& s) {
  std::string out = "hvbem-solution 1\n";
  out += "n " + std::to_string(s.u.size()) + "\n";
  out += "floating " + std::to_string(s.V.size()) + "\n";
  out += "iterations " + std::to_string(s.iterations) + "\n";
  out += "residual " + fmt17(s.residual) + "\n";
  for (double u : s.u) out += "u " + fmt17(u) + "\n";
  for (double v : s.V) out += "V " + fmt17(v) + "\n";
  return out;
}

Solution parse_solution(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  Solution s;
  long n = -1, nfl = -1;
  bool header = false;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::Parse, origin + ":" + std::to_string(lineno) + ": " + what);
  };
  auto number = [&](const std::string& tok) {
    try {
      std::size_t used = 0;
      double v = std::stod(tok, &used);
      if (used != tok.size()) fail("bad number '" + tok + "'");
      return v;
    } catch (const std::logic_error&) {
      fail("bad number '" + tok + "'");
    }
    return 0.0;
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string key, value;
    if (!(ls >> key)) continue;
    if (!header) {
      if (key != "hvbem-solution" || !(ls >> value) || value != "1") fail("expected 'hvbem-solution 1'");
      header = true;
      continue;
    }
    if (!(ls >> value)) fail("missing value for '" + key + "'");
    if (key == "n") n = static_cast<long>(number(value));
    else if (key == "floating") nfl = static_cast<long>(number(value));
    else if (key == "iterations") s.iterations = static_cast<int>(number(value));
    else if (key == "residual") s.residual = number(value);
    else if (key == "u") s.u.push_back(number(value));
    else if (key == "V") s.V.push_back(number(value));
    else fail("unknown key '" + key + "'");
  }
  if (!header) throw Error(ErrorCode::Parse, origin + ": empty solution file");
  if (n < 0 || nfl < 0 || static_cast<long>(s.u.size()) != n || static_cast<long>(s.V.size()) != nfl)
    throw Error(ErrorCode::Parse, origin + ": coefficient count does not match the header");
  return s;
}

void write_solution(const Solution& s, const std::string& path) { write_text_file(path, format_solution(s)); }

Solution read_solution(const std::string& path) { return parse_solution(read_text_file(path), path); }

namespace {

void check_sizes(const SurfaceMesh& mesh, const Solution& solution, const SurfaceField& field) {
  const std::size_t n = mesh.num_collocation();
  if (solution.u.size() != n || field.potential.size() != n || field.e_plus.size() != n ||
      field.e_minus.size() != n || field.magnitude.size() != n)
    throw Error(ErrorCode::InvalidArgument, "surface field does not match the mesh");
}

}  // namespace

void write_surface_field_csv(const SurfaceMesh& mesh, const Solution& solution, const SurfaceField& field,
                             const std::string& path) {
  check_sizes(mesh, solution, field);
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << "vertex,x,y,z,u,phi,Ex_plus,Ey_plus,Ez_plus,Ex_minus,Ey_minus,Ez_minus,E_magnitude\n";
  char buf[512];
  for (std::size_t i = 0; i < mesh.num_collocation(); ++i) {
    const Vec3& p = mesh.collocation_point(i);
    const Vec3& a = field.e_plus[i];
    const Vec3& b = field.e_minus[i];
    std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g,%.10g,%.12g,%.12g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.12g\n",
                  mesh.collocation_vertex(i), p.x, p.y, p.z, solution.u[i], field.potential[i], a.x, a.y, a.z,
                  b.x, b.y, b.z, field.magnitude[i]);
    out << buf;
  }
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path);
}

void write_surface_field_vtk(const SurfaceMesh& mesh, const Solution& solution, const SurfaceField& field,
                             const std::string& path) {
  check_sizes(mesh, solution, field);
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  const std::size_t nv = mesh.num_vertices();
  const std::size_t nt = mesh.num_triangles();
  std::vector<double> u(nv, 0.0), e(nv, 0.0);
  for (std::size_t i = 0; i < mesh.num_collocation(); ++i) {
    u[mesh.collocation_vertex(i)] = solution.u[i];
    e[mesh.collocation_vertex(i)] = field.magnitude[i];
  }
  for (const CurvedTriangle& t : mesh.triangles()) {
    for (int m = 0; m < 3; ++m) {
      const int a = t.corner_ids[m], b = t.corner_ids[(m + 1) % 3];
      u[t.midside_ids[m]] = 0.5 * (u[a] + u[b]);
      e[t.midside_ids[m]] = 0.5 * (e[a] + e[b]);
    }
  }
  char buf[256];
  out << "# vtk DataFile Version 3.0\nhvbem surface field\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << nv << " double\n";
  for (const Vec3& p : mesh.vertices()) {
    std::snprintf(buf, sizeof buf, "%.12g %.12g %.12g\n", p.x, p.y, p.z);
    out << buf;
  }
  out << "CELLS " << nt << " " << nt * 7 << "\n";
  for (const CurvedTriangle& t : mesh.triangles())
    out << "6 " << t.corner_ids[0] << " " << t.corner_ids[1] << " " << t.corner_ids[2] << " "
        << t.midside_ids[0] << " " << t.midside_ids[1] << " " << t.midside_ids[2] << "\n";
  out << "CELL_TYPES " << nt << "\n";
  for (std::size_t t = 0; t < nt; ++t) out << "22\n";  // VTK_QUADRATIC_TRIANGLE
  out << "POINT_DATA " << nv << "\n";
  out << "SCALARS u double 1\nLOOKUP_TABLE default\n";
  for (double v : u) {
    std::snprintf(buf, sizeof buf, "%.12g\n", v);
    out << buf;
  }
  out << "SCALARS E_magnitude double 1\nLOOKUP_TABLE default\n";
  for (double v : e) {
    std::snprintf(buf, sizeof buf, "%.12g\n", v);
    out << buf;
  }
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path);
}

void write_fieldline_csv(const FieldLine& line, const IonizationModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << "x,y,z,s,E,alpha,cumulative_integral\n";
  const auto cumulative = cumulative_streamer_integral(line, model);
  char buf[256];
  for (std::size_t i = 0; i < line.points.size(); ++i) {
    const Vec3& p = line.points[i];
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", p.x, p.y, p.z,
                  line.arc_lengths[i], line.e_magnitudes[i], model.alpha(line.e_magnitudes[i]), cumulative[i]);
    out << buf;
  }
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path);
}

}  // namespace hvbem
