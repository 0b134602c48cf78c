/*
 * (C) Copyright 2026 The hvbem Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "hvbem/fixtures.hpp"

#include <map>

#include "hvbem/error.hpp"

namespace hvbem::fixtures {

namespace {

using Face = std::array<int, 3>;

int midpoint(std::vector<Vec3>& v, std::map<std::pair<int, int>, int>& cache, int a, int b) {
  const auto key = std::minmax(a, b);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  v.push_back(normalized(0.5 * (v[a] + v[b])));
  const int id = static_cast<int>(v.size()) - 1;
  cache.emplace(key, id);
  return id;
}

}  // namespace

MeshInput icosphere(int level, double radius, int tag, const Vec3& center) {
  if (level < 0 || level > 8) throw Error(ErrorCode::InvalidArgument, "icosphere level must be 0..8");
  if (!(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "icosphere radius must be > 0");
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                         {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (Vec3& p : v) p = normalized(p);
  std::vector<Face> faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                             {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                             {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                             {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> cache;
    std::vector<Face> next;
    next.reserve(faces.size() * 4);
    for (const Face& f : faces) {
      const int a = midpoint(v, cache, f[0], f[1]);
      const int b = midpoint(v, cache, f[1], f[2]);
      const int c = midpoint(v, cache, f[2], f[0]);
      next.push_back({f[0], a, c});
      next.push_back({f[1], b, a});
      next.push_back({f[2], c, b});
      next.push_back({a, b, c});
    }
    faces = std::move(next);
  }
  // Quadratic midside nodes on the sphere.
  std::map<std::pair<int, int>, int> cache;
  MeshInput out;
  for (const Face& f : faces) {
    MeshInput::Tri tri;
    tri.corners = f;
    tri.midsides = {midpoint(v, cache, f[0], f[1]), midpoint(v, cache, f[1], f[2]),
                    midpoint(v, cache, f[2], f[0])};
    tri.tag = tag;
    out.triangles.push_back(tri);
  }
  out.vertices.reserve(v.size());
  for (const Vec3& p : v) out.vertices.push_back(center + radius * p);
  return out;
}

void append(MeshInput& into, const MeshInput& part) {
  const int offset = static_cast<int>(into.vertices.size());
  into.vertices.insert(into.vertices.end(), part.vertices.begin(), part.vertices.end());
  for (MeshInput::Tri tri : part.triangles) {
    for (int& id : tri.corners) id += offset;
    for (int& id : tri.midsides) id += offset;
    into.triangles.push_back(tri);
  }
  for (const PatchSpec& p : part.patches) {
    bool known = false;
    for (const PatchSpec& q : into.patches) known = known || q.tag == p.tag;
    if (!known) into.patches.push_back(p);
  }
}

SurfaceMesh charged_sphere(int level, double radius, double v0) {
  MeshInput in = icosphere(level, radius, 1);
  in.patches.push_back({1, Electrode{v0}});
  return SurfaceMesh::build(std::move(in));
}

SurfaceMesh concentric_spheres(int level_inner, int level_outer, double a, double c, double v0) {
  MeshInput in = icosphere(level_inner, a, 1);
  in.patches.push_back({1, Electrode{v0}});
  MeshInput outer = icosphere(level_outer, c, 2);
  outer.patches.push_back({2, Electrode{0.0}});
  append(in, outer);
  return SurfaceMesh::build(std::move(in));
}

SurfaceMesh floating_shell(int level_inner, int level_shell, int level_outer, double a, double b, double c,
                           double v0) {
  MeshInput in = icosphere(level_inner, a, 1);
  in.patches.push_back({1, Electrode{v0}});
  MeshInput shell = icosphere(level_shell, b, 3);
  shell.patches.push_back({3, FloatingSheet{0, kEpsilon0, kEpsilon0}});
  append(in, shell);
  MeshInput outer = icosphere(level_outer, c, 2);
  outer.patches.push_back({2, Electrode{0.0}});
  append(in, outer);
  return SurfaceMesh::build(std::move(in));
}

SurfaceMesh dielectric_capacitor(int level_inner, int level_interface, int level_outer, double eps_inner,
                                 double eps_outer, double a, double b, double c, double v0) {
  MeshInput in = icosphere(level_inner, a, 1);
  in.patches.push_back({1, Electrode{v0}});
  // Outward normal: minus side is the inner material.
  MeshInput iface = icosphere(level_interface, b, 4);
  iface.patches.push_back({4, DielectricInterface{eps_outer, eps_inner}});
  append(in, iface);
  MeshInput outer = icosphere(level_outer, c, 2);
  outer.patches.push_back({2, Electrode{0.0}});
  append(in, outer);
  return SurfaceMesh::build(std::move(in));
}

SurfaceMesh by_name(const std::string& name, int level) {
  if (name == "sphere") return charged_sphere(level);
  if (name == "concentric") return concentric_spheres(level, level);
  if (name == "floating-shell") return floating_shell(level, level, level);
  if (name == "dielectric") return dielectric_capacitor(level, level, level, 2.0 * kEpsilon0, kEpsilon0);
  throw Error(ErrorCode::InvalidArgument,
              "unknown fixture '" + name + "' (sphere, concentric, floating-shell, dielectric)");
}

}  // namespace hvbem::fixtures
