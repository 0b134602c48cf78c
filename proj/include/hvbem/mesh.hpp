/*
 * (C) Copyright 2026 The hvbem Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "hvbem/geometry.hpp"

namespace hvbem {

// Patch kinds. Permittivities are absolute (F/m); the "plus" side is the one
// the triangle normal points into.
struct Electrode {
  double v0 = 0.0;
};
struct FloatingConductor {
  int index = 0;
  double eps_plus = kEpsilon0;
};
struct FloatingSheet {
  int index = 0;
  double eps_plus = kEpsilon0;
  double eps_minus = kEpsilon0;
};
struct DielectricInterface {
  double eps_plus = kEpsilon0;
  double eps_minus = kEpsilon0;
};

using PatchKind = std::variant<Electrode, FloatingConductor, FloatingSheet, DielectricInterface>;

struct PatchSpec {
  int tag = 0;
  PatchKind kind;
};

// Equation type of a system row.
struct Dirichlet {
  double v0 = 0.0;
};
struct FloatingDirichlet {
  int index = 0;
};
struct DielectricJump {
  double eps_plus = kEpsilon0;
  double eps_minus = kEpsilon0;
};
struct Neutrality {
  int index = 0;
  bool sheet = false;
};

using RowKind = std::variant<Dirichlet, FloatingDirichlet, DielectricJump, Neutrality>;

/// 6-node quadratic triangle. Midside nodes are ordered edge 0-1, 1-2, 2-0.
struct CurvedTriangle {
  std::array<int, 3> corner_ids{};
  std::array<int, 3> midside_ids{};
  int patch_tag = 0;
  // Of the flat triangle spanned by the corners.
  Vec3 circumcenter;
  double circumradius = 0.0;
};

/// Node positions of one triangle: 3 corners followed by 3 midside nodes.
using TriangleNodes = std::array<Vec3, 6>;

/// Quadratic Lagrange map from reference coordinates onto the curved triangle.
Vec3 map_reference(const TriangleNodes& nodes, RefPoint uv);

/// Parametric tangents d/du and d/dv of map_reference.
std::pair<Vec3, Vec3> reference_tangents(const TriangleNodes& nodes, RefPoint uv);

struct SurfaceFrame {
  Vec3 normal;
  double area_element = 0.0;
};

/// Unit normal (corner winding orientation) and area element at uv. Throws
/// Error(Mesh) when the Jacobian is degenerate (< 1e-14).
SurfaceFrame surface_frame(const TriangleNodes& nodes, RefPoint uv);

/// Mapped linear hat values of the three corners at uv.
inline std::array<double, 3> corner_basis(RefPoint uv) {
  return {1.0 - uv.u - uv.v, uv.u, uv.v};
}

/// Circumcenter and circumradius of a flat triangle.
std::pair<Vec3, double> circumcircle(const Vec3& a, const Vec3& b, const Vec3& c);

struct FloatingSurface {
  int index = 0;
  bool sheet = false;
  std::vector<int> collocation;  // ascending collocation indices
};

struct MeshInput {
  std::vector<Vec3> vertices;
  struct Tri {
    std::array<int, 3> corners{};
    std::array<int, 3> midsides{};
    int tag = 0;
  };
  std::vector<Tri> triangles;
  std::vector<PatchSpec> patches;
};

/// Immutable, validated surface mesh. Collocation points are the vertices that
/// are a corner of at least one triangle; midside nodes only shape geometry.
class SurfaceMesh {
 public:
  /// Validates and precomputes circumdata, lumped weights, collocation normals
  /// and row kinds. Throws Error(Mesh) on any inconsistency.
  static SurfaceMesh build(MeshInput input);

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }
  std::size_t num_collocation() const { return colloc_vertex_.size(); }
  std::size_t num_floating() const { return floating_.size(); }

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<CurvedTriangle>& triangles() const { return triangles_; }
  const CurvedTriangle& triangle(std::size_t t) const { return triangles_[t]; }
  const TriangleNodes& nodes(std::size_t t) const { return nodes_[t]; }
  const std::vector<PatchSpec>& patches() const { return patches_; }
  const PatchSpec& patch(int tag) const;
  const PatchSpec& patch_of(std::size_t t) const { return patches_[tri_patch_[t]]; }

  int collocation_vertex(std::size_t i) const { return colloc_vertex_[i]; }
  /// -1 for midside-only vertices.
  int collocation_index(std::size_t vertex) const { return vertex_colloc_[vertex]; }
  /// Collocation indices of the triangle's corners.
  const std::array<int, 3>& corner_columns(std::size_t t) const { return tri_columns_[t]; }

  const Vec3& collocation_point(std::size_t i) const { return vertices_[colloc_vertex_[i]]; }
  const Vec3& collocation_normal(std::size_t i) const { return colloc_normal_[i]; }
  /// Integral of the hat function of collocation point i over the surface.
  double lumped_weight(std::size_t i) const { return lumped_weight_[i]; }
  const RowKind& row_kind(std::size_t i) const { return row_kind_[i]; }
  /// Triangles adjacent to collocation point i (as a corner).
  const std::vector<int>& adjacent_triangles(std::size_t i) const { return adjacency_[i]; }

  const FloatingSurface& floating(std::size_t k) const { return floating_[k]; }

  double total_area() const;
  Vec3 bbox_min() const { return bbox_min_; }
  Vec3 bbox_max() const { return bbox_max_; }
  double bbox_diagonal() const { return norm(bbox_max_ - bbox_min_); }

  /// Reconstructs the input description (for writing back to disk).
  MeshInput to_input() const;

 private:
  std::vector<Vec3> vertices_;
  std::vector<CurvedTriangle> triangles_;
  std::vector<TriangleNodes> nodes_;
  std::vector<PatchSpec> patches_;
  std::vector<std::size_t> tri_patch_;
  std::vector<std::array<int, 3>> tri_columns_;
  std::vector<int> colloc_vertex_;
  std::vector<int> vertex_colloc_;
  std::vector<Vec3> colloc_normal_;
  std::vector<double> lumped_weight_;
  std::vector<RowKind> row_kind_;
  std::vector<std::vector<int>> adjacency_;
  std::vector<FloatingSurface> floating_;
  Vec3 bbox_min_, bbox_max_;

  friend RowKind classify_vertex(const SurfaceMesh& mesh, int vertex);
};

/// Row kind of a corner vertex: Electrode > Floating > Dielectric priority.
/// Throws Error(Mesh) for conflicting dielectric pairs at a pure-dielectric
/// vertex, or a vertex that is not a triangle corner.
RowKind classify_vertex(const SurfaceMesh& mesh, int vertex);

/// Parses the `bemesh 1` text format. Errors carry the line number.
SurfaceMesh parse_mesh(const std::string& text, const std::string& origin = "<string>");
SurfaceMesh load_mesh(const std::string& path);
std::string format_mesh(const SurfaceMesh& mesh);
void write_mesh(const SurfaceMesh& mesh, const std::string& path);

}  // namespace hvbem
