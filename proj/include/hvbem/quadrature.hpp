/*
 * (C) Copyright 2026 The hvbem Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

#include <array>
#include <vector>

#include "hvbem/config.hpp"
#include "hvbem/geometry.hpp"
#include "hvbem/mesh.hpp"

namespace hvbem {

/// Quadrature rule on the reference triangle; weights sum to 1/2 for rules
/// exact on constants.
struct Rule {
  std::vector<RefPoint> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
  void push(RefPoint p, double w) {
    nodes.push_back(p);
    weights.push_back(w);
  }
};

enum class PairType { Regular, NearSingular, Singular };

struct PairClass {
  PairType type = PairType::Regular;
  int corner = -1;  // local corner index for Singular

  friend bool operator==(const PairClass&, const PairClass&) = default;
};

/// Classifies a (point, triangle) pair. `vertex` is the mesh vertex id of the
/// collocation point, or -1 for a free evaluation point.
PairClass classify_pair(const Vec3& x, int vertex, const CurvedTriangle& tri, double eta);

/// Symmetric Gauss rule exact for polynomials of degree `order` in {2,4,6,8}.
const Rule& regular_rule(int order);

/// Gauss-Legendre nodes and weights on [0, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n);

/// Tensor Gauss rule on the unit square collapsed onto `corner`; the radial
/// Jacobian cancels a 1/r singularity at that corner.
Rule duffy_rule(int corner, int n1d);

/// Closest point of the flat corner triangle to x, in reference coordinates.
RefPoint closest_point(const Vec3& x, const TriangleNodes& nodes);

struct SubTriangle {
  std::array<RefPoint, 3> corners;
  int anchor = 0;  // local corner sitting on the subdivision point
};

/// Splits the reference triangle so that p is a corner of every piece:
/// 1 piece if p is a corner, 2 if p is on an edge, 3 otherwise.
std::vector<SubTriangle> subdivide_at(RefPoint p);

/// Composite Duffy rule graded toward the closest point of the triangle to x,
/// expressed in the parent reference coordinates.
Rule near_singular_rule(const Vec3& x, const TriangleNodes& nodes, double circumradius,
                        const QuadConfig& config);

/// Appends a Duffy rule on the sub-triangle `tri` (reference coordinates),
/// anchored at local corner `anchor`, with `depth` geometric radial cells.
void append_duffy(Rule& rule, const std::array<RefPoint, 3>& tri, int anchor,
                  const std::vector<double>& gl_nodes, const std::vector<double>& gl_weights,
                  int depth);

/// Read-only rule tables built once per configuration and shared by workers.
struct QuadratureTables {
  explicit QuadratureTables(const QuadConfig& config);

  QuadConfig config;
  Rule regular;
  std::array<Rule, 3> singular;  // Duffy rule per corner
  std::vector<double> near_gl_nodes;
  std::vector<double> near_gl_weights;
};

/// Same as above with the Gauss-Legendre tables taken from `tables`.
Rule near_singular_rule(const Vec3& x, const TriangleNodes& nodes, double circumradius,
                        const QuadratureTables& tables);

}  // namespace hvbem
