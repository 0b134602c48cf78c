/*
 * (C) Copyright 2026 The hvbem Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "hvbem/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include "hvbem/error.hpp"

namespace hvbem {

namespace {

// Symmetric rules, nodes as (u, v, weight) with weights summing to 1/2.
// Values refined to 40 digits by Newton iteration on the moment equations.
constexpr double kDeg2[][3] = {
    {0.16666666666666666667, 0.66666666666666666667, 0.16666666666666666667},
    {0.66666666666666666667, 0.16666666666666666667, 0.16666666666666666667},
    {0.16666666666666666667, 0.16666666666666666667, 0.16666666666666666667},
};

constexpr double kDeg4[][3] = {
    {0.44594849091596488632, 0.10810301816807022736, 0.11169079483900573285},
    {0.10810301816807022736, 0.44594849091596488632, 0.11169079483900573285},
    {0.44594849091596488632, 0.44594849091596488632, 0.11169079483900573285},
    {0.091576213509770743460, 0.81684757298045851308, 0.054975871827660933819},
    {0.81684757298045851308, 0.091576213509770743460, 0.054975871827660933819},
    {0.091576213509770743460, 0.091576213509770743460, 0.054975871827660933819},
};

constexpr double kDeg6[][3] = {
    {0.24928674517091042129, 0.50142650965817915742, 0.058393137863189683013},
    {0.50142650965817915742, 0.24928674517091042129, 0.058393137863189683013},
    {0.24928674517091042129, 0.24928674517091042129, 0.058393137863189683013},
    {0.063089014491502228340, 0.87382197101699554332, 0.025422453185103408460},
    {0.87382197101699554332, 0.063089014491502228340, 0.025422453185103408460},
    {0.063089014491502228340, 0.063089014491502228340, 0.025422453185103408460},
    {0.31035245103378440542, 0.63650249912139864723, 0.041425537809186787597},
    {0.63650249912139864723, 0.31035245103378440542, 0.041425537809186787597},
    {0.053145049844816947353, 0.63650249912139864723, 0.041425537809186787597},
    {0.63650249912139864723, 0.053145049844816947353, 0.041425537809186787597},
    {0.053145049844816947353, 0.31035245103378440542, 0.041425537809186787597},
    {0.31035245103378440542, 0.053145049844816947353, 0.041425537809186787597},
};

constexpr double kDeg8[][3] = {
    {0.33333333333333333333, 0.33333333333333333333, 0.072157803838893584126},
    {0.45929258829272315603, 0.081414823414553687942, 0.047545817133642312397},
    {0.081414823414553687942, 0.45929258829272315603, 0.047545817133642312397},
    {0.45929258829272315603, 0.45929258829272315603, 0.047545817133642312397},
    {0.17056930775176020662, 0.65886138449647958676, 0.051608685267359125141},
    {0.65886138449647958676, 0.17056930775176020662, 0.051608685267359125141},
    {0.17056930775176020662, 0.17056930775176020662, 0.051608685267359125141},
    {0.050547228317030975458, 0.89890554336593804908, 0.016229248811599040155},
    {0.89890554336593804908, 0.050547228317030975458, 0.016229248811599040155},
    {0.050547228317030975458, 0.050547228317030975458, 0.016229248811599040155},
    {0.26311282963463811342, 0.72849239295540428124, 0.013615157087217497132},
    {0.72849239295540428124, 0.26311282963463811342, 0.013615157087217497132},
    {0.0083947774099576053372, 0.72849239295540428124, 0.013615157087217497132},
    {0.72849239295540428124, 0.0083947774099576053372, 0.013615157087217497132},
    {0.0083947774099576053372, 0.26311282963463811342, 0.013615157087217497132},
    {0.26311282963463811342, 0.0083947774099576053372, 0.013615157087217497132},
};

template <std::size_t N>
Rule make_rule(const double (&table)[N][3]) {
  Rule r;
  for (const auto& row : table) r.push({row[0], row[1]}, row[2]);
  return r;
}

constexpr RefPoint kRefCorners[3] = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};

}  // namespace

PairClass classify_pair(const Vec3& x, int vertex, const CurvedTriangle& tri, double eta) {
  if (vertex >= 0) {
    for (int c = 0; c < 3; ++c)
      if (tri.corner_ids[c] == vertex) return {PairType::Singular, c};
  }
  const double d = distance(x, tri.circumcenter);
  if (d > eta * tri.circumradius) return {PairType::Regular, -1};
  return {PairType::NearSingular, -1};
}

const Rule& regular_rule(int order) {
  static const Rule r2 = make_rule(kDeg2);
  static const Rule r4 = make_rule(kDeg4);
  static const Rule r6 = make_rule(kDeg6);
  static const Rule r8 = make_rule(kDeg8);
  switch (order) {
    case 2: return r2;
    case 4: return r4;
    case 6: return r6;
    case 8: return r8;
    default:
      throw Error(ErrorCode::InvalidArgument,
                  "unsupported regular quadrature order " + std::to_string(order));
  }
}

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "Gauss-Legendre needs at least one point");
  std::vector<double> x(n), w(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // Recompute the derivative at the converged root.
    double p0 = 1.0, p1 = 0.0;
    for (int k = 1; k <= n; ++k) {
      double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    double weight = 2.0 / ((1.0 - z * z) * dp * dp);
    // Map [-1, 1] -> [0, 1].
    x[i] = 0.5 * (1.0 - z);
    x[n - 1 - i] = 0.5 * (1.0 + z);
    w[i] = w[n - 1 - i] = 0.5 * weight;
  }
  return {x, w};
}

void append_duffy(Rule& rule, const std::array<RefPoint, 3>& tri, int anchor,
                  const std::vector<double>& gl_nodes, const std::vector<double>& gl_weights,
                  int depth) {
  const RefPoint a = tri[anchor];
  const RefPoint b = tri[(anchor + 1) % 3];
  const RefPoint c = tri[(anchor + 2) % 3];
  const double e1u = b.u - a.u, e1v = b.v - a.v;
  const double e2u = c.u - a.u, e2v = c.v - a.v;
  const double det = std::abs(e1u * e2v - e1v * e2u);
  if (det == 0.0) return;

  // Radial cells [0, 2^-depth], ..., [1/4, 1/2], [1/2, 1].
  std::vector<double> cuts{0.0};
  for (int k = depth; k >= 1; --k) cuts.push_back(std::ldexp(1.0, -k));
  cuts.push_back(1.0);

  const std::size_t n = gl_nodes.size();
  for (std::size_t cell = 0; cell + 1 < cuts.size(); ++cell) {
    const double s0 = cuts[cell], len = cuts[cell + 1] - cuts[cell];
    for (std::size_t i = 0; i < n; ++i) {
      const double s = s0 + len * gl_nodes[i];
      const double ws = len * gl_weights[i] * s * det;
      for (std::size_t j = 0; j < n; ++j) {
        const double t = gl_nodes[j];
        const double du = (1.0 - t) * e1u + t * e2u;
        const double dv = (1.0 - t) * e1v + t * e2v;
        rule.push({a.u + s * du, a.v + s * dv}, ws * gl_weights[j]);
      }
    }
  }
}

Rule duffy_rule(int corner, int n1d) {
  if (corner < 0 || corner > 2) throw Error(ErrorCode::InvalidArgument, "Duffy corner must be 0..2");
  if (n1d < 2) throw Error(ErrorCode::InvalidArgument, "Duffy rule needs n1d >= 2");
  auto [x, w] = gauss_legendre(n1d);
  Rule r;
  append_duffy(r, {kRefCorners[0], kRefCorners[1], kRefCorners[2]}, corner, x, w, 0);
  return r;
}

RefPoint closest_point(const Vec3& p, const TriangleNodes& nodes) {
  // Voronoi-region walk over the flat corner triangle.
  const Vec3& a = nodes[0];
  const Vec3& b = nodes[1];
  const Vec3& c = nodes[2];
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = dot(ab, ap), d2 = dot(ac, ap);
  if (d1 <= 0.0 && d2 <= 0.0) return {0.0, 0.0};
  const Vec3 bp = p - b;
  const double d3 = dot(ab, bp), d4 = dot(ac, bp);
  if (d3 >= 0.0 && d4 <= d3) return {1.0, 0.0};
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double t = d1 / (d1 - d3);
    return {t, 0.0};
  }
  const Vec3 cp = p - c;
  const double d5 = dot(ab, cp), d6 = dot(ac, cp);
  if (d6 >= 0.0 && d5 <= d6) return {0.0, 1.0};
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double t = d2 / (d2 - d6);
    return {0.0, t};
  }
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double t = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return {1.0 - t, t};
  }
  const double denom = 1.0 / (va + vb + vc);
  return {vb * denom, vc * denom};
}

std::vector<SubTriangle> subdivide_at(RefPoint p) {
  constexpr double kSnap = 1e-12;
  double lam[3] = {1.0 - p.u - p.v, p.u, p.v};
  int zeros = 0;
  for (double& l : lam) {
    if (l < kSnap) {
      l = 0.0;
      ++zeros;
    }
  }
  const std::array<RefPoint, 3> ref{kRefCorners[0], kRefCorners[1], kRefCorners[2]};
  if (zeros >= 2) {
    int k = 0;
    for (int i = 0; i < 3; ++i)
      if (lam[i] > 0.0) k = i;
    return {SubTriangle{ref, k}};
  }
  const double sum = lam[0] + lam[1] + lam[2];
  const RefPoint q{lam[1] / sum, lam[2] / sum};
  if (zeros == 1) {
    int k = 0;  // corner opposite the edge holding q
    for (int i = 0; i < 3; ++i)
      if (lam[i] == 0.0) k = i;
    const RefPoint a = ref[(k + 1) % 3], b = ref[(k + 2) % 3];
    return {SubTriangle{{q, b, ref[k]}, 0}, SubTriangle{{q, ref[k], a}, 0}};
  }
  return {SubTriangle{{q, ref[1], ref[2]}, 0}, SubTriangle{{q, ref[2], ref[0]}, 0},
          SubTriangle{{q, ref[0], ref[1]}, 0}};
}

namespace {

constexpr double kMaxFanAngle = kPi / 4.0;

// Splits the sub-triangle into pieces whose angle at the anchor, measured on
// the flat corner triangle, is at most kMaxFanAngle; each piece is anchored
// at its local corner 0.
void append_fan(Rule& rule, const SubTriangle& sub, const TriangleNodes& nodes, const std::vector<double>& gl_nodes,
                const std::vector<double>& gl_weights, int depth) {
  const RefPoint a = sub.corners[sub.anchor];
  const RefPoint b = sub.corners[(sub.anchor + 1) % 3];
  const RefPoint c = sub.corners[(sub.anchor + 2) % 3];
  auto flat = [&](RefPoint r) { return nodes[0] + r.u * (nodes[1] - nodes[0]) + r.v * (nodes[2] - nodes[0]); };
  const Vec3 pa = flat(a), ab = flat(b) - pa, ac = flat(c) - pa;
  const double lb = norm(ab), lc = norm(ac);
  if (lb == 0.0 || lc == 0.0) return;
  const double angle = std::acos(std::clamp(dot(ab, ac) / (lb * lc), -1.0, 1.0));
  const int pieces = std::max(1, static_cast<int>(std::ceil(angle / kMaxFanAngle - 1e-9)));
  if (pieces == 1) {
    append_duffy(rule, {a, b, c}, 0, gl_nodes, gl_weights, depth);
    return;
  }
  // In-plane frame: e1 along ab, e2 completing towards ac.
  const Vec3 e1 = (1.0 / lb) * ab;
  const Vec3 e2 = normalized(ac - dot(ac, e1) * e1);
  const double bx = lb, cx = dot(ac, e1), cy = dot(ac, e2);
  RefPoint prev = b;
  for (int k = 1; k <= pieces; ++k) {
    RefPoint next = c;
    if (k < pieces) {
      const double phi = angle * k / pieces;
      const double dx = std::cos(phi), dy = std::sin(phi);
      // Ray from the anchor meets b + lambda (c - b).
      const double lambda = dy * bx / (dx * cy - dy * (cx - bx));
      next = {b.u + lambda * (c.u - b.u), b.v + lambda * (c.v - b.v)};
    }
    append_duffy(rule, {a, prev, next}, 0, gl_nodes, gl_weights, depth);
    prev = next;
  }
}

}  // namespace

Rule near_singular_rule(const Vec3& x, const TriangleNodes& nodes, double circumradius,
                        const QuadratureTables& tables) {
  const RefPoint p = closest_point(x, nodes);
  const double d = distance(x, map_reference(nodes, p));
  const int depth = d < tables.config.bisect_trigger * circumradius ? tables.config.bisect_depth : 0;
  Rule rule;
  for (const SubTriangle& sub : subdivide_at(p))
    append_fan(rule, sub, nodes, tables.near_gl_nodes, tables.near_gl_weights, depth);
  return rule;
}

Rule near_singular_rule(const Vec3& x, const TriangleNodes& nodes, double circumradius,
                        const QuadConfig& config) {
  return near_singular_rule(x, nodes, circumradius, QuadratureTables(config));
}

QuadratureTables::QuadratureTables(const QuadConfig& cfg) : config(cfg), regular(regular_rule(cfg.regular_order)) {
  for (int c = 0; c < 3; ++c) singular[c] = duffy_rule(c, cfg.duffy_points);
  if (cfg.near_duffy_points < 2) throw Error(ErrorCode::InvalidArgument, "near_duffy_points must be >= 2");
  std::tie(near_gl_nodes, near_gl_weights) = gauss_legendre(cfg.near_duffy_points);
}

}  // namespace hvbem
