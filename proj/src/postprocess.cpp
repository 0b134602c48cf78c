/*
 * (C) Copyright 2026 The hvbem Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "hvbem/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "hvbem/error.hpp"
#include "hvbem/io.hpp"
#include "hvbem/parallel.hpp"

namespace hvbem {

namespace {
constexpr double kInvFourPi = 1.0 / kFourPi;
}

// ---------------------------------------------------------------------------
// Point evaluation

FieldEvaluator::FieldEvaluator(const SurfaceMesh& mesh, std::span<const double> density,
                               const QuadConfig& quad)
    : mesh_(mesh), density_(density.begin(), density.end()), tables_(quad) {
  if (density_.size() != mesh_.num_collocation())
    throw Error(ErrorCode::InvalidArgument, "density length does not match the mesh");
  RowIntegrator integrator(mesh_, tables_);
  mapped_.reserve(mesh_.num_triangles());
  for (std::size_t t = 0; t < mesh_.num_triangles(); ++t) mapped_.push_back(integrator.mapped(t));
  for (const RefPoint& p : tables_.regular.nodes) basis_.push_back(corner_basis(p));
}

template <class Accumulate>
void FieldEvaluator::integrate(const Vec3& x, Accumulate&& acc) const {
  const double eta = tables_.config.eta;
  for (std::size_t t = 0; t < mesh_.num_triangles(); ++t) {
    const CurvedTriangle& tri = mesh_.triangle(t);
    const auto& cols = mesh_.corner_columns(t);
    const double u0 = density_[cols[0]], u1 = density_[cols[1]], u2 = density_[cols[2]];
    if (u0 == 0.0 && u1 == 0.0 && u2 == 0.0) continue;
    const PairClass cls = classify_pair(x, -1, tri, eta);
    if (cls.type == PairType::Regular) {
      const auto& m = mapped_[t];
      for (std::size_t q = 0; q < m.points.size(); ++q) {
        const auto& psi = basis_[q];
        acc(m.points[q], m.jw[q] * (u0 * psi[0] + u1 * psi[1] + u2 * psi[2]));
      }
      continue;
    }
    const TriangleNodes& nodes = mesh_.nodes(t);
    for (const Vec3& p : nodes)
      if (distance(p, x) < 1e-12)
        throw Error(ErrorCode::SingularEvaluation, "evaluation point coincides with a mesh vertex");
    const Rule rule = near_singular_rule(x, nodes, tri.circumradius, tables_);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const RefPoint p = rule.nodes[q];
      auto [tu, tv] = reference_tangents(nodes, p);
      const auto psi = corner_basis(p);
      acc(map_reference(nodes, p),
          rule.weights[q] * norm(cross(tu, tv)) * (u0 * psi[0] + u1 * psi[1] + u2 * psi[2]));
    }
  }
}

double FieldEvaluator::potential(const Vec3& x) const {
  double sum = 0.0;
  integrate(x, [&](const Vec3& y, double q) { sum += q / distance(x, y); });
  return sum * kInvFourPi;
}

Vec3 FieldEvaluator::efield(const Vec3& x) const {
  Vec3 sum;
  integrate(x, [&](const Vec3& y, double q) {
    const Vec3 d = x - y;
    const double r = norm(d);
    sum += (q / (r * r * r)) * d;
  });
  return sum * kInvFourPi;
}

double eval_potential(const Solution& solution, const SurfaceMesh& mesh, const Vec3& x, const QuadConfig& quad) {
  return FieldEvaluator(mesh, solution.u, quad).potential(x);
}

Vec3 eval_efield(const Solution& solution, const SurfaceMesh& mesh, const Vec3& x, const QuadConfig& quad) {
  return FieldEvaluator(mesh, solution.u, quad).efield(x);
}

// ---------------------------------------------------------------------------
// Surface field

SurfaceField surface_field(const SurfaceMesh& mesh, std::span<const double> density, const QuadConfig& quad,
                           int workers) {
  const std::size_t n = mesh.num_collocation();
  if (density.size() != n) throw Error(ErrorCode::InvalidArgument, "density length does not match the mesh");
  QuadratureTables tables(quad);
  RowIntegrator integrator(mesh, tables);
  SurfaceField out;
  out.potential.assign(n, 0.0);
  std::vector<double> kprime(n, 0.0);
  parallel_for(n, workers, [&](std::size_t i) {
    std::vector<double> sl(n, 0.0), adl(n, 0.0);
    std::vector<int> deferred;
    PairCounts counts;
    const unsigned mask = kSingleLayer | kAdjointDoubleLayer;
    integrator.pass1<double>(i, mask, sl, adl, deferred, counts);
    integrator.pass2<double>(i, mask, deferred, sl, adl);
    double phi = 0.0, k = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      phi += sl[j] * density[j];
      k += adl[j] * density[j];
    }
    out.potential[i] = phi;
    kprime[i] = k;
  });

  out.e_plus.resize(n);
  out.e_minus.resize(n);
  out.magnitude.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Area-weighted surface gradient of the piecewise-linear potential.
    Vec3 grad;
    double weight = 0.0;
    for (int t : mesh.adjacent_triangles(i)) {
      const TriangleNodes& p = mesh.nodes(t);
      const auto& cols = mesh.corner_columns(t);
      const Vec3 e1 = p[1] - p[0], e2 = p[2] - p[0];
      const Vec3 nrm = cross(e1, e2);
      const double n2 = norm2(nrm);
      const Vec3 g1 = cross(e2, nrm) / n2, g2 = cross(nrm, e1) / n2;
      const Vec3 g0 = -(g1 + g2);
      const double area = 0.5 * std::sqrt(n2);
      grad += area * (out.potential[cols[0]] * g0 + out.potential[cols[1]] * g1 + out.potential[cols[2]] * g2);
      weight += area;
    }
    grad = grad / weight;
    const Vec3& nx = mesh.collocation_normal(i);
    const Vec3 tangential = -(grad - dot(grad, nx) * nx);
    const double half = 0.5 * density[i];
    out.e_plus[i] = tangential + (half + kprime[i]) * nx;
    out.e_minus[i] = tangential + (-half + kprime[i]) * nx;
    out.magnitude[i] = std::max(norm(out.e_plus[i]), norm(out.e_minus[i]));
  }
  return out;
}

std::vector<int> top_field_points(const SurfaceField& field, int k) {
  std::vector<int> idx(field.magnitude.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return field.magnitude[a] > field.magnitude[b]; });
  if (k >= 0 && static_cast<std::size_t>(k) < idx.size()) idx.resize(k);
  return idx;
}

// ---------------------------------------------------------------------------
// Ionization model

IonizationModel::IonizationModel(std::vector<std::pair<double, double>> table, double k_str)
    : table_(std::move(table)), k_str_(k_str) {
  if (table_.empty()) throw Error(ErrorCode::InvalidArgument, "ionization table is empty");
  for (std::size_t i = 0; i < table_.size(); ++i) {
    if (!std::isfinite(table_[i].first) || !std::isfinite(table_[i].second))
      throw Error(ErrorCode::InvalidArgument, "ionization table entries must be finite");
    if (i > 0 && !(table_[i].first > table_[i - 1].first))
      throw Error(ErrorCode::InvalidArgument, "ionization table must be strictly increasing in |E|");
  }
  if (!std::isfinite(k_str_)) throw Error(ErrorCode::InvalidArgument, "K_str must be finite");
}

double IonizationModel::alpha(double e) const {
  if (e <= table_.front().first) return table_.front().second;
  if (e >= table_.back().first) return table_.back().second;
  auto hi = std::upper_bound(table_.begin(), table_.end(), e,
                             [](double v, const std::pair<double, double>& p) { return v < p.first; });
  auto lo = hi - 1;
  const double t = (e - lo->first) / (hi->first - lo->first);
  return lo->second + t * (hi->second - lo->second);
}

IonizationModel IonizationModel::parse(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::vector<std::pair<double, double>> table;
  bool have_kstr = false;
  double kstr = 0.0;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::Parse, origin + ":" + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    std::string extra;
    if (first == "kstr") {
      if (!(ls >> kstr)) fail("kstr needs a value");
      have_kstr = true;
    } else {
      double e = 0.0, a = 0.0;
      try {
        std::size_t used = 0;
        e = std::stod(first, &used);
        if (used != first.size()) fail("bad field value '" + first + "'");
      } catch (const std::logic_error&) {
        fail("bad field value '" + first + "'");
      }
      if (!(ls >> a)) fail("expected '<E> <alpha>'");
      table.emplace_back(e, a);
    }
    if (ls >> extra) fail("trailing token '" + extra + "'");
  }
  if (!have_kstr) throw Error(ErrorCode::Parse, origin + ": missing 'kstr <value>'");
  try {
    return IonizationModel(std::move(table), kstr);
  } catch (const Error& e) {
    throw Error(ErrorCode::Parse, origin + ": " + e.what());
  }
}

IonizationModel IonizationModel::load(const std::string& path) { return parse(read_text_file(path), path); }

// ---------------------------------------------------------------------------
// Field lines

const char* to_string(Termination t) {
  switch (t) {
    case Termination::SurfaceHit: return "SurfaceHit";
    case Termination::WeakField: return "WeakField";
    case Termination::MaxLength: return "MaxLength";
    case Termination::LeftDomain: return "LeftDomain";
  }
  return "?";
}

TraceParams TraceParams::from(const TraceConfig& c, const SurfaceMesh& mesh, double max_surface_field) {
  const double diag = mesh.bbox_diagonal();
  TraceParams p;
  p.rel_tol = c.rel_tol;
  p.length_scale = diag;
  p.h_min = c.h_min_rel * diag;
  p.h_max = c.h_max_rel * diag;
  p.surface_tol_rel = c.surface_tol_rel;
  p.max_length = c.max_length_rel * diag;
  p.e_floor = c.e_floor > 0.0 ? c.e_floor : c.e_floor_rel * max_surface_field;
  p.field_change = c.field_change;
  p.max_steps = c.max_steps;
  return p;
}

SurfaceProximity nearest_surface(const SurfaceMesh& mesh, const Vec3& x) {
  SurfaceProximity best;
  best.distance = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const CurvedTriangle& tri = mesh.triangle(t);
    if (distance(x, tri.circumcenter) - 1.5 * tri.circumradius > best.distance) continue;
    const TriangleNodes& nodes = mesh.nodes(t);
    const Vec3 y = map_reference(nodes, closest_point(x, nodes));
    const double d = distance(x, y);
    if (d < best.distance) {
      best.distance = d;
      best.triangle = static_cast<int>(t);
      best.point = y;
    }
  }
  return best;
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr double kB5[7] = {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0.0};
constexpr double kB4[7] = {5179.0 / 57600,    0.0, 7571.0 / 16695, 393.0 / 640, -92097.0 / 339200,
                           187.0 / 2100, 1.0 / 40};

bool outside_box(const Vec3& x, const Vec3& lo, const Vec3& hi) {
  return x.x < lo.x || x.y < lo.y || x.z < lo.z || x.x > hi.x || x.y > hi.y || x.z > hi.z;
}

}  // namespace

FieldLine trace_fieldline(const FieldEvaluator& field, const Vec3& start, int orientation,
                          const TraceParams& params) {
  if (orientation != 1 && orientation != -1)
    throw Error(ErrorCode::InvalidArgument, "orientation must be +1 or -1");
  const SurfaceMesh& mesh = field.mesh();
  const double sign = orientation;

  Vec3 e = field.efield(start);
  double emag = norm(e);
  if (!(emag >= params.e_floor) || emag == 0.0)
    throw Error(ErrorCode::WeakField, "field at the start point is below the weak-field floor");

  // The domain is the mesh bounding box padded by its diagonal on every side.
  const Vec3 center = 0.5 * (mesh.bbox_min() + mesh.bbox_max());
  const double pad = mesh.bbox_diagonal();
  const Vec3 half = 0.5 * (mesh.bbox_max() - mesh.bbox_min()) + Vec3{pad, pad, pad};
  const Vec3 box_lo = center - half, box_hi = center + half;
  const double tol = params.rel_tol * (params.length_scale > 0.0 ? params.length_scale : 1.0);

  FieldLine line;
  line.points.push_back(start);
  line.e_magnitudes.push_back(emag);
  line.arc_lengths.push_back(0.0);

  Vec3 x = start;
  Vec3 k[7];
  k[0] = (sign / emag) * e;
  SurfaceProximity prox = nearest_surface(mesh, x);
  double h = std::clamp(0.5 * prox.distance, params.h_min, params.h_max);

  for (int step = 0;; ++step) {
    if (step >= params.max_steps || line.length() >= params.max_length * (1.0 - 1e-12)) {
      line.termination = Termination::MaxLength;
      break;
    }
    const double remaining = params.max_length - line.length();
    double cap = std::min({params.h_max, std::max(0.5 * prox.distance, params.h_min)});
    h = std::min({h, cap, remaining});

    Vec3 x5, e_new;
    double e_new_mag = 0.0, err = 0.0;
    bool weak = false;
    for (;;) {
      for (int s = 1; s < 7; ++s) {
        Vec3 xs = x;
        for (int j = 0; j < s; ++j) xs += (h * kA[s][j]) * k[j];
        const Vec3 es = field.efield(xs);
        const double m = norm(es);
        if (m == 0.0) {
          weak = true;
          break;
        }
        k[s] = (sign / m) * es;
        if (s == 6) {
          x5 = xs;
          e_new = es;
          e_new_mag = m;
        }
      }
      if (weak) break;
      Vec3 diff;
      for (int s = 0; s < 7; ++s) diff += (h * (kB5[s] - kB4[s])) * k[s];
      err = norm(diff);
      const bool field_ok = std::abs(e_new_mag - emag) <= params.field_change * emag;
      if ((err <= tol && field_ok) || h <= params.h_min) break;
      double shrink = err > tol ? std::max(0.2, 0.9 * std::pow(tol / err, 0.2)) : 0.5;
      if (!field_ok) shrink = std::min(shrink, 0.5);
      h = std::max(h * shrink, std::min(params.h_min, h));
    }
    if (weak) {
      line.termination = Termination::WeakField;
      break;
    }

    const double chord = distance(x5, x);
    if (!(chord > 0.0)) {
      line.termination = Termination::WeakField;
      break;
    }
    const Vec3 prev = x;
    x = x5;
    e = e_new;
    emag = e_new_mag;
    k[0] = k[6];
    line.points.push_back(x);
    line.e_magnitudes.push_back(emag);
    line.arc_lengths.push_back(line.arc_lengths.back() + chord);

    if (emag < params.e_floor) {
      line.termination = Termination::WeakField;
      break;
    }
    const double prev_distance = prox.distance;
    prox = nearest_surface(mesh, x);
    const double surface_tol = params.surface_tol_rel * mesh.triangle(prox.triangle).circumradius;
    if (prox.distance < surface_tol && prox.distance < prev_distance) {
      // Close the line on the surface; |E| there is held at the last sample.
      const double gap = distance(prox.point, x);
      if (gap > 0.0) {
        line.points.push_back(prox.point);
        line.e_magnitudes.push_back(emag);
        line.arc_lengths.push_back(line.arc_lengths.back() + gap);
      }
      line.termination = Termination::SurfaceHit;
      break;
    }
    if (outside_box(x, box_lo, box_hi) && norm(x - center) > norm(prev - center)) {
      line.termination = Termination::LeftDomain;
      break;
    }
    const double grow = err > 0.0 ? std::min(5.0, 0.9 * std::pow(tol / err, 0.2)) : 5.0;
    h = std::min(h * std::max(grow, 1.0), params.h_max);
  }
  return line;
}

FieldLine trace_from_surface(const FieldEvaluator& field, const SurfaceField& surface, std::size_t index,
                             int orientation, const TraceParams& params) {
  const SurfaceMesh& mesh = field.mesh();
  if (index >= mesh.num_collocation()) throw Error(ErrorCode::InvalidArgument, "collocation index out of range");
  if (orientation != 1 && orientation != -1)
    throw Error(ErrorCode::InvalidArgument, "orientation must be +1 or -1");
  const Vec3& p = mesh.collocation_point(index);
  const Vec3& n = mesh.collocation_normal(index);
  const double plus_out = orientation * dot(surface.e_plus[index], n);
  const double minus_out = -orientation * dot(surface.e_minus[index], n);
  const double plus_mag = norm(surface.e_plus[index]);
  const double minus_mag = norm(surface.e_minus[index]);
  double side = 0.0, surface_mag = 0.0;
  if (plus_out > 0.0 && (minus_out <= 0.0 || plus_mag >= minus_mag)) {
    side = 1.0;
    surface_mag = plus_mag;
  } else if (minus_out > 0.0) {
    side = -1.0;
    surface_mag = minus_mag;
  } else {
    throw Error(ErrorCode::WeakField, "the oriented field does not leave the surface at this point");
  }
  double r = std::numeric_limits<double>::infinity();
  for (int t : mesh.adjacent_triangles(index)) r = std::min(r, mesh.triangle(t).circumradius);
  const double lift = 0.25 * r;
  const Vec3 start = p + (side * lift) * n;

  // The lift counts towards the length budget.
  TraceParams rest = params;
  rest.max_length = std::max(params.max_length - lift, 0.0);
  FieldLine tail = trace_fieldline(field, start, orientation, rest);
  FieldLine line;
  line.termination = tail.termination;
  line.points.reserve(tail.points.size() + 1);
  line.points.push_back(p);
  line.e_magnitudes.push_back(surface_mag);
  line.arc_lengths.push_back(0.0);
  for (std::size_t i = 0; i < tail.points.size(); ++i) {
    line.points.push_back(tail.points[i]);
    line.e_magnitudes.push_back(tail.e_magnitudes[i]);
    line.arc_lengths.push_back(lift + tail.arc_lengths[i]);
  }
  return line;
}

StreamerResult streamer_integral(const FieldLine& line, const IonizationModel& model) {
  StreamerResult r;
  const auto cumulative = cumulative_streamer_integral(line, model);
  r.value = cumulative.empty() ? 0.0 : cumulative.back();
  r.inception = r.value > model.k_str();
  return r;
}

std::vector<double> cumulative_streamer_integral(const FieldLine& line, const IonizationModel& model) {
  std::vector<double> out;
  out.reserve(line.points.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < line.e_magnitudes.size(); ++i) {
    if (i > 0) {
      const double ds = line.arc_lengths[i] - line.arc_lengths[i - 1];
      sum += 0.5 * (model.alpha(line.e_magnitudes[i - 1]) + model.alpha(line.e_magnitudes[i])) * ds;
    }
    out.push_back(sum);
  }
  return out;
}

}  // namespace hvbem
