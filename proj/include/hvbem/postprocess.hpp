/*
 * (C) Copyright 2026 The hvbem Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hvbem/config.hpp"
#include "hvbem/mesh.hpp"
#include "hvbem/quadrature.hpp"
#include "hvbem/solver.hpp"

namespace hvbem {

/// Potential and field evaluation from a solved density.
class FieldEvaluator {
 public:
  FieldEvaluator(const SurfaceMesh& mesh, std::span<const double> density,
                 const QuadConfig& quad);

  /// Throws Error(SingularEvaluation) within 1e-12 m of a mesh vertex.
  double potential(const Vec3& x) const;
  Vec3 efield(const Vec3& x) const;

  const SurfaceMesh& mesh() const { return mesh_; }
  const QuadratureTables& tables() const { return tables_; }

 private:
  template <class Accumulate>
  void integrate(const Vec3& x, Accumulate&& acc) const;

  const SurfaceMesh& mesh_;
  std::vector<double> density_;
  QuadratureTables tables_;
  std::vector<RowIntegrator::MappedRule> mapped_;
  std::vector<std::array<double, 3>> basis_;
};

double eval_potential(const Solution& solution, const SurfaceMesh& mesh, const Vec3& x,
                      const QuadConfig& quad = {});
Vec3 eval_efield(const Solution& solution, const SurfaceMesh& mesh, const Vec3& x,
                 const QuadConfig& quad = {});

/// Field at a collocation point on both sides of the surface. The normal
/// component comes from the jump relation +-sigma/2 + K' sigma, the
/// tangential part from the surface gradient of the collocated potential.
struct SurfaceField {
  std::vector<double> potential;  // single layer at each collocation point
  std::vector<Vec3> e_plus;
  std::vector<Vec3> e_minus;
  std::vector<double> magnitude;  // max(|E+|, |E-|)
};

SurfaceField surface_field(const SurfaceMesh& mesh, std::span<const double> density,
                           const QuadConfig& quad, int workers = 1);

/// Collocation indices of the k largest surface |E| values, descending; ties
/// broken by index.
std::vector<int> top_field_points(const SurfaceField& field, int k);

/// Effective ionization coefficient alpha(|E|) as a piecewise-linear table.
class IonizationModel {
 public:
  IonizationModel(std::vector<std::pair<double, double>> table, double k_str);

  /// Linear interpolation, constant beyond the table ends.
  double alpha(double e_magnitude) const;
  double k_str() const { return k_str_; }
  const std::vector<std::pair<double, double>>& table() const { return table_; }

  /// Lines `<E V/m> <alpha 1/m>` plus `kstr <value>`; `#` starts a comment.
  static IonizationModel parse(const std::string& text, const std::string& origin = "<string>");
  static IonizationModel load(const std::string& path);

 private:
  std::vector<std::pair<double, double>> table_;
  double k_str_;
};

enum class Termination { SurfaceHit, WeakField, MaxLength, LeftDomain };

const char* to_string(Termination t);

struct FieldLine {
  std::vector<Vec3> points;
  std::vector<double> e_magnitudes;
  std::vector<double> arc_lengths;
  Termination termination = Termination::MaxLength;

  double length() const { return arc_lengths.empty() ? 0.0 : arc_lengths.back(); }
};

/// Absolute tracer settings derived from TraceConfig and the mesh size.
struct TraceParams {
  double rel_tol = 1e-6;
  double length_scale = 1.0;  // error tolerance is rel_tol * length_scale
  double h_min = 0.0;
  double h_max = 0.0;
  double surface_tol_rel = 0.1;
  double max_length = 0.0;
  double e_floor = 0.0;
  double field_change = 0.02;
  int max_steps = 100000;

  static TraceParams from(const TraceConfig& config, const SurfaceMesh& mesh,
                          double max_surface_field);
};

/// Distance from x to the (curved) surface, estimated through the closest
/// point of the nearest flat corner triangle, and the index of that triangle.
struct SurfaceProximity {
  double distance = 0.0;
  int triangle = -1;
  Vec3 point;
};
SurfaceProximity nearest_surface(const SurfaceMesh& mesh, const Vec3& x);

/// Follows dx/ds = orientation * E/|E| with an embedded Dormand-Prince 5(4)
/// pair. Throws Error(WeakField) when |E(start)| < e_floor. LeftDomain means
/// the line moved outward beyond the mesh bounding box padded by its diagonal.
FieldLine trace_fieldline(const FieldEvaluator& field, const Vec3& start, int orientation,
                          const TraceParams& params);

/// Field line leaving the surface at collocation point `index`. The start is
/// lifted off the surface by a quarter of the smallest adjacent circumradius on
/// the side the oriented field points into; the surface point itself is
/// prepended with that side's surface |E|.
FieldLine trace_from_surface(const FieldEvaluator& field, const SurfaceField& surface,
                             std::size_t index, int orientation, const TraceParams& params);

struct StreamerResult {
  double value = 0.0;
  bool inception = false;
};

/// Trapezoidal integral of alpha(|E|) over arc length; inception iff > K_str.
StreamerResult streamer_integral(const FieldLine& line, const IonizationModel& model);

/// Running trapezoidal integral at every point of the line.
std::vector<double> cumulative_streamer_integral(const FieldLine& line,
                                                 const IonizationModel& model);

}  // namespace hvbem
