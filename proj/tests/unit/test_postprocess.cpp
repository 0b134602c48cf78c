/*
 * (C) Copyright 2026 The hvbem Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include <doctest.h>

#include <cmath>
#include <random>

#include "hvbem/assembly.hpp"
#include "hvbem/error.hpp"
#include "hvbem/fixtures.hpp"
#include "hvbem/postprocess.hpp"
#include "hvbem/solver.hpp"

using namespace hvbem;

namespace {

struct Solved {
  SurfaceMesh mesh;
  Solution solution;
};

Solved solve_mesh(SurfaceMesh mesh) {
  const AssembledSystem sys = assemble(mesh, QuadConfig{}, AssemblyConfig{}, 1);
  Solution s = solve(sys.matrix, sys.rhs, SolverConfig{});
  return {std::move(mesh), std::move(s)};
}

const Solved& unit_sphere() {
  static const Solved s = solve_mesh(fixtures::charged_sphere(3));
  return s;
}

// Inner radius 0.5 at 1 V, outer radius 1 grounded: phi = 1/r - 1, |E| = 1/r^2.
const Solved& concentric() {
  static const Solved s = solve_mesh(fixtures::concentric_spheres(3, 3));
  return s;
}

IonizationModel alpha_equals_e() { return IonizationModel({{0.0, 0.0}, {1000.0, 1000.0}}, 1.0); }

double max_abs(const Vec3& v) { return std::max({std::abs(v.x), std::abs(v.y), std::abs(v.z)}); }

}  // namespace

TEST_SUITE("postprocess") {
  TEST_CASE("potential and field of the charged sphere") {
    const Solved& s = unit_sphere();
    CHECK(eval_potential(s.solution, s.mesh, {2, 0, 0}) == doctest::Approx(0.5).epsilon(1e-3));
    const Vec3 e = eval_efield(s.solution, s.mesh, {2, 0, 0});
    CHECK(e.x == doctest::Approx(0.25).epsilon(1e-3));
    CHECK(std::abs(e.y) < 1e-4);
    CHECK(std::abs(e.z) < 1e-4);

    const FieldEvaluator f(s.mesh, s.solution.u, QuadConfig{});
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int i = 0; i < 20; ++i) {
      Vec3 d{U(rng), U(rng), U(rng)};
      d = (1.0 / norm(d)) * d;
      const double r = 1.3 + 1.5 * (i / 19.0);
      const Vec3 x = r * d;
      CHECK(f.potential(x) == doctest::Approx(1.0 / r).epsilon(2e-3));
      CHECK(norm(f.efield(x) - (1.0 / (r * r)) * d) < 2e-3 / (r * r));
      CHECK(f.potential(0.5 * x / r) == doctest::Approx(1.0).epsilon(2e-3));
      CHECK(norm(f.efield(0.5 * x / r)) < 2e-3);
    }
  }

  TEST_CASE("field is minus the gradient of the potential") {
    const Solved s = solve_mesh(fixtures::dielectric_capacitor(1, 1, 1, 2 * kEpsilon0, kEpsilon0));
    const FieldEvaluator f(s.mesh, s.solution.u, QuadConfig{});
    const double h = 1e-5;
    for (const Vec3& x : {Vec3{0.55, 0.2, 0.1}, Vec3{-0.1, 0.55, 0.3}, Vec3{0.6, -0.5, 0.2}}) {
      const Vec3 e = f.efield(x);
      const Vec3 g{(f.potential(x + Vec3{h, 0, 0}) - f.potential(x - Vec3{h, 0, 0})) / (2 * h),
                   (f.potential(x + Vec3{0, h, 0}) - f.potential(x - Vec3{0, h, 0})) / (2 * h),
                   (f.potential(x + Vec3{0, 0, h}) - f.potential(x - Vec3{0, 0, h})) / (2 * h)};
      CHECK(norm(e + g) < 1e-5 * norm(e));
    }
  }

  TEST_CASE("zero density gives zero field") {
    const SurfaceMesh mesh = fixtures::charged_sphere(1);
    const FieldEvaluator f(mesh, std::vector<double>(mesh.num_collocation(), 0.0), QuadConfig{});
    CHECK(f.potential({0.3, 2, 1}) == 0.0);
    CHECK(f.efield({0.3, 2, 1}) == Vec3{});
  }

  TEST_CASE("superposition") {
    const SurfaceMesh mesh = fixtures::concentric_spheres(1, 1);
    const std::size_t n = mesh.num_collocation();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::vector<double> a(n), b(n), c(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = U(rng);
      b[i] = U(rng);
      c[i] = 2.0 * a[i] - 3.0 * b[i];
    }
    const FieldEvaluator fa(mesh, a, QuadConfig{}), fb(mesh, b, QuadConfig{}), fc(mesh, c, QuadConfig{});
    for (const Vec3& x : {Vec3{0.7, 0.1, 0.0}, Vec3{0.0, -0.2, 0.8}, Vec3{2, 2, 2}}) {
      const double pa = fa.potential(x), pb = fb.potential(x);
      CHECK(fc.potential(x) == doctest::Approx(2 * pa - 3 * pb).epsilon(1e-12));
      const Vec3 e = 2.0 * fa.efield(x) - 3.0 * fb.efield(x);
      CHECK(norm(fc.efield(x) - e) <= 1e-12 * norm(e));
    }
  }

  TEST_CASE("evaluation at a mesh vertex is refused") {
    const Solved& s = unit_sphere();
    const Vec3 v = s.mesh.collocation_point(17);
    try {
      eval_potential(s.solution, s.mesh, v);
      FAIL("expected SingularEvaluation");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::SingularEvaluation);
    }
    CHECK_THROWS_AS(eval_efield(s.solution, s.mesh, v + Vec3{1e-13, 0, 0}), Error);
    CHECK_THROWS_AS(FieldEvaluator(s.mesh, std::vector<double>(3, 1.0), QuadConfig{}), Error);
  }

  TEST_CASE("surface field of the charged sphere") {
    const Solved& s = unit_sphere();
    const SurfaceField f1 = surface_field(s.mesh, s.solution.u, QuadConfig{}, 1);
    const SurfaceField f3 = surface_field(s.mesh, s.solution.u, QuadConfig{}, 3);
    CHECK(f1.magnitude == f3.magnitude);
    for (std::size_t i = 0; i < s.mesh.num_collocation(); ++i) {
      const Vec3 n = s.mesh.collocation_normal(i);
      CHECK(f1.magnitude[i] == doctest::Approx(1.0).epsilon(0.02));
      CHECK(norm(f1.e_plus[i] - n) < 0.02);
      CHECK(norm(f1.e_minus[i]) < 0.02);
      CHECK(f1.potential[i] == doctest::Approx(1.0).epsilon(2e-3));
    }
  }

  TEST_CASE("top field points") {
    SurfaceField f;
    f.magnitude = {1.0, 5.0, 3.0, 5.0, 0.5};
    CHECK(top_field_points(f, 3) == std::vector<int>{1, 3, 2});
    CHECK(top_field_points(f, 10) == std::vector<int>{1, 3, 2, 0, 4});
    CHECK(top_field_points(f, 0).empty());
  }

  TEST_CASE("ionization model") {
    const IonizationModel m({{1.0, 0.0}, {3.0, 4.0}, {4.0, 10.0}}, 9.0);
    CHECK(m.alpha(0.0) == 0.0);
    CHECK(m.alpha(2.0) == doctest::Approx(2.0));
    CHECK(m.alpha(3.5) == doctest::Approx(7.0));
    CHECK(m.alpha(100.0) == 10.0);
    CHECK(m.k_str() == 9.0);

    const IonizationModel p = IonizationModel::parse("# demo\nkstr 2.5\n0 0\n10 1 # trailing\n");
    CHECK(p.k_str() == 2.5);
    CHECK(p.alpha(5.0) == doctest::Approx(0.5));
    CHECK_THROWS_AS(IonizationModel::parse("0 0\n1 1\n"), Error);
    CHECK_THROWS_AS(IonizationModel::parse("kstr 1\n1 0\n0 1\n"), Error);
    CHECK_THROWS_AS(IonizationModel::parse("kstr 1\n0 zero\n"), Error);
    CHECK_THROWS_AS(IonizationModel({}, 1.0), Error);
  }

  TEST_CASE("streamer integral on synthetic lines") {
    FieldLine line;
    line.points = {{0, 0, 0}, {1, 0, 0}, {3, 0, 0}};
    line.arc_lengths = {0.0, 1.0, 3.0};
    line.e_magnitudes = {10.0, 10.0, 10.0};
    const IonizationModel flat({{0.0, 2.0}, {100.0, 2.0}}, 5.0);
    StreamerResult r = streamer_integral(line, flat);
    CHECK(r.value == doctest::Approx(6.0));
    CHECK(r.inception);
    CHECK(cumulative_streamer_integral(line, flat) == std::vector<double>{0.0, 2.0, 6.0});

    line.e_magnitudes = {0.0, 2.0, 4.0};
    r = streamer_integral(line, alpha_equals_e());
    CHECK(r.value == doctest::Approx(0.5 * 2 + 0.5 * 6 * 2));
    CHECK(r.inception);

    r = streamer_integral(line, IonizationModel({{0.0, 0.0}}, 1.0));
    CHECK(r.value == 0.0);
    CHECK_FALSE(r.inception);

    // Exactly at the threshold is not inception.
    r = streamer_integral(line, IonizationModel({{0.0, 1.0 / 3.0}}, 1.0));
    CHECK(r.value == doctest::Approx(1.0));
    CHECK(streamer_integral(FieldLine{}, flat).value == 0.0);
  }

  TEST_CASE("field line between concentric spheres") {
    const Solved& s = concentric();
    const FieldEvaluator f(s.mesh, s.solution.u, QuadConfig{});
    const TraceParams p = TraceParams::from(TraceConfig{}, s.mesh, 4.0);

    const Vec3 start{0.6, 0.05, -0.02};
    const Vec3 dir = (1.0 / norm(start)) * start;
    const FieldLine out = trace_fieldline(f, start, +1, p);
    CHECK(out.termination == Termination::SurfaceHit);
    CHECK(norm(out.points.back()) == doctest::Approx(1.0).epsilon(1e-2));
    for (const Vec3& x : out.points) CHECK(norm(x - dot(x, dir) * dir) < 2e-3);
    CHECK(out.length() >= distance(out.points.front(), out.points.back()) - 1e-12);
    CHECK(out.length() == doctest::Approx(0.4).epsilon(2e-2));
    for (std::size_t i = 1; i < out.points.size(); ++i) CHECK(out.arc_lengths[i] > out.arc_lengths[i - 1]);

    const FieldLine in = trace_fieldline(f, start, -1, p);
    CHECK(in.termination == Termination::SurfaceHit);
    CHECK(norm(in.points.back()) == doctest::Approx(0.5).epsilon(1e-2));

    CHECK_THROWS_AS(trace_fieldline(f, start, 0, p), Error);
  }

  TEST_CASE("field line terminations") {
    const Solved& s = unit_sphere();
    const FieldEvaluator f(s.mesh, s.solution.u, QuadConfig{});
    const TraceParams p = TraceParams::from(TraceConfig{}, s.mesh, 1.0);
    try {
      trace_fieldline(f, {0, 0, 0}, 1, p);
      FAIL("expected WeakField");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::WeakField);
    }
    CHECK(trace_fieldline(f, {1.2, 0, 0}, 1, p).termination == Termination::LeftDomain);

    TraceConfig shortcut;
    shortcut.max_length_rel = 0.05;
    const FieldLine l = trace_fieldline(f, {1.2, 0, 0}, 1, TraceParams::from(shortcut, s.mesh, 1.0));
    CHECK(l.termination == Termination::MaxLength);
    CHECK(l.length() == doctest::Approx(0.05 * s.mesh.bbox_diagonal()).epsilon(1e-9));

    // The lift off the surface counts towards the length budget.
    const SurfaceField sf = surface_field(s.mesh, s.solution.u, QuadConfig{}, 1);
    const FieldLine from = trace_from_surface(f, sf, 0, 1, TraceParams::from(shortcut, s.mesh, 1.0));
    CHECK(from.termination == Termination::MaxLength);
    CHECK(from.length() == doctest::Approx(0.05 * s.mesh.bbox_diagonal()).epsilon(1e-9));
    CHECK(norm(from.points.back()) == doctest::Approx(1.0 + 0.05 * s.mesh.bbox_diagonal()).epsilon(1e-4));

    TraceConfig floor;
    floor.e_floor = 0.6;  // |E| = 1/r^2 drops below it at r = 1.29
    const FieldLine w = trace_fieldline(f, {1.2, 0, 0}, 1, TraceParams::from(floor, s.mesh, 1.0));
    CHECK(w.termination == Termination::WeakField);
    CHECK(norm(w.points.back()) == doctest::Approx(1.29).epsilon(0.02));
  }

  TEST_CASE("streamer integral from the surface of the inner sphere") {
    // alpha = |E| = 1/r^2 integrates to 1 over r in [0.5, 1].
    const Solved& s = concentric();
    const FieldEvaluator f(s.mesh, s.solution.u, QuadConfig{});
    const SurfaceField sf = surface_field(s.mesh, s.solution.u, QuadConfig{}, 1);
    const int top = top_field_points(sf, 1).front();
    CHECK(sf.magnitude[top] == doctest::Approx(4.0).epsilon(0.02));

    TraceConfig cfg;
    const double emax = *std::max_element(sf.magnitude.begin(), sf.magnitude.end());
    const FieldLine line = trace_from_surface(f, sf, top, +1, TraceParams::from(cfg, s.mesh, emax));
    CHECK(line.termination == Termination::SurfaceHit);
    CHECK(norm(line.points.front()) == doctest::Approx(0.5).epsilon(1e-6));
    const double value = streamer_integral(line, alpha_equals_e()).value;
    CHECK(value == doctest::Approx(1.0).epsilon(0.01));

    cfg.rel_tol = 1e-8;
    const FieldLine fine = trace_from_surface(f, sf, top, +1, TraceParams::from(cfg, s.mesh, emax));
    CHECK(std::abs(streamer_integral(fine, alpha_equals_e()).value - value) < 5e-3 * value);

    // Against the field there is nowhere to go from the electrode.
    CHECK_THROWS_AS(trace_from_surface(f, sf, top, -1, TraceParams::from(cfg, s.mesh, emax)), Error);
  }
}
