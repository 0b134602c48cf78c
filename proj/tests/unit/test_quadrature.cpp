/*
 * (C) Copyright 2026 The hvbem Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include <doctest.h>

#include <cmath>
#include <random>

#include "hvbem/mesh.hpp"
#include "hvbem/quadrature.hpp"
#include "oracles.hpp"

using namespace hvbem;

namespace {

TriangleNodes flat(const Vec3& a, const Vec3& b, const Vec3& c) {
  return {a, b, c, 0.5 * (a + b), 0.5 * (b + c), 0.5 * (c + a)};
}

const TriangleNodes kUnit = flat({0, 0, 0}, {1, 0, 0}, {0, 1, 0});

CurvedTriangle with_circumdata(const TriangleNodes& n, std::array<int, 3> ids = {10, 11, 12}) {
  CurvedTriangle t;
  t.corner_ids = ids;
  t.midside_ids = {13, 14, 15};
  std::tie(t.circumcenter, t.circumradius) = circumcircle(n[0], n[1], n[2]);
  return t;
}

double integrate(const Rule& r, const TriangleNodes& n, const Vec3& x) {
  double sum = 0.0;
  for (std::size_t q = 0; q < r.size(); ++q) {
    const SurfaceFrame f = surface_frame(n, r.nodes[q]);
    sum += r.weights[q] * f.area_element / distance(x, map_reference(n, r.nodes[q]));
  }
  return sum;
}

double weight_sum(const Rule& r) {
  double s = 0.0;
  for (double w : r.weights) s += w;
  return s;
}

bool inside(const Rule& r) {
  for (const RefPoint& p : r.nodes)
    if (p.u < -1e-15 || p.v < -1e-15 || p.u + p.v > 1.0 + 1e-15) return false;
  return true;
}

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

}  // namespace

TEST_SUITE("quadrature") {
  TEST_CASE("classify_pair examples") {
    // Equilateral triangle inscribed in the unit circle: R = 1, circumcenter 0.
    const double s = std::sqrt(3.0) / 2.0;
    const TriangleNodes n = flat({1, 0, 0}, {-0.5, s, 0}, {-0.5, -s, 0});
    const CurvedTriangle t = with_circumdata(n, {4, 9, 2});
    REQUIRE(t.circumradius == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(classify_pair(n[1], 9, t, 1.2) == PairClass{PairType::Singular, 1});
    CHECK(classify_pair({0, 0, 2.0}, 7, t, 1.2).type == PairType::Regular);
    CHECK(classify_pair({0, 0, 1.0}, 7, t, 1.2).type == PairType::NearSingular);
    CHECK(classify_pair({0, 0, 1.0}, -1, t, 1.2).type == PairType::NearSingular);
    // Singular is decided by id, not by position.
    CHECK(classify_pair({0, 0, 5.0}, 2, t, 1.2) == PairClass{PairType::Singular, 2});
  }

  TEST_CASE("classify_pair is scale invariant") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::uniform_real_distribution<double> S(1e-3, 1e3);
    for (int i = 0; i < 2000; ++i) {
      const TriangleNodes n = flat({U(rng), U(rng), U(rng)}, {U(rng), U(rng), U(rng)}, {U(rng), U(rng), U(rng)});
      const Vec3 x{2 * U(rng), 2 * U(rng), 2 * U(rng)};
      const double scale = S(rng);
      const TriangleNodes m = flat(scale * n[0], scale * n[1], scale * n[2]);
      const PairClass a = classify_pair(x, -1, with_circumdata(n), 1.2);
      const PairClass b = classify_pair(scale * x, -1, with_circumdata(m), 1.2);
      const double ratio = distance(x, with_circumdata(n).circumcenter) / with_circumdata(n).circumradius;
      if (std::abs(ratio - 1.2) > 1e-9) CHECK(a == b);
    }
  }

  TEST_CASE("regular rules are exact up to their degree") {
    for (int order : {2, 4, 6, 8}) {
      const Rule& r = regular_rule(order);
      CAPTURE(order);
      CHECK(inside(r));
      CHECK(std::abs(weight_sum(r) - 0.5) < 1e-14);
      for (int a = 0; a <= order; ++a) {
        for (int b = 0; a + b <= order; ++b) {
          double sum = 0.0;
          for (std::size_t q = 0; q < r.size(); ++q)
            sum += r.weights[q] * std::pow(r.nodes[q].u, a) * std::pow(r.nodes[q].v, b);
          const double exact = factorial(a) * factorial(b) / factorial(a + b + 2);
          CAPTURE(a);
          CAPTURE(b);
          CHECK(std::abs(sum - exact) < 1e-15);
        }
      }
    }
    CHECK(regular_rule(6).size() == 12);
    CHECK_THROWS(regular_rule(5));
    CHECK_THROWS(regular_rule(10));
  }

  TEST_CASE("regular rule spot values") {
    double u = 0.0, u2v2 = 0.0;
    for (std::size_t q = 0; q < regular_rule(4).size(); ++q)
      u += regular_rule(4).weights[q] * regular_rule(4).nodes[q].u;
    const Rule& r8 = regular_rule(8);
    for (std::size_t q = 0; q < r8.size(); ++q) {
      const RefPoint p = r8.nodes[q];
      u2v2 += r8.weights[q] * p.u * p.u * p.v * p.v;
    }
    CHECK(std::abs(u - 1.0 / 6.0) < 1e-15);
    CHECK(std::abs(u2v2 - 1.0 / 180.0) < 1e-14);  // 2! 2! / 6!
  }

  TEST_CASE("duffy rule integrates a corner singularity") {
    for (int corner = 0; corner < 3; ++corner) {
      const Rule r = duffy_rule(corner, 6);
      CHECK(inside(r));
      CHECK(std::abs(weight_sum(r) - 0.5) < 1e-14);
    }
    // Reference: angular integral of the radial extent, evaluated adaptively.
    const double reference = oracle::inverse_distance_polar({0, 0, 0}, kUnit[0], kUnit[1], kUnit[2]);
    CHECK(reference == doctest::Approx(std::sqrt(2.0) * std::log(1.0 + std::sqrt(2.0))).epsilon(1e-13));
    // After the transform the integrand is 1/|(1-t) e1 + t e2|, whose poles at
    // t = (1 +- i)/2 bound the 8-point Gauss error at 3.13e-7; 10 points reach 8.3e-9.
    const double at0 = integrate(duffy_rule(0, 8), kUnit, {0, 0, 0});
    CHECK(std::abs(at0 - reference) < 3.2e-7);
    CHECK(std::abs(integrate(duffy_rule(0, 10), kUnit, {0, 0, 0}) - reference) < 1e-8);
    // Relabelled so that the singular corner is corner 2.
    const TriangleNodes relabelled = flat(kUnit[1], kUnit[2], kUnit[0]);
    const double at2 = integrate(duffy_rule(2, 8), relabelled, {0, 0, 0});
    CHECK(std::abs(at2 - at0) < 1e-12);
  }

  TEST_CASE("closest point examples") {
    const RefPoint above = closest_point({1.0 / 3, 1.0 / 3, 0.7}, kUnit);
    CHECK(std::abs(above.u - 1.0 / 3) < 1e-15);
    CHECK(std::abs(above.v - 1.0 / 3) < 1e-15);
    const RefPoint corner = closest_point({-0.5, -0.2, 0.3}, kUnit);
    CHECK(corner.u == 0.0);
    CHECK(corner.v == 0.0);
    const RefPoint edge = closest_point({0.4, -1.0, 0.0}, kUnit);
    CHECK(edge.u == doctest::Approx(0.4));
    CHECK(edge.v == 0.0);
  }

  TEST_CASE("closest point matches a grid search") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-1.5, 1.5);
    for (int trial = 0; trial < 12; ++trial) {
      const TriangleNodes n = flat({U(rng), U(rng), U(rng)}, {U(rng), U(rng), U(rng)}, {U(rng), U(rng), U(rng)});
      const Vec3 x{U(rng), U(rng), U(rng)};
      const RefPoint p = closest_point(x, n);
      const double d = distance(x, n[0] + p.u * (n[1] - n[0]) + p.v * (n[2] - n[0]));
      const double grid = oracle::grid_closest(x, n[0], n[1], n[2]).first;
      CAPTURE(trial);
      CHECK(d <= grid + 1e-12);
      CHECK(std::abs(d - grid) < 1e-6);
    }
  }

  TEST_CASE("subdivide_at") {
    const auto one = subdivide_at({0, 0});
    REQUIRE(one.size() == 1);
    CHECK(one[0].corners[one[0].anchor].u == 0.0);
    CHECK(one[0].corners[one[0].anchor].v == 0.0);

    const auto two = subdivide_at({0.5, 0.0});
    REQUIRE(two.size() == 2);
    for (const SubTriangle& s : two) {
      CHECK(s.corners[s.anchor].u == 0.5);
      CHECK(s.corners[s.anchor].v == 0.0);
    }

    const auto three = subdivide_at({1.0 / 3, 1.0 / 3});
    REQUIRE(three.size() == 3);
    double area = 0.0;
    for (const SubTriangle& s : three) {
      const auto& c = s.corners;
      area += 0.5 * std::abs((c[1].u - c[0].u) * (c[2].v - c[0].v) - (c[2].u - c[0].u) * (c[1].v - c[0].v));
      CHECK(c[s.anchor].u == doctest::Approx(1.0 / 3));
    }
    CHECK(area == doctest::Approx(0.5).epsilon(1e-15));
  }

  TEST_CASE("near-singular rule accuracy") {
    const QuadConfig config;
    const double R = std::sqrt(0.5);
    const Vec3 bary{1.0 / 3, 1.0 / 3, 0};

    const Vec3 x{bary.x, bary.y, 0.05};
    const Rule r = near_singular_rule(x, kUnit, R, config);
    CHECK(std::abs(weight_sum(r) - 0.5) < 1e-13);
    CHECK(inside(r));
    const double ref = oracle::inverse_distance_polar(x, kUnit[0], kUnit[1], kUnit[2]);
    CHECK(std::abs(integrate(r, kUnit, x) - ref) <= 1e-6 * ref);

    // Off to the side: projection outside the triangle, oracle is the
    // iterated adaptive integral.
    const Vec3 side{1.2, 0.9, 0.15};
    const double side_ref = oracle::triangle_integral(
        [&](const Vec3& y) { return 1.0 / distance(side, y); }, kUnit[0], kUnit[1], kUnit[2], 1e-13);
    const double side_val = integrate(near_singular_rule(side, kUnit, R, config), kUnit, side);
    CHECK(std::abs(side_val - side_ref) <= 1e-6 * side_ref);

    // Distances between 0.1 R and 1.2 R above the barycenter.
    for (double ratio = 0.1; ratio <= 1.2 + 1e-12; ratio += 0.1) {
      const Vec3 p{bary.x, bary.y, ratio * R};
      const double exact = oracle::inverse_distance_polar(p, kUnit[0], kUnit[1], kUnit[2]);
      const double got = integrate(near_singular_rule(p, kUnit, R, config), kUnit, p);
      CAPTURE(ratio);
      CHECK(std::abs(got - exact) <= 1e-5 * exact);
    }
  }

  TEST_CASE("near-singular rule agrees with the regular rule far away") {
    const Vec3 far{3.0, -2.0, 4.0};
    const double composite = integrate(near_singular_rule(far, kUnit, std::sqrt(0.5), QuadConfig{}), kUnit, far);
    const double regular = integrate(regular_rule(6), kUnit, far);
    CHECK(std::abs(composite - regular) <= 1e-9 * regular);
  }

  TEST_CASE("every rule integrates 1 to the flat area") {
    const TriangleNodes n = flat({0.3, -0.2, 0.1}, {2.1, 0.4, -0.6}, {-0.4, 1.7, 0.8});
    const double area = 0.5 * norm(cross(n[1] - n[0], n[2] - n[0]));
    auto check_rule = [&](const Rule& r) {
      double sum = 0.0;
      for (std::size_t q = 0; q < r.size(); ++q) sum += r.weights[q] * surface_frame(n, r.nodes[q]).area_element;
      CHECK(std::abs(sum - area) <= 1e-12 * area);
    };
    for (int order : {2, 4, 6, 8}) check_rule(regular_rule(order));
    for (int corner = 0; corner < 3; ++corner) check_rule(duffy_rule(corner, 5));
    check_rule(near_singular_rule({0.5, 0.5, 0.05}, n, circumcircle(n[0], n[1], n[2]).second, QuadConfig{}));
    check_rule(near_singular_rule(0.5 * (n[0] + n[1]), n, circumcircle(n[0], n[1], n[2]).second, QuadConfig{}));
  }

  TEST_CASE("gauss_legendre on [0, 1]") {
    const auto [x, w] = gauss_legendre(8);
    double s = 0.0, m = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      s += w[i];
      m += w[i] * std::pow(x[i], 15);
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(m == doctest::Approx(1.0 / 16).epsilon(1e-14));
  }
}
