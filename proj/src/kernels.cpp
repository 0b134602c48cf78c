/*
 * (C) Copyright 2026 The hvbem Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "hvbem/kernels.hpp"

#include "hvbem/error.hpp"

namespace hvbem {

namespace {

double checked_distance(const Vec3& x, const Vec3& y) {
  const double r = distance(x, y);
  if (!(r >= 1e-14)) throw Error(ErrorCode::SingularEvaluation, "kernel evaluated at coincident points");
  return r;
}

}  // namespace

double sl_kernel(const Vec3& x, const Vec3& y) { return 1.0 / (kFourPi * checked_distance(x, y)); }

double adl_kernel(const Vec3& x, const Vec3& n_x, const Vec3& y) {
  return dot(efield_kernel(x, y), n_x);
}

Vec3 efield_kernel(const Vec3& x, const Vec3& y) {
  const double r = checked_distance(x, y);
  return (x - y) / (kFourPi * r * r * r);
}

}  // namespace hvbem
