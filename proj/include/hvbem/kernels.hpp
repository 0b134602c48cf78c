/*
 * (C) Copyright 2026 The hvbem Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

#include "hvbem/geometry.hpp"

namespace hvbem {

// Laplace kernels without permittivity; throw Error(SingularEvaluation) when
// |x - y| < 1e-14.

/// 1 / (4 pi |x - y|)
double sl_kernel(const Vec3& x, const Vec3& y);

/// (x - y) . n_x / (4 pi |x - y|^3)
double adl_kernel(const Vec3& x, const Vec3& n_x, const Vec3& y);

/// (x - y) / (4 pi |x - y|^3)
Vec3 efield_kernel(const Vec3& x, const Vec3& y);

namespace detail {

// Unchecked variants for the quadrature loops.
inline double inv_dist(const Vec3& x, const Vec3& y) { return 1.0 / distance(x, y); }

}  // namespace detail

}  // namespace hvbem
