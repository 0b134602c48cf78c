/*
 * (C) Copyright 2026 The hvbem Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

#include <string>

#include "hvbem/mesh.hpp"

namespace hvbem::fixtures {

/// Icosahedron refined `level` times; every node including the midside nodes
/// lies on the sphere. Corner count is 10 * 4^level + 2. Outward normals.
MeshInput icosphere(int level, double radius, int tag, const Vec3& center = {});

/// Appends `part` to `into`, offsetting vertex ids. Patches are merged by tag.
void append(MeshInput& into, const MeshInput& part);

/// Isolated sphere electrode at potential v0.
SurfaceMesh charged_sphere(int level, double radius = 1.0, double v0 = 1.0);

/// Inner electrode (radius a, v0) inside a grounded outer electrode (radius c).
SurfaceMesh concentric_spheres(int level_inner, int level_outer, double a = 0.5,
                               double c = 1.0, double v0 = 1.0);

/// Concentric electrodes with a floating thin sheet at radius b.
SurfaceMesh floating_shell(int level_inner, int level_shell, int level_outer, double a = 0.5,
                           double b = 0.75, double c = 1.0, double v0 = 1.0);

/// Concentric electrodes with a dielectric interface at radius b; eps_inner
/// fills a < r < b, eps_outer fills b < r < c.
SurfaceMesh dielectric_capacitor(int level_inner, int level_interface, int level_outer,
                                 double eps_inner, double eps_outer, double a = 0.5,
                                 double b = 0.75, double c = 1.0, double v0 = 1.0);

/// Named fixture used by the CLI: sphere, concentric, floating-shell,
/// dielectric. All parts use the same refinement level.
SurfaceMesh by_name(const std::string& name, int level);

}  // namespace hvbem::fixtures
