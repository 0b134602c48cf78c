/*
 * (C) Copyright 2026 The hvbem Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

#include <string>
#include <vector>

#include "hvbem/mesh.hpp"
#include "hvbem/postprocess.hpp"
#include "hvbem/solver.hpp"

namespace hvbem {

/// Text solution file. Values are written with 17 significant digits so a
/// reload reproduces every double exactly.
///
///   hvbem-solution 1
///   n <n>
///   floating <N_fl>
///   iterations <k>
///   residual <r>
///   u <value>        (n lines)
///   V <value>        (N_fl lines)
std::string format_solution(const Solution& solution);
Solution parse_solution(const std::string& text, const std::string& origin = "<string>");
void write_solution(const Solution& solution, const std::string& path);
Solution read_solution(const std::string& path);

/// CSV with one row per collocation point:
/// vertex,x,y,z,u,phi,Ex_plus,Ey_plus,Ez_plus,Ex_minus,Ey_minus,Ez_minus,E_magnitude
void write_surface_field_csv(const SurfaceMesh& mesh, const Solution& solution,
                             const SurfaceField& field, const std::string& path);

/// Legacy ASCII VTK unstructured grid of quadratic triangles with point data
/// u and E_magnitude (midside nodes get the mean of their edge corners).
void write_surface_field_vtk(const SurfaceMesh& mesh, const Solution& solution,
                             const SurfaceField& field, const std::string& path);

/// CSV columns x,y,z,s,E,alpha,cumulative_integral.
void write_fieldline_csv(const FieldLine& line, const IonizationModel& model,
                         const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace hvbem
