/*
 * (C) Copyright 2026 The hvbem Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "hvbem/hvbem.h"

#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "hvbem/assembly.hpp"
#include "hvbem/config.hpp"
#include "hvbem/error.hpp"
#include "hvbem/fixtures.hpp"
#include "hvbem/io.hpp"
#include "hvbem/parallel.hpp"
#include "hvbem/postprocess.hpp"
#include "hvbem/solver.hpp"

using namespace hvbem;

struct hvbem_config {
  Config config;
};
struct hvbem_mesh {
  std::shared_ptr<const SurfaceMesh> mesh;
};
struct hvbem_system {
  AssembledSystem system;
};
struct hvbem_solution {
  std::shared_ptr<const Solution> solution;
};
struct hvbem_surface_field {
  std::shared_ptr<const SurfaceMesh> mesh;
  std::shared_ptr<const Solution> solution;
  SurfaceField field;
};
struct hvbem_evaluator {
  std::shared_ptr<const SurfaceMesh> mesh;
  std::unique_ptr<FieldEvaluator> evaluator;
};
struct hvbem_gas {
  IonizationModel model;
};
struct hvbem_fieldline {
  FieldLine line;
};

namespace {

thread_local std::string g_last_error;

hvbem_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return HVBEM_ERR_INVALID_ARGUMENT;
    case ErrorCode::Io: return HVBEM_ERR_IO;
    case ErrorCode::Parse: return HVBEM_ERR_PARSE;
    case ErrorCode::Mesh: return HVBEM_ERR_MESH;
    case ErrorCode::Assembly: return HVBEM_ERR_ASSEMBLY;
    case ErrorCode::NoConvergence: return HVBEM_ERR_NO_CONVERGENCE;
    case ErrorCode::SingularEvaluation: return HVBEM_ERR_SINGULAR;
    case ErrorCode::WeakField: return HVBEM_ERR_WEAK_FIELD;
    case ErrorCode::Internal: return HVBEM_ERR_INTERNAL;
  }
  return HVBEM_ERR_INTERNAL;
}

hvbem_status fail(hvbem_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Runs body, translating exceptions into status codes.
template <class Body>
hvbem_status guarded(Body&& body) {
  try {
    body();
    g_last_error.clear();
    return HVBEM_OK;
  } catch (const Error& e) {
    return fail(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(HVBEM_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(HVBEM_ERR_INTERNAL, e.what());
  }
}

#define HVBEM_REQUIRE(cond)                                                                  \
  do {                                                                                       \
    if (!(cond)) return fail(HVBEM_ERR_INVALID_ARGUMENT, "invalid argument: " #cond);       \
  } while (0)

int resolve_workers(int workers) { return workers > 0 ? workers : default_workers(); }

}  // namespace

extern "C" {

const char* hvbem_version(void) { return "1.0.0"; }

const char* hvbem_last_error(void) { return g_last_error.c_str(); }

const char* hvbem_status_name(hvbem_status status) {
  switch (status) {
    case HVBEM_OK: return "ok";
    case HVBEM_ERR_INVALID_ARGUMENT: return "invalid argument";
    case HVBEM_ERR_IO: return "i/o error";
    case HVBEM_ERR_PARSE: return "parse error";
    case HVBEM_ERR_MESH: return "mesh error";
    case HVBEM_ERR_ASSEMBLY: return "assembly error";
    case HVBEM_ERR_NO_CONVERGENCE: return "no convergence";
    case HVBEM_ERR_SINGULAR: return "singular evaluation";
    case HVBEM_ERR_WEAK_FIELD: return "weak field";
    case HVBEM_ERR_INTERNAL: return "internal error";
  }
  return "unknown";
}

int hvbem_default_workers(void) { return default_workers(); }

hvbem_status hvbem_config_create(hvbem_config** out) {
  HVBEM_REQUIRE(out);
  return guarded([&] { *out = new hvbem_config{}; });
}

void hvbem_config_destroy(hvbem_config* config) { delete config; }

hvbem_status hvbem_config_load(hvbem_config* config, const char* path) {
  HVBEM_REQUIRE(config && path);
  return guarded([&] { config->config.load_file(path); });
}

hvbem_status hvbem_config_set(hvbem_config* config, const char* key, const char* value) {
  HVBEM_REQUIRE(config && key && value);
  return guarded([&] { config->config.set(key, value); });
}

hvbem_status hvbem_config_set_assignment(hvbem_config* config, const char* assignment) {
  HVBEM_REQUIRE(config && assignment);
  return guarded([&] { config->config.set_assignment(assignment); });
}

hvbem_status hvbem_config_get(const hvbem_config* config, const char* key, char* buf, size_t size,
                              size_t* needed) {
  HVBEM_REQUIRE(config && key);
  return guarded([&] {
    const std::string& value = config->config.get(key);
    if (needed) *needed = value.size() + 1;
    if (buf && size > 0) {
      const std::size_t n = std::min(size - 1, value.size());
      std::memcpy(buf, value.data(), n);
      buf[n] = '\0';
    }
  });
}

hvbem_status hvbem_config_write(const hvbem_config* config, const char* path) {
  HVBEM_REQUIRE(config && path);
  return guarded([&] { write_text_file(path, config->config.to_string()); });
}

hvbem_status hvbem_mesh_load(const char* path, hvbem_mesh** out) {
  HVBEM_REQUIRE(path && out);
  return guarded([&] { *out = new hvbem_mesh{std::make_shared<const SurfaceMesh>(load_mesh(path))}; });
}

hvbem_status hvbem_mesh_fixture(const char* name, int level, hvbem_mesh** out) {
  HVBEM_REQUIRE(name && out);
  return guarded(
      [&] { *out = new hvbem_mesh{std::make_shared<const SurfaceMesh>(fixtures::by_name(name, level))}; });
}

void hvbem_mesh_destroy(hvbem_mesh* mesh) { delete mesh; }

hvbem_status hvbem_mesh_write(const hvbem_mesh* mesh, const char* path) {
  HVBEM_REQUIRE(mesh && path);
  return guarded([&] { write_mesh(*mesh->mesh, path); });
}

hvbem_status hvbem_mesh_counts(const hvbem_mesh* mesh, size_t* vertices, size_t* triangles,
                               size_t* collocation, size_t* floating) {
  HVBEM_REQUIRE(mesh);
  if (vertices) *vertices = mesh->mesh->num_vertices();
  if (triangles) *triangles = mesh->mesh->num_triangles();
  if (collocation) *collocation = mesh->mesh->num_collocation();
  if (floating) *floating = mesh->mesh->num_floating();
  return HVBEM_OK;
}

hvbem_status hvbem_mesh_collocation_point(const hvbem_mesh* mesh, size_t index, double xyz[3]) {
  HVBEM_REQUIRE(mesh && xyz && index < mesh->mesh->num_collocation());
  const Vec3& p = mesh->mesh->collocation_point(index);
  xyz[0] = p.x;
  xyz[1] = p.y;
  xyz[2] = p.z;
  return HVBEM_OK;
}

hvbem_status hvbem_mesh_collocation_vertex(const hvbem_mesh* mesh, size_t index, int* vertex) {
  HVBEM_REQUIRE(mesh && vertex && index < mesh->mesh->num_collocation());
  *vertex = mesh->mesh->collocation_vertex(index);
  return HVBEM_OK;
}

hvbem_status hvbem_assemble(const hvbem_mesh* mesh, const hvbem_config* config, int blocks, int workers,
                            hvbem_system** out) {
  HVBEM_REQUIRE(mesh && config && out && blocks >= 1);
  return guarded([&] {
    AssembledSystem sys = assemble(*mesh->mesh, config->config.quad(), config->config.assembly(),
                                   static_cast<std::size_t>(blocks), resolve_workers(workers));
    *out = new hvbem_system{std::move(sys)};
  });
}

void hvbem_system_destroy(hvbem_system* system) { delete system; }

hvbem_status hvbem_system_dimension(const hvbem_system* system, size_t* dimension) {
  HVBEM_REQUIRE(system && dimension);
  *dimension = system->system.matrix.dimension();
  return HVBEM_OK;
}

hvbem_status hvbem_system_pair_counts(const hvbem_system* system, size_t counts[3]) {
  HVBEM_REQUIRE(system && counts);
  const PairCounts& p = system->system.stats.pairs;
  counts[0] = p.regular;
  counts[1] = p.singular;
  counts[2] = p.near_singular;
  return HVBEM_OK;
}

hvbem_status hvbem_system_write(const hvbem_system* system, const char* path) {
  HVBEM_REQUIRE(system && path);
  return guarded([&] { system->system.matrix.write_binary(path); });
}

hvbem_status hvbem_solve(const hvbem_system* system, const hvbem_config* config, int workers,
                         hvbem_solution** out) {
  HVBEM_REQUIRE(system && config && out);
  return guarded([&] {
    Solution s = solve(system->system.matrix, system->system.rhs, config->config.solver(),
                       resolve_workers(workers));
    *out = new hvbem_solution{std::make_shared<const Solution>(std::move(s))};
  });
}

void hvbem_solution_destroy(hvbem_solution* solution) { delete solution; }

hvbem_status hvbem_solution_read(const char* path, hvbem_solution** out) {
  HVBEM_REQUIRE(path && out);
  return guarded([&] { *out = new hvbem_solution{std::make_shared<const Solution>(read_solution(path))}; });
}

hvbem_status hvbem_solution_write(const hvbem_solution* solution, const char* path) {
  HVBEM_REQUIRE(solution && path);
  return guarded([&] { write_solution(*solution->solution, path); });
}

hvbem_status hvbem_solution_sizes(const hvbem_solution* solution, size_t* n, size_t* floating) {
  HVBEM_REQUIRE(solution);
  if (n) *n = solution->solution->u.size();
  if (floating) *floating = solution->solution->V.size();
  return HVBEM_OK;
}

hvbem_status hvbem_solution_density(const hvbem_solution* solution, double* u, size_t n) {
  HVBEM_REQUIRE(solution && u && n == solution->solution->u.size());
  std::copy(solution->solution->u.begin(), solution->solution->u.end(), u);
  return HVBEM_OK;
}

hvbem_status hvbem_solution_potentials(const hvbem_solution* solution, double* v, size_t n) {
  HVBEM_REQUIRE(solution && (v || n == 0) && n == solution->solution->V.size());
  std::copy(solution->solution->V.begin(), solution->solution->V.end(), v);
  return HVBEM_OK;
}

hvbem_status hvbem_solution_info(const hvbem_solution* solution, int* iterations, double* residual) {
  HVBEM_REQUIRE(solution);
  if (iterations) *iterations = solution->solution->iterations;
  if (residual) *residual = solution->solution->residual;
  return HVBEM_OK;
}

hvbem_status hvbem_surface_field_compute(const hvbem_mesh* mesh, const hvbem_solution* solution,
                                         const hvbem_config* config, int workers,
                                         hvbem_surface_field** out) {
  HVBEM_REQUIRE(mesh && solution && config && out);
  if (solution->solution->u.size() != mesh->mesh->num_collocation())
    return fail(HVBEM_ERR_INVALID_ARGUMENT, "solution size does not match the mesh");
  return guarded([&] {
    SurfaceField f = hvbem::surface_field(*mesh->mesh, solution->solution->u, config->config.quad(),
                                          resolve_workers(workers));
    *out = new hvbem_surface_field{mesh->mesh, solution->solution, std::move(f)};
  });
}

void hvbem_surface_field_destroy(hvbem_surface_field* field) { delete field; }

hvbem_status hvbem_surface_field_magnitudes(const hvbem_surface_field* field, double* out, size_t n) {
  HVBEM_REQUIRE(field && out && n == field->field.magnitude.size());
  std::copy(field->field.magnitude.begin(), field->field.magnitude.end(), out);
  return HVBEM_OK;
}

hvbem_status hvbem_surface_field_max(const hvbem_surface_field* field, double* max) {
  HVBEM_REQUIRE(field && max);
  double m = 0.0;
  for (double e : field->field.magnitude) m = std::max(m, e);
  *max = m;
  return HVBEM_OK;
}

hvbem_status hvbem_surface_field_top(const hvbem_surface_field* field, int k, int* indices, int* count) {
  HVBEM_REQUIRE(field && indices && count && k >= 0);
  return guarded([&] {
    const std::vector<int> top = top_field_points(field->field, k);
    std::copy(top.begin(), top.end(), indices);
    *count = static_cast<int>(top.size());
  });
}

hvbem_status hvbem_surface_field_write_csv(const hvbem_surface_field* field, const char* path) {
  HVBEM_REQUIRE(field && path);
  return guarded([&] { write_surface_field_csv(*field->mesh, *field->solution, field->field, path); });
}

hvbem_status hvbem_surface_field_write_vtk(const hvbem_surface_field* field, const char* path) {
  HVBEM_REQUIRE(field && path);
  return guarded([&] { write_surface_field_vtk(*field->mesh, *field->solution, field->field, path); });
}

hvbem_status hvbem_evaluator_create(const hvbem_mesh* mesh, const hvbem_solution* solution,
                                    const hvbem_config* config, hvbem_evaluator** out) {
  HVBEM_REQUIRE(mesh && solution && config && out);
  if (solution->solution->u.size() != mesh->mesh->num_collocation())
    return fail(HVBEM_ERR_INVALID_ARGUMENT, "solution size does not match the mesh");
  return guarded([&] {
    auto ev = std::make_unique<FieldEvaluator>(*mesh->mesh, solution->solution->u, config->config.quad());
    *out = new hvbem_evaluator{mesh->mesh, std::move(ev)};
  });
}

void hvbem_evaluator_destroy(hvbem_evaluator* evaluator) { delete evaluator; }

hvbem_status hvbem_eval_potential(const hvbem_evaluator* evaluator, const double x[3], double* phi) {
  HVBEM_REQUIRE(evaluator && x && phi);
  return guarded([&] { *phi = evaluator->evaluator->potential({x[0], x[1], x[2]}); });
}

hvbem_status hvbem_eval_efield(const hvbem_evaluator* evaluator, const double x[3], double e[3]) {
  HVBEM_REQUIRE(evaluator && x && e);
  return guarded([&] {
    const Vec3 v = evaluator->evaluator->efield({x[0], x[1], x[2]});
    e[0] = v.x;
    e[1] = v.y;
    e[2] = v.z;
  });
}

hvbem_status hvbem_gas_load(const char* path, hvbem_gas** out) {
  HVBEM_REQUIRE(path && out);
  return guarded([&] { *out = new hvbem_gas{IonizationModel::load(path)}; });
}

void hvbem_gas_destroy(hvbem_gas* gas) { delete gas; }

hvbem_status hvbem_gas_kstr(const hvbem_gas* gas, double* kstr) {
  HVBEM_REQUIRE(gas && kstr);
  *kstr = gas->model.k_str();
  return HVBEM_OK;
}

hvbem_status hvbem_trace(const hvbem_evaluator* evaluator, const hvbem_config* config,
                         double max_surface_field, const double start[3], int orientation,
                         hvbem_fieldline** out) {
  HVBEM_REQUIRE(evaluator && config && start && out && (orientation == 1 || orientation == -1));
  return guarded([&] {
    const TraceParams params = TraceParams::from(config->config.trace(), *evaluator->mesh, max_surface_field);
    FieldLine line = trace_fieldline(*evaluator->evaluator, {start[0], start[1], start[2]}, orientation, params);
    *out = new hvbem_fieldline{std::move(line)};
  });
}

hvbem_status hvbem_trace_from_surface(const hvbem_evaluator* evaluator, const hvbem_surface_field* field,
                                      const hvbem_config* config, size_t index, int orientation,
                                      hvbem_fieldline** out) {
  HVBEM_REQUIRE(evaluator && field && config && out && (orientation == 1 || orientation == -1));
  if (field->mesh != evaluator->mesh)
    return fail(HVBEM_ERR_INVALID_ARGUMENT, "surface field and evaluator belong to different meshes");
  return guarded([&] {
    double max_field = 0.0;
    for (double e : field->field.magnitude) max_field = std::max(max_field, e);
    const TraceParams params = TraceParams::from(config->config.trace(), *evaluator->mesh, max_field);
    FieldLine line = trace_from_surface(*evaluator->evaluator, field->field, index, orientation, params);
    *out = new hvbem_fieldline{std::move(line)};
  });
}

void hvbem_fieldline_destroy(hvbem_fieldline* line) { delete line; }

hvbem_status hvbem_fieldline_info(const hvbem_fieldline* line, size_t* points, double* length,
                                  const char** termination) {
  HVBEM_REQUIRE(line);
  if (points) *points = line->line.points.size();
  if (length) *length = line->line.length();
  if (termination) *termination = to_string(line->line.termination);
  return HVBEM_OK;
}

hvbem_status hvbem_fieldline_point(const hvbem_fieldline* line, size_t index, double xyz[3],
                                   double* e_magnitude, double* arc_length) {
  HVBEM_REQUIRE(line && index < line->line.points.size());
  const Vec3& p = line->line.points[index];
  if (xyz) {
    xyz[0] = p.x;
    xyz[1] = p.y;
    xyz[2] = p.z;
  }
  if (e_magnitude) *e_magnitude = line->line.e_magnitudes[index];
  if (arc_length) *arc_length = line->line.arc_lengths[index];
  return HVBEM_OK;
}

hvbem_status hvbem_streamer_integral(const hvbem_fieldline* line, const hvbem_gas* gas, double* value,
                                     int* inception) {
  HVBEM_REQUIRE(line && gas);
  return guarded([&] {
    const StreamerResult r = streamer_integral(line->line, gas->model);
    if (value) *value = r.value;
    if (inception) *inception = r.inception ? 1 : 0;
  });
}

hvbem_status hvbem_fieldline_write_csv(const hvbem_fieldline* line, const hvbem_gas* gas, const char* path) {
  HVBEM_REQUIRE(line && gas && path);
  return guarded([&] { write_fieldline_csv(line->line, gas->model, path); });
}

}  // extern "C"
