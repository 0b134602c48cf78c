/*
 * (C) Copyright 2026 The hvbem Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
/* C interface of the hvbem shared library.
 *
 * Every object is an opaque handle released with its *_destroy function
 * (passing NULL is a no-op). Functions return HVBEM_OK or an error code; the
 * message of the most recent failure on the calling thread is available from
 * hvbem_last_error(). Handles that depend on a mesh or solution keep their own
 * reference, so the inputs may be destroyed first. */
#ifndef HVBEM_H
#define HVBEM_H

#include <stddef.h>

#if defined(_WIN32)
#define HVBEM_API __declspec(dllexport)
#else
#define HVBEM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hvbem_status {
  HVBEM_OK = 0,
  HVBEM_ERR_INVALID_ARGUMENT = 1,
  HVBEM_ERR_IO = 2,
  HVBEM_ERR_PARSE = 3,
  HVBEM_ERR_MESH = 4,
  HVBEM_ERR_ASSEMBLY = 5,
  HVBEM_ERR_NO_CONVERGENCE = 6,
  HVBEM_ERR_SINGULAR = 7,
  HVBEM_ERR_WEAK_FIELD = 8,
  HVBEM_ERR_INTERNAL = 9
} hvbem_status;

typedef struct hvbem_config hvbem_config;
typedef struct hvbem_mesh hvbem_mesh;
typedef struct hvbem_system hvbem_system;
typedef struct hvbem_solution hvbem_solution;
typedef struct hvbem_surface_field hvbem_surface_field;
typedef struct hvbem_evaluator hvbem_evaluator;
typedef struct hvbem_gas hvbem_gas;
typedef struct hvbem_fieldline hvbem_fieldline;

HVBEM_API const char* hvbem_version(void);
HVBEM_API const char* hvbem_last_error(void);
HVBEM_API const char* hvbem_status_name(hvbem_status status);
/* HVBEM_WORKERS if set, else the hardware thread count. */
HVBEM_API int hvbem_default_workers(void);

/* Configuration: `key = value` store pre-filled with defaults. */
HVBEM_API hvbem_status hvbem_config_create(hvbem_config** out);
HVBEM_API void hvbem_config_destroy(hvbem_config* config);
HVBEM_API hvbem_status hvbem_config_load(hvbem_config* config, const char* path);
HVBEM_API hvbem_status hvbem_config_set(hvbem_config* config, const char* key, const char* value);
/* Accepts "key=value". */
HVBEM_API hvbem_status hvbem_config_set_assignment(hvbem_config* config, const char* assignment);
/* Copies the value into buf (NUL-terminated); *needed receives the full length + 1. */
HVBEM_API hvbem_status hvbem_config_get(const hvbem_config* config, const char* key, char* buf,
                                        size_t size, size_t* needed);
HVBEM_API hvbem_status hvbem_config_write(const hvbem_config* config, const char* path);

/* Meshes. */
HVBEM_API hvbem_status hvbem_mesh_load(const char* path, hvbem_mesh** out);
/* name: sphere, concentric, floating-shell, dielectric. */
HVBEM_API hvbem_status hvbem_mesh_fixture(const char* name, int level, hvbem_mesh** out);
HVBEM_API void hvbem_mesh_destroy(hvbem_mesh* mesh);
HVBEM_API hvbem_status hvbem_mesh_write(const hvbem_mesh* mesh, const char* path);
HVBEM_API hvbem_status hvbem_mesh_counts(const hvbem_mesh* mesh, size_t* vertices, size_t* triangles,
                                         size_t* collocation, size_t* floating);
HVBEM_API hvbem_status hvbem_mesh_collocation_point(const hvbem_mesh* mesh, size_t index, double xyz[3]);
HVBEM_API hvbem_status hvbem_mesh_collocation_vertex(const hvbem_mesh* mesh, size_t index, int* vertex);

/* Assembly. blocks = number of row blocks, workers = threads. */
HVBEM_API hvbem_status hvbem_assemble(const hvbem_mesh* mesh, const hvbem_config* config, int blocks,
                                      int workers, hvbem_system** out);
HVBEM_API void hvbem_system_destroy(hvbem_system* system);
HVBEM_API hvbem_status hvbem_system_dimension(const hvbem_system* system, size_t* dimension);
/* regular, singular, near-singular pair counts of the assembly. */
HVBEM_API hvbem_status hvbem_system_pair_counts(const hvbem_system* system, size_t counts[3]);
/* Binary dump (header N, n, N_fl, precision, then row-major blocks). */
HVBEM_API hvbem_status hvbem_system_write(const hvbem_system* system, const char* path);

/* GMRES solve. On HVBEM_ERR_NO_CONVERGENCE the message carries the best residual. */
HVBEM_API hvbem_status hvbem_solve(const hvbem_system* system, const hvbem_config* config, int workers,
                                   hvbem_solution** out);
HVBEM_API void hvbem_solution_destroy(hvbem_solution* solution);
HVBEM_API hvbem_status hvbem_solution_read(const char* path, hvbem_solution** out);
HVBEM_API hvbem_status hvbem_solution_write(const hvbem_solution* solution, const char* path);
HVBEM_API hvbem_status hvbem_solution_sizes(const hvbem_solution* solution, size_t* n, size_t* floating);
HVBEM_API hvbem_status hvbem_solution_density(const hvbem_solution* solution, double* u, size_t n);
HVBEM_API hvbem_status hvbem_solution_potentials(const hvbem_solution* solution, double* v, size_t n);
HVBEM_API hvbem_status hvbem_solution_info(const hvbem_solution* solution, int* iterations, double* residual);

/* Surface potential and field at every collocation point. */
HVBEM_API hvbem_status hvbem_surface_field_compute(const hvbem_mesh* mesh,
                                                   const hvbem_solution* solution,
                                                   const hvbem_config* config, int workers,
                                                   hvbem_surface_field** out);
HVBEM_API void hvbem_surface_field_destroy(hvbem_surface_field* field);
HVBEM_API hvbem_status hvbem_surface_field_magnitudes(const hvbem_surface_field* field, double* out,
                                                      size_t n);
HVBEM_API hvbem_status hvbem_surface_field_max(const hvbem_surface_field* field, double* max);
/* Writes up to k collocation indices sorted by decreasing |E|; *count receives the number written. */
HVBEM_API hvbem_status hvbem_surface_field_top(const hvbem_surface_field* field, int k, int* indices,
                                               int* count);
HVBEM_API hvbem_status hvbem_surface_field_write_csv(const hvbem_surface_field* field, const char* path);
HVBEM_API hvbem_status hvbem_surface_field_write_vtk(const hvbem_surface_field* field, const char* path);

/* Point evaluation of potential and field. */
HVBEM_API hvbem_status hvbem_evaluator_create(const hvbem_mesh* mesh, const hvbem_solution* solution,
                                              const hvbem_config* config, hvbem_evaluator** out);
HVBEM_API void hvbem_evaluator_destroy(hvbem_evaluator* evaluator);
HVBEM_API hvbem_status hvbem_eval_potential(const hvbem_evaluator* evaluator, const double x[3], double* phi);
HVBEM_API hvbem_status hvbem_eval_efield(const hvbem_evaluator* evaluator, const double x[3], double e[3]);

/* Ionization model: lines "<E V/m> <alpha 1/m>" and "kstr <value>". */
HVBEM_API hvbem_status hvbem_gas_load(const char* path, hvbem_gas** out);
HVBEM_API void hvbem_gas_destroy(hvbem_gas* gas);
HVBEM_API hvbem_status hvbem_gas_kstr(const hvbem_gas* gas, double* kstr);

/* Field line from start along orientation * E (orientation = +1 or -1).
 * max_surface_field scales the relative weak-field floor. Returns
 * HVBEM_ERR_WEAK_FIELD when |E(start)| is below the floor. */
HVBEM_API hvbem_status hvbem_trace(const hvbem_evaluator* evaluator, const hvbem_config* config,
                                   double max_surface_field, const double start[3], int orientation,
                                   hvbem_fieldline** out);
/* Field line leaving the surface at collocation point `index` (e.g. one of
 * hvbem_surface_field_top); the surface point is the first sample. */
HVBEM_API hvbem_status hvbem_trace_from_surface(const hvbem_evaluator* evaluator,
                                                const hvbem_surface_field* field,
                                                const hvbem_config* config, size_t index,
                                                int orientation, hvbem_fieldline** out);
HVBEM_API void hvbem_fieldline_destroy(hvbem_fieldline* line);
HVBEM_API hvbem_status hvbem_fieldline_info(const hvbem_fieldline* line, size_t* points, double* length,
                                            const char** termination);
HVBEM_API hvbem_status hvbem_fieldline_point(const hvbem_fieldline* line, size_t index, double xyz[3],
                                             double* e_magnitude, double* arc_length);
HVBEM_API hvbem_status hvbem_streamer_integral(const hvbem_fieldline* line, const hvbem_gas* gas,
                                               double* value, int* inception);
HVBEM_API hvbem_status hvbem_fieldline_write_csv(const hvbem_fieldline* line, const hvbem_gas* gas,
                                                 const char* path);

#ifdef __cplusplus
}
#endif

#endif /* HVBEM_H */
