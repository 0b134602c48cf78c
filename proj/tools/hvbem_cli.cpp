/*
 * (C) Copyright 2026 The hvbem Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
// Command-line front end. Uses only the C interface of libhvbem.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hvbem/hvbem.h"

namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kInput = 1, kAssembly = 2, kNoConvergence = 3, kWeakField = 4, kOther = 5 };

// Thrown to unwind with a specific exit code after the message was printed.
struct Abort {
  int code;
};

int exit_code(hvbem_status s) {
  switch (s) {
    case HVBEM_OK: return kOk;
    case HVBEM_ERR_INVALID_ARGUMENT:
    case HVBEM_ERR_IO:
    case HVBEM_ERR_PARSE:
    case HVBEM_ERR_MESH: return kInput;
    case HVBEM_ERR_ASSEMBLY: return kAssembly;
    case HVBEM_ERR_NO_CONVERGENCE: return kNoConvergence;
    case HVBEM_ERR_WEAK_FIELD: return kWeakField;
    default: return kOther;
  }
}

void check(hvbem_status s, const char* what) {
  if (s == HVBEM_OK) return;
  std::fprintf(stderr, "hvbem: %s: %s (%s)\n", what, hvbem_last_error(), hvbem_status_name(s));
  throw Abort{exit_code(s)};
}

template <class T, void (*Destroy)(T*)>
struct Deleter {
  void operator()(T* p) const { Destroy(p); }
};
using Config = std::unique_ptr<hvbem_config, Deleter<hvbem_config, hvbem_config_destroy>>;
using Mesh = std::unique_ptr<hvbem_mesh, Deleter<hvbem_mesh, hvbem_mesh_destroy>>;
using System = std::unique_ptr<hvbem_system, Deleter<hvbem_system, hvbem_system_destroy>>;
using Solution = std::unique_ptr<hvbem_solution, Deleter<hvbem_solution, hvbem_solution_destroy>>;
using Field = std::unique_ptr<hvbem_surface_field, Deleter<hvbem_surface_field, hvbem_surface_field_destroy>>;
using Evaluator = std::unique_ptr<hvbem_evaluator, Deleter<hvbem_evaluator, hvbem_evaluator_destroy>>;
using Gas = std::unique_ptr<hvbem_gas, Deleter<hvbem_gas, hvbem_gas_destroy>>;
using Line = std::unique_ptr<hvbem_fieldline, Deleter<hvbem_fieldline, hvbem_fieldline_destroy>>;

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

Config make_config(const std::string& path, const std::vector<std::string>& overrides) {
  hvbem_config* raw = nullptr;
  check(hvbem_config_create(&raw), "config");
  Config config(raw);
  if (!path.empty()) check(hvbem_config_load(config.get(), path.c_str()), "config");
  for (const std::string& a : overrides) check(hvbem_config_set_assignment(config.get(), a.c_str()), "--set");
  return config;
}

Mesh load_or_generate(const std::string& path, const std::string& fixture, int level) {
  hvbem_mesh* raw = nullptr;
  if (!path.empty())
    check(hvbem_mesh_load(path.c_str(), &raw), "mesh");
  else
    check(hvbem_mesh_fixture(fixture.c_str(), level, &raw), "fixture");
  return Mesh(raw);
}

void make_directory(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    std::fprintf(stderr, "hvbem: cannot create %s: %s\n", dir.c_str(), ec.message().c_str());
    throw Abort{kInput};
  }
}

std::string join(const std::string& dir, const char* name) { return (fs::path(dir) / name).string(); }

// ---------------------------------------------------------------- solve

struct SolveArgs {
  std::string mesh, fixture = "sphere", config, out = "case";
  int level = 3;
  int workers = 0;
  int blocks = 1;
  std::string precision;
  std::vector<std::string> set;
  bool dump_matrix = false;
  bool verbose = false;
};

int cmd_solve(const SolveArgs& a) {
  Stopwatch clock;
  std::vector<std::string> overrides = a.set;
  if (!a.precision.empty()) overrides.push_back("assembly.precision=" + a.precision);
  if (a.verbose) overrides.push_back("solver.verbose=true");
  Config config = make_config(a.config, overrides);
  Mesh mesh = load_or_generate(a.mesh, a.fixture, a.level);
  const int workers = a.workers > 0 ? a.workers : hvbem_default_workers();
  std::size_t n = 0, nfl = 0, nt = 0;
  hvbem_mesh_counts(mesh.get(), nullptr, &nt, &n, &nfl);
  const double t_load = clock.lap();

  make_directory(a.out);
  check(hvbem_mesh_write(mesh.get(), join(a.out, "mesh.bemesh").c_str()), "write mesh");
  check(hvbem_config_write(config.get(), join(a.out, "config.cfg").c_str()), "write config");

  hvbem_system* sys_raw = nullptr;
  clock.lap();
  check(hvbem_assemble(mesh.get(), config.get(), a.blocks, workers, &sys_raw), "assembly");
  System system(sys_raw);
  const double t_assembly = clock.lap();
  if (a.dump_matrix) check(hvbem_system_write(system.get(), join(a.out, "matrix.bin").c_str()), "dump");

  clock.lap();
  hvbem_solution* sol_raw = nullptr;
  check(hvbem_solve(system.get(), config.get(), workers, &sol_raw), "solve");
  Solution solution(sol_raw);
  const double t_solve = clock.lap();
  system.reset();
  check(hvbem_solution_write(solution.get(), join(a.out, "solution.txt").c_str()), "write solution");

  clock.lap();
  hvbem_surface_field* field_raw = nullptr;
  check(hvbem_surface_field_compute(mesh.get(), solution.get(), config.get(), workers, &field_raw),
        "surface field");
  Field field(field_raw);
  const double t_field = clock.lap();
  check(hvbem_surface_field_write_csv(field.get(), join(a.out, "surface_field.csv").c_str()), "write csv");
  check(hvbem_surface_field_write_vtk(field.get(), join(a.out, "surface_field.vtk").c_str()), "write vtk");

  int iterations = 0;
  double residual = 0.0, emax = 0.0;
  hvbem_solution_info(solution.get(), &iterations, &residual);
  hvbem_surface_field_max(field.get(), &emax);
  std::vector<double> V(nfl);
  hvbem_solution_potentials(solution.get(), V.data(), nfl);

  std::ostringstream timing;
  timing << "phase seconds\n";
  timing << "load " << t_load << "\n";
  timing << "assembly " << t_assembly << "\n";
  timing << "solve " << t_solve << "\n";
  timing << "surface_field " << t_field << "\n";
  timing << "workers " << workers << "\nblocks " << a.blocks << "\n";
  std::ofstream(join(a.out, "timing.txt")) << timing.str();

  std::printf("collocation points %zu, triangles %zu, floating %zu\n", n, nt, nfl);
  std::printf("gmres iterations %d, relative residual %.3e\n", iterations, residual);
  for (std::size_t k = 0; k < nfl; ++k) std::printf("V[%zu] = %.10g V\n", k, V[k]);
  std::printf("max surface |E| = %.6g V/m\n", emax);
  std::printf("time: assembly %.3f s, solve %.3f s, surface field %.3f s\n", t_assembly, t_solve, t_field);
  std::printf("written to %s\n", a.out.c_str());
  return kOk;
}

// ---------------------------------------------------------------- trace

struct TraceArgs {
  std::string case_dir, gas, starts, out;
  int top_k = -1;
  int orientation = 1;
  int workers = 0;
  std::vector<std::string> set;
};

struct Start {
  double x[3];
  int orientation;
};

std::vector<Start> read_starts(const std::string& path, int default_orientation) {
  std::ifstream in(path);
  if (!in) {
    std::fprintf(stderr, "hvbem: cannot open %s\n", path.c_str());
    throw Abort{kInput};
  }
  std::vector<Start> starts;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    Start s{{0, 0, 0}, default_orientation};
    if (!(ls >> s.x[0])) continue;
    std::string rest;
    if (!(ls >> s.x[1] >> s.x[2])) {
      std::fprintf(stderr, "hvbem: %s:%d: expected 'x y z [orientation]'\n", path.c_str(), lineno);
      throw Abort{kInput};
    }
    if (ls >> s.orientation && s.orientation != 1 && s.orientation != -1) {
      std::fprintf(stderr, "hvbem: %s:%d: orientation must be 1 or -1\n", path.c_str(), lineno);
      throw Abort{kInput};
    }
    starts.push_back(s);
  }
  return starts;
}

int cmd_trace(const TraceArgs& a) {
  Config config = make_config(join(a.case_dir, "config.cfg"), a.set);
  Mesh mesh = load_or_generate(join(a.case_dir, "mesh.bemesh"), "", 0);
  hvbem_solution* sol_raw = nullptr;
  check(hvbem_solution_read(join(a.case_dir, "solution.txt").c_str(), &sol_raw), "solution");
  Solution solution(sol_raw);
  hvbem_gas* gas_raw = nullptr;
  check(hvbem_gas_load(a.gas.c_str(), &gas_raw), "gas");
  Gas gas(gas_raw);
  const int workers = a.workers > 0 ? a.workers : hvbem_default_workers();

  hvbem_surface_field* field_raw = nullptr;
  check(hvbem_surface_field_compute(mesh.get(), solution.get(), config.get(), workers, &field_raw),
        "surface field");
  Field field(field_raw);
  double emax = 0.0;
  hvbem_surface_field_max(field.get(), &emax);
  hvbem_evaluator* ev_raw = nullptr;
  check(hvbem_evaluator_create(mesh.get(), solution.get(), config.get(), &ev_raw), "evaluator");
  Evaluator evaluator(ev_raw);

  const std::string out = a.out.empty() ? join(a.case_dir, "trace") : a.out;
  make_directory(out);

  std::vector<Line> lines;
  std::vector<std::string> labels;
  int weak = 0, attempted = 0;
  auto keep = [&](hvbem_status s, hvbem_fieldline* raw, const std::string& label) {
    ++attempted;
    if (s == HVBEM_ERR_WEAK_FIELD) {
      std::fprintf(stderr, "hvbem: %s: %s, skipped\n", label.c_str(), hvbem_last_error());
      ++weak;
      return;
    }
    check(s, "trace");
    lines.emplace_back(raw);
    labels.push_back(label);
  };

  if (!a.starts.empty()) {
    for (const Start& s : read_starts(a.starts, a.orientation)) {
      hvbem_fieldline* raw = nullptr;
      char label[160];
      std::snprintf(label, sizeof label, "start (%g %g %g)", s.x[0], s.x[1], s.x[2]);
      const hvbem_status st = hvbem_trace(evaluator.get(), config.get(), emax, s.x, s.orientation, &raw);
      keep(st, raw, label);
    }
  } else {
    int k = a.top_k;
    if (k < 0) {
      char buf[32];
      check(hvbem_config_get(config.get(), "trace.top_k", buf, sizeof buf, nullptr), "config");
      k = std::atoi(buf);
    }
    std::vector<int> top(static_cast<std::size_t>(std::max(k, 0)));
    int count = 0;
    check(hvbem_surface_field_top(field.get(), k, top.data(), &count), "top-k");
    for (int i = 0; i < count; ++i) {
      int vertex = 0;
      hvbem_mesh_collocation_vertex(mesh.get(), top[i], &vertex);
      hvbem_fieldline* raw = nullptr;
      const hvbem_status st =
          hvbem_trace_from_surface(evaluator.get(), field.get(), config.get(), top[i], a.orientation, &raw);
      keep(st, raw, "vertex " + std::to_string(vertex));
    }
  }
  if (attempted > 0 && weak == attempted) {
    std::fprintf(stderr, "hvbem: every start point is below the weak-field floor\n");
    return kWeakField;
  }

  std::ofstream summary(join(out, "trace_summary.csv"));
  summary << "line,start,x0,y0,z0,points,length,termination,integral,inception\n";
  std::printf("%-5s %-22s %8s %10s %-11s %12s %s\n", "line", "start", "points", "length", "termination",
              "integral", "inception");
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::size_t points = 0;
    double length = 0.0, value = 0.0, x0[3];
    const char* termination = nullptr;
    int inception = 0;
    hvbem_fieldline_info(lines[i].get(), &points, &length, &termination);
    hvbem_fieldline_point(lines[i].get(), 0, x0, nullptr, nullptr);
    check(hvbem_streamer_integral(lines[i].get(), gas.get(), &value, &inception), "streamer integral");
    const std::string file = "line_" + std::to_string(i) + ".csv";
    check(hvbem_fieldline_write_csv(lines[i].get(), gas.get(), join(out, file.c_str()).c_str()), "write line");
    char row[512];
    std::snprintf(row, sizeof row, "%zu,%s,%.10g,%.10g,%.10g,%zu,%.10g,%s,%.10g,%s\n", i, labels[i].c_str(), x0[0],
                  x0[1], x0[2], points, length, termination, value, inception ? "true" : "false");
    summary << row;
    std::printf("%-5zu %-22s %8zu %10.5g %-11s %12.6g %s\n", i, labels[i].c_str(), points, length, termination,
                value, inception ? "yes" : "no");
  }
  std::printf("written to %s\n", out.c_str());
  return kOk;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
  std::string fixture = "sphere";
  std::vector<int> levels{3, 4, 5};
  int workers = 0;
  int blocks = 1;
  std::string config, out;
  std::vector<std::string> set;
  bool speedup = true;
};

// Least-squares slope of log(t) against log(N).
double fit_exponent(const std::vector<double>& n, const std::vector<double>& t) {
  const std::size_t m = n.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double x = std::log(n[i]), y = std::log(t[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

double time_assembly(hvbem_mesh* mesh, hvbem_config* config, int blocks, int workers) {
  Stopwatch clock;
  hvbem_system* raw = nullptr;
  check(hvbem_assemble(mesh, config, blocks, workers, &raw), "assembly");
  const double t = clock.lap();
  hvbem_system_destroy(raw);
  return t;
}

int cmd_bench(const BenchArgs& a) {
  Config config = make_config(a.config, a.set);
  const int workers = a.workers > 0 ? a.workers : hvbem_default_workers();
  std::vector<double> ns, t_asm, t_total;
  std::ostringstream csv;
  csv << "level,N,assembly_s,solve_s,iterations\n";
  std::printf("%-6s %8s %12s %10s %6s\n", "level", "N", "assembly_s", "solve_s", "iters");
  Mesh largest;
  for (int level : a.levels) {
    Mesh mesh = load_or_generate("", a.fixture, level);
    Stopwatch clock;
    hvbem_system* sys_raw = nullptr;
    check(hvbem_assemble(mesh.get(), config.get(), a.blocks, workers, &sys_raw), "assembly");
    System system(sys_raw);
    const double ta = clock.lap();
    hvbem_solution* sol_raw = nullptr;
    check(hvbem_solve(system.get(), config.get(), workers, &sol_raw), "solve");
    Solution solution(sol_raw);
    const double ts = clock.lap();
    std::size_t dim = 0;
    int iterations = 0;
    hvbem_system_dimension(system.get(), &dim);
    hvbem_solution_info(solution.get(), &iterations, nullptr);
    ns.push_back(static_cast<double>(dim));
    t_asm.push_back(ta);
    t_total.push_back(ta + ts);
    std::printf("%-6d %8zu %12.4f %10.4f %6d\n", level, dim, ta, ts, iterations);
    csv << level << "," << dim << "," << ta << "," << ts << "," << iterations << "\n";
    largest = std::move(mesh);
  }
  if (ns.size() >= 2) {
    std::printf("assembly exponent %.3f\n", fit_exponent(ns, t_asm));
    std::printf("assembly+solve exponent %.3f\n", fit_exponent(ns, t_total));
  } else {
    std::printf("assembly exponent n/a\nassembly+solve exponent n/a\n");
  }
  if (a.speedup && largest) {
    const double t1 = time_assembly(largest.get(), config.get(), a.blocks, 1);
    const double tw = workers > 1 ? time_assembly(largest.get(), config.get(), a.blocks, workers) : t1;
    std::printf("speedup 1 -> %d workers on N=%.0f: %.2fx (%.3f s -> %.3f s)\n", workers, ns.back(), t1 / tw, t1,
                tw);
    csv << "# speedup," << workers << "," << t1 / tw << "\n";
  }
  if (!a.out.empty()) std::ofstream(a.out) << csv.str();
  return kOk;
}

// ---------------------------------------------------------------- gen

int cmd_gen(const std::string& fixture, int level, const std::string& out) {
  Mesh mesh = load_or_generate("", fixture, level);
  check(hvbem_mesh_write(mesh.get(), out.c_str()), "write mesh");
  std::size_t n = 0, nt = 0;
  hvbem_mesh_counts(mesh.get(), nullptr, &nt, &n, nullptr);
  std::printf("%s level %d: %zu collocation points, %zu triangles -> %s\n", fixture.c_str(), level, n, nt,
              out.c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hvbem: boundary-element electrostatics solver"};
  app.require_subcommand(1);
  const std::vector<std::string> fixture_names{"sphere", "concentric", "floating-shell", "dielectric"};

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "assemble and solve a case, write solution and surface field");
  auto* mesh_opt = s->add_option("--mesh", solve.mesh, "mesh file (bemesh format)")->check(CLI::ExistingFile);
  s->add_option("--fixture", solve.fixture, "built-in fixture when --mesh is absent")
      ->check(CLI::IsMember(fixture_names))
      ->excludes(mesh_opt);
  s->add_option("--level", solve.level, "fixture refinement level")->check(CLI::Range(0, 8));
  s->add_option("--config", solve.config, "config file (key = value)")->check(CLI::ExistingFile);
  s->add_option("--out", solve.out, "output directory")->capture_default_str();
  s->add_option("--workers", solve.workers, "worker threads (default: HVBEM_WORKERS or hardware)")
      ->check(CLI::PositiveNumber);
  s->add_option("--blocks", solve.blocks, "row blocks of the system matrix")->check(CLI::PositiveNumber);
  s->add_option("--precision", solve.precision, "matrix storage precision")
      ->check(CLI::IsMember({"double", "single"}));
  s->add_option("--set", solve.set, "config override key=value (repeatable)");
  s->add_flag("--dump-matrix", solve.dump_matrix, "write matrix.bin");
  s->add_flag("--verbose", solve.verbose, "log GMRES residuals to stderr");

  TraceArgs trace;
  auto* t = app.add_subcommand("trace", "trace field lines of a solved case and evaluate the streamer criterion");
  t->add_option("--case", trace.case_dir, "directory written by solve")->required()->check(CLI::ExistingDirectory);
  t->add_option("--gas", trace.gas, "ionization model file")->required()->check(CLI::ExistingFile);
  auto* topk = t->add_option("--top-k", trace.top_k, "start at the k surface points of largest |E|");
  t->add_option("--starts", trace.starts, "file of start points 'x y z [orientation]'")
      ->check(CLI::ExistingFile)
      ->excludes(topk);
  t->add_option("--orientation", trace.orientation, "+1 follows E, -1 runs against it")
      ->check(CLI::IsMember({1, -1}));
  t->add_option("--out", trace.out, "output directory (default CASE/trace)");
  t->add_option("--workers", trace.workers, "worker threads")->check(CLI::PositiveNumber);
  t->add_option("--set", trace.set, "config override key=value (repeatable)");

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "time assembly and solve over a fixture refinement ladder");
  b->add_option("--fixture", bench.fixture, "fixture name")->check(CLI::IsMember(fixture_names));
  b->add_option("--levels", bench.levels, "refinement levels")->delimiter(',')->check(CLI::Range(0, 8));
  b->add_option("--workers", bench.workers, "max worker threads")->check(CLI::PositiveNumber);
  b->add_option("--blocks", bench.blocks, "row blocks")->check(CLI::PositiveNumber);
  b->add_option("--config", bench.config, "config file")->check(CLI::ExistingFile);
  b->add_option("--set", bench.set, "config override key=value (repeatable)");
  b->add_option("--out", bench.out, "CSV of the measurements");
  b->add_flag("!--no-speedup", bench.speedup, "skip the 1-vs-max worker comparison");

  std::string gen_fixture = "sphere", gen_out;
  int gen_level = 3;
  auto* g = app.add_subcommand("gen", "write a built-in fixture mesh");
  g->add_option("--fixture", gen_fixture, "fixture name")->check(CLI::IsMember(fixture_names));
  g->add_option("--level", gen_level, "refinement level")->check(CLI::Range(0, 8));
  g->add_option("--out", gen_out, "output mesh file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInput;
  }

  try {
    if (s->parsed()) return cmd_solve(solve);
    if (t->parsed()) return cmd_trace(trace);
    if (b->parsed()) return cmd_bench(bench);
    if (g->parsed()) return cmd_gen(gen_fixture, gen_level, gen_out);
  } catch (const Abort& a) {
    return a.code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "hvbem: %s\n", e.what());
    return kOther;
  }
  return kOk;
}
