/*
 * (C) Copyright 2026 The hvbem Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

#include <map>
#include <string>

namespace hvbem {

struct QuadConfig {
  int regular_order = 6;      // symmetric Gauss rule degree for regular pairs
  int duffy_points = 6;       // 1D points per direction, singular pairs
  int near_duffy_points = 8;  // 1D points per direction, near-singular pairs
  double eta = 1.2;           // regular iff |x - circumcenter| > eta * circumradius
  int bisect_depth = 3;
  double bisect_trigger = 0.3;  // grading kicks in below this fraction of R
};

enum class Precision { Double, Single };

struct AssemblyConfig {
  Precision precision = Precision::Double;
  // Scale permittivity-bearing rows to unit diagonal magnitude.
  bool equilibrate = true;
};

struct SolverConfig {
  int restart = 100;
  double rel_tol = 1e-8;
  int max_iters = 2000;
  bool verbose = false;
};

/// Field-line tracer parameters. Lengths ending in _rel are fractions of the
/// mesh bounding-box diagonal (surface_tol_rel is a fraction of the local
/// circumradius).
struct TraceConfig {
  double rel_tol = 1e-6;
  double h_min_rel = 1e-6;
  double h_max_rel = 0.05;
  double surface_tol_rel = 0.1;
  double max_length_rel = 2.0;
  double e_floor = 0.0;        // absolute floor in V/m; 0 selects e_floor_rel
  double e_floor_rel = 1e-2;   // fraction of the largest surface |E|
  double field_change = 0.02;  // max relative |E| change per accepted step
  int max_steps = 100000;
  int top_k = 4;
};

/// Flat `key = value` settings store shared by every module. Unknown keys are
/// rejected so typos surface at load time.
class Config {
 public:
  Config();

  void set(const std::string& key, const std::string& value);
  /// Accepts `key=value`.
  void set_assignment(const std::string& assignment);
  void load_file(const std::string& path);
  void parse(const std::string& text, const std::string& origin = "<string>");

  const std::string& get(const std::string& key) const;
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  /// Serialized in the same format load_file accepts.
  std::string to_string() const;

  QuadConfig quad() const;
  AssemblyConfig assembly() const;
  SolverConfig solver() const;
  TraceConfig trace() const;

  static bool is_known_key(const std::string& key);

 private:
  double get_double(const std::string& key) const;
  int get_int(const std::string& key) const;
  bool get_bool(const std::string& key) const;

  std::map<std::string, std::string> values_;
};

}  // namespace hvbem
