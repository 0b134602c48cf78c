/*
 * (C) Copyright 2026 The hvbem Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "hvbem/config.hpp"

#include <charconv>
#include <sstream>

#include "hvbem/error.hpp"
#include "hvbem/io.hpp"

namespace hvbem {

namespace {

const std::map<std::string, std::string>& defaults() {
  static const std::map<std::string, std::string> table = {
      {"quad.regular_order", "6"},
      {"quad.duffy_points", "6"},
      {"quad.near_duffy_points", "8"},
      {"quad.eta", "1.2"},
      {"quad.bisect_depth", "3"},
      {"quad.bisect_trigger", "0.3"},
      {"assembly.precision", "double"},
      {"assembly.equilibrate", "true"},
      {"solver.restart", "100"},
      {"solver.rel_tol", "1e-8"},
      {"solver.max_iters", "2000"},
      {"solver.verbose", "false"},
      {"trace.rel_tol", "1e-6"},
      {"trace.h_min_rel", "1e-6"},
      {"trace.h_max_rel", "0.05"},
      {"trace.surface_tol_rel", "0.1"},
      {"trace.max_length_rel", "2.0"},
      {"trace.e_floor", "0"},
      {"trace.e_floor_rel", "1e-2"},
      {"trace.field_change", "0.02"},
      {"trace.max_steps", "100000"},
      {"trace.top_k", "4"},
  };
  return table;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* what) {
  throw Error(ErrorCode::InvalidArgument,
              "config key '" + key + "': invalid value '" + value + "' (" + what + ")");
}

}  // namespace

Config::Config() : values_(defaults()) {}

bool Config::is_known_key(const std::string& key) { return defaults().count(key) != 0; }

void Config::set(const std::string& key, const std::string& value) {
  if (!is_known_key(key)) throw Error(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
  values_[key] = trim(value);
}

void Config::set_assignment(const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw Error(ErrorCode::InvalidArgument, "expected key=value, got '" + assignment + "'");
  set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

void Config::parse(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    try {
      set_assignment(line);
    } catch (const Error& e) {
      throw Error(ErrorCode::Parse, origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void Config::load_file(const std::string& path) { parse(read_text_file(path), path); }

const std::string& Config::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw Error(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
  return it->second;
}

std::string Config::to_string() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

double Config::get_double(const std::string& key) const {
  const std::string& v = get(key);
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size()) bad_value(key, v, "not a number");
    return d;
  } catch (const std::logic_error&) {
    bad_value(key, v, "not a number");
  }
}

int Config::get_int(const std::string& key) const {
  const std::string& v = get(key);
  int out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v, "not an integer");
  return out;
}

bool Config::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v, "not a boolean");
}

QuadConfig Config::quad() const {
  QuadConfig q;
  q.regular_order = get_int("quad.regular_order");
  q.duffy_points = get_int("quad.duffy_points");
  q.near_duffy_points = get_int("quad.near_duffy_points");
  q.eta = get_double("quad.eta");
  q.bisect_depth = get_int("quad.bisect_depth");
  q.bisect_trigger = get_double("quad.bisect_trigger");
  if (q.regular_order != 2 && q.regular_order != 4 && q.regular_order != 6 && q.regular_order != 8)
    bad_value("quad.regular_order", get("quad.regular_order"), "expected 2, 4, 6 or 8");
  if (q.duffy_points < 2) bad_value("quad.duffy_points", get("quad.duffy_points"), ">= 2");
  if (q.near_duffy_points < 2)
    bad_value("quad.near_duffy_points", get("quad.near_duffy_points"), ">= 2");
  if (!(q.eta > 0.0)) bad_value("quad.eta", get("quad.eta"), "> 0");
  if (q.bisect_depth < 0 || q.bisect_depth > 40)
    bad_value("quad.bisect_depth", get("quad.bisect_depth"), "0..40");
  if (!(q.bisect_trigger >= 0.0)) bad_value("quad.bisect_trigger", get("quad.bisect_trigger"), ">= 0");
  return q;
}

AssemblyConfig Config::assembly() const {
  AssemblyConfig a;
  const std::string& p = get("assembly.precision");
  if (p == "double") a.precision = Precision::Double;
  else if (p == "single") a.precision = Precision::Single;
  else bad_value("assembly.precision", p, "expected double or single");
  a.equilibrate = get_bool("assembly.equilibrate");
  return a;
}

SolverConfig Config::solver() const {
  SolverConfig s;
  s.restart = get_int("solver.restart");
  s.rel_tol = get_double("solver.rel_tol");
  s.max_iters = get_int("solver.max_iters");
  s.verbose = get_bool("solver.verbose");
  if (s.restart < 1) bad_value("solver.restart", get("solver.restart"), ">= 1");
  if (!(s.rel_tol > 0.0 && s.rel_tol < 1.0)) bad_value("solver.rel_tol", get("solver.rel_tol"), "in (0, 1)");
  if (s.max_iters < 1) bad_value("solver.max_iters", get("solver.max_iters"), ">= 1");
  return s;
}

TraceConfig Config::trace() const {
  TraceConfig t;
  t.rel_tol = get_double("trace.rel_tol");
  t.h_min_rel = get_double("trace.h_min_rel");
  t.h_max_rel = get_double("trace.h_max_rel");
  t.surface_tol_rel = get_double("trace.surface_tol_rel");
  t.max_length_rel = get_double("trace.max_length_rel");
  t.e_floor = get_double("trace.e_floor");
  t.e_floor_rel = get_double("trace.e_floor_rel");
  t.field_change = get_double("trace.field_change");
  t.max_steps = get_int("trace.max_steps");
  t.top_k = get_int("trace.top_k");
  if (!(t.rel_tol > 0.0)) bad_value("trace.rel_tol", get("trace.rel_tol"), "> 0");
  if (!(t.h_min_rel > 0.0 && t.h_min_rel <= t.h_max_rel))
    bad_value("trace.h_min_rel", get("trace.h_min_rel"), "0 < h_min_rel <= h_max_rel");
  if (!(t.field_change > 0.0)) bad_value("trace.field_change", get("trace.field_change"), "> 0");
  if (t.top_k < 1) bad_value("trace.top_k", get("trace.top_k"), ">= 1");
  return t;
}

}  // namespace hvbem
