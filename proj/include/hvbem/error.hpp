/*
 * (C) Copyright 2026 The hvbem Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace hvbem {

enum class ErrorCode {
  InvalidArgument,
  Io,
  Parse,
  Mesh,
  Assembly,
  NoConvergence,
  SingularEvaluation,
  WeakField,
  Internal,
};

/// All library failures are reported as hvbem::Error; the C API maps the
/// code onto hvbem_status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by the Krylov solver; carries the best relative residual reached.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, double best_residual, int iterations)
      : Error(ErrorCode::NoConvergence, what), best_residual_(best_residual),
        iterations_(iterations) {}
  double best_residual() const noexcept { return best_residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double best_residual_;
  int iterations_;
};

}  // namespace hvbem
