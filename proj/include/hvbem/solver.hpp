/*
 * (C) Copyright 2026 The hvbem Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

#include <functional>
#include <span>
#include <vector>

#include "hvbem/assembly.hpp"
#include "hvbem/config.hpp"

namespace hvbem {

/// Square operator seen by GMRES.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  virtual std::size_t size() const = 0;
  virtual void apply(std::span<const double> x, std::span<double> y) const = 0;
  virtual std::vector<double> diagonal() const = 0;
};

/// Row-major dense operator, mostly for small systems and tests.
class DenseOperator : public LinearOperator {
 public:
  DenseOperator(std::size_t n, std::vector<double> values);
  std::size_t size() const override { return n_; }
  void apply(std::span<const double> x, std::span<double> y) const override;
  std::vector<double> diagonal() const override;

 private:
  std::size_t n_;
  std::vector<double> values_;
};

class MatrixOperator : public LinearOperator {
 public:
  MatrixOperator(const SystemMatrix& matrix, int workers) : matrix_(matrix), workers_(workers) {}
  std::size_t size() const override { return matrix_.dimension(); }
  void apply(std::span<const double> x, std::span<double> y) const override {
    matrix_.matvec(x, y, workers_);
  }
  std::vector<double> diagonal() const override { return matrix_.diagonal(); }

 private:
  const SystemMatrix& matrix_;
  int workers_;
};

struct GmresResult {
  std::vector<double> x;
  int iterations = 0;
  double residual = 0.0;  // true relative residual of x
  bool converged = false;
  std::vector<double> history;  // estimated relative residual per iteration
};

/// Restarted GMRES, right-preconditioned by the diagonal (entries below 1e-30
/// in magnitude are replaced by 1). Modified Gram-Schmidt with a second pass
/// when the new basis vector lost more than ~30% of its norm.
GmresResult gmres(const LinearOperator& op, std::span<const double> rhs,
                  const SolverConfig& config, bool precondition = true);

struct Solution {
  std::vector<double> u;  // density coefficients per collocation point
  std::vector<double> V;  // floating potentials
  int iterations = 0;
  double residual = 0.0;
};

/// Solves the assembled system; throws NonConvergence if rel_tol is not met
/// within max_iters.
Solution solve(const SystemMatrix& matrix, std::span<const double> rhs,
               const SolverConfig& config, int workers = 1);

/// ||rhs - A x|| / ||rhs|| (absolute norm when rhs is zero).
double residual(const SystemMatrix& matrix, std::span<const double> x,
                std::span<const double> rhs, int workers = 1);
double residual(const LinearOperator& op, std::span<const double> x, std::span<const double> rhs);

}  // namespace hvbem
