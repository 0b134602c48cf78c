/*
 * (C) Copyright 2026 The hvbem Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "hvbem/solver.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "hvbem/error.hpp"

namespace hvbem {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace

DenseOperator::DenseOperator(std::size_t n, std::vector<double> values) : n_(n), values_(std::move(values)) {
  if (values_.size() != n_ * n_) throw Error(ErrorCode::InvalidArgument, "dense operator size mismatch");
}

void DenseOperator::apply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != n_ || y.size() != n_) throw Error(ErrorCode::InvalidArgument, "dimension mismatch");
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n_; ++j) s += values_[i * n_ + j] * x[j];
    y[i] = s;
  }
}

std::vector<double> DenseOperator::diagonal() const {
  std::vector<double> d(n_);
  for (std::size_t i = 0; i < n_; ++i) d[i] = values_[i * n_ + i];
  return d;
}

double residual(const LinearOperator& op, std::span<const double> x, std::span<const double> rhs) {
  const std::size_t n = op.size();
  if (x.size() != n || rhs.size() != n) throw Error(ErrorCode::InvalidArgument, "residual: dimension mismatch");
  std::vector<double> r(n);
  op.apply(x, r);
  for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - r[i];
  const double b = norm(rhs);
  return b > 0.0 ? norm(r) / b : norm(r);
}

double residual(const SystemMatrix& matrix, std::span<const double> x, std::span<const double> rhs,
                int workers) {
  return residual(MatrixOperator(matrix, workers), x, rhs);
}

GmresResult gmres(const LinearOperator& op, std::span<const double> rhs, const SolverConfig& cfg,
                  bool precondition) {
  const std::size_t n = op.size();
  if (rhs.size() != n) throw Error(ErrorCode::InvalidArgument, "gmres: rhs dimension mismatch");
  if (cfg.restart < 1) throw Error(ErrorCode::InvalidArgument, "gmres: restart must be >= 1");

  std::vector<double> dinv(n, 1.0);
  if (precondition) {
    const std::vector<double> d = op.diagonal();
    for (std::size_t i = 0; i < n; ++i) dinv[i] = std::abs(d[i]) < 1e-30 ? 1.0 : 1.0 / d[i];
  }

  GmresResult res;
  res.x.assign(n, 0.0);
  const double bnorm = norm(rhs);
  if (bnorm == 0.0) {
    res.converged = true;
    return res;
  }

  const std::size_t m = std::min<std::size_t>(static_cast<std::size_t>(cfg.restart), n);
  std::vector<std::vector<double>> basis(m + 1, std::vector<double>(n));
  std::vector<std::vector<double>> h(m + 1, std::vector<double>(m, 0.0));
  std::vector<double> cs(m), sn(m), g(m + 1), z(n), w(n), r(n);

  auto true_residual = [&]() {
    op.apply(res.x, r);
    for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - r[i];
    return norm(r);
  };

  for (;;) {
    const double beta = true_residual();
    res.residual = beta / bnorm;
    if (res.residual <= cfg.rel_tol) {
      res.converged = true;
      break;
    }
    if (res.iterations >= cfg.max_iters) break;

    for (std::size_t i = 0; i < n; ++i) basis[0][i] = r[i] / beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;
    std::size_t k = 0;  // Krylov dimension built in this cycle
    while (k < m && res.iterations < cfg.max_iters) {
      const std::size_t j = k;
      for (std::size_t i = 0; i < n; ++i) z[i] = dinv[i] * basis[j][i];
      op.apply(z, w);
      const double before = norm(w);
      for (std::size_t i = 0; i <= j; ++i) {
        h[i][j] = dot(w, basis[i]);
        for (std::size_t l = 0; l < n; ++l) w[l] -= h[i][j] * basis[i][l];
      }
      double after = norm(w);
      if (after < 0.7 * before) {
        for (std::size_t i = 0; i <= j; ++i) {
          const double c = dot(w, basis[i]);
          h[i][j] += c;
          for (std::size_t l = 0; l < n; ++l) w[l] -= c * basis[i][l];
        }
        after = norm(w);
      }
      h[j + 1][j] = after;

      for (std::size_t i = 0; i < j; ++i) {
        const double t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
        h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
        h[i][j] = t;
      }
      const double denom = std::hypot(h[j][j], h[j + 1][j]);
      cs[j] = denom > 0.0 ? h[j][j] / denom : 1.0;
      sn[j] = denom > 0.0 ? h[j + 1][j] / denom : 0.0;
      h[j][j] = denom;
      h[j + 1][j] = 0.0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];

      ++res.iterations;
      ++k;
      const double estimate = std::abs(g[j + 1]) / bnorm;
      res.history.push_back(estimate);
      if (cfg.verbose) std::fprintf(stderr, "gmres %5d  %.3e\n", res.iterations, estimate);
      const bool breakdown = after <= std::numeric_limits<double>::min() * 1e4 || after <= 1e-15 * before;
      if (breakdown || estimate <= cfg.rel_tol) break;
      for (std::size_t l = 0; l < n; ++l) basis[j + 1][l] = w[l] / after;
    }

    // Back substitution on the k x k triangular system.
    std::vector<double> y(k);
    for (std::size_t ii = k; ii-- > 0;) {
      double s = g[ii];
      for (std::size_t l = ii + 1; l < k; ++l) s -= h[ii][l] * y[l];
      y[ii] = h[ii][ii] != 0.0 ? s / h[ii][ii] : 0.0;
    }
    for (std::size_t l = 0; l < n; ++l) {
      double s = 0.0;
      for (std::size_t ii = 0; ii < k; ++ii) s += y[ii] * basis[ii][l];
      res.x[l] += dinv[l] * s;
    }
  }
  return res;
}

Solution solve(const SystemMatrix& matrix, std::span<const double> rhs, const SolverConfig& config,
               int workers) {
  MatrixOperator op(matrix, workers);
  GmresResult r = gmres(op, rhs, config);
  if (!r.converged) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "GMRES did not converge in %d iterations (relative residual %.3e)",
                  r.iterations, r.residual);
    throw NonConvergence(buf, r.residual, r.iterations);
  }
  Solution s;
  const std::size_t n = matrix.num_density();
  s.u.assign(r.x.begin(), r.x.begin() + static_cast<std::ptrdiff_t>(n));
  s.V.assign(r.x.begin() + static_cast<std::ptrdiff_t>(n), r.x.end());
  s.iterations = r.iterations;
  s.residual = r.residual;
  return s;
}

}  // namespace hvbem
