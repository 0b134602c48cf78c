/*
 * (C) Copyright 2026 The hvbem Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hvbem/config.hpp"
#include "hvbem/mesh.hpp"
#include "hvbem/quadrature.hpp"

namespace hvbem {

/// Half-open row range [begin, end).
struct RowRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  friend bool operator==(const RowRange&, const RowRange&) = default;
};

/// Contiguous ranges covering [0, rows) whose sizes differ by at most one.
std::vector<RowRange> partition_rows(std::size_t rows, std::size_t blocks);

/// Dense (n + N_fl)-square system stored as independent row blocks. Columns
/// 0..n-1 hold density coefficients, n..n+N_fl-1 floating potentials.
class SystemMatrix {
 public:
  SystemMatrix(std::size_t n_density, std::size_t n_floating, std::vector<RowRange> ranges,
               Precision precision = Precision::Double);

  std::size_t dimension() const { return n_density_ + n_floating_; }
  std::size_t num_density() const { return n_density_; }
  std::size_t num_floating() const { return n_floating_; }
  Precision precision() const { return precision_; }
  const std::vector<RowRange>& ranges() const;
  std::size_t num_blocks() const { return blocks_.size(); }
  std::size_t block_of(std::size_t row) const;

  double at(std::size_t row, std::size_t col) const;
  void set(std::size_t row, std::size_t col, double value);

  /// Storage of one row; only the span matching precision() is non-empty.
  std::span<double> row_double(std::size_t row);
  std::span<float> row_single(std::size_t row);
  std::span<const double> row_double(std::size_t row) const;
  std::span<const float> row_single(std::size_t row) const;

  /// y = A v; rows are processed in parallel, each accumulated in ascending
  /// column order.
  std::vector<double> matvec(std::span<const double> v, int workers = 1) const;
  void matvec(std::span<const double> v, std::span<double> y, int workers = 1) const;
  std::vector<double> diagonal() const;

  /// Entry-wise bitwise comparison, independent of the row partitioning.
  bool bitwise_equal(const SystemMatrix& other) const;

  /// Binary dump: "HVBEMMAT", u64 N, u64 n, u64 N_fl, u32 precision bytes,
  /// u32 block count, then per block u64 begin, u64 end and the row-major
  /// entries of that block. Little-endian.
  void write_binary(const std::string& path) const;
  static SystemMatrix read_binary(const std::string& path);

 private:
  struct Block {
    RowRange range;
    std::vector<double> values_d;
    std::vector<float> values_f;
  };

  std::size_t n_density_;
  std::size_t n_floating_;
  Precision precision_;
  std::vector<RowRange> ranges_;
  std::vector<Block> blocks_;
};

struct PairCounts {
  std::size_t regular = 0;
  std::size_t singular = 0;
  std::size_t near_singular = 0;

  PairCounts& operator+=(const PairCounts& o) {
    regular += o.regular;
    singular += o.singular;
    near_singular += o.near_singular;
    return *this;
  }
  std::size_t total() const { return regular + singular + near_singular; }
};

struct AssemblyStats {
  PairCounts pairs;                     // collocation rows
  std::size_t rows_with_integrals = 0;  // == n
  std::size_t deferred_processed = 0;   // pass-2 pairs actually integrated
  PairCounts neutrality_pairs;          // auxiliary K' rows of floating points
};

struct AssembledSystem {
  SystemMatrix matrix;
  std::vector<double> rhs;
  AssemblyStats stats;
};

enum KernelMask : unsigned { kSingleLayer = 1u, kAdjointDoubleLayer = 2u };

/// Integrates the single-layer and/or adjoint-double-layer kernel against the
/// corner hat functions for one collocation row. Pass 1 covers regular and
/// singular pairs in ascending triangle order and records near-singular
/// triangles; pass 2 integrates the recorded triangles in the same order.
class RowIntegrator {
 public:
  RowIntegrator(const SurfaceMesh& mesh, const QuadratureTables& tables);

  template <class T>
  void pass1(std::size_t row, unsigned mask, std::span<T> sl, std::span<T> adl,
             std::vector<int>& deferred, PairCounts& counts) const;
  template <class T>
  void pass2(std::size_t row, unsigned mask, std::span<const int> deferred, std::span<T> sl,
             std::span<T> adl) const;

  const SurfaceMesh& mesh() const { return mesh_; }
  const QuadratureTables& tables() const { return tables_; }

  /// Regular-rule nodes mapped onto triangle t: positions and weight * area
  /// element.
  struct MappedRule {
    std::vector<Vec3> points;
    std::vector<double> jw;
  };
  const MappedRule& mapped(std::size_t t) const { return mapped_[t]; }

 private:
  const SurfaceMesh& mesh_;
  const QuadratureTables& tables_;
  std::vector<MappedRule> mapped_;
  std::vector<std::array<double, 3>> basis_;  // corner hats at regular nodes
};

/// Collocation system for the mesh: Dirichlet, floating-Dirichlet and
/// dielectric-jump rows for every collocation point, followed by one
/// charge-neutrality row per floating surface.
AssembledSystem assemble(const SurfaceMesh& mesh, const QuadConfig& quad,
                         const AssemblyConfig& config, std::size_t n_blocks, int workers = 1);

/// Row vector q with q . u equal to the charge carried by `points`
///   sum_i w_i [ (eps+ + eps-)/2 u_i + (eps+ - eps-) (K' u)_i ]
/// eps_minus = 0 gives the closed-conductor form. Points are summed in the
/// given order, so the result does not depend on `workers`.
std::vector<double> charge_functional(const SurfaceMesh& mesh, const QuadratureTables& tables,
                                      std::span<const int> points,
                                      std::span<const double> eps_plus,
                                      std::span<const double> eps_minus, int workers = 1,
                                      PairCounts* counts = nullptr);

}  // namespace hvbem
