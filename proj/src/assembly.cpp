/*
 * (C) Copyright 2026 The hvbem Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "hvbem/assembly.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include "hvbem/error.hpp"
#include "hvbem/kernels.hpp"
#include "hvbem/parallel.hpp"

namespace hvbem {

// ---------------------------------------------------------------------------
// Row partitioning and storage

std::vector<RowRange> partition_rows(std::size_t rows, std::size_t blocks) {
  if (blocks < 1) throw Error(ErrorCode::InvalidArgument, "block count must be >= 1");
  if (blocks > rows)
    throw Error(ErrorCode::InvalidArgument, "block count " + std::to_string(blocks) +
                                                " exceeds row count " + std::to_string(rows));
  std::vector<RowRange> out;
  out.reserve(blocks);
  const std::size_t base = rows / blocks, extra = rows % blocks;
  std::size_t begin = 0;
  for (std::size_t b = 0; b < blocks; ++b) {
    std::size_t size = base + (b < extra ? 1 : 0);
    out.push_back({begin, begin + size});
    begin += size;
  }
  return out;
}

SystemMatrix::SystemMatrix(std::size_t n_density, std::size_t n_floating, std::vector<RowRange> ranges,
                           Precision precision)
    : n_density_(n_density), n_floating_(n_floating), precision_(precision), ranges_(std::move(ranges)) {
  const std::size_t n = dimension();
  std::size_t expect = 0;
  for (const RowRange& r : ranges_) {
    if (r.begin != expect || r.end <= r.begin)
      throw Error(ErrorCode::InvalidArgument, "row ranges must partition the rows contiguously");
    expect = r.end;
  }
  if (expect != n) throw Error(ErrorCode::InvalidArgument, "row ranges do not cover the matrix");
  blocks_.reserve(ranges_.size());
  for (const RowRange& r : ranges_) {
    Block b;
    b.range = r;
    if (precision_ == Precision::Double) b.values_d.assign(r.size() * n, 0.0);
    else b.values_f.assign(r.size() * n, 0.0f);
    blocks_.push_back(std::move(b));
  }
}

const std::vector<RowRange>& SystemMatrix::ranges() const { return ranges_; }

std::size_t SystemMatrix::block_of(std::size_t row) const {
  auto it = std::upper_bound(ranges_.begin(), ranges_.end(), row,
                             [](std::size_t r, const RowRange& range) { return r < range.end; });
  if (it == ranges_.end()) throw Error(ErrorCode::InvalidArgument, "row out of range");
  return static_cast<std::size_t>(it - ranges_.begin());
}

std::span<double> SystemMatrix::row_double(std::size_t row) {
  Block& b = blocks_[block_of(row)];
  if (b.values_d.empty()) return {};
  return {b.values_d.data() + (row - b.range.begin) * dimension(), dimension()};
}

std::span<float> SystemMatrix::row_single(std::size_t row) {
  Block& b = blocks_[block_of(row)];
  if (b.values_f.empty()) return {};
  return {b.values_f.data() + (row - b.range.begin) * dimension(), dimension()};
}

std::span<const double> SystemMatrix::row_double(std::size_t row) const {
  const Block& b = blocks_[block_of(row)];
  if (b.values_d.empty()) return {};
  return {b.values_d.data() + (row - b.range.begin) * dimension(), dimension()};
}

std::span<const float> SystemMatrix::row_single(std::size_t row) const {
  const Block& b = blocks_[block_of(row)];
  if (b.values_f.empty()) return {};
  return {b.values_f.data() + (row - b.range.begin) * dimension(), dimension()};
}

double SystemMatrix::at(std::size_t row, std::size_t col) const {
  if (col >= dimension()) throw Error(ErrorCode::InvalidArgument, "column out of range");
  return precision_ == Precision::Double ? row_double(row)[col] : row_single(row)[col];
}

void SystemMatrix::set(std::size_t row, std::size_t col, double value) {
  if (col >= dimension()) throw Error(ErrorCode::InvalidArgument, "column out of range");
  if (precision_ == Precision::Double) row_double(row)[col] = value;
  else row_single(row)[col] = static_cast<float>(value);
}

void SystemMatrix::matvec(std::span<const double> v, std::span<double> y, int workers) const {
  const std::size_t n = dimension();
  if (v.size() != n || y.size() != n)
    throw Error(ErrorCode::InvalidArgument, "matvec dimension mismatch");
  for (const Block& b : blocks_) {
    parallel_for(
        b.range.size(), workers,
        [&](std::size_t local) {
          double sum = 0.0;
          if (precision_ == Precision::Double) {
            const double* a = b.values_d.data() + local * n;
            for (std::size_t j = 0; j < n; ++j) sum += a[j] * v[j];
          } else {
            const float* a = b.values_f.data() + local * n;
            for (std::size_t j = 0; j < n; ++j) sum += static_cast<double>(a[j]) * v[j];
          }
          y[b.range.begin + local] = sum;
        },
        16);
  }
}

std::vector<double> SystemMatrix::matvec(std::span<const double> v, int workers) const {
  std::vector<double> y(dimension());
  matvec(v, y, workers);
  return y;
}

std::vector<double> SystemMatrix::diagonal() const {
  std::vector<double> d(dimension());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = at(i, i);
  return d;
}

bool SystemMatrix::bitwise_equal(const SystemMatrix& other) const {
  if (dimension() != other.dimension() || n_density_ != other.n_density_ ||
      precision_ != other.precision_)
    return false;
  for (std::size_t i = 0; i < dimension(); ++i) {
    if (precision_ == Precision::Double) {
      auto a = row_double(i), b = other.row_double(i);
      if (std::memcmp(a.data(), b.data(), a.size_bytes()) != 0) return false;
    } else {
      auto a = row_single(i), b = other.row_single(i);
      if (std::memcmp(a.data(), b.data(), a.size_bytes()) != 0) return false;
    }
  }
  return true;
}

namespace {

constexpr char kMatrixMagic[8] = {'H', 'V', 'B', 'E', 'M', 'M', 'A', 'T'};

template <class T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw Error(ErrorCode::Parse, "truncated matrix file");
  return value;
}

}  // namespace

void SystemMatrix::write_binary(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out.write(kMatrixMagic, sizeof kMatrixMagic);
  put<std::uint64_t>(out, dimension());
  put<std::uint64_t>(out, n_density_);
  put<std::uint64_t>(out, n_floating_);
  put<std::uint32_t>(out, precision_ == Precision::Double ? 8u : 4u);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(blocks_.size()));
  for (const Block& b : blocks_) {
    put<std::uint64_t>(out, b.range.begin);
    put<std::uint64_t>(out, b.range.end);
    if (precision_ == Precision::Double)
      out.write(reinterpret_cast<const char*>(b.values_d.data()),
                static_cast<std::streamsize>(b.values_d.size() * sizeof(double)));
    else
      out.write(reinterpret_cast<const char*>(b.values_f.data()),
                static_cast<std::streamsize>(b.values_f.size() * sizeof(float)));
  }
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path);
}

SystemMatrix SystemMatrix::read_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMatrixMagic, sizeof magic) != 0)
    throw Error(ErrorCode::Parse, path + ": not an hvbem matrix file");
  const auto n = get<std::uint64_t>(in);
  const auto n_density = get<std::uint64_t>(in);
  const auto n_floating = get<std::uint64_t>(in);
  const auto bytes = get<std::uint32_t>(in);
  const auto nblocks = get<std::uint32_t>(in);
  if (n != n_density + n_floating || (bytes != 4 && bytes != 8))
    throw Error(ErrorCode::Parse, path + ": inconsistent header");
  std::vector<RowRange> ranges;
  std::vector<std::streampos> offsets;
  for (std::uint32_t b = 0; b < nblocks; ++b) {
    RowRange r{get<std::uint64_t>(in), 0};
    r.end = get<std::uint64_t>(in);
    if (r.end < r.begin || r.end > n) throw Error(ErrorCode::Parse, path + ": bad block range");
    ranges.push_back(r);
    offsets.push_back(in.tellg());
    in.seekg(static_cast<std::streamoff>(r.size() * n * bytes), std::ios::cur);
  }
  SystemMatrix m(n_density, n_floating, ranges, bytes == 8 ? Precision::Double : Precision::Single);
  for (std::uint32_t b = 0; b < nblocks; ++b) {
    in.seekg(offsets[b]);
    Block& blk = m.blocks_[b];
    if (bytes == 8)
      in.read(reinterpret_cast<char*>(blk.values_d.data()),
              static_cast<std::streamsize>(blk.values_d.size() * sizeof(double)));
    else
      in.read(reinterpret_cast<char*>(blk.values_f.data()),
              static_cast<std::streamsize>(blk.values_f.size() * sizeof(float)));
    if (!in) throw Error(ErrorCode::Parse, path + ": truncated block data");
  }
  return m;
}

// ---------------------------------------------------------------------------
// Row integration

namespace {

struct CornerSums {
  double sl[3] = {0.0, 0.0, 0.0};
  double adl[3] = {0.0, 0.0, 0.0};
};

constexpr double kInvFourPi = 1.0 / kFourPi;

// Integrates against the three corner hats with an arbitrary rule on the
// curved triangle (nodes evaluated on the fly).
CornerSums integrate_rule(const Vec3& x, const Vec3& n_x, unsigned mask, const TriangleNodes& nodes,
                          const Rule& rule) {
  CornerSums s;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const RefPoint p = rule.nodes[q];
    const Vec3 y = map_reference(nodes, p);
    auto [tu, tv] = reference_tangents(nodes, p);
    const double jw = rule.weights[q] * norm(cross(tu, tv));
    const Vec3 d = x - y;
    const double inv = 1.0 / norm(d);
    const auto psi = corner_basis(p);
    if (mask & kSingleLayer) {
      const double k = jw * inv * kInvFourPi;
      for (int c = 0; c < 3; ++c) s.sl[c] += k * psi[c];
    }
    if (mask & kAdjointDoubleLayer) {
      const double k = jw * dot(d, n_x) * inv * inv * inv * kInvFourPi;
      for (int c = 0; c < 3; ++c) s.adl[c] += k * psi[c];
    }
  }
  return s;
}

template <class T>
void scatter(const CornerSums& s, const std::array<int, 3>& cols, unsigned mask, std::span<T> sl,
             std::span<T> adl) {
  for (int c = 0; c < 3; ++c) {
    if (mask & kSingleLayer) sl[cols[c]] += static_cast<T>(s.sl[c]);
    if (mask & kAdjointDoubleLayer) adl[cols[c]] += static_cast<T>(s.adl[c]);
  }
}

}  // namespace

RowIntegrator::RowIntegrator(const SurfaceMesh& mesh, const QuadratureTables& tables)
    : mesh_(mesh), tables_(tables) {
  const Rule& rule = tables_.regular;
  mapped_.resize(mesh_.num_triangles());
  for (std::size_t t = 0; t < mesh_.num_triangles(); ++t) {
    MappedRule& m = mapped_[t];
    m.points.resize(rule.size());
    m.jw.resize(rule.size());
    for (std::size_t q = 0; q < rule.size(); ++q) {
      m.points[q] = map_reference(mesh_.nodes(t), rule.nodes[q]);
      m.jw[q] = rule.weights[q] * surface_frame(mesh_.nodes(t), rule.nodes[q]).area_element;
    }
  }
  basis_.resize(rule.size());
  for (std::size_t q = 0; q < rule.size(); ++q) basis_[q] = corner_basis(rule.nodes[q]);
}

template <class T>
void RowIntegrator::pass1(std::size_t row, unsigned mask, std::span<T> sl, std::span<T> adl,
                          std::vector<int>& deferred, PairCounts& counts) const {
  const Vec3 x = mesh_.collocation_point(row);
  const Vec3 n_x = mesh_.collocation_normal(row);
  const int vertex = mesh_.collocation_vertex(row);
  const double eta = tables_.config.eta;
  const std::size_t nq = tables_.regular.size();
  for (std::size_t t = 0; t < mesh_.num_triangles(); ++t) {
    const CurvedTriangle& tri = mesh_.triangle(t);
    const PairClass cls = classify_pair(x, vertex, tri, eta);
    if (cls.type == PairType::NearSingular) {
      deferred.push_back(static_cast<int>(t));
      ++counts.near_singular;
      continue;
    }
    CornerSums s;
    if (cls.type == PairType::Regular) {
      ++counts.regular;
      const MappedRule& m = mapped_[t];
      for (std::size_t q = 0; q < nq; ++q) {
        const Vec3 d = x - m.points[q];
        const double inv = 1.0 / norm(d);
        const auto& psi = basis_[q];
        if (mask & kSingleLayer) {
          const double k = m.jw[q] * inv * kInvFourPi;
          for (int c = 0; c < 3; ++c) s.sl[c] += k * psi[c];
        }
        if (mask & kAdjointDoubleLayer) {
          const double k = m.jw[q] * dot(d, n_x) * inv * inv * inv * kInvFourPi;
          for (int c = 0; c < 3; ++c) s.adl[c] += k * psi[c];
        }
      }
    } else {
      ++counts.singular;
      s = integrate_rule(x, n_x, mask, mesh_.nodes(t), tables_.singular[cls.corner]);
    }
    scatter(s, mesh_.corner_columns(t), mask, sl, adl);
  }
}

template <class T>
void RowIntegrator::pass2(std::size_t row, unsigned mask, std::span<const int> deferred,
                          std::span<T> sl, std::span<T> adl) const {
  const Vec3 x = mesh_.collocation_point(row);
  const Vec3 n_x = mesh_.collocation_normal(row);
  for (int t : deferred) {
    const Rule rule = near_singular_rule(x, mesh_.nodes(t), mesh_.triangle(t).circumradius, tables_);
    scatter(integrate_rule(x, n_x, mask, mesh_.nodes(t), rule), mesh_.corner_columns(t), mask, sl, adl);
  }
}

template void RowIntegrator::pass1<double>(std::size_t, unsigned, std::span<double>, std::span<double>,
                                           std::vector<int>&, PairCounts&) const;
template void RowIntegrator::pass1<float>(std::size_t, unsigned, std::span<float>, std::span<float>,
                                          std::vector<int>&, PairCounts&) const;
template void RowIntegrator::pass2<double>(std::size_t, unsigned, std::span<const int>, std::span<double>,
                                           std::span<double>) const;
template void RowIntegrator::pass2<float>(std::size_t, unsigned, std::span<const int>, std::span<float>,
                                          std::span<float>) const;

// ---------------------------------------------------------------------------
// System assembly

std::vector<double> charge_functional(const SurfaceMesh& mesh, const QuadratureTables& tables,
                                      std::span<const int> points, std::span<const double> eps_plus,
                                      std::span<const double> eps_minus, int workers, PairCounts* counts) {
  if (eps_plus.size() != points.size() || eps_minus.size() != points.size())
    throw Error(ErrorCode::InvalidArgument, "charge_functional: permittivity list size mismatch");
  const std::size_t n = mesh.num_collocation();
  RowIntegrator integrator(mesh, tables);
  std::vector<double> q(n, 0.0);
  // Fixed chunking keeps the reduction order independent of the worker count.
  constexpr std::size_t kChunk = 64;
  std::vector<double> buffer;
  for (std::size_t start = 0; start < points.size(); start += kChunk) {
    const std::size_t len = std::min(kChunk, points.size() - start);
    buffer.assign(len * n, 0.0);
    std::vector<PairCounts> local(len);
    parallel_for(len, workers, [&](std::size_t k) {
      const auto row = static_cast<std::size_t>(points[start + k]);
      std::span<double> adl(buffer.data() + k * n, n);
      std::vector<int> deferred;
      integrator.pass1<double>(row, kAdjointDoubleLayer, {}, adl, deferred, local[k]);
      integrator.pass2<double>(row, kAdjointDoubleLayer, deferred, {}, adl);
    });
    for (std::size_t k = 0; k < len; ++k) {
      const int i = points[start + k];
      const double w = mesh.lumped_weight(i);
      const double jump = w * (eps_plus[start + k] - eps_minus[start + k]);
      const double* adl = buffer.data() + k * n;
      for (std::size_t j = 0; j < n; ++j) q[j] += jump * adl[j];
      q[i] += w * 0.5 * (eps_plus[start + k] + eps_minus[start + k]);
      if (counts) *counts += local[k];
    }
  }
  return q;
}

namespace {

template <class T>
std::span<T> row_span(SystemMatrix& m, std::size_t row);
template <>
std::span<double> row_span<double>(SystemMatrix& m, std::size_t row) {
  return m.row_double(row);
}
template <>
std::span<float> row_span<float>(SystemMatrix& m, std::size_t row) {
  return m.row_single(row);
}

template <class T>
void assemble_collocation_rows(const SurfaceMesh& mesh, const RowIntegrator& integrator,
                               const AssemblyConfig& config, SystemMatrix& matrix,
                               std::vector<double>& rhs, AssemblyStats& stats, int workers) {
  const std::size_t n = mesh.num_collocation();
  for (const RowRange& range : matrix.ranges()) {
    if (range.begin >= n) continue;
    const std::size_t rows = std::min(range.end, n) - range.begin;
    std::vector<std::vector<int>> deferred(rows);
    std::vector<PairCounts> counts(rows);
    auto mask_of = [&](std::size_t i) -> unsigned {
      return std::holds_alternative<DielectricJump>(mesh.row_kind(i)) ? kAdjointDoubleLayer : kSingleLayer;
    };
    auto spans = [&](std::size_t i, unsigned mask) {
      std::span<T> row = row_span<T>(matrix, i).first(n);
      return mask == kSingleLayer ? std::pair{row, std::span<T>{}} : std::pair{std::span<T>{}, row};
    };

    // Pass 1: regular and singular pairs; near-singular pairs are deferred.
    parallel_for(rows, workers, [&](std::size_t k) {
      const std::size_t i = range.begin + k;
      const unsigned mask = mask_of(i);
      auto [sl, adl] = spans(i, mask);
      integrator.pass1<T>(i, mask, sl, adl, deferred[k], counts[k]);
    });
    // Pass 2: the deferred near-singular pairs of this block.
    parallel_for(rows, workers, [&](std::size_t k) {
      const std::size_t i = range.begin + k;
      const unsigned mask = mask_of(i);
      auto [sl, adl] = spans(i, mask);
      integrator.pass2<T>(i, mask, deferred[k], sl, adl);
    });

    for (std::size_t k = 0; k < rows; ++k) {
      const std::size_t i = range.begin + k;
      stats.pairs += counts[k];
      stats.deferred_processed += deferred[k].size();
      std::span<T> row = row_span<T>(matrix, i);
      const RowKind& kind = mesh.row_kind(i);
      if (auto* d = std::get_if<Dirichlet>(&kind)) {
        rhs[i] = d->v0;
      } else if (auto* f = std::get_if<FloatingDirichlet>(&kind)) {
        row[n + f->index] = static_cast<T>(-1.0);
        rhs[i] = 0.0;
      } else if (auto* j = std::get_if<DielectricJump>(&kind)) {
        const double mean = 0.5 * (j->eps_plus + j->eps_minus);
        const double scale = config.equilibrate ? 1.0 / mean : 1.0;
        const double jump = (j->eps_plus - j->eps_minus) * scale;
        for (std::size_t c = 0; c < n; ++c) row[c] = static_cast<T>(jump * row[c]);
        row[i] += static_cast<T>(mean * scale);
        rhs[i] = 0.0;
      }
    }
  }
}

// Exterior/interior permittivities entering the charge of floating surface k.
std::pair<std::vector<double>, std::vector<double>> floating_permittivities(const SurfaceMesh& mesh,
                                                                            const FloatingSurface& fs) {
  std::vector<double> plus, minus;
  for (int i : fs.collocation) {
    double ep = 0.0, em = 0.0;
    bool found = false;
    for (int t : mesh.adjacent_triangles(i)) {
      const PatchKind& kind = mesh.patch_of(t).kind;
      if (auto* c = std::get_if<FloatingConductor>(&kind); c && c->index == fs.index) {
        ep = c->eps_plus;
        em = 0.0;
        found = true;
        break;
      }
      if (auto* s = std::get_if<FloatingSheet>(&kind); s && s->index == fs.index) {
        ep = s->eps_plus;
        em = s->eps_minus;
        found = true;
        break;
      }
    }
    if (!found)
      throw Error(ErrorCode::Assembly, "floating point without a floating patch (index " +
                                           std::to_string(fs.index) + ")");
    plus.push_back(ep);
    minus.push_back(em);
  }
  return {plus, minus};
}

}  // namespace

AssembledSystem assemble(const SurfaceMesh& mesh, const QuadConfig& quad, const AssemblyConfig& config,
                         std::size_t n_blocks, int workers) {
  const std::size_t n = mesh.num_collocation();
  const std::size_t nfl = mesh.num_floating();
  for (std::size_t k = 0; k < nfl; ++k) {
    const FloatingSurface& fs = mesh.floating(k);
    if (fs.collocation.empty())
      throw Error(ErrorCode::Assembly, "no neutrality row for floating index " + std::to_string(k) +
                                           ": none of its vertices is a floating collocation point");
    double area = 0.0;
    for (int i : fs.collocation) area += mesh.lumped_weight(i);
    if (!(area > 0.0))
      throw Error(ErrorCode::Assembly, "floating surface " + std::to_string(k) + " has zero area");
  }

  QuadratureTables tables(quad);
  RowIntegrator integrator(mesh, tables);
  AssembledSystem out{SystemMatrix(n, nfl, partition_rows(n + nfl, n_blocks), config.precision),
                      std::vector<double>(n + nfl, 0.0), AssemblyStats{}};
  out.stats.rows_with_integrals = n;

  if (config.precision == Precision::Double)
    assemble_collocation_rows<double>(mesh, integrator, config, out.matrix, out.rhs, out.stats, workers);
  else
    assemble_collocation_rows<float>(mesh, integrator, config, out.matrix, out.rhs, out.stats, workers);

  for (std::size_t k = 0; k < nfl; ++k) {
    const FloatingSurface& fs = mesh.floating(k);
    auto [plus, minus] = floating_permittivities(mesh, fs);
    std::vector<double> q =
        charge_functional(mesh, tables, fs.collocation, plus, minus, workers, &out.stats.neutrality_pairs);
    double scale = 1.0;
    if (config.equilibrate) {
      double total = 0.0;
      for (std::size_t m = 0; m < fs.collocation.size(); ++m)
        total += mesh.lumped_weight(fs.collocation[m]) * 0.5 * (plus[m] + minus[m]);
      scale = 1.0 / total;
    }
    const std::size_t row = n + k;
    for (std::size_t j = 0; j < n; ++j) out.matrix.set(row, j, q[j] * scale);
    out.rhs[row] = 0.0;
  }
  return out;
}

}  // namespace hvbem
