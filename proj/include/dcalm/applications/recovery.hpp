// Copyright (c) dcalm contributors

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "dcalm/core.hpp"
#include "dcalm/problem.hpp"
#include "dcalm/psalmdc.hpp"
#include "dcalm/random.hpp"
#include "dcalm/subsolvers/fista.hpp"

namespace dcalm {

enum class SparsityModel { L1MinusL2, L1MinusTopK };
enum class MatrixKind { Gaussian, Dct, OversampledDct };

inline std::string to_string(SparsityModel model) {
  return model == SparsityModel::L1MinusL2 ? "l1-l2" : "l1-topk";
}

inline std::string to_string(MatrixKind kind) {
  switch (kind) {
    case MatrixKind::Gaussian:
      return "gaussian";
    case MatrixKind::Dct:
      return "dct";
    case MatrixKind::OversampledDct:
      return "oversampled-dct";
  }
  return "unknown";
}

/// Sum of the k largest magnitudes; the subgradient picks the k largest
/// entries (lowest index on ties) with sign +1 at zeros.
inline OracleValue largest_k_norm(const Vector& x, Index k) {
  const Index n = x.size();
  if (k < 1 || k > n) throw InputError("largest_k_norm: k must lie in [1, n]");
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::partial_sort(order.begin(), order.begin() + k, order.end(), [&x](Index a, Index b) {
    const double fa = std::abs(x[a]);
    const double fb = std::abs(x[b]);
    return fa > fb || (fa == fb && a < b);
  });
  std::sort(order.begin(), order.begin() + k);
  OracleValue out{0.0, Vector::Zero(n)};
  for (Index t = 0; t < k; ++t) {
    const Index i = order[static_cast<std::size_t>(t)];
    out.value += std::abs(x[i]);
    out.subgradient[i] = x[i] < 0.0 ? -1.0 : 1.0;
  }
  return out;
}

inline Vector l2_subgradient(const Vector& x) {
  const double nrm = x.norm();
  return nrm > 0.0 ? Vector(x / nrm) : Vector(Vector::Zero(x.size()));
}

/// Sums in index order, so ‖x‖₁ − ‖x‖_[k] is exactly zero for k-sparse x.
inline OracleValue l1_oracle(const Vector& x) {
  OracleValue out{0.0, Vector(x.size())};
  for (Index i = 0; i < x.size(); ++i) {
    out.value += std::abs(x[i]);
    out.subgradient[i] = x[i] > 0.0 ? 1.0 : (x[i] < 0.0 ? -1.0 : 0.0);
  }
  return out;
}

inline OracleValue l2_oracle(const Vector& x) { return {x.norm(), l2_subgradient(x)}; }

/// Columns drawn from N(0, I/m).
inline Matrix gen_gaussian_matrix(Index m, Index n, std::uint64_t seed) {
  require(m >= 1 && m <= n, "gen_gaussian_matrix: need 1 <= m <= n");
  Rng rng(seed);
  std::normal_distribution<double> entry(0.0, 1.0 / std::sqrt(static_cast<double>(m)));
  Matrix A(m, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < m; ++i) A(i, j) = entry(rng);
  }
  return A;
}

/// Uniform draw on the open interval (0, 1).
inline Vector gen_frequencies(Index m, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector xi(m);
  for (Index i = 0; i < m; ++i) {
    double v = unit(rng);
    while (v == 0.0) v = unit(rng);
    xi[i] = v;
  }
  return xi;
}

/// Column i (1-based) is cos(2π i ξ / F) / √m for a given ξ.
inline Matrix oversampled_dct_from(const Vector& xi, Index n, double F) {
  const Index m = xi.size();
  require(m >= 1 && m <= n, "oversampled_dct_from: need 1 <= m <= n");
  require(F >= 1.0, "oversampled_dct_from: refinement factor must be at least 1");
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  Matrix A(m, n);
  for (Index j = 0; j < n; ++j) {
    const double freq = 2.0 * std::numbers::pi * static_cast<double>(j + 1) / F;
    for (Index i = 0; i < m; ++i) A(i, j) = scale * std::cos(freq * xi[i]);
  }
  return A;
}

inline Matrix gen_oversampled_dct(Index m, Index n, double F, std::uint64_t seed) {
  require(m >= 1 && m <= n, "gen_oversampled_dct: need 1 <= m <= n");
  require(F >= 1.0, "gen_oversampled_dct: refinement factor must be at least 1");
  return oversampled_dct_from(gen_frequencies(m, seed), n, F);
}

inline Matrix gen_dct_matrix(Index m, Index n, std::uint64_t seed) {
  return gen_oversampled_dct(m, n, 1.0, seed);
}

/// s standard-normal entries on a random support with consecutive indices at
/// least L apart.
inline Vector gen_sparse_signal(Index n, Index s, Index L, std::uint64_t seed) {
  require(n >= 1, "gen_sparse_signal: n must be positive");
  require(s >= 1 && s <= n, "gen_sparse_signal: need 1 <= s <= n");
  require(L >= 1, "gen_sparse_signal: separation must be positive");
  if ((s - 1) * L + 1 > n) throw InputError("gen_sparse_signal: support cannot be separated");
  Rng rng(seed);
  // Choose s ranks from a shortened range, then stretch gaps by L − 1.
  const Index slots = n - (s - 1) * (L - 1);
  std::vector<Index> pool(static_cast<std::size_t>(slots));
  std::iota(pool.begin(), pool.end(), Index{0});
  for (Index t = 0; t < s; ++t) {
    std::uniform_int_distribution<Index> pick(t, slots - 1);
    std::swap(pool[static_cast<std::size_t>(t)], pool[static_cast<std::size_t>(pick(rng))]);
  }
  std::sort(pool.begin(), pool.begin() + s);
  std::normal_distribution<double> value(0.0, 1.0);
  Vector x = Vector::Zero(n);
  for (Index t = 0; t < s; ++t) {
    double v = value(rng);
    while (v == 0.0) v = value(rng);
    x[pool[static_cast<std::size_t>(t)] + t * (L - 1)] = v;
  }
  return x;
}

/// x̄ + ζ with ζ ~ N(0, I/2).
inline Vector gen_initial_point(const Vector& signal, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, std::sqrt(0.5));
  Vector x0 = signal;
  for (Index i = 0; i < x0.size(); ++i) x0[i] += noise(rng);
  return x0;
}

struct SparseRecoveryInstance {
  Matrix A;
  Vector b;
  Vector signal;
  Index sparsity = 0;
  SparsityModel model = SparsityModel::L1MinusTopK;
  /// Top-k parameter; only read by the TopK model.
  Index k = 0;
  MatrixKind kind = MatrixKind::Gaussian;
  double refinement = 1.0;
  Vector x0;
};

struct RecoverySpec {
  Index n = 256;
  Index m = 64;
  Index sparsity = 5;
  SparsityModel model = SparsityModel::L1MinusTopK;
  MatrixKind kind = MatrixKind::Gaussian;
  double refinement = 1.0;
};

/// Builds one instance; coherent matrices get support separation 2F.
inline SparseRecoveryInstance generate_recovery_instance(const RecoverySpec& spec,
                                                         std::uint64_t seed) {
  SparseRecoveryInstance inst;
  inst.sparsity = spec.sparsity;
  inst.model = spec.model;
  inst.k = spec.sparsity;
  inst.kind = spec.kind;
  inst.refinement = spec.kind == MatrixKind::OversampledDct ? spec.refinement : 1.0;
  Index separation = 1;
  switch (spec.kind) {
    case MatrixKind::Gaussian:
      inst.A = gen_gaussian_matrix(spec.m, spec.n, substream(seed, 0));
      break;
    case MatrixKind::Dct:
      inst.A = gen_dct_matrix(spec.m, spec.n, substream(seed, 0));
      break;
    case MatrixKind::OversampledDct:
      inst.A = gen_oversampled_dct(spec.m, spec.n, spec.refinement, substream(seed, 0));
      separation = static_cast<Index>(std::ceil(2.0 * spec.refinement));
      break;
  }
  inst.signal = gen_sparse_signal(spec.n, spec.sparsity, separation, substream(seed, 1));
  inst.b = inst.A * inst.signal;
  inst.x0 = gen_initial_point(inst.signal, substream(seed, 2));
  return inst;
}

/// min ‖x‖₁ − h(x) s.t. Ax = b with h = ‖·‖₂ or the largest-k norm.
inline DcProgram build_recovery_program(const SparseRecoveryInstance& inst) {
  const Index n = inst.A.cols();
  require(inst.A.rows() >= 1 && n >= 1, "build_recovery_program: empty sensing matrix");
  require_size(inst.b, inst.A.rows(), "build_recovery_program: b");
  DcProgram prog;
  prog.dimension = n;
  prog.g = l1_oracle;
  if (inst.model == SparsityModel::L1MinusL2) {
    prog.h = l2_oracle;
  } else {
    const Index k = inst.k;
    if (k < 1 || k > n) throw InputError("build_recovery_program: k must lie in [1, n]");
    prog.h = [k](const Vector& x) { return largest_k_norm(x, k); };
  }
  prog.A = inst.A;
  prog.b = inst.b;
  prog.num_inequalities = 0;
  prog.prox_g = [](const Vector& x, double t) { return soft_threshold(x, t); };
  return prog;
}

/// σ₀ = 100, ε₀ = 0.1, Q = 10⁻⁴I, δ₁ = 1 and δ₂ = 10⁻⁴ (ℓ1−ℓ2) or 10⁻⁵ (top-k).
inline SolverParams recovery_solver_params(SparsityModel model) {
  SolverParams params;
  params.sigma0 = 100.0;
  params.epsilon0 = 0.1;
  params.q = 1e-4;
  params.delta1 = 1.0;
  params.delta2 = model == SparsityModel::L1MinusL2 ? 1e-4 : 1e-5;
  return params;
}

/// v⁰ = m·1.
inline Vector recovery_initial_multipliers(Index m) {
  return Vector::Constant(m, static_cast<double>(m));
}

inline double relative_error(const Vector& x, const Vector& reference) {
  require(x.size() == reference.size(), "relative_error: length mismatch");
  const double denom = reference.norm();
  if (!(denom > 0.0)) throw InputError("relative_error: reference is zero");
  return (x - reference).norm() / denom;
}

}  // namespace dcalm
