#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "strads/data_io.hpp"
#include "strads/sap.hpp"

namespace strads {

/// Factors W (N x K, row-major) and H (M x K, row-major) with per-entry
/// residuals aligned with SparseRatings::entries.
struct FactorState {
  std::size_t n = 0, m = 0, rank = 0;
  double lambda = 0.05;
  std::vector<double> W;          // n * rank
  std::vector<double> H;          // m * rank
  std::vector<double> residuals;  // one per observed entry

  static FactorState init(const SparseRatings& ratings, std::size_t rank, double lambda,
                          std::uint64_t seed) {
    FactorState s;
    s.n = ratings.n_rows;
    s.m = ratings.n_cols;
    s.rank = rank;
    s.lambda = lambda;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0 / std::sqrt(static_cast<double>(rank)));
    s.W.resize(s.n * rank);
    s.H.resize(s.m * rank);
    for (double& v : s.W) v = unif(rng);
    for (double& v : s.H) v = unif(rng);
    s.rebuild_residuals(ratings);
    return s;
  }

  double predict(int i, int j) const {
    double v = 0.0;
    for (std::size_t t = 0; t < rank; ++t) v += W[i * rank + t] * H[j * rank + t];
    return v;
  }

  void rebuild_residuals(const SparseRatings& ratings) {
    residuals.resize(ratings.nnz());
    for (std::size_t e = 0; e < ratings.entries.size(); ++e)
      residuals[e] = ratings.entries[e].value - predict(ratings.entries[e].row, ratings.entries[e].col);
  }

  double max_residual_drift(const SparseRatings& ratings) const {
    double worst = 0.0;
    for (std::size_t e = 0; e < ratings.entries.size(); ++e) {
      const double fresh =
          ratings.entries[e].value - predict(ratings.entries[e].row, ratings.entries[e].col);
      worst = std::max(worst, std::abs(residuals[e] - fresh));
    }
    return worst;
  }
};

/// Exact coordinate minimizer for w_t^i with everything else fixed; updates
/// the residuals of row i. Rows with no observations are skipped.
inline double update_w(int i, int t, FactorState& s, const SparseRatings& ratings) {
  const auto& row = ratings.row_entries[i];
  double& w = s.W[i * s.rank + t];
  if (row.empty()) return w;
  double num = 0.0, den = s.lambda;
  for (int e : row) {
    const double h = s.H[ratings.entries[e].col * s.rank + t];
    num += (s.residuals[e] + w * h) * h;
    den += h * h;
  }
  if (den == 0.0) return w;
  const double next = num / den;
  const double shift = w - next;
  if (shift != 0.0)
    for (int e : row) s.residuals[e] += shift * s.H[ratings.entries[e].col * s.rank + t];
  w = next;
  return next;
}

/// Mirror of update_w over a column's observations.
inline double update_h(int j, int t, FactorState& s, const SparseRatings& ratings) {
  const auto& col = ratings.col_entries[j];
  double& h = s.H[j * s.rank + t];
  if (col.empty()) return h;
  double num = 0.0, den = s.lambda;
  for (int e : col) {
    const double w = s.W[ratings.entries[e].row * s.rank + t];
    num += (s.residuals[e] + w * h) * w;
    den += w * w;
  }
  if (den == 0.0) return h;
  const double next = num / den;
  const double shift = h - next;
  if (shift != 0.0)
    for (int e : col) s.residuals[e] += shift * s.W[ratings.entries[e].row * s.rank + t];
  h = next;
  return next;
}

/// Recomputed from scratch: sum of squared residuals over Omega plus the
/// Frobenius penalty.
inline double mf_objective(const FactorState& s, const SparseRatings& ratings) {
  double loss = 0.0;
  for (const auto& e : ratings.entries) {
    const double r = e.value - s.predict(e.row, e.col);
    loss += r * r;
  }
  double frob = 0.0;
  for (double v : s.W) frob += v * v;
  for (double v : s.H) frob += v * v;
  return loss + s.lambda * frob;
}

enum class MfAxis { Rows, Cols };

/// nnz-balanced blocks via LPT over singleton row/column blocks.
inline std::vector<VariableBlock> build_balanced_blocks(const SparseRatings& ratings, std::size_t p,
                                                        MfAxis axis) {
  if (p < 1) throw std::invalid_argument("P must be >= 1");
  const std::size_t count = axis == MfAxis::Rows ? ratings.n_rows : ratings.n_cols;
  std::vector<VariableBlock> singles;
  singles.reserve(count);
  for (std::size_t q = 0; q < count; ++q) {
    const std::size_t nnz = axis == MfAxis::Rows ? ratings.row_nnz(q) : ratings.col_nnz(q);
    // empty rows/columns still need an owner; give them a negligible workload
    singles.push_back({{static_cast<int>(q)}, nnz > 0 ? static_cast<double>(nnz) : 1e-9, 0});
  }
  return merge_blocks(std::move(singles), p);
}

/// Baseline: contiguous index ranges of ceil(count/P), nnz ignored.
inline std::vector<VariableBlock> uniform_blocks(const SparseRatings& ratings, std::size_t p,
                                                 MfAxis axis) {
  if (p < 1) throw std::invalid_argument("P must be >= 1");
  const std::size_t count = axis == MfAxis::Rows ? ratings.n_rows : ratings.n_cols;
  const std::size_t chunk = (count + p - 1) / p;
  std::vector<VariableBlock> out;
  for (std::size_t at = 0; at < count; at += chunk) {
    VariableBlock b;
    const std::size_t end = std::min(count, at + chunk);
    for (std::size_t q = at; q < end; ++q) {
      b.variable_ids.push_back(static_cast<int>(q));
      b.workload += static_cast<double>(axis == MfAxis::Rows ? ratings.row_nnz(q) : ratings.col_nnz(q));
    }
    out.push_back(std::move(b));
  }
  return out;
}

struct MfEpochReport {
  double objective = 0.0;
  double critical_path_cost = 0.0;  // sum over ranks of max per-worker nnz
};

/// One CCD epoch: for each rank, all row blocks in parallel, barrier, then
/// all column blocks, barrier. Row updates within a rank touch disjoint state,
/// so any P gives bitwise the same result as P = 1.
inline MfEpochReport mf_epoch(FactorState& s, const SparseRatings& ratings,
                              const std::vector<VariableBlock>& row_blocks,
                              const std::vector<VariableBlock>& col_blocks, WorkerPool& pool) {
  double row_max = 0.0, col_max = 0.0;
  for (const auto& b : row_blocks) row_max = std::max(row_max, b.workload);
  for (const auto& b : col_blocks) col_max = std::max(col_max, b.workload);

  for (std::size_t t = 0; t < s.rank; ++t) {
    pool.run(static_cast<int>(row_blocks.size()), [&](int b) {
      for (int i : row_blocks[b].variable_ids) update_w(i, static_cast<int>(t), s, ratings);
    });
    pool.run(static_cast<int>(col_blocks.size()), [&](int b) {
      for (int j : col_blocks[b].variable_ids) update_h(j, static_cast<int>(t), s, ratings);
    });
  }

  MfEpochReport rep;
  rep.objective = mf_objective(s, ratings);
  rep.critical_path_cost = static_cast<double>(s.rank) * (row_max + col_max);
  return rep;
}

}  // namespace strads
