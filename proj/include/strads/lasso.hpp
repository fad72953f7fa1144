#pragma once

#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "strads/data_io.hpp"
#include "strads/sap.hpp"

namespace strads {

enum class ImportanceKind { Linear, Squared };  // |delta| + eta  vs  0.5 delta^2 + eta

struct LassoProblem {
  LassoDataset data;
  double lambda = 0.0;
  CoefState coef;

  static LassoProblem make(LassoDataset d, double lambda, double init_const) {
    LassoProblem p;
    p.coef = CoefState::init(d.y, d.X.n_features(), init_const);
    p.data = std::move(d);
    p.lambda = lambda;
    return p;
  }
};

/// Pure CD step against a residual snapshot: z = x_j' r + beta_j equals the
/// argument of the textbook update for unit-norm columns.
inline CoordUpdate lasso_compute_update(const LassoProblem& prob, std::span<const double> residual,
                                        int j) {
  const double old = prob.coef.beta[j];
  const double z = prob.data.X.dot(j, residual) + old;
  const double next = soft_threshold(z, prob.lambda);
  return {j, next, std::abs(next - old)};
}

/// Sequential in-place CD update: beta_j and the residual move together.
/// Returns (new beta_j, |change|).
inline std::pair<double, double> cd_update(int j, LassoProblem& prob) {
  const CoordUpdate u = lasso_compute_update(prob, prob.coef.residual, j);
  const double old = prob.coef.beta[j];
  if (u.new_value != old) {
    auto col = prob.data.X.column(j);
    const double shift = old - u.new_value;
    for (std::size_t i = 0; i < col.size(); ++i) prob.coef.residual[i] += shift * col[i];
    prob.coef.beta[j] = u.new_value;
  }
  return {u.new_value, u.delta_abs};
}

/// 0.5 ||y - X beta||^2 + lambda sum |beta_j|, from the maintained residual.
inline double lasso_objective(const LassoProblem& prob) {
  double rss = 0.0;
  for (double r : prob.coef.residual) rss += r * r;
  double l1 = 0.0;
  for (double b : prob.coef.beta) l1 += std::abs(b);
  return 0.5 * rss + prob.lambda * l1;
}

/// Same objective with the residual rebuilt from scratch (audit path).
inline double lasso_objective_recomputed(const LassoProblem& prob) {
  const std::size_t n = prob.data.X.n_samples();
  std::vector<double> r(prob.data.y.begin(), prob.data.y.end());
  for (std::size_t j = 0; j < prob.data.X.n_features(); ++j) {
    const double b = prob.coef.beta[j];
    if (b == 0.0) continue;
    auto col = prob.data.X.column(j);
    for (std::size_t i = 0; i < n; ++i) r[i] -= b * col[i];
  }
  double rss = 0.0;
  for (double v : r) rss += v * v;
  double l1 = 0.0;
  for (double b : prob.coef.beta) l1 += std::abs(b);
  return 0.5 * rss + prob.lambda * l1;
}

/// Cross-check the maintained residual against recomputation.
inline void check_residual_drift(const LassoProblem& prob, double tol = 1e-6) {
  const double a = lasso_objective(prob);
  const double b = lasso_objective_recomputed(prob);
  if (std::abs(a - b) > tol) throw std::runtime_error("residual drift");
}

/// Rebuild the maintained residual from scratch (resets accumulated fp error).
inline void rebuild_residual(LassoProblem& prob) {
  const std::size_t n = prob.data.X.n_samples();
  std::vector<double> r(prob.data.y.begin(), prob.data.y.end());
  for (std::size_t j = 0; j < prob.data.X.n_features(); ++j) {
    const double b = prob.coef.beta[j];
    if (b == 0.0) continue;
    auto col = prob.data.X.column(j);
    for (std::size_t i = 0; i < n; ++i) r[i] -= b * col[i];
  }
  prob.coef.residual = std::move(r);
}

/// Max stationarity violation: |x_j' r| - lambda clamped at 0 for zero
/// coefficients, | |x_j' r| - lambda | for active ones.
inline double kkt_violation(const LassoProblem& prob) {
  double worst = 0.0;
  for (std::size_t j = 0; j < prob.data.X.n_features(); ++j) {
    const double g = prob.data.X.dot(j, prob.coef.residual);
    double v;
    if (prob.coef.beta[j] == 0.0)
      v = std::max(0.0, std::abs(g) - prob.lambda);
    else
      v = std::abs(std::abs(g) - prob.lambda);
    worst = std::max(worst, v);
  }
  return worst;
}

/// Nonnegative reformulation support: 2J columns with column j+J = -column j.
inline LassoDataset duplicate_features(const LassoDataset& data) {
  const std::size_t n = data.X.n_samples();
  const std::size_t j = data.X.n_features();
  std::vector<std::vector<double>> cols(2 * j, std::vector<double>(n));
  for (std::size_t c = 0; c < j; ++c) {
    auto src = data.X.column(c);
    for (std::size_t i = 0; i < n; ++i) {
      cols[c][i] = src[i];
      cols[c + j][i] = -src[i];
    }
  }
  LassoDataset out;
  out.X = StandardizedMatrix::from_standardized(std::move(cols));
  out.y = data.y;
  return out;
}

/// SAP callbacks for Lasso: p(j) from last update magnitudes with an eta
/// floor, dependency = |column correlation|, progress records applied deltas
/// and bumps the per-variable counters.
inline SchedulerCallbacks lasso_callbacks(LassoProblem& prob, const SchedulerConfig& cfg,
                                          ImportanceKind kind = ImportanceKind::Linear) {
  SchedulerCallbacks cb;
  const double eta = cfg.eta;
  cb.sampling = [&prob, eta, kind](int j) {
    const double d = prob.coef.delta_last[j];
    return kind == ImportanceKind::Linear ? d + eta : 0.5 * d * d + eta;
  };
  cb.dependency = [&prob](int j, int k) { return std::abs(prob.data.X.correlation(j, k)); };
  cb.progress = [&prob](std::span<const CoordUpdate> updates) {
    for (const auto& u : updates) {
      prob.coef.delta_last[u.variable] = u.delta_abs;
      ++prob.coef.iter_counter[u.variable];
    }
  };
  return cb;
}

/// Worker/apply hooks for the round machinery. `snapshot` must point at the
/// frozen pre-round residual for the duration of each round.
inline RoundHooks lasso_hooks(LassoProblem& prob, const std::vector<double>& snapshot) {
  RoundHooks h;
  h.execute = [&prob, &snapshot](const VariableBlock& block) {
    std::vector<CoordUpdate> out;
    out.reserve(block.variable_ids.size());
    for (int j : block.variable_ids) out.push_back(lasso_compute_update(prob, snapshot, j));
    return out;
  };
  h.apply = [&prob](std::span<const CoordUpdate> updates) {
    for (const auto& u : updates) {
      const double old = prob.coef.beta[u.variable];
      if (u.new_value == old) continue;
      auto col = prob.data.X.column(u.variable);
      const double shift = old - u.new_value;
      for (std::size_t i = 0; i < col.size(); ++i) prob.coef.residual[i] += shift * col[i];
      prob.coef.beta[u.variable] = u.new_value;
    }
  };
  h.workload = [](int) { return 1.0; };
  return h;
}

}  // namespace strads
