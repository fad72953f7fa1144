#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "strads/lasso.hpp"

namespace strads {

/// Nonnegative Lasso over duplicated features (2J columns, column j+J equal
/// to -column j), the reformulation the convergence analysis runs on.
struct NonnegLassoInstance {
  StandardizedMatrix X2;
  std::vector<double> y;
  double lambda = 0.0;
  std::vector<double> beta;  // 2J nonnegative reals

  std::size_t dim() const { return X2.n_features(); }

  std::vector<double> residual_at(std::span<const double> b) const {
    std::vector<double> r(y.begin(), y.end());
    for (std::size_t c = 0; c < dim(); ++c) {
      if (b[c] == 0.0) continue;
      auto col = X2.column(c);
      for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[c] * col[i];
    }
    return r;
  }

  /// F(b) = 0.5 ||y - X2 b||^2 + lambda sum b_j  (b >= 0 on this orthant).
  double objective_at(std::span<const double> b) const {
    auto r = residual_at(b);
    double rss = 0.0;
    for (double v : r) rss += v * v;
    double pen = 0.0;
    for (double v : b) pen += v;
    return 0.5 * rss + lambda * pen;
  }

  double objective() const { return objective_at(beta); }

  /// Gradient of F on the nonnegative orthant: -x_j' r + lambda.
  std::vector<double> gradient() const {
    auto r = residual_at(beta);
    std::vector<double> g(dim());
    for (std::size_t c = 0; c < dim(); ++c) g[c] = -X2.dot(c, r) + lambda;
    return g;
  }
};

/// Constrained descent step: max(-beta_j, -grad_j).
inline double delta_beta(std::size_t j, const NonnegLassoInstance& inst) {
  return std::max(-inst.beta[j], -inst.gradient()[j]);
}

inline std::vector<double> delta_beta_all(const NonnegLassoInstance& inst) {
  auto g = inst.gradient();
  std::vector<double> d(inst.dim());
  for (std::size_t c = 0; c < inst.dim(); ++c) d[c] = std::max(-inst.beta[c], -g[c]);
  return d;
}

/// LHS - RHS of the quadratic lower bound
///   F(b) - F(b + db) >= -db' grad F - 0.5 db' X'X db.
/// Exact equality for squared loss; must never be below -1e-9.
inline double quadratic_bound_gap(const NonnegLassoInstance& inst, std::span<const double> db) {
  if (db.size() != inst.dim()) throw std::invalid_argument("update vector has wrong length");
  std::vector<double> next(inst.dim());
  for (std::size_t c = 0; c < inst.dim(); ++c) {
    next[c] = inst.beta[c] + db[c];
    if (next[c] < -1e-12) throw std::invalid_argument("infeasible update: beta + db < 0");
    if (next[c] < 0.0) next[c] = 0.0;
  }
  const double lhs = inst.objective() - inst.objective_at(next);

  auto g = inst.gradient();
  double lin = 0.0;
  for (std::size_t c = 0; c < inst.dim(); ++c) lin += db[c] * g[c];
  // db' X'X db = ||X db||^2
  std::vector<double> xd(inst.y.size(), 0.0);
  for (std::size_t c = 0; c < inst.dim(); ++c) {
    if (db[c] == 0.0) continue;
    auto col = inst.X2.column(c);
    for (std::size_t i = 0; i < xd.size(); ++i) xd[i] += db[c] * col[i];
  }
  double quad = 0.0;
  for (double v : xd) quad += v * v;
  const double rhs = -lin - 0.5 * quad;
  return lhs - rhs;
}

/// Exact expected objective decrease for one parallel round: enumerate all
/// ordered P-draws without replacement under weights p (renormalizing after
/// each draw), discard draws whose variable set violates pairwise
/// rho-compatibility, and return the mean decrease conditioned on survival.
inline double expected_decrease(const NonnegLassoInstance& inst, std::span<const double> p,
                                std::size_t workers, double rho) {
  const std::size_t d = inst.dim();
  if (d > 16) throw std::invalid_argument("enumeration bound exceeded (2J > 16)");
  if (p.size() != d) throw std::invalid_argument("weight vector has wrong length");
  double total = 0.0;
  std::size_t positive = 0;
  for (double w : p) {
    if (w < 0.0) throw std::invalid_argument("negative weight");
    if (w > 0.0) ++positive;
    total += w;
  }
  if (total <= 0.0) throw std::invalid_argument("degenerate weight vector");
  const std::size_t draws = std::min(workers, positive);

  const std::vector<double> db = delta_beta_all(inst);
  const double f0 = inst.objective();

  double surviving_mass = 0.0;
  double weighted_decrease = 0.0;
  std::vector<std::size_t> set;
  std::function<void(double, double)> recurse = [&](double prob, double remaining) {
    if (set.size() == draws) {
      for (std::size_t a = 0; a < set.size(); ++a)
        for (std::size_t b = a + 1; b < set.size(); ++b)
          if (std::abs(inst.X2.correlation(set[a], set[b])) > rho) return;  // discarded draw
      std::vector<double> next(inst.beta);
      for (std::size_t c : set) next[c] = std::max(0.0, next[c] + db[c]);
      surviving_mass += prob;
      weighted_decrease += prob * (f0 - inst.objective_at(next));
      return;
    }
    for (std::size_t c = 0; c < d; ++c) {
      if (p[c] <= 0.0) continue;
      if (std::find(set.begin(), set.end(), c) != set.end()) continue;
      set.push_back(c);
      recurse(prob * p[c] / remaining, remaining - p[c]);
      set.pop_back();
    }
  };
  recurse(1.0, total);
  if (surviving_mass <= 0.0) throw std::runtime_error("no rho-compatible draws");
  return weighted_decrease / surviving_mass;
}

/// Exhaustive Step 2: the exact argmin over P-subsets of the summed absolute
/// dependency, subject to pairwise rho. Falls back to the largest feasible
/// subset when no P-subset qualifies; ties go to the lexicographically
/// smallest id set.
inline std::vector<int> optimal_subset(std::span<const int> candidates,
                                       const std::function<double(int, int)>& dep, double rho,
                                       std::size_t workers) {
  const std::size_t n = candidates.size();
  if (n > 16) throw std::invalid_argument("enumeration bound exceeded");
  std::vector<int> sorted(candidates.begin(), candidates.end());
  std::sort(sorted.begin(), sorted.end());

  for (std::size_t size = std::min(workers, n); size >= 1; --size) {
    bool found = false;
    double best_obj = 0.0;
    std::vector<int> best;
    std::vector<std::size_t> idx(size);
    // enumerate combinations in lexicographic order over sorted ids
    std::function<void(std::size_t, std::size_t)> comb = [&](std::size_t start, std::size_t depth) {
      if (depth == size) {
        double obj = 0.0;
        for (std::size_t a = 0; a < size; ++a)
          for (std::size_t b = a + 1; b < size; ++b) {
            const double v = std::abs(dep(sorted[idx[a]], sorted[idx[b]]));
            if (v > rho) return;
            obj += v;
          }
        if (!found || obj < best_obj) {
          found = true;
          best_obj = obj;
          best.clear();
          for (std::size_t a = 0; a < size; ++a) best.push_back(sorted[idx[a]]);
        }
        return;
      }
      for (std::size_t c = start; c + (size - depth) <= n; ++c) {
        idx[depth] = c;
        comb(c + 1, depth + 1);
      }
    };
    comb(0, 0);
    if (found) return best;
  }
  return {};
}

/// Reported (never enforced) check of the theorem hypothesis:
/// max over pairs of rho * |db_j| * |db_k|.
inline double interference_term(const NonnegLassoInstance& inst, std::span<const int> update_set,
                                double rho) {
  if (update_set.size() < 2) return 0.0;
  const std::vector<double> db = delta_beta_all(inst);
  double worst = 0.0;
  for (std::size_t a = 0; a < update_set.size(); ++a)
    for (std::size_t b = a + 1; b < update_set.size(); ++b)
      worst = std::max(worst, rho * std::abs(db[update_set[a]]) * std::abs(db[update_set[b]]));
  return worst;
}

/// Seeded small instance for the oracle suite: a near-orthogonal design (QR
/// of a centered Gaussian matrix), a planted signal, and a coefficient state
/// reached by a few sweeps of sequential nonnegative CD -- the regime the
/// theorem's small-interference hypothesis describes.
inline NonnegLassoInstance make_theory_instance(std::uint64_t seed, std::size_t j_base,
                                                std::size_t n, double lambda, int cd_sweeps = 2) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // centered Gaussian columns, Gram-Schmidt to near-exact orthogonality
  std::vector<std::vector<double>> cols(j_base, std::vector<double>(n));
  for (auto& col : cols) {
    double mean = 0.0;
    for (double& v : col) {
      v = gauss(rng);
      mean += v;
    }
    mean /= static_cast<double>(n);
    for (double& v : col) v -= mean;
  }
  for (std::size_t c = 0; c < j_base; ++c) {
    for (std::size_t prev = 0; prev < c; ++prev) {
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += cols[c][i] * cols[prev][i];
      for (std::size_t i = 0; i < n; ++i) cols[c][i] -= dot * cols[prev][i];
    }
    double ss = 0.0;
    for (double v : cols[c]) ss += v * v;
    const double inv = 1.0 / std::sqrt(ss);
    for (double& v : cols[c]) v *= inv;
  }

  std::vector<double> y(n, 0.0);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (std::size_t c = 0; c < j_base; ++c) {
    const double b = coef(rng);
    for (std::size_t i = 0; i < n; ++i) y[i] += b * cols[c][i];
  }
  for (std::size_t i = 0; i < n; ++i) y[i] += 0.1 * gauss(rng);

  LassoDataset base;
  base.X = StandardizedMatrix::standardize(std::move(cols));
  base.y = standardize_vector(std::move(y));

  NonnegLassoInstance inst;
  LassoDataset dup = duplicate_features(base);
  inst.X2 = std::move(dup.X);
  inst.y = std::move(dup.y);
  inst.lambda = lambda;
  inst.beta.assign(2 * j_base, 0.0);

  for (int sweep = 0; sweep < cd_sweeps; ++sweep)
    for (std::size_t c = 0; c < inst.dim(); ++c)
      inst.beta[c] = std::max(0.0, inst.beta[c] + delta_beta(c, inst));
  return inst;
}

}  // namespace strads
