#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace strads {

/// Soft-thresholding operator: sign(z) * max(|z| - lam, 0).
inline double soft_threshold(double z, double lam) {
  if (z > lam) return z - lam;
  if (z < -lam) return z + lam;
  return 0.0;
}

/// Dense design matrix whose columns are zero-mean and unit L2-norm.
/// Column-major storage; immutable after construction.
class StandardizedMatrix {
 public:
  StandardizedMatrix() = default;

  /// Center each column and scale to unit norm. Rejects zero-variance columns.
  static StandardizedMatrix standardize(std::vector<std::vector<double>> columns) {
    if (columns.empty()) throw std::invalid_argument("empty matrix");
    const std::size_t n = columns[0].size();
    if (n == 0) throw std::invalid_argument("empty matrix");
    StandardizedMatrix m;
    m.n_ = n;
    m.j_ = columns.size();
    m.data_.resize(m.n_ * m.j_);
    for (std::size_t j = 0; j < m.j_; ++j) {
      auto& col = columns[j];
      if (col.size() != n) throw std::invalid_argument("ragged matrix at column " + std::to_string(j));
      double mean = 0.0;
      for (double v : col) mean += v;
      mean /= static_cast<double>(n);
      double ss = 0.0;
      for (double& v : col) {
        v -= mean;
        ss += v * v;
      }
      if (ss <= 0.0) throw std::invalid_argument("zero variance at column " + std::to_string(j));
      const double inv = 1.0 / std::sqrt(ss);
      double* dst = m.data_.data() + j * n;
      for (std::size_t i = 0; i < n; ++i) dst[i] = col[i] * inv;
    }
    return m;
  }

  /// Wrap columns that already satisfy the invariants (checked).
  static StandardizedMatrix from_standardized(std::vector<std::vector<double>> columns) {
    if (columns.empty() || columns[0].empty()) throw std::invalid_argument("empty matrix");
    StandardizedMatrix m;
    m.n_ = columns[0].size();
    m.j_ = columns.size();
    m.data_.resize(m.n_ * m.j_);
    for (std::size_t j = 0; j < m.j_; ++j) {
      const auto& col = columns[j];
      if (col.size() != m.n_) throw std::invalid_argument("ragged matrix at column " + std::to_string(j));
      double mean = 0.0, ss = 0.0;
      for (double v : col) mean += v;
      mean /= static_cast<double>(m.n_);
      for (double v : col) ss += v * v;
      if (std::abs(mean) > 1e-9 || std::abs(std::sqrt(ss) - 1.0) > 1e-9)
        throw std::invalid_argument("column " + std::to_string(j) + " is not standardized");
      std::copy(col.begin(), col.end(), m.data_.begin() + j * m.n_);
    }
    return m;
  }

  std::size_t n_samples() const { return n_; }
  std::size_t n_features() const { return j_; }

  std::span<const double> column(std::size_t j) const {
    if (j >= j_) throw std::out_of_range("column index " + std::to_string(j) + " out of range");
    return {data_.data() + j * n_, n_};
  }

  /// x_j' x_k. Symmetric; equals 1 for j == k up to rounding.
  double correlation(std::size_t j, std::size_t k) const {
    auto a = column(j);
    auto b = column(k);
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i) s += a[i] * b[i];
    return s;
  }

  double dot(std::size_t j, std::span<const double> v) const {
    auto a = column(j);
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i) s += a[i] * v[i];
    return s;
  }

 private:
  std::size_t n_ = 0;
  std::size_t j_ = 0;
  std::vector<double> data_;  // column-major
};

/// Lasso coefficient state: beta, last update magnitudes, per-variable
/// iteration counters, and the maintained residual r = y - X beta.
struct CoefState {
  std::vector<double> beta;
  std::vector<double> delta_last;
  std::vector<long> iter_counter;
  std::vector<double> residual;

  /// Algorithm state at start: beta = 0, t_j = 2, delta_last = |C - 0| = C,
  /// residual = y.
  static CoefState init(std::span<const double> y, std::size_t j, double init_const) {
    CoefState s;
    s.beta.assign(j, 0.0);
    s.delta_last.assign(j, init_const);
    s.iter_counter.assign(j, 2);
    s.residual.assign(y.begin(), y.end());
    return s;
  }
};

/// A dispatchable unit of variables with a workload estimate.
struct VariableBlock {
  std::vector<int> variable_ids;
  double workload = 0.0;
  int owner_thread = 0;
};

/// The set of blocks issued in one scheduling round.
struct ScheduleRound {
  long round_id = 0;
  int issuing_thread = 0;
  std::vector<VariableBlock> blocks;
};

struct SchedulerConfig {
  int workers = 1;          // P
  int candidates = 2;       // P' (> P)
  int sched_threads = 1;    // S
  double rho = 0.1;
  double eta = 1e-6;
  double lambda = 5e-4;
  double init_const = 1e10;  // C
  std::uint64_t rng_seed = 1;
  long max_iter = 1000;
  double tol = 1e-6;

  void validate() const {
    if (workers < 1) throw std::invalid_argument("workers P must be >= 1");
    if (candidates <= workers) throw std::invalid_argument("candidates P' must exceed workers P");
    if (sched_threads < 1) throw std::invalid_argument("scheduler threads S must be >= 1");
    if (rho < 0.0 || rho > 1.0) throw std::invalid_argument("rho must be in [0,1]");
    if (eta <= 0.0) throw std::invalid_argument("eta must be positive");
    if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
    if (init_const <= 0.0) throw std::invalid_argument("init constant C must be positive");
    if (tol <= 0.0) throw std::invalid_argument("tol must be positive");
  }
};

}  // namespace strads
