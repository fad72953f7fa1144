#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "strads/core.hpp"

namespace strads {

/// File-level failures (open, read, write, malformed content).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LassoDataset {
  StandardizedMatrix X;
  std::vector<double> y;  // centered, unit-norm
};

/// Center y and scale to unit norm, same convention as design columns.
inline std::vector<double> standardize_vector(std::vector<double> y, const std::string& name = "y") {
  if (y.empty()) throw std::invalid_argument("empty " + name);
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double ss = 0.0;
  for (double& v : y) {
    v -= mean;
    ss += v * v;
  }
  if (ss <= 0.0) throw std::invalid_argument("zero-variance " + name);
  const double inv = 1.0 / std::sqrt(ss);
  for (double& v : y) v *= inv;
  return y;
}

/// Observed-entry sparse matrix with row and column indexes into `entries`.
struct SparseRatings {
  struct Entry {
    int row;
    int col;
    double value;
  };

  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<Entry> entries;
  std::vector<std::vector<int>> row_entries;  // entry ids per row (Omega^i)
  std::vector<std::vector<int>> col_entries;  // entry ids per column (Omega_j)

  std::size_t nnz() const { return entries.size(); }
  std::size_t row_nnz(std::size_t i) const { return row_entries[i].size(); }
  std::size_t col_nnz(std::size_t j) const { return col_entries[j].size(); }

  void build_index() {
    row_entries.assign(n_rows, {});
    col_entries.assign(n_cols, {});
    for (std::size_t e = 0; e < entries.size(); ++e) {
      row_entries[entries[e].row].push_back(static_cast<int>(e));
      col_entries[entries[e].col].push_back(static_cast<int>(e));
    }
  }
};

inline LassoDataset load_lasso_csv(const std::string& x_path, const std::string& y_path) {
  std::ifstream xf(x_path);
  if (!xf) throw IoError("cannot open " + x_path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(xf, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string field;
    std::size_t fieldno = 0;
    while (std::getline(ss, field, ',')) {
      ++fieldno;
      try {
        std::size_t pos = 0;
        double v = std::stod(field, &pos);
        if (pos != field.size() && field.find_first_not_of(" \t\r", pos) != std::string::npos)
          throw std::invalid_argument("");
        row.push_back(v);
      } catch (const std::exception&) {
        throw IoError("non-numeric field at row " + std::to_string(lineno) + ", column " +
                      std::to_string(fieldno) + " of " + x_path);
      }
    }
    if (!rows.empty() && row.size() != rows[0].size())
      throw IoError("dimension mismatch: row " + std::to_string(lineno) + " has " +
                    std::to_string(row.size()) + " fields, expected " + std::to_string(rows[0].size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("empty matrix");

  const std::size_t n = rows.size();
  const std::size_t j = rows[0].size();
  std::vector<std::vector<double>> cols(j, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < j; ++c) cols[c][i] = rows[i][c];

  std::ifstream yf(y_path);
  if (!yf) throw IoError("cannot open " + y_path);
  std::vector<double> y;
  lineno = 0;
  while (std::getline(yf, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      y.push_back(std::stod(line));
    } catch (const std::exception&) {
      throw IoError("non-numeric value at line " + std::to_string(lineno) + " of " + y_path);
    }
  }
  if (y.size() != n)
    throw IoError("length mismatch: y=" + std::to_string(y.size()) + ", X rows=" + std::to_string(n));

  LassoDataset d;
  d.X = StandardizedMatrix::standardize(std::move(cols));
  d.y = standardize_vector(std::move(y));
  return d;
}

/// Coordinate-format text: header "N M nnz", then 1-based "i j value" lines.
inline SparseRatings load_ratings_mtx(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path);
  SparseRatings r;
  std::string line;
  std::size_t lineno = 0;
  long n = 0, m = 0, nnz = 0;
  if (!std::getline(f, line)) throw IoError("empty file " + path);
  ++lineno;
  {
    std::stringstream ss(line);
    if (!(ss >> n >> m >> nnz) || n < 1 || m < 1 || nnz < 0)
      throw IoError("malformed header at line 1 of " + path);
  }
  r.n_rows = static_cast<std::size_t>(n);
  r.n_cols = static_cast<std::size_t>(m);
  r.entries.reserve(static_cast<std::size_t>(nnz));
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(static_cast<std::size_t>(nnz) * 2);
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    long i = 0, j = 0;
    double v = 0.0;
    if (!(ss >> i >> j >> v)) throw IoError("malformed entry at line " + std::to_string(lineno));
    if (i < 1 || i > n) throw IoError("row index " + std::to_string(i) + " out of range at line " + std::to_string(lineno));
    if (j < 1 || j > m) throw IoError("column index " + std::to_string(j) + " out of range at line " + std::to_string(lineno));
    const std::uint64_t key = static_cast<std::uint64_t>(i - 1) * r.n_cols + static_cast<std::uint64_t>(j - 1);
    if (!seen.insert(key).second) throw IoError("duplicate entry at line " + std::to_string(lineno));
    r.entries.push_back({static_cast<int>(i - 1), static_cast<int>(j - 1), v});
  }
  if (r.entries.size() != static_cast<std::size_t>(nnz))
    throw IoError("header promises " + std::to_string(nnz) + " entries, file has " + std::to_string(r.entries.size()));
  r.build_index();
  return r;
}

inline void save_ratings_mtx(const std::string& path, const SparseRatings& r) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << r.n_rows << ' ' << r.n_cols << ' ' << r.nnz() << '\n';
  char buf[64];
  for (const auto& e : r.entries) {
    std::snprintf(buf, sizeof buf, "%.17g", e.value);
    f << (e.row + 1) << ' ' << (e.col + 1) << ' ' << buf << '\n';
  }
  if (!f) throw IoError("write failure on " + path);
}

struct SyntheticLasso {
  LassoDataset data;
  std::vector<double> true_beta;
};

/// Correlated synthetic design: columns within a block of `block_size` share
/// a latent factor, col = sqrt(c) z_block + sqrt(1-c) eps, so expected
/// pairwise within-block correlation is about `intra_corr`.
inline SyntheticLasso gen_synthetic_lasso(std::size_t n, std::size_t j, std::size_t k_nonzero,
                                          std::size_t block_size, double intra_corr,
                                          double noise_sd, std::uint64_t seed) {
  if (n < 1 || j < 1) throw std::invalid_argument("n and j must be >= 1");
  if (k_nonzero > j) throw std::invalid_argument("k_nonzero exceeds j");
  if (block_size < 1) throw std::invalid_argument("block_size must be >= 1");
  if (intra_corr < 0.0 || intra_corr >= 1.0) throw std::invalid_argument("intra_corr must be in [0,1)");
  if (noise_sd < 0.0) throw std::invalid_argument("noise_sd must be nonnegative");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const double a = std::sqrt(intra_corr);
  const double b = std::sqrt(1.0 - intra_corr);
  std::vector<std::vector<double>> cols(j, std::vector<double>(n));
  std::vector<double> z(n);
  for (std::size_t c = 0; c < j; ++c) {
    if (c % block_size == 0)
      for (std::size_t i = 0; i < n; ++i) z[i] = gauss(rng);
    for (std::size_t i = 0; i < n; ++i) cols[c][i] = a * z[i] + b * gauss(rng);
  }

  std::vector<double> beta(j, 0.0);
  std::vector<std::size_t> perm(j);
  for (std::size_t c = 0; c < j; ++c) perm[c] = c;
  std::shuffle(perm.begin(), perm.end(), rng);
  std::bernoulli_distribution sign(0.5);
  for (std::size_t k = 0; k < k_nonzero; ++k) beta[perm[k]] = sign(rng) ? 1.0 : -1.0;

  std::vector<double> y(n, 0.0);
  for (std::size_t c = 0; c < j; ++c)
    if (beta[c] != 0.0)
      for (std::size_t i = 0; i < n; ++i) y[i] += beta[c] * cols[c][i];
  if (noise_sd > 0.0)
    for (std::size_t i = 0; i < n; ++i) y[i] += noise_sd * gauss(rng);

  SyntheticLasso out;
  out.data.X = StandardizedMatrix::standardize(std::move(cols));
  out.data.y = standardize_vector(std::move(y));
  out.true_beta = std::move(beta);
  return out;
}

/// Power-law ratings: column popularity Zipf(zipf_exponent), rows uniform,
/// cells sampled without replacement, values = (W* H*)_ij + noise.
inline SparseRatings gen_synthetic_ratings(std::size_t n, std::size_t m, std::size_t rank,
                                           double zipf_exponent, std::size_t target_nnz,
                                           double noise_sd, std::uint64_t seed) {
  if (n < 1 || m < 1 || rank < 1) throw std::invalid_argument("n, m, rank must be >= 1");
  if (zipf_exponent < 0.0) throw std::invalid_argument("zipf_exponent must be nonnegative");
  if (noise_sd < 0.0) throw std::invalid_argument("noise_sd must be nonnegative");
  if (target_nnz > n * m) throw std::invalid_argument("target_nnz exceeds n*m");

  std::mt19937_64 rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(rank));
  std::uniform_real_distribution<double> unif(0.0, scale);
  std::vector<double> W(n * rank), H(m * rank);
  for (double& v : W) v = unif(rng);
  for (double& v : H) v = unif(rng);

  std::vector<double> cdf(m);
  double acc = 0.0;
  for (std::size_t c = 0; c < m; ++c) {
    acc += std::pow(static_cast<double>(c + 1), -zipf_exponent);
    cdf[c] = acc;
  }

  SparseRatings r;
  r.n_rows = n;
  r.n_cols = m;
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto value_at = [&](std::size_t i, std::size_t c) {
    double v = 0.0;
    for (std::size_t t = 0; t < rank; ++t) v += W[i * rank + t] * H[c * rank + t];
    if (noise_sd > 0.0) v += noise_sd * gauss(rng);
    return v;
  };

  if (target_nnz == n * m) {
    r.entries.reserve(target_nnz);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < m; ++c)
        r.entries.push_back({static_cast<int>(i), static_cast<int>(c), value_at(i, c)});
    r.build_index();
    return r;
  }

  std::unordered_set<std::uint64_t> used;
  used.reserve(target_nnz * 2);
  std::vector<std::size_t> col_fill(m, 0);
  std::uniform_real_distribution<double> u01(0.0, acc);
  std::uniform_int_distribution<std::size_t> urow(0, n - 1);
  r.entries.reserve(target_nnz);
  std::size_t next_fallback_col = 0;
  while (r.entries.size() < target_nnz) {
    std::size_t c;
    int tries = 0;
    do {
      const double u = u01(rng);
      c = std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
      if (c >= m) c = m - 1;
      ++tries;
    } while (col_fill[c] >= n && tries < 64);
    if (col_fill[c] >= n) {
      while (col_fill[next_fallback_col] >= n) ++next_fallback_col;
      c = next_fallback_col;
    }
    std::size_t i;
    if (col_fill[c] * 2 < n) {
      do {
        i = urow(rng);
      } while (used.count(static_cast<std::uint64_t>(i) * m + c));
    } else {
      // column is dense; pick uniformly among its free rows
      std::vector<std::size_t> free_rows;
      free_rows.reserve(n - col_fill[c]);
      for (std::size_t q = 0; q < n; ++q)
        if (!used.count(static_cast<std::uint64_t>(q) * m + c)) free_rows.push_back(q);
      i = free_rows[std::uniform_int_distribution<std::size_t>(0, free_rows.size() - 1)(rng)];
    }
    used.insert(static_cast<std::uint64_t>(i) * m + c);
    ++col_fill[c];
    r.entries.push_back({static_cast<int>(i), static_cast<int>(c), value_at(i, c)});
  }
  r.build_index();
  return r;
}

struct TraceRecord {
  long iter = 0;
  double wallclock_s = 0.0;
  double objective = 0.0;
  long active_vars = 0;
  long updates_applied = 0;
  std::string scheduler;
};

inline void write_trace(const std::string& path, const std::vector<TraceRecord>& rows) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << "iter,wallclock_s,objective,active_vars,updates_applied,scheduler\n";
  char buf[128];
  for (const auto& t : rows) {
    std::snprintf(buf, sizeof buf, "%ld,%.12g,%.17g,%ld,%ld,", t.iter, t.wallclock_s, t.objective,
                  t.active_vars, t.updates_applied);
    f << buf << t.scheduler << '\n';
  }
  if (!f) throw IoError("write failure on " + path);
}

}  // namespace strads
