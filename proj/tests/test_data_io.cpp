#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "strads/data_io.hpp"

using namespace strads;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  auto d = fs::temp_directory_path() / "strads_data_io_test";
  fs::create_directories(d);
  return d;
}

void put(const fs::path& p, const std::string& text) {
  std::ofstream f(p);
  f << text;
}

}  // namespace

TEST_CASE("load_lasso_csv standardizes columns") {
  auto d = scratch_dir();
  put(d / "x.csv", "1,0\n2,1\n3,2\n");
  put(d / "y.csv", "1\n2\n3\n");
  auto ds = load_lasso_csv((d / "x.csv").string(), (d / "y.csv").string());
  const double s = 1.0 / std::sqrt(2.0);
  for (std::size_t j = 0; j < 2; ++j) {
    CHECK(ds.X.column(j)[0] == doctest::Approx(-s));
    CHECK(ds.X.column(j)[1] == doctest::Approx(0.0));
    CHECK(ds.X.column(j)[2] == doctest::Approx(s));
  }
  double ynorm = 0.0, ymean = 0.0;
  for (double v : ds.y) {
    ynorm += v * v;
    ymean += v;
  }
  CHECK(std::abs(ymean / 3.0) <= 1e-9);
  CHECK(std::abs(std::sqrt(ynorm) - 1.0) <= 1e-9);
}

TEST_CASE("load_lasso_csv error paths") {
  auto d = scratch_dir();
  put(d / "x.csv", "1,0\n2,1\n3,2\n");
  put(d / "y2.csv", "1\n2\n");
  CHECK_THROWS_WITH_AS(load_lasso_csv((d / "x.csv").string(), (d / "y2.csv").string()),
                       "length mismatch: y=2, X rows=3", IoError);

  put(d / "empty.csv", "");
  put(d / "y.csv", "1\n2\n3\n");
  CHECK_THROWS_WITH_AS(load_lasso_csv((d / "empty.csv").string(), (d / "y.csv").string()),
                       "empty matrix", IoError);

  put(d / "bad.csv", "1,zap\n2,1\n3,2\n");
  CHECK_THROWS_AS(load_lasso_csv((d / "bad.csv").string(), (d / "y.csv").string()), IoError);

  put(d / "flat.csv", "5,1\n5,2\n5,3\n");
  CHECK_THROWS_AS(load_lasso_csv((d / "flat.csv").string(), (d / "y.csv").string()),
                  std::invalid_argument);
}

TEST_CASE("load_ratings_mtx parses coordinate format") {
  auto d = scratch_dir();
  put(d / "r.mtx", "2 2 2\n1 1 5.0\n2 2 3.0\n");
  auto r = load_ratings_mtx((d / "r.mtx").string());
  REQUIRE(r.nnz() == 2);
  CHECK(r.entries[0].row == 0);
  CHECK(r.entries[0].col == 0);
  CHECK(r.entries[0].value == 5.0);
  CHECK(r.row_nnz(0) == 1);
  CHECK(r.col_nnz(1) == 1);
}

TEST_CASE("load_ratings_mtx error paths") {
  auto d = scratch_dir();
  put(d / "oob.mtx", "1 1 1\n2 1 1.0\n");
  CHECK_THROWS_WITH_AS(load_ratings_mtx((d / "oob.mtx").string()),
                       "row index 2 out of range at line 2", IoError);
  put(d / "dup.mtx", "2 2 3\n1 1 1.0\n1 1 2.0\n2 2 3.0\n");
  CHECK_THROWS_WITH_AS(load_ratings_mtx((d / "dup.mtx").string()), "duplicate entry at line 3",
                       IoError);
}

TEST_CASE("ratings save/load round trip preserves entries exactly") {
  auto r = gen_synthetic_ratings(30, 20, 3, 0.8, 200, 0.05, 42);
  auto d = scratch_dir();
  const auto path = (d / "roundtrip.mtx").string();
  save_ratings_mtx(path, r);
  auto back = load_ratings_mtx(path);
  REQUIRE(back.nnz() == r.nnz());
  CHECK(back.n_rows == r.n_rows);
  CHECK(back.n_cols == r.n_cols);
  // same cells, bit-identical values (order may differ only if loader reorders; it does not)
  for (std::size_t e = 0; e < r.nnz(); ++e) {
    CHECK(back.entries[e].row == r.entries[e].row);
    CHECK(back.entries[e].col == r.entries[e].col);
    CHECK(back.entries[e].value == r.entries[e].value);
  }
}

TEST_CASE("gen_synthetic_lasso: independent columns have small sample correlation") {
  auto s = gen_synthetic_lasso(200, 50, 5, 10, 0.0, 0.1, 9);
  double acc = 0.0;
  int count = 0;
  for (std::size_t j = 0; j < 50; ++j)
    for (std::size_t k = j + 1; k < 50; ++k) {
      acc += std::abs(s.data.X.correlation(j, k));
      ++count;
    }
  CHECK(acc / count < 0.2);
}

TEST_CASE("gen_synthetic_lasso: block correlation structure") {
  auto s = gen_synthetic_lasso(200, 50, 5, 10, 0.9, 0.1, 9);
  double acc = 0.0;
  int count = 0;
  for (std::size_t b = 0; b < 5; ++b)
    for (std::size_t j = b * 10; j < (b + 1) * 10; ++j)
      for (std::size_t k = j + 1; k < (b + 1) * 10; ++k) {
        acc += std::abs(s.data.X.correlation(j, k));
        ++count;
      }
  CHECK(acc / count >= 0.7);
}

TEST_CASE("gen_synthetic_lasso: degenerate y is rejected") {
  CHECK_THROWS_WITH_AS(gen_synthetic_lasso(50, 10, 0, 5, 0.0, 0.0, 1), "zero-variance y",
                       std::invalid_argument);
}

TEST_CASE("gen_synthetic_lasso invariants and reproducibility") {
  auto a = gen_synthetic_lasso(100, 40, 10, 8, 0.5, 0.2, 77);
  auto b = gen_synthetic_lasso(100, 40, 10, 8, 0.5, 0.2, 77);
  for (std::size_t j = 0; j < 40; ++j) {
    auto ca = a.data.X.column(j);
    auto cb = b.data.X.column(j);
    for (std::size_t i = 0; i < 100; ++i) CHECK(ca[i] == cb[i]);
  }
  CHECK(a.data.y == b.data.y);
  CHECK(a.true_beta == b.true_beta);

  double ymean = 0.0, ynorm = 0.0;
  for (double v : a.data.y) {
    ymean += v;
    ynorm += v * v;
  }
  CHECK(std::abs(ymean / 100.0) <= 1e-9);
  CHECK(std::abs(std::sqrt(ynorm) - 1.0) <= 1e-9);
}

TEST_CASE("gen_synthetic_ratings: uniform popularity stays roughly flat") {
  // 100 expected entries per column; at 10 per column the multinomial
  // max/min ratio routinely exceeds 3, so the bound is only meaningful here
  const std::size_t m = 50;
  auto r = gen_synthetic_ratings(500, m, 3, 0.0, 100 * m, 0.0, 13);
  std::size_t lo = r.nnz(), hi = 0;
  for (std::size_t j = 0; j < m; ++j) {
    lo = std::min(lo, r.col_nnz(j));
    hi = std::max(hi, r.col_nnz(j));
  }
  CHECK(lo > 0);
  CHECK(static_cast<double>(hi) / static_cast<double>(lo) <= 3.0);
}

TEST_CASE("gen_synthetic_ratings: zipf head takes a large share") {
  const std::size_t m = 1000;
  auto r = gen_synthetic_ratings(2000, m, 3, 1.2, 10 * m, 0.0, 13);
  std::size_t top = 0;
  for (std::size_t j = 0; j < m; ++j) top = std::max(top, r.col_nnz(j));
  CHECK(static_cast<double>(top) >= 0.05 * static_cast<double>(r.nnz()));
}

TEST_CASE("gen_synthetic_ratings: full observation") {
  auto r = gen_synthetic_ratings(8, 6, 2, 1.0, 48, 0.0, 3);
  CHECK(r.nnz() == 48);
  std::size_t row_total = 0, col_total = 0;
  for (std::size_t i = 0; i < 8; ++i) row_total += r.row_nnz(i);
  for (std::size_t j = 0; j < 6; ++j) col_total += r.col_nnz(j);
  CHECK(row_total == r.nnz());
  CHECK(col_total == r.nnz());
}

TEST_CASE("gen_synthetic_ratings rejects bad parameters") {
  CHECK_THROWS_AS(gen_synthetic_ratings(4, 4, 2, 1.0, 17, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(gen_synthetic_ratings(4, 4, 0, 1.0, 4, 0.0, 1), std::invalid_argument);
}

TEST_CASE("write_trace format") {
  auto d = scratch_dir();
  const auto path = (d / "trace.csv").string();

  write_trace(path, {});
  {
    std::ifstream f(path);
    std::string line;
    REQUIRE(std::getline(f, line));
    CHECK(line == "iter,wallclock_s,objective,active_vars,updates_applied,scheduler");
    CHECK_FALSE(std::getline(f, line));
  }

  write_trace(path, {{0, 0.25, 1.5, 3, 4, "sap"}, {1, 0.5, 1.25, 3, 8, "sap"}});
  {
    std::ifstream f(path);
    std::string line;
    int lines = 0;
    while (std::getline(f, line)) ++lines;
    CHECK(lines == 3);
  }

  CHECK_THROWS_AS(write_trace("/nonexistent-dir/trace.csv", {}), IoError);
}
