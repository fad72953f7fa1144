#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "strads/baselines.hpp"
#include "strads/lasso.hpp"

using namespace strads;

TEST_CASE("random_schedule basic contract") {
  std::mt19937_64 rng(1);
  SUBCASE("P = J selects every variable") {
    auto s = random_schedule(6, 6, rng);
    CHECK(std::set<int>(s.begin(), s.end()) == std::set<int>{0, 1, 2, 3, 4, 5});
  }
  SUBCASE("selections are distinct and in range") {
    for (int trial = 0; trial < 200; ++trial) {
      auto s = random_schedule(50, 8, rng);
      std::set<int> seen(s.begin(), s.end());
      CHECK(seen.size() == 8);
      CHECK(*seen.begin() >= 0);
      CHECK(*seen.rbegin() < 50);
    }
  }
  SUBCASE("P > J rejected") { CHECK_THROWS_AS(random_schedule(3, 4, rng), std::invalid_argument); }
}

TEST_CASE("random_schedule is uniform") {
  std::mt19937_64 rng(7);
  const std::size_t j = 20, p = 4;
  const int rounds = 10000;
  std::vector<int> hits(j, 0);
  for (int r = 0; r < rounds; ++r)
    for (int v : random_schedule(j, p, rng)) ++hits[v];

  SUBCASE("per-variable frequency within 5 sigma of p/J") {
    const double mean = static_cast<double>(rounds) * p / j;
    const double sd = std::sqrt(mean * (1.0 - static_cast<double>(p) / j));
    for (std::size_t v = 0; v < j; ++v) CHECK(std::abs(hits[v] - mean) < 5.0 * sd);
  }
  SUBCASE("chi-square goodness of fit does not reject uniformity") {
    const double expected = static_cast<double>(rounds) * p / j;
    double chi2 = 0.0;
    for (std::size_t v = 0; v < j; ++v) {
      const double d = hits[v] - expected;
      chi2 += d * d / expected;
    }
    // Wilson-Hilferty: chi2_k is approx k (1 - 2/(9k) + z sqrt(2/(9k)))^3
    const double k = static_cast<double>(j - 1);
    const double z999 = 3.09;  // p ~ 0.001
    const double cutoff = k * std::pow(1.0 - 2.0 / (9.0 * k) + z999 * std::sqrt(2.0 / (9.0 * k)), 3.0);
    CHECK(chi2 < cutoff);
  }
}

TEST_CASE("static_block_schedule filters exactly like SAP with uniform weights") {
  auto data = gen_synthetic_lasso(60, 30, 5, 6, 0.9, 0.1, 13).data;
  auto dep = [&](int a, int b) { return std::abs(data.X.correlation(a, b)); };
  std::mt19937_64 rng(3);
  const double rho = 0.3;

  SUBCASE("accepted sets are always pairwise rho-compatible") {
    long dep_calls = 0;
    auto counted = [&](int a, int b) {
      ++dep_calls;
      return dep(a, b);
    };
    for (int r = 0; r < 500; ++r) {
      auto s = static_block_schedule(30, 4, 8, rng, counted, rho);
      CHECK(s.size() <= 4);
      CHECK(!s.empty());
      for (std::size_t a = 0; a < s.size(); ++a)
        for (std::size_t b = a + 1; b < s.size(); ++b) CHECK(dep(s[a], s[b]) <= rho + 1e-12);
    }
    CHECK(dep_calls > 0);  // unlike random_schedule, the filter probes structure
  }

  SUBCASE("rho = 1 never filters, so it matches random_schedule capped at P") {
    std::mt19937_64 r1(42), r2(42);
    auto s1 = static_block_schedule(30, 4, 4, r1, dep, 1.0);
    auto s2 = random_schedule(30, 4, r2);
    std::sort(s2.begin(), s2.end());
    CHECK(s1 == s2);
  }
}

TEST_CASE("perfectly correlated duplicates are never co-dispatched by the filter") {
  auto base = gen_synthetic_lasso(40, 8, 3, 4, 0.2, 0.1, 5).data;
  auto dup = duplicate_features(base);  // corr(c, c+8) = -1
  auto dep = [&](int a, int b) { return std::abs(dup.X.correlation(a, b)); };
  std::mt19937_64 rng(9);
  for (int r = 0; r < 1000; ++r) {
    auto s = static_block_schedule(16, 6, 12, rng, dep, 0.99);
    std::set<int> seen(s.begin(), s.end());
    for (int c = 0; c < 8; ++c) CHECK(!(seen.count(c) && seen.count(c + 8)));
  }
}
