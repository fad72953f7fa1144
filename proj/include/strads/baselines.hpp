#pragma once

#include <random>
#include <vector>

#include "strads/sap.hpp"

namespace strads {

/// Shotgun-style selection: P variables uniformly at random, no dependency
/// filtering, no importance weighting.
inline std::vector<int> random_schedule(std::size_t j, std::size_t p, std::mt19937_64& rng) {
  if (p > j) throw std::invalid_argument("P exceeds variable count J");
  // partial Fisher-Yates over 0..J-1
  std::vector<int> pool(j);
  for (std::size_t q = 0; q < j; ++q) pool[q] = static_cast<int>(q);
  std::vector<int> out;
  out.reserve(p);
  for (std::size_t d = 0; d < p; ++d) {
    const std::size_t pick = std::uniform_int_distribution<std::size_t>(d, j - 1)(rng);
    std::swap(pool[d], pool[pick]);
    out.push_back(pool[d]);
  }
  return out;
}

/// Static-block baseline: uniform candidate draw of P', then the same greedy
/// rho-filter as SAP. Importance is uniform and never updated.
inline std::vector<int> static_block_schedule(std::size_t j, std::size_t p, std::size_t p_prime,
                                              std::mt19937_64& rng,
                                              const std::function<double(int, int)>& dep,
                                              double rho) {
  if (p > j) throw std::invalid_argument("P exceeds variable count J");
  std::vector<int> cand = random_schedule(j, std::min(p_prime, j), rng);
  // uniform weights: candidate order is the id-ascending tie-break
  std::sort(cand.begin(), cand.end());
  return filter_dependent(cand, dep, rho, p);
}

}  // namespace strads
