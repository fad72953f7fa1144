#pragma once

#include <algorithm>
#include <random>
#include <unordered_set>
#include <vector>

#include "strads/sap.hpp"

namespace strads {

/// One scheduler thread's fixed slice of the model.
struct SchedulerThreadState {
  int thread_id = 0;
  std::vector<int> owned_variables;
  ImportanceDist local_importance;
};

/// Wire contract between scheduler threads and workers. In-process today;
/// field-complete so a socket transport can carry the same messages.
struct DispatchMsg {
  long round_id = 0;
  int thread_id = 0;
  VariableBlock block;
  long snapshot_version = 0;
};

struct UpdateMsg {
  long round_id = 0;
  int variable = 0;
  double new_value = 0.0;
  double delta_abs = 0.0;
};

/// Seeded random permutation of 0..J-1 sliced into S near-equal chunks.
inline std::vector<std::vector<int>> partition_variables(std::size_t j, std::size_t s,
                                                         std::mt19937_64& rng) {
  if (s < 1) throw std::invalid_argument("S must be >= 1");
  if (s > j) throw std::invalid_argument("S exceeds variable count J");
  std::vector<int> perm(j);
  for (std::size_t q = 0; q < j; ++q) perm[q] = static_cast<int>(q);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::vector<int>> owned(s);
  const std::size_t base = j / s;
  const std::size_t extra = j % s;
  std::size_t at = 0;
  for (std::size_t t = 0; t < s; ++t) {
    const std::size_t sz = base + (t < extra ? 1 : 0);
    owned[t].assign(perm.begin() + at, perm.begin() + at + sz);
    at += sz;
  }
  return owned;
}

struct RunStats {
  RoundStats rounds;
  long cross_thread_dependency_calls = 0;
};

/// Round-robin STRADS loop: global round r is served by thread r mod S; while
/// a round executes, the next thread's candidate set is presampled against
/// the latest applied snapshot (candidate identity one round stale, weights
/// refreshed at dispatch). With S = 1 this reduces exactly to the
/// sample-at-dispatch run_round loop.
///
/// `on_round(round_id, report)` is called after each round; return true to stop.
/// Returns the number of rounds executed.
inline long round_robin_run(std::vector<SchedulerThreadState>& threads, const SchedulerCallbacks& cb,
                            const SchedulerConfig& cfg, WorkerPool& pool, const RoundHooks& hooks,
                            const std::function<bool(long, const RoundReport&)>& on_round,
                            RunStats* stats = nullptr) {
  const std::size_t s = threads.size();
  if (s == 0) throw std::invalid_argument("no scheduler threads");

  // per-thread ownership lookup for the cross-thread dependency guard
  std::vector<std::unordered_set<int>> owned_set(s);
  for (std::size_t t = 0; t < s; ++t)
    owned_set[t].insert(threads[t].owned_variables.begin(), threads[t].owned_variables.end());

  std::vector<std::mt19937_64> rngs;
  rngs.reserve(s);
  for (std::size_t t = 0; t < s; ++t)
    rngs.emplace_back(cfg.rng_seed + 0x9e3779b97f4a7c15ULL * (t + 1));

  std::vector<std::vector<int>> pending(s);
  long round = 0;
  for (; round < cfg.max_iter; ++round) {
    const std::size_t t = static_cast<std::size_t>(round) % s;

    SchedulerCallbacks guarded = cb;
    guarded.dependency = [&, t](int a, int b) {
      if (stats && (!owned_set[t].count(a) || !owned_set[t].count(b)))
        ++stats->cross_thread_dependency_calls;
      return cb.dependency(a, b);
    };

    std::vector<int> cand;
    bool have_cand = false;
    if (s > 1) {
      if (pending[t].empty()) {
        // first turn for this thread: sample fresh at dispatch
        std::vector<double> weights(threads[t].owned_variables.size());
        for (std::size_t q = 0; q < weights.size(); ++q)
          weights[q] = cb.sampling(threads[t].owned_variables[q]);
        cand = sample_candidates(threads[t].owned_variables, weights,
                                 static_cast<std::size_t>(cfg.candidates), rngs[t]);
      } else {
        cand = std::move(pending[t]);
        pending[t].clear();
      }
      have_cand = true;

      // latency hiding: while this round is on the workers, the next thread
      // presamples against the still-unmodified snapshot; candidate identity
      // is one round stale when used, weights are refreshed at dispatch
      const std::size_t nt = static_cast<std::size_t>(round + 1) % s;
      std::vector<double> weights(threads[nt].owned_variables.size());
      for (std::size_t q = 0; q < weights.size(); ++q)
        weights[q] = cb.sampling(threads[nt].owned_variables[q]);
      pending[nt] = sample_candidates(threads[nt].owned_variables, weights,
                                      static_cast<std::size_t>(cfg.candidates), rngs[nt]);
    }

    RoundReport rep =
        run_round(threads[t].owned_variables, guarded, cfg, pool, hooks, rngs[t], round,
                  static_cast<int>(t), stats ? &stats->rounds : nullptr, have_cand ? &cand : nullptr);

    if (on_round(round, rep)) return round + 1;
  }
  return round;
}

}  // namespace strads
