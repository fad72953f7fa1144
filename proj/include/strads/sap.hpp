#pragma once

#include <atomic>
#include <condition_variable>
#include <functional>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <thread>
#include <vector>

#include "strads/core.hpp"

namespace strads {

/// Unnormalized importance weights over one scheduler thread's variables.
struct ImportanceDist {
  std::vector<double> weights;
};

struct CoordUpdate {
  int variable = 0;
  double new_value = 0.0;
  double delta_abs = 0.0;
};

/// User-supplied scheduling hooks, mirroring define_sampling/define_dependency.
struct SchedulerCallbacks {
  std::function<double(int)> sampling;                              // p(j), unnormalized
  std::function<double(int, int)> dependency;                       // d(x_j, x_k), symmetric
  std::function<void(std::span<const CoordUpdate>)> progress;       // round-boundary state update
};

/// A worker failed mid-round; the round was discarded and no state changed.
struct RoundAborted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Fixed pool of P workers with a per-batch barrier. Tasks in one batch must
/// not share mutable state. With one worker, tasks run inline.
class WorkerPool {
 public:
  explicit WorkerPool(int n) : n_(n) {
    for (int w = 1; w < n_; ++w)
      threads_.emplace_back([this] { worker_loop(); });
  }

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  ~WorkerPool() {
    {
      std::lock_guard lk(mu_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  int size() const { return n_; }

  /// Run fn(0..count-1), block until all finish; rethrows the first task error.
  void run(int count, const std::function<void(int)>& fn) {
    if (count <= 0) return;
    if (n_ == 1 || count == 1 || threads_.empty()) {
      for (int i = 0; i < count; ++i) fn(i);
      return;
    }
    {
      std::lock_guard lk(mu_);
      fn_ = &fn;
      total_ = count;
      next_ = 0;
      done_ = 0;
      error_ = nullptr;
    }
    cv_.notify_all();
    // the calling thread works too
    drain();
    std::unique_lock lk(mu_);
    done_cv_.wait(lk, [this] { return done_ == total_; });
    fn_ = nullptr;
    total_ = 0;
    if (error_) std::rethrow_exception(error_);
  }

 private:
  void drain() {
    for (;;) {
      int i;
      {
        std::lock_guard lk(mu_);
        if (next_ >= total_) return;
        i = next_++;
      }
      run_one(i);
    }
  }

  void run_one(int i) {
    try {
      (*fn_)(i);
    } catch (...) {
      std::lock_guard lk(mu_);
      if (!error_) error_ = std::current_exception();
    }
    std::lock_guard lk(mu_);
    if (++done_ == total_) done_cv_.notify_all();
  }

  void worker_loop() {
    for (;;) {
      int i;
      {
        std::unique_lock lk(mu_);
        cv_.wait(lk, [this] { return stop_ || (fn_ && next_ < total_); });
        if (stop_) return;
        if (!fn_ || next_ >= total_) continue;
        i = next_++;
      }
      run_one(i);
    }
  }

  int n_;
  std::vector<std::thread> threads_;
  std::mutex mu_;
  std::condition_variable cv_, done_cv_;
  const std::function<void(int)>* fn_ = nullptr;
  int total_ = 0, next_ = 0, done_ = 0;
  bool stop_ = false;
  std::exception_ptr error_;
};

/// Step 1: draw up to `count` distinct variables without replacement,
/// probability proportional to weight at each draw. The result is ordered by
/// descending weight, ties broken by lower id.
inline std::vector<int> sample_candidates(std::span<const int> ids, std::span<const double> weights,
                                          std::size_t count, std::mt19937_64& rng) {
  std::vector<double> w(weights.begin(), weights.end());
  double total = 0.0;
  std::size_t positive = 0;
  for (double v : w) {
    if (v < 0.0) throw std::invalid_argument("negative importance weight");
    if (v > 0.0) ++positive;
    total += v;
  }
  if (total <= 0.0) throw std::invalid_argument("degenerate importance distribution");
  const std::size_t draws = std::min(count, positive);

  std::vector<std::pair<double, int>> picked;  // (original weight, id)
  picked.reserve(draws);
  for (std::size_t d = 0; d < draws; ++d) {
    const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
    std::size_t sel = w.size();
    double acc = 0.0;
    std::size_t last_positive = w.size();
    for (std::size_t p = 0; p < w.size(); ++p) {
      if (w[p] <= 0.0) continue;
      last_positive = p;
      acc += w[p];
      if (u < acc) {
        sel = p;
        break;
      }
    }
    if (sel == w.size()) sel = last_positive;  // fp edge at the top of the range
    picked.push_back({weights[sel], ids[sel]});
    total -= w[sel];
    w[sel] = 0.0;
    if (total <= 0.0) break;
  }

  std::sort(picked.begin(), picked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<int> out;
  out.reserve(picked.size());
  for (auto& [_, id] : picked) out.push_back(id);
  return out;
}

/// Step 2: greedy importance-ordered pass. Accepts a candidate iff its
/// dependency against every already-accepted variable is within rho; stops at
/// `cap` accepted. May return fewer than cap (under-full rounds are allowed).
inline std::vector<int> filter_dependent(std::span<const int> candidates,
                                         const std::function<double(int, int)>& dep, double rho,
                                         std::size_t cap) {
  std::vector<int> accepted;
  for (int j : candidates) {
    if (accepted.size() >= cap) break;
    bool ok = true;
    for (int k : accepted) {
      if (std::abs(dep(j, k)) > rho) {
        ok = false;
        break;
      }
    }
    if (ok) accepted.push_back(j);
  }
  return accepted;
}

/// Step 3: longest-processing-time greedy. Sort by descending workload,
/// assign each block to the least-loaded of `target` bins (ties -> lowest
/// bin), return bin unions. Output size is min(target, |blocks|).
inline std::vector<VariableBlock> merge_blocks(std::vector<VariableBlock> blocks, std::size_t target) {
  if (blocks.empty()) throw std::invalid_argument("merge_blocks: empty input");
  if (target < 1) throw std::invalid_argument("merge_blocks: target must be >= 1");
  for (const auto& b : blocks) {
    if (b.variable_ids.empty()) throw std::invalid_argument("merge_blocks: empty block");
    if (!(b.workload > 0.0)) throw std::invalid_argument("merge_blocks: nonpositive workload");
  }
  std::stable_sort(blocks.begin(), blocks.end(), [](const auto& a, const auto& b) {
    if (a.workload != b.workload) return a.workload > b.workload;
    return a.variable_ids[0] < b.variable_ids[0];
  });
  const std::size_t bins = std::min(target, blocks.size());
  std::vector<VariableBlock> out(bins);
  std::vector<double> load(bins, 0.0);
  for (auto& b : blocks) {
    std::size_t best = 0;
    for (std::size_t q = 1; q < bins; ++q)
      if (load[q] < load[best]) best = q;
    load[best] += b.workload;
    out[best].workload += b.workload;
    out[best].owner_thread = b.owner_thread;
    out[best].variable_ids.insert(out[best].variable_ids.end(), b.variable_ids.begin(),
                                  b.variable_ids.end());
  }
  return out;
}

/// Execution side of a round: `execute` runs on workers against an immutable
/// snapshot; `apply` runs serially at the barrier; `workload` estimates a
/// variable's cost (defaults to 1).
struct RoundHooks {
  std::function<std::vector<CoordUpdate>(const VariableBlock&)> execute;
  std::function<void(std::span<const CoordUpdate>)> apply;
  std::function<double(int)> workload;
};

struct RoundStats {
  long dependency_calls = 0;
  long rho_violations = 0;
  long rounds = 0;
  double simulated_cost = 0.0;  // cumulative critical-path workload
};

struct RoundReport {
  ScheduleRound round;
  std::vector<CoordUpdate> updates;
};

/// Dispatch an accepted variable set as load-balanced blocks, barrier, apply.
/// All-or-nothing: a worker failure leaves state untouched and throws.
inline RoundReport dispatch_round(std::span<const int> accepted, const SchedulerConfig& cfg,
                                  WorkerPool& pool, const RoundHooks& hooks, long round_id,
                                  int thread_id, RoundStats* stats = nullptr) {
  RoundReport rep;
  rep.round.round_id = round_id;
  rep.round.issuing_thread = thread_id;
  if (accepted.empty()) return rep;

  std::vector<VariableBlock> singles;
  singles.reserve(accepted.size());
  for (int j : accepted) {
    double w = hooks.workload ? hooks.workload(j) : 1.0;
    singles.push_back({{j}, w, thread_id});
  }
  rep.round.blocks = merge_blocks(std::move(singles), static_cast<std::size_t>(cfg.workers));

  std::vector<std::vector<CoordUpdate>> results(rep.round.blocks.size());
  const auto& blocks = rep.round.blocks;
  try {
    pool.run(static_cast<int>(blocks.size()),
             [&](int b) { results[b] = hooks.execute(blocks[b]); });
  } catch (const std::exception& e) {
    throw RoundAborted(std::string("round ") + std::to_string(round_id) + " aborted: " + e.what());
  }

  for (auto& r : results)
    rep.updates.insert(rep.updates.end(), r.begin(), r.end());
  std::sort(rep.updates.begin(), rep.updates.end(),
            [](const CoordUpdate& a, const CoordUpdate& b) { return a.variable < b.variable; });
  hooks.apply(rep.updates);

  if (stats) {
    ++stats->rounds;
    double crit = 0.0;
    for (const auto& b : blocks) crit = std::max(crit, b.workload);
    stats->simulated_cost += crit;
  }
  return rep;
}

/// Step 4 helper: feed applied updates to progress_fn, then re-check that
/// sampling weights stayed nonnegative for the touched variables.
inline void update_progress(const SchedulerCallbacks& cb, std::span<const CoordUpdate> updates) {
  cb.progress(updates);
  for (const auto& u : updates)
    if (cb.sampling(u.variable) < 0.0)
      throw std::runtime_error("progress produced negative weight for variable " +
                               std::to_string(u.variable));
}

/// One full SAP round (Steps 1-4) over one thread's owned variables.
/// `presampled`, when given, supplies Step 1's candidate identities (their
/// ordering is refreshed against current weights before filtering).
inline RoundReport run_round(std::span<const int> owned, const SchedulerCallbacks& cb,
                             const SchedulerConfig& cfg, WorkerPool& pool, const RoundHooks& hooks,
                             std::mt19937_64& rng, long round_id, int thread_id,
                             RoundStats* stats = nullptr,
                             const std::vector<int>* presampled = nullptr) {
  std::vector<int> candidates;
  if (presampled) {
    candidates = *presampled;
    std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
      const double wa = cb.sampling(a), wb = cb.sampling(b);
      if (wa != wb) return wa > wb;
      return a < b;
    });
  } else {
    std::vector<double> weights(owned.size());
    for (std::size_t q = 0; q < owned.size(); ++q) weights[q] = cb.sampling(owned[q]);
    candidates = sample_candidates(owned, weights, static_cast<std::size_t>(cfg.candidates), rng);
  }

  auto counted_dep = [&](int j, int k) {
    if (stats) ++stats->dependency_calls;
    return cb.dependency(j, k);
  };
  std::vector<int> accepted =
      filter_dependent(candidates, counted_dep, cfg.rho, static_cast<std::size_t>(cfg.workers));

  // runtime rho-safety assertion over the dispatched set
  if (stats) {
    for (std::size_t a = 0; a < accepted.size(); ++a)
      for (std::size_t b = a + 1; b < accepted.size(); ++b)
        if (std::abs(cb.dependency(accepted[a], accepted[b])) > cfg.rho + 1e-12)
          ++stats->rho_violations;
  }

  RoundReport rep = dispatch_round(accepted, cfg, pool, hooks, round_id, thread_id, stats);
  update_progress(cb, rep.updates);
  return rep;
}

}  // namespace strads
