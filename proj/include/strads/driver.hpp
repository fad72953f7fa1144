#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "strads/baselines.hpp"
#include "strads/lasso.hpp"
#include "strads/mf.hpp"
#include "strads/runtime.hpp"

namespace strads {

/// NaN/Inf reached the objective; partial trace is preserved by the caller.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class LassoScheduler { Sap, StaticBlock, Random, Cyclic };

inline const char* scheduler_name(LassoScheduler s) {
  switch (s) {
    case LassoScheduler::Sap: return "sap";
    case LassoScheduler::StaticBlock: return "static";
    case LassoScheduler::Random: return "random";
    case LassoScheduler::Cyclic: return "cyclic";
  }
  return "?";
}

struct LassoRunResult {
  double final_objective = 0.0;
  long rounds = 0;
  std::string stop_reason;  // "max_iter" or "tolerance"
  double final_kkt = 0.0;
  RunStats stats;
};

namespace detail {

inline void assert_rho_safety(const std::vector<int>& accepted,
                              const std::function<double(int, int)>& dep, double rho,
                              RoundStats& stats) {
  for (std::size_t a = 0; a < accepted.size(); ++a)
    for (std::size_t b = a + 1; b < accepted.size(); ++b)
      if (std::abs(dep(accepted[a], accepted[b])) > rho + 1e-12) ++stats.rho_violations;
}

}  // namespace detail

/// Run one Lasso scheduler to convergence or max_iter, appending one trace
/// record per round. Wallclock in the trace is simulated (cumulative
/// critical-path cost, one variable update = N fused ops at 1 ns each) so
/// that traces are reproducible byte-for-byte; measured time is the caller's
/// concern. Trace rows survive in `trace` if a numeric failure aborts the run.
inline LassoRunResult run_lasso(LassoProblem& prob, const SchedulerConfig& cfg,
                                LassoScheduler sched, ImportanceKind kind,
                                std::vector<TraceRecord>& trace) {
  cfg.validate();
  const std::size_t j = prob.data.X.n_features();
  const double cost_unit = static_cast<double>(prob.data.X.n_samples()) * 1e-9;
  WorkerPool pool(cfg.workers);
  SchedulerCallbacks cb = lasso_callbacks(prob, cfg, kind);
  RoundHooks hooks = lasso_hooks(prob, prob.coef.residual);

  LassoRunResult res;
  const long window = static_cast<long>((j + cfg.workers - 1) / cfg.workers);
  double window_obj = lasso_objective(prob);
  long total_updates = 0;
  bool stop = false;

  auto record_round = [&](long round, const RoundReport& rep) -> bool {
    total_updates += static_cast<long>(rep.updates.size());
    const double obj = lasso_objective(prob);
    if (!std::isfinite(obj)) throw NumericError("objective is not finite at round " + std::to_string(round));
    long active = 0;
    for (double b : prob.coef.beta)
      if (b != 0.0) ++active;
    trace.push_back({round, res.stats.rounds.simulated_cost * cost_unit, obj, active, total_updates,
                     scheduler_name(sched)});
    if ((round + 1) % 100 == 0) {
      check_residual_drift(prob);
      rebuild_residual(prob);  // keep fp error from accumulating over long runs
    }
    if ((round + 1) % window == 0) {
      const double rel = std::abs(window_obj - obj) / std::max(1.0, std::abs(obj));
      window_obj = obj;
      if (rel < cfg.tol || kkt_violation(prob) < cfg.tol) {
        res.stop_reason = "tolerance";
        return true;
      }
    }
    return false;
  };

  if (sched == LassoScheduler::Sap) {
    std::mt19937_64 part_rng(cfg.rng_seed);
    auto owned = partition_variables(j, static_cast<std::size_t>(cfg.sched_threads), part_rng);
    std::vector<SchedulerThreadState> threads(owned.size());
    for (std::size_t t = 0; t < owned.size(); ++t) {
      threads[t].thread_id = static_cast<int>(t);
      threads[t].owned_variables = std::move(owned[t]);
    }
    res.rounds = round_robin_run(threads, cb, cfg, pool, hooks, record_round, &res.stats);
  } else {
    std::mt19937_64 rng(cfg.rng_seed + 0x9e3779b97f4a7c15ULL);
    for (long round = 0; round < cfg.max_iter && !stop; ++round) {
      std::vector<int> accepted;
      switch (sched) {
        case LassoScheduler::StaticBlock: {
          auto counted = [&](int a, int b) {
            ++res.stats.rounds.dependency_calls;
            return cb.dependency(a, b);
          };
          accepted = static_block_schedule(j, static_cast<std::size_t>(cfg.workers),
                                           static_cast<std::size_t>(cfg.candidates), rng, counted,
                                           cfg.rho);
          detail::assert_rho_safety(accepted, cb.dependency, cfg.rho, res.stats.rounds);
          break;
        }
        case LassoScheduler::Random:
          accepted = random_schedule(j, static_cast<std::size_t>(cfg.workers), rng);
          break;
        case LassoScheduler::Cyclic:
          for (int q = 0; q < cfg.workers; ++q)
            accepted.push_back(static_cast<int>((static_cast<std::size_t>(round) *
                                                     static_cast<std::size_t>(cfg.workers) + q) % j));
          break;
        default:
          break;
      }
      RoundReport rep = dispatch_round(accepted, cfg, pool, hooks, round, 0, &res.stats.rounds);
      update_progress(cb, rep.updates);
      stop = record_round(round, rep);
      res.rounds = round + 1;
    }
  }

  if (res.stop_reason.empty()) res.stop_reason = "max_iter";
  res.final_objective = lasso_objective(prob);
  res.final_kkt = kkt_violation(prob);
  return res;
}

struct MfRunResult {
  double final_objective = 0.0;
  std::vector<double> epoch_costs;  // critical-path nnz cost per epoch
};

/// Run CCD matrix factorization for a fixed number of epochs with either
/// nnz-balanced or uniform contiguous blocks.
inline MfRunResult run_mf(FactorState& state, const SparseRatings& ratings, std::size_t p,
                          bool balanced, long epochs, std::vector<TraceRecord>& trace) {
  auto row_blocks = balanced ? build_balanced_blocks(ratings, p, MfAxis::Rows)
                             : uniform_blocks(ratings, p, MfAxis::Rows);
  auto col_blocks = balanced ? build_balanced_blocks(ratings, p, MfAxis::Cols)
                             : uniform_blocks(ratings, p, MfAxis::Cols);
  WorkerPool pool(static_cast<int>(p));
  MfRunResult res;
  const char* name = balanced ? "balanced" : "uniform";
  const long vars_per_epoch = static_cast<long>((state.n + state.m) * state.rank);
  double cum_cost = 0.0;
  long total_updates = 0;
  for (long e = 0; e < epochs; ++e) {
    MfEpochReport rep = mf_epoch(state, ratings, row_blocks, col_blocks, pool);
    if (!std::isfinite(rep.objective)) throw NumericError("objective is not finite at epoch " + std::to_string(e));
    cum_cost += rep.critical_path_cost;
    total_updates += vars_per_epoch;
    long active = static_cast<long>(state.W.size() + state.H.size());
    trace.push_back({e, cum_cost * 1e-9, rep.objective, active, total_updates, name});
    res.epoch_costs.push_back(rep.critical_path_cost);
    res.final_objective = rep.objective;
  }
  return res;
}

}  // namespace strads
