// Copyright (c) dcalm contributors

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "dcalm/applications/recovery.hpp"
#include "dcalm/applications/weber.hpp"
#include "dcalm/core.hpp"
#include "dcalm/dca.hpp"
#include "dcalm/harness/config.hpp"
#include "dcalm/psalmdc.hpp"
#include "dcalm/random.hpp"

namespace dcalm {

/// Outcome of one (instance, solver) pair. Every field except the two
/// timings is a deterministic function of the configuration.
struct RunRecord {
  std::string family;
  /// Sparsity s (recovery) or facility count p (Weber).
  int parameter = 0;
  std::string matrix;
  double refinement = 1.0;
  std::string variant;
  std::string solver;
  int instance = 0;
  std::uint64_t seed = 0;
  bool success = false;
  /// Relative error (recovery) or final objective (Weber).
  double metric = 0.0;
  int iterations = 0;
  std::string status;
  double wall_time = 0.0;
  double cpu_time = 0.0;

  /// Plot series: every identifier except the sweep parameter.
  std::string series() const {
    std::string id = family;
    if (family == "recovery") {
      id += "-" + matrix + "-F" + format_number(refinement) + "-" + variant;
    }
    return id + "-" + solver;
  }

  std::string cell() const {
    std::string id = family;
    if (family == "recovery") {
      id += "-" + matrix + "-F" + format_number(refinement) + "-" + variant + "-s" +
            std::to_string(parameter);
    } else {
      id += "-p" + std::to_string(parameter);
    }
    return id + "-" + solver;
  }

  static std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
  }
};

/// Deterministic ordering of records for merging parallel runs.
inline bool record_order(const RunRecord& a, const RunRecord& b) {
  return std::tie(a.family, a.matrix, a.refinement, a.variant, a.parameter, a.solver, a.instance) <
         std::tie(b.family, b.matrix, b.refinement, b.variant, b.parameter, b.solver, b.instance);
}

/// ‖x* − x̄‖/‖x̄‖ ≤ tol.
inline bool classify_relative_error(double relative_error, double tolerance) {
  return relative_error <= tolerance;
}

inline bool classify_recovery(const Vector& x, const std::optional<Vector>& signal,
                              double tolerance) {
  if (!signal) throw InputError("classify_recovery: missing reference signal");
  return classify_relative_error(relative_error(x, *signal), tolerance);
}

/// Objective and reference agree after rounding to `decimals` places.
inline bool classify_weber(double objective, const std::optional<double>& reference,
                           int decimals = 3) {
  if (!reference) throw InputError("classify_weber: missing reference objective");
  const double scale = std::pow(10.0, decimals);
  return std::llround(objective * scale) == std::llround(*reference * scale);
}

struct CellSummary {
  std::string cell;
  std::string series;
  std::string family;
  int parameter = 0;
  std::string solver;
  int runs = 0;
  int successes = 0;
  /// Over successful runs only; NaN when there are none.
  double mean_wall_time = std::numeric_limits<double>::quiet_NaN();
  double median_wall_time = std::numeric_limits<double>::quiet_NaN();
  double mean_cpu_time = std::numeric_limits<double>::quiet_NaN();
  double median_cpu_time = std::numeric_limits<double>::quiet_NaN();
  double median_iterations = std::numeric_limits<double>::quiet_NaN();
};

inline double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

inline double mean(const std::vector<double>& values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  double total = 0.0;
  for (double v : values) total += v;
  return total / static_cast<double>(values.size());
}

/// Per-cell aggregates, keyed and ordered by cell id.
inline std::map<std::string, CellSummary> summarize(const std::vector<RunRecord>& records) {
  std::map<std::string, std::vector<const RunRecord*>> groups;
  for (const RunRecord& r : records) groups[r.cell()].push_back(&r);
  std::map<std::string, CellSummary> out;
  for (const auto& [cell, members] : groups) {
    CellSummary s;
    s.cell = cell;
    s.series = members.front()->series();
    s.family = members.front()->family;
    s.parameter = members.front()->parameter;
    s.solver = members.front()->solver;
    std::vector<double> wall;
    std::vector<double> cpu;
    std::vector<double> iters;
    for (const RunRecord* r : members) {
      ++s.runs;
      iters.push_back(r->iterations);
      if (!r->success) continue;
      ++s.successes;
      wall.push_back(r->wall_time);
      cpu.push_back(r->cpu_time);
    }
    s.mean_wall_time = mean(wall);
    s.median_wall_time = median(wall);
    s.mean_cpu_time = mean(cpu);
    s.median_cpu_time = median(cpu);
    s.median_iterations = median(iters);
    out.emplace(cell, std::move(s));
  }
  return out;
}

/// Receives every psALMDC iteration of every run; called from worker
/// threads in parallel mode.
using RunObserver =
    std::function<void(const RunRecord& run, const DcProgram& prog, const IterationSnapshot&)>;

struct ExperimentResult {
  std::vector<RunRecord> records;
  std::map<std::string, CellSummary> summary;
  /// Reference optimal values used for Weber classification, per p.
  std::map<int, double> weber_references;
};

namespace detail {

struct RunJob {
  RunRecord record;
  std::function<void(RunRecord&, const RunObserver&)> execute;
};

inline WeberInstance experiment_weber_data(const ExperimentConfig& cfg, int facilities) {
  if (!cfg.weber_data.empty()) {
    return load_weber_csv(cfg.weber_data, facilities, cfg.box_lo, cfg.box_hi);
  }
  return synthetic_weber_instance(cfg.data_seed, cfg.weber_points, facilities, cfg.box_lo,
                                  cfg.box_hi);
}

inline void finish_run(RunRecord& rec, SolveStatus status, int iterations, const Stopwatch& clock) {
  rec.status = std::string(to_string(status));
  rec.iterations = iterations;
  rec.wall_time = clock.wall_seconds();
  rec.cpu_time = clock.cpu_seconds();
}

inline std::vector<RunJob> weber_jobs(const ExperimentConfig& cfg, ExperimentResult& result) {
  std::vector<RunJob> jobs;
  for (std::size_t pi = 0; pi < cfg.facilities.size(); ++pi) {
    const int p = cfg.facilities[pi];
    auto inst = std::make_shared<const WeberInstance>(experiment_weber_data(cfg, p));
    const double reference =
        cfg.reference_objectives.empty()
            ? weber_reference_solution(*inst, derive_seed(cfg.data_seed, "weber-reference", p),
                                       cfg.reference_starts)
                  .objective
            : cfg.reference_objectives[pi];
    result.weber_references[p] = reference;
    const std::string instance_cell = "weber-p" + std::to_string(p);
    for (int i = 0; i < cfg.instances; ++i) {
      for (const std::string& solver : cfg.solvers()) {
        RunJob job;
        job.record.family = "weber";
        job.record.parameter = p;
        job.record.matrix = "none";
        job.record.variant = "none";
        job.record.solver = solver;
        job.record.instance = i;
        job.record.seed = derive_seed(cfg.seed, instance_cell, static_cast<std::uint64_t>(i));
        job.execute = [inst, reference, &cfg](RunRecord& rec, const RunObserver& observer) {
          const DcProgram prog = build_weber_program(*inst);
          const Vector x0 = weber_random_start(*inst, rec.seed);
          const Stopwatch clock;
          Vector x;
          if (rec.solver == "psalmdc") {
            SolverParams params = weber_solver_params(*inst);
            params.wall_clock_limit = cfg.time_limit;
            params.max_outer_iterations = cfg.max_outer_iterations;
            IterationObserver hook;
            if (observer) hook = [&](const IterationSnapshot& s) { observer(rec, prog, s); };
            const SolveResult r =
                solve(prog, params, x0, weber_initial_multipliers(*inst), Vector::Zero(0), hook);
            finish_run(rec, r.status, static_cast<int>(r.reports.size()), clock);
            x = r.point.x;
          } else {
            DcaParams params;
            params.wall_clock_limit = cfg.time_limit;
            params.max_outer_iterations = cfg.max_outer_iterations;
            params.inner_solver = std::make_shared<WeberInnerSolver>(*inst);
            const DcaResult r = dca_solve(prog, params, x0);
            finish_run(rec, r.status, static_cast<int>(r.reports.size()), clock);
            x = r.point.x;
          }
          rec.metric = weber_objective(*inst, x);
          rec.success = classify_weber(rec.metric, reference, cfg.decimals);
        };
        jobs.push_back(std::move(job));
      }
    }
  }
  return jobs;
}

inline std::vector<RunJob> recovery_jobs(const ExperimentConfig& cfg) {
  std::vector<RunJob> jobs;
  for (Index s : cfg.sparsities) {
    RecoverySpec spec;
    spec.n = cfg.n;
    spec.m = cfg.m;
    spec.sparsity = s;
    spec.model = cfg.variant;
    spec.kind = cfg.matrix;
    spec.refinement = cfg.matrix == MatrixKind::OversampledDct ? cfg.refinement : 1.0;
    const std::string instance_cell = "recovery-" + to_string(spec.kind) + "-F" +
                                      RunRecord::format_number(spec.refinement) + "-" +
                                      to_string(spec.model) + "-n" + std::to_string(spec.n) +
                                      "-m" + std::to_string(spec.m) + "-s" + std::to_string(s);
    for (int i = 0; i < cfg.instances; ++i) {
      for (const std::string& solver : cfg.solvers()) {
        RunJob job;
        job.record.family = "recovery";
        job.record.parameter = static_cast<int>(s);
        job.record.matrix = to_string(spec.kind);
        job.record.refinement = spec.refinement;
        job.record.variant = to_string(spec.model);
        job.record.solver = solver;
        job.record.instance = i;
        job.record.seed = derive_seed(cfg.seed, instance_cell, static_cast<std::uint64_t>(i));
        job.execute = [spec, &cfg](RunRecord& rec, const RunObserver& observer) {
          const SparseRecoveryInstance inst = generate_recovery_instance(spec, rec.seed);
          const DcProgram prog = build_recovery_program(inst);
          const Stopwatch clock;
          Vector x;
          if (rec.solver == "psalmdc") {
            SolverParams params = recovery_solver_params(spec.model);
            params.wall_clock_limit = cfg.time_limit;
            params.max_outer_iterations = cfg.max_outer_iterations;
            IterationObserver hook;
            if (observer) hook = [&](const IterationSnapshot& snap) { observer(rec, prog, snap); };
            const SolveResult r = solve(prog, params, inst.x0, Vector::Zero(0),
                                        recovery_initial_multipliers(spec.m), hook);
            finish_run(rec, r.status, static_cast<int>(r.reports.size()), clock);
            x = r.point.x;
          } else {
            DcaParams params;
            params.wall_clock_limit = cfg.time_limit;
            params.max_outer_iterations = cfg.max_outer_iterations;
            const DcaResult r = dca_solve(prog, params, inst.x0);
            finish_run(rec, r.status, static_cast<int>(r.reports.size()), clock);
            x = r.point.x;
          }
          rec.metric = relative_error(x, inst.signal);
          rec.success = classify_recovery(x, inst.signal, cfg.tolerance);
        };
        jobs.push_back(std::move(job));
      }
    }
  }
  return jobs;
}

}  // namespace detail

/// Runs every (cell, instance, solver) combination of the configuration.
/// With threads > 1, workers claim runs from a shared counter; records are
/// merged in deterministic order either way.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                       const RunObserver& observer = {}) {
  cfg.validate();
  ExperimentResult result;
  std::vector<detail::RunJob> jobs =
      cfg.family == Family::Weber ? detail::weber_jobs(cfg, result) : detail::recovery_jobs(cfg);

  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(cfg.threads), jobs.size());
  if (workers <= 1) {
    for (auto& job : jobs) job.execute(job.record, observer);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
          try {
            jobs[i].execute(jobs[i].record, observer);
          } catch (...) {
            const std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  result.records.reserve(jobs.size());
  for (auto& job : jobs) result.records.push_back(std::move(job.record));
  std::sort(result.records.begin(), result.records.end(), record_order);
  result.summary = summarize(result.records);
  return result;
}

}  // namespace dcalm
