// Copyright (c) dcalm contributors

#pragma once

#include <algorithm>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "dcalm/core.hpp"
#include "dcalm/problem.hpp"
#include "dcalm/psalmdc.hpp"
#include "dcalm/subproblem.hpp"

namespace dcalm {

/// Classical safeguarded augmented Lagrangian scheme for the convex,
/// constrained DCA subproblems.
struct InnerAlmParams {
  double initial_penalty = 10.0;
  double penalty_growth = 10.0;
  /// Penalty grows unless infeasibility shrinks by at least this factor.
  double reduction_ratio = 0.5;
  /// Safeguarded estimates are clamped to [−B, B] (and [0, B] for λ).
  double safeguard_bound = 1e6;
  /// Feasibility and complementarity tolerance of an inner solve.
  double tolerance = 1e-4;
  int max_iterations = 50;
};

struct DcaParams {
  /// Stops once ‖x^{k+1} − x^k‖ ≤ tolerance.
  double tolerance = 1e-3;
  int max_outer_iterations = 1000;
  double wall_clock_limit = std::numeric_limits<double>::infinity();
  /// Weight of the (w/2)‖x − x^k‖² term added to both DC components.
  double prox_weight = 1.0;
  InnerAlmParams inner;
  std::shared_ptr<const InnerSolver> inner_solver;
  /// Optimality tolerance handed to the subsolver; defaults to inner.tolerance.
  std::optional<double> subsolver_tolerance;
  int subsolver_max_iterations = 20000;

  double effective_subsolver_tolerance() const {
    return subsolver_tolerance.value_or(inner.tolerance);
  }

  void validate() const {
    require(tolerance > 0.0, "DcaParams: tolerance must be positive");
    require(max_outer_iterations > 0, "DcaParams: max_outer_iterations must be positive");
    require(wall_clock_limit > 0.0, "DcaParams: wall_clock_limit must be positive");
    require(prox_weight > 0.0, "DcaParams: prox_weight must be positive");
    require(inner.initial_penalty > 0.0, "DcaParams: initial penalty must be positive");
    require(inner.penalty_growth > 1.0, "DcaParams: penalty growth must exceed 1");
    require(inner.reduction_ratio > 0.0 && inner.reduction_ratio < 1.0,
            "DcaParams: reduction ratio must lie in (0, 1)");
    require(inner.safeguard_bound > 0.0, "DcaParams: safeguard bound must be positive");
    require(inner.tolerance > 0.0, "DcaParams: inner tolerance must be positive");
    require(inner.max_iterations > 0, "DcaParams: inner max_iterations must be positive");
    require(effective_subsolver_tolerance() > 0.0, "DcaParams: subsolver tolerance must be positive");
  }
};

/// Multiplier estimates carried between consecutive inner solves.
struct AlmMultipliers {
  Vector lambda;
  Vector mu;
};

struct InnerAlmResult {
  Vector x;
  Vector lambda;
  Vector mu;
  bool converged = false;
  int iterations = 0;
  int subsolver_iterations = 0;
  double infeasibility = std::numeric_limits<double>::infinity();
  double penalty = 0.0;
};

/// Solves min g(x) − ŝᵀx + (w/2)‖x − x̂‖² s.t. Ax = b, c(x) ≤ 0 (x ∈ C kept
/// in the subsolver). `model` supplies the program, x̂, ŝ and w; its
/// multiplier and penalty fields are overwritten. Converged means the
/// subsolver met its tolerance and max(‖Ax − b‖, ‖min{−c(x), λ}‖) ≤
/// inner.tolerance.
inline InnerAlmResult inner_safeguarded_alm(AugmentedSubproblem model, const DcaParams& params,
                                            const Vector& start,
                                            const AlmMultipliers* warm = nullptr) {
  const DcProgram& prog = *model.program;
  const Index m = prog.num_inequalities;
  const Index p = prog.num_equalities();
  const double bound = params.inner.safeguard_bound;
  const FistaInnerSolver fallback;
  const InnerSolver& solver = params.inner_solver
                                  ? *params.inner_solver
                                  : static_cast<const InnerSolver&>(fallback);
  const double sub_tol = params.effective_subsolver_tolerance();

  Vector u_bar = Vector::Zero(m);
  Vector v_bar = Vector::Zero(p);
  if (warm && warm->lambda.size() == m) u_bar = warm->lambda.cwiseMax(0.0).cwiseMin(bound);
  if (warm && warm->mu.size() == p) v_bar = warm->mu.cwiseMax(-bound).cwiseMin(bound);
  double rho = params.inner.initial_penalty;

  InnerAlmResult out;
  if (m == 0 && p == 0) {
    model.u = u_bar;
    model.v = v_bar;
    model.rho = rho;
    InnerResult r = solver.solve(model, start, sub_tol, params.subsolver_max_iterations);
    out.x = std::move(r.x);
    out.lambda = u_bar;
    out.mu = v_bar;
    out.iterations = 1;
    out.subsolver_iterations = r.iterations;
    out.converged = r.converged;
    out.infeasibility = 0.0;
    out.penalty = rho;
    return out;
  }

  Vector x = start;
  double prev_infeasibility = std::numeric_limits<double>::infinity();
  InnerAlmResult best;
  for (int it = 1; it <= params.inner.max_iterations; ++it) {
    model.u = u_bar;
    model.v = v_bar;
    model.rho = rho;
    InnerResult r = solver.solve(model, x, sub_tol, params.subsolver_max_iterations);
    out.subsolver_iterations += r.iterations;
    x = std::move(r.x);

    Vector lambda = Vector::Zero(m);
    double infeasibility = 0.0;
    if (m > 0) {
      const Vector cx = prog.constraint_values(x);
      lambda = (u_bar + rho * cx).cwiseMax(0.0);
      infeasibility = complementarity_residual(cx, lambda);
    }
    Vector mu = Vector::Zero(p);
    if (p > 0) {
      const Vector res = prog.equality_residual(x);
      mu = v_bar + rho * res;
      infeasibility = std::max(infeasibility, res.norm());
    }

    if (infeasibility < best.infeasibility) {
      best.x = x;
      best.lambda = lambda;
      best.mu = mu;
      best.infeasibility = infeasibility;
      best.penalty = rho;
    }
    if (r.converged && infeasibility <= params.inner.tolerance) {
      out.x = std::move(x);
      out.lambda = std::move(lambda);
      out.mu = std::move(mu);
      out.converged = true;
      out.iterations = it;
      out.infeasibility = infeasibility;
      out.penalty = rho;
      return out;
    }
    if (infeasibility > params.inner.reduction_ratio * prev_infeasibility) {
      rho *= params.inner.penalty_growth;
    }
    prev_infeasibility = infeasibility;
    u_bar = lambda.cwiseMin(bound);
    v_bar = mu.cwiseMax(-bound).cwiseMin(bound);
    out.iterations = it;
  }
  best.iterations = out.iterations;
  best.subsolver_iterations = out.subsolver_iterations;
  best.converged = false;
  return best;
}

/// Builds the proximal DCA model at x^k: g(x) − h(x^k) − s^{kᵀ}(x − x^k) +
/// (w/2)‖x − x^k‖².
inline AugmentedSubproblem dca_model(const DcProgram& prog, const Vector& x_k,
                                     double prox_weight) {
  AugmentedSubproblem model;
  model.program = &prog;
  model.center = x_k;
  const OracleValue hx = prog.h(x_k);
  model.center_h = hx.value;
  model.center_s = hx.subgradient;
  model.prox_weight = prox_weight;
  model.u = Vector::Zero(prog.num_inequalities);
  model.v = Vector::Zero(prog.num_equalities());
  return model;
}

/// One proximal linearized DCA step from x^k.
inline InnerAlmResult dca_step(const DcProgram& prog, const Vector& x_k, const DcaParams& params,
                               const AlmMultipliers* warm = nullptr) {
  require_size(x_k, prog.dimension, "dca_step: x_k");
  return inner_safeguarded_alm(dca_model(prog, x_k, params.prox_weight), params, x_k, warm);
}

struct DcaResult {
  PrimalDualPoint point;
  SolveStatus status = SolveStatus::IterationLimit;
  std::vector<IterationReport> reports;
  int inner_iterations = 0;
};

/// Proximal linearized DCA; the subproblems keep every constraint and are
/// solved by the inner safeguarded ALM, warm started with the previous
/// multipliers.
inline DcaResult dca_solve(const DcProgram& prog, const DcaParams& params, const Vector& x0) {
  prog.validate();
  params.validate();
  require_size(x0, prog.dimension, "dca_solve: x0");

  const Stopwatch clock;
  DcaResult result;
  Vector x = x0;
  AlmMultipliers warm{Vector::Zero(prog.num_inequalities), Vector::Zero(prog.num_equalities())};
  result.point = {x, warm.lambda, warm.mu};

  for (int k = 0; k < params.max_outer_iterations; ++k) {
    InnerAlmResult step = dca_step(prog, x, params, &warm);
    result.inner_iterations += step.subsolver_iterations;

    IterationReport rep;
    rep.k = k;
    rep.objective = prog.objective(step.x);
    rep.equality_norm = prog.equality_residual(step.x).norm();
    rep.complementarity_norm =
        prog.num_inequalities > 0
            ? complementarity_residual(prog.constraint_values(step.x), step.lambda)
            : 0.0;
    rep.step_norm = (step.x - x).norm();
    rep.sigma = params.prox_weight;
    rep.rho = step.penalty;
    rep.inner_iterations = step.subsolver_iterations;

    result.point = {step.x, step.lambda, step.mu};
    if (!step.converged) {
      rep.branch = StepKind::Terminated;
      rep.elapsed = clock.wall_seconds();
      result.reports.push_back(rep);
      result.status = SolveStatus::InnerSolverFailure;
      return result;
    }
    warm.lambda = step.lambda;
    warm.mu = step.mu;
    x = step.x;

    const bool done = rep.step_norm <= params.tolerance;
    rep.branch = done ? StepKind::Terminated : StepKind::Progress;
    rep.elapsed = clock.wall_seconds();
    result.reports.push_back(rep);
    if (done) {
      result.status = SolveStatus::Converged;
      return result;
    }
    if (rep.elapsed >= params.wall_clock_limit) {
      result.status = SolveStatus::TimeLimit;
      return result;
    }
  }
  result.status = SolveStatus::IterationLimit;
  return result;
}

}  // namespace dcalm
