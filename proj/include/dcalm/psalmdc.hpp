// Copyright (c) dcalm contributors

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "dcalm/core.hpp"
#include "dcalm/problem.hpp"
#include "dcalm/subproblem.hpp"

namespace dcalm {

/// Tunables of the proximal safeguarded augmented Lagrangian method. The
/// defaults for M, N, α, β, γ, θ and η̄ are the recommended general-purpose
/// values; σ₀, ε₀, q and the tolerances are problem dependent.
struct SolverParams {
  int M = 20;
  int N = 5;
  double alpha = 0.5;
  double beta = 0.9;
  double gamma = 0.9;
  double theta = 0.8;
  double eta_bar = 10.0;
  double sigma0 = 1.0;
  double epsilon0 = 0.1;
  /// Q_k = q·I for every k.
  double q = 1.0;
  /// Stationarity tolerance on σ_k‖Q_k(x^{k+1} − x^k)‖.
  double delta1 = 1e-6;
  /// Feasibility and complementarity tolerance.
  double delta2 = 1e-6;
  int max_outer_iterations = 1000;
  double wall_clock_limit = std::numeric_limits<double>::infinity();
  std::shared_ptr<const InnerSolver> inner_solver;
  /// Defaults to min(δ₁, δ₂)/10.
  std::optional<double> inner_tolerance;
  int inner_max_iterations = 20000;

  double rho0() const { return std::pow(sigma0, gamma); }

  double effective_inner_tolerance() const {
    return inner_tolerance.value_or(std::min(delta1, delta2) / 10.0);
  }

  void validate() const {
    const auto open_unit = [](double t) { return t > 0.0 && t < 1.0; };
    require(M > 0 && N > 0 && N < M, "SolverParams: need 0 < N < M");
    require(open_unit(alpha) && open_unit(beta) && open_unit(gamma) && open_unit(theta),
            "SolverParams: alpha, beta, gamma, theta must lie in (0, 1)");
    require(eta_bar > 1.0, "SolverParams: eta_bar must exceed 1");
    require(sigma0 > 0.0 && epsilon0 > 0.0, "SolverParams: sigma0, epsilon0 must be positive");
    require(q > 0.0, "SolverParams: q must be positive");
    require(delta1 > 0.0 && delta2 > 0.0, "SolverParams: tolerances must be positive");
    require(max_outer_iterations > 0, "SolverParams: max_outer_iterations must be positive");
    require(wall_clock_limit > 0.0, "SolverParams: wall_clock_limit must be positive");
    require(effective_inner_tolerance() > 0.0, "SolverParams: inner tolerance must be positive");
  }
};

struct SolverState {
  int k = 0;
  Vector x;
  Vector s;
  double sigma = 0.0;
  double rho = 0.0;
  double epsilon = 0.0;
  Vector u;
  Vector v;
  int K = 0;
  int I1 = 0;
  /// ‖min{−c(x^k), u^{k−1}/ρ_{k−1}}‖, the complementarity reference.
  double prev_complementarity = 0.0;
  /// ‖Ax^k − b‖.
  double prev_equality_norm = 0.0;
  Vector lambda;
  Vector mu;
};

enum class StepKind { Progress, Escalation, Terminated };

inline std::string_view to_string(StepKind kind) {
  switch (kind) {
    case StepKind::Progress: return "progress";
    case StepKind::Escalation: return "escalation";
    case StepKind::Terminated: return "terminated";
  }
  return "unknown";
}

enum class SolveStatus { Converged, IterationLimit, TimeLimit, InnerSolverFailure };

inline std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::IterationLimit: return "iteration_limit";
    case SolveStatus::TimeLimit: return "time_limit";
    case SolveStatus::InnerSolverFailure: return "inner_solver_failure";
  }
  return "unknown";
}

struct IterationReport {
  int k = 0;
  double objective = 0.0;
  double equality_norm = 0.0;
  double complementarity_norm = 0.0;
  double step_norm = 0.0;
  double sigma = 0.0;
  double rho = 0.0;
  double epsilon = 0.0;
  StepKind branch = StepKind::Progress;
  int inner_iterations = 0;
  double elapsed = 0.0;
};

/// Full before/after view of one outer iteration, for diagnostics and
/// invariant checks.
struct IterationSnapshot {
  int k = 0;
  Vector x;
  Vector x_next;
  Vector u;
  Vector v;
  Vector u_next;
  Vector v_next;
  Vector lambda_next;
  Vector mu_next;
  double sigma = 0.0;
  double rho = 0.0;
  double epsilon = 0.0;
  double sigma_next = 0.0;
  double rho_next = 0.0;
  double epsilon_next = 0.0;
  int K = 0;
  int I1 = 0;
  double q = 0.0;
  double inner_tolerance = 0.0;
  StepKind branch = StepKind::Progress;
};

using IterationObserver = std::function<void(const IterationSnapshot&)>;

struct SolveResult {
  PrimalDualPoint point;
  SolveStatus status = SolveStatus::IterationLimit;
  std::vector<IterationReport> reports;
  int inner_iterations = 0;
  SolverState final_state;
};

/// L_ρ^{(k)}(x, λ, μ): the augmented Lagrangian with −h replaced by its affine
/// majorant at `anchor_x`. With `linearized == false` it is the plain
/// augmented Lagrangian L_ρ (uses −h(x); the anchor arguments are ignored).
inline double adaptive_auglag_value(const DcProgram& prog, const Vector& x,
                                    const Vector& lambda, const Vector& mu, double rho,
                                    const Vector& anchor_x, const Vector& anchor_s,
                                    bool linearized = true) {
  if (!(rho > 0.0)) throw InputError("adaptive_auglag_value: rho must be positive");
  require_size(x, prog.dimension, "adaptive_auglag_value: x");
  double value = prog.g(x).value;
  if (linearized) {
    value -= prog.h(anchor_x).value + anchor_s.dot(x - anchor_x);
  } else {
    value -= prog.h(x).value;
  }
  if (prog.num_equalities() > 0) {
    const Vector r = prog.equality_residual(x);
    value += mu.dot(r) + 0.5 * rho * r.squaredNorm();
  }
  if (prog.num_inequalities > 0) {
    const Vector cx = prog.constraint_values(x);
    value += ((lambda + rho * cx).cwiseMax(0.0).squaredNorm() - lambda.squaredNorm()) /
             (2.0 * rho);
  }
  return value;
}

/// L_ρ(x, λ, μ) with the true −h(x).
inline double auglag_value(const DcProgram& prog, const Vector& x, const Vector& lambda,
                           const Vector& mu, double rho) {
  return adaptive_auglag_value(prog, x, lambda, mu, rho, x, Vector::Zero(x.size()), false);
}

/// Merit ℓ_{k+1} built from (x^{k+1}, λ^{k+1}, μ^{k+1}), u^k and ρ_k. It is
/// nonincreasing (up to the prox decrease) while ρ stays constant.
inline double near_monotone_merit(const DcProgram& prog, const Vector& x_next,
                                  const Vector& lambda_next, const Vector& mu_next,
                                  const Vector& u, double rho) {
  double value = auglag_value(prog, x_next, lambda_next, mu_next, rho);
  if (prog.num_equalities() > 0) value -= rho * prog.equality_residual(x_next).squaredNorm();
  if (prog.num_inequalities > 0) {
    const Vector cx = prog.constraint_values(x_next);
    const double with_lambda =
        (lambda_next + rho * cx).cwiseMax(0.0).squaredNorm() - lambda_next.squaredNorm();
    const double with_u = (u + rho * cx).cwiseMax(0.0).squaredNorm() - u.squaredNorm();
    value -= (with_lambda - with_u) / (2.0 * rho);
  }
  return value;
}

/// State at k = 0. The k = 0 progress references are ‖Ax⁰ − b‖ and
/// ‖min{−c(x⁰), u⁰/ρ₀}‖.
inline SolverState initial_state(const DcProgram& prog, const SolverParams& params,
                                 const Vector& x0, const Vector& u0, const Vector& v0) {
  prog.validate();
  params.validate();
  require_size(x0, prog.dimension, "psalmdc: x0");
  require_size(u0, prog.num_inequalities, "psalmdc: u0");
  require_size(v0, prog.num_equalities(), "psalmdc: v0");
  require((u0.array() >= 0.0).all(), "psalmdc: u0 must be nonnegative");

  SolverState st;
  st.x = x0;
  st.sigma = params.sigma0;
  st.rho = params.rho0();
  st.epsilon = params.epsilon0;
  st.u = u0;
  st.v = v0;
  st.lambda = u0;
  st.mu = v0;
  st.prev_equality_norm = prog.equality_residual(x0).norm();
  st.prev_complementarity =
      prog.num_inequalities > 0
          ? complementarity_residual(prog.constraint_values(x0), u0 / st.rho)
          : 0.0;
  return st;
}

inline AugmentedSubproblem make_subproblem(const DcProgram& prog, const SolverState& state,
                                           const SolverParams& params) {
  AugmentedSubproblem sub;
  sub.program = &prog;
  sub.center = state.x;
  const OracleValue hx = prog.h(state.x);
  sub.center_h = hx.value;
  sub.center_s = state.s.size() == prog.dimension ? state.s : hx.subgradient;
  sub.u = state.u;
  sub.v = state.v;
  sub.rho = state.rho;
  sub.prox_weight = state.sigma * params.q;
  return sub;
}

struct SubproblemOutcome {
  Vector x;
  InnerResult inner;
};

/// Minimizes L_{ρ_k}^{(k)}(·, u^k, v^k) + (σ_k q/2)‖· − x^k‖² over C, warm
/// started at x^k. The returned point never has a larger model value than x^k.
inline SubproblemOutcome solve_subproblem(const DcProgram& prog, const SolverState& state,
                                          const SolverParams& params) {
  const AugmentedSubproblem sub = make_subproblem(prog, state, params);
  const FistaInnerSolver fallback;
  const InnerSolver& solver = params.inner_solver
                                  ? *params.inner_solver
                                  : static_cast<const InnerSolver&>(fallback);
  SubproblemOutcome out;
  out.inner = solver.solve(sub, state.x, params.effective_inner_tolerance(),
                           params.inner_max_iterations);
  out.x = out.inner.x;
  if (prog.set.member(state.x) && sub.objective(out.x) > sub.objective(state.x)) {
    out.x = state.x;
  }
  return out;
}

struct MultiplierUpdate {
  Vector mu;
  Vector lambda;
};

/// μ^{k+1} = v^k + ρ_k(Ax^{k+1} − b), λ^{k+1} = max{0, u^k + ρ_k c(x^{k+1})}.
inline MultiplierUpdate update_multipliers(const SolverState& state, const Vector& x_next,
                                           const DcProgram& prog) {
  MultiplierUpdate m;
  m.mu = prog.num_equalities() > 0 ? Vector(state.v + state.rho * prog.equality_residual(x_next))
                                   : Vector::Zero(0);
  m.lambda = prog.num_inequalities > 0
                 ? Vector((state.u + state.rho * prog.constraint_values(x_next)).cwiseMax(0.0))
                 : Vector::Zero(0);
  return m;
}

/// σ_k q‖x^{k+1} − x^k‖ ≤ δ₁, ‖Ax^{k+1} − b‖ ≤ δ₂ and
/// ‖min{−c(x^{k+1}), λ^{k+1}}‖ ≤ δ₂.
inline bool check_termination(const SolverState& state, const Vector& x_next,
                              const Vector& lambda_next, const DcProgram& prog,
                              const SolverParams& params) {
  const double stationarity = state.sigma * params.q * (x_next - state.x).norm();
  if (!(stationarity <= params.delta1)) return false;
  if (!(prog.equality_residual(x_next).norm() <= params.delta2)) return false;
  if (prog.num_inequalities > 0 &&
      !(complementarity_residual(prog.constraint_values(x_next), lambda_next) <= params.delta2)) {
    return false;
  }
  return true;
}

/// ‖min{−c(x^{k+1}), u^k/ρ_k}‖, which becomes the next complementarity
/// reference.
inline double complementarity_measure(const SolverState& state, const Vector& x_next,
                                      const DcProgram& prog) {
  if (prog.num_inequalities == 0) return 0.0;
  return complementarity_residual(prog.constraint_values(x_next), state.u / state.rho);
}

/// True when feasibility and complementarity both shrank by the factor θ.
inline bool progress_test(const SolverState& state, const Vector& x_next,
                          const DcProgram& prog, double theta) {
  const double eq = prog.equality_residual(x_next).norm();
  const double comp = complementarity_measure(state, x_next, prog);
  return eq <= theta * state.prev_equality_norm && comp <= theta * state.prev_complementarity;
}

struct ParameterUpdate {
  double sigma = 0.0;
  double rho = 0.0;
  double epsilon = 0.0;
  int K = 0;
  int I1 = 0;
};

/// Raises σ (and ρ = σ^γ) after a failed progress test and maintains the
/// counters that decide when ε shrinks.
inline ParameterUpdate escalate_parameters(const SolverState& state, const Vector& x_next,
                                           const SolverParams& params) {
  ParameterUpdate p;
  p.K = state.K;
  p.I1 = state.I1;
  const double step = (x_next - state.x).norm();
  const double step_pow = std::pow(step, params.alpha);
  if (step == 0.0) {
    p.sigma = params.eta_bar * state.sigma;
  } else {
    const double eta = step_pow >= state.epsilon ? params.eta_bar : 1.0;
    const double inverse_step = 1.0 / step_pow;
    const double scaled = eta * state.sigma;
    p.sigma = std::max(inverse_step, scaled);
    if (inverse_step >= scaled) ++p.I1;
  }
  if (step_pow < state.epsilon) ++p.K;
  p.rho = std::pow(p.sigma, params.gamma);
  if (p.K >= params.M && p.I1 >= params.N) {
    p.epsilon = params.beta * state.epsilon;
    p.K = 0;
    p.I1 = 0;
  } else {
    p.epsilon = state.epsilon;
  }
  return p;
}

/// v^{k+1}: minimum-norm v with (v − v^k)ᵀr = 0 for r = Ax^{k+1} − b; v^k
/// itself when r = 0.
inline Vector update_auxiliary_v(const Vector& v, const Vector& residual) {
  require(v.size() == residual.size(), "update_auxiliary_v: length mismatch");
  const double rr = residual.squaredNorm();
  if (rr == 0.0) return v;
  return (v.dot(residual) / rr) * residual;
}

/// u^{k+1}: on the violated set I = {i : cᵢ(x^{k+1}) > 0} replaces u_I by its
/// projection onto span(c_I); other components are kept.
inline Vector update_auxiliary_u(const Vector& u, const Vector& c_values) {
  require(u.size() == c_values.size(), "update_auxiliary_u: length mismatch");
  double uc = 0.0;
  double cc = 0.0;
  for (Index i = 0; i < u.size(); ++i) {
    if (c_values[i] > 0.0) {
      uc += u[i] * c_values[i];
      cc += c_values[i] * c_values[i];
    }
  }
  Vector next = u;
  if (cc == 0.0) return next;
  const double coeff = uc / cc;
  for (Index i = 0; i < u.size(); ++i) {
    if (c_values[i] > 0.0) next[i] = coeff * c_values[i];
  }
  return next;
}

/// Runs the method from (x⁰, u⁰, v⁰). On Converged the returned triple meets
/// the (δ₁, δ₂) termination test; otherwise it is the last iterate.
inline SolveResult solve(const DcProgram& prog, const SolverParams& params, const Vector& x0,
                         const Vector& u0, const Vector& v0,
                         const IterationObserver& observer = {}) {
  SolverState st = initial_state(prog, params, x0, u0, v0);
  const Stopwatch clock;
  SolveResult result;
  result.status = SolveStatus::IterationLimit;

  for (int k = 0; k < params.max_outer_iterations; ++k) {
    st.k = k;
    st.s = prog.h(st.x).subgradient;
    SubproblemOutcome sub = solve_subproblem(prog, st, params);
    result.inner_iterations += sub.inner.iterations;
    const Vector& x_next = sub.x;
    const MultiplierUpdate mult = update_multipliers(st, x_next, prog);

    IterationReport rep;
    rep.k = k;
    rep.objective = prog.objective(x_next);
    rep.equality_norm = prog.equality_residual(x_next).norm();
    rep.complementarity_norm =
        prog.num_inequalities > 0
            ? complementarity_residual(prog.constraint_values(x_next), mult.lambda)
            : 0.0;
    rep.step_norm = (x_next - st.x).norm();
    rep.sigma = st.sigma;
    rep.rho = st.rho;
    rep.epsilon = st.epsilon;
    rep.inner_iterations = sub.inner.iterations;

    IterationSnapshot snap;
    if (observer) {
      snap.k = k;
      snap.x = st.x;
      snap.x_next = x_next;
      snap.u = st.u;
      snap.v = st.v;
      snap.lambda_next = mult.lambda;
      snap.mu_next = mult.mu;
      snap.sigma = st.sigma;
      snap.rho = st.rho;
      snap.epsilon = st.epsilon;
      snap.q = params.q;
      snap.inner_tolerance = params.effective_inner_tolerance();
    }

    if (!sub.inner.converged) {
      rep.branch = StepKind::Terminated;
      rep.elapsed = clock.wall_seconds();
      result.reports.push_back(rep);
      result.status = SolveStatus::InnerSolverFailure;
      st.x = x_next;
      st.lambda = mult.lambda;
      st.mu = mult.mu;
      break;
    }

    if (check_termination(st, x_next, mult.lambda, prog, params)) {
      rep.branch = StepKind::Terminated;
      rep.elapsed = clock.wall_seconds();
      result.reports.push_back(rep);
      if (observer) {
        snap.branch = StepKind::Terminated;
        snap.u_next = st.u;
        snap.v_next = st.v;
        snap.sigma_next = st.sigma;
        snap.rho_next = st.rho;
        snap.epsilon_next = st.epsilon;
        snap.K = st.K;
        snap.I1 = st.I1;
        observer(snap);
      }
      st.x = x_next;
      st.lambda = mult.lambda;
      st.mu = mult.mu;
      result.status = SolveStatus::Converged;
      break;
    }

    const double next_comp_reference = complementarity_measure(st, x_next, prog);
    const bool progressed = progress_test(st, x_next, prog, params.theta);
    ParameterUpdate upd{st.sigma, st.rho, st.epsilon, st.K, st.I1};
    if (!progressed) upd = escalate_parameters(st, x_next, params);
    rep.branch = progressed ? StepKind::Progress : StepKind::Escalation;

    const Vector v_next = prog.num_equalities() > 0
                              ? update_auxiliary_v(st.v, prog.equality_residual(x_next))
                              : Vector::Zero(0);
    const Vector u_next = prog.num_inequalities > 0
                              ? update_auxiliary_u(st.u, prog.constraint_values(x_next))
                              : Vector::Zero(0);

    if (observer) {
      snap.branch = rep.branch;
      snap.u_next = u_next;
      snap.v_next = v_next;
      snap.sigma_next = upd.sigma;
      snap.rho_next = upd.rho;
      snap.epsilon_next = upd.epsilon;
      snap.K = upd.K;
      snap.I1 = upd.I1;
      observer(snap);
    }

    st.prev_equality_norm = rep.equality_norm;
    st.prev_complementarity = next_comp_reference;
    st.sigma = upd.sigma;
    st.rho = upd.rho;
    st.epsilon = upd.epsilon;
    st.K = upd.K;
    st.I1 = upd.I1;
    st.u = u_next;
    st.v = v_next;
    st.x = x_next;
    st.lambda = mult.lambda;
    st.mu = mult.mu;

    rep.elapsed = clock.wall_seconds();
    result.reports.push_back(rep);
    if (rep.elapsed >= params.wall_clock_limit) {
      result.status = SolveStatus::TimeLimit;
      break;
    }
  }

  result.point = {st.x, st.lambda, st.mu};
  result.final_state = std::move(st);
  return result;
}

}  // namespace dcalm
