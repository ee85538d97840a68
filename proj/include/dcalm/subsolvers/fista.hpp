// Copyright (c) dcalm contributors

#pragma once

#include <cmath>
#include <functional>
#include <limits>

#include "dcalm/core.hpp"
#include "dcalm/problem.hpp"

namespace dcalm {

/// Componentwise sign(xᵢ)·max(|xᵢ| − τ, 0), the prox of τ‖·‖₁.
inline Vector soft_threshold(const Vector& x, double tau) {
  if (!(tau >= 0.0)) throw InputError("soft_threshold: tau must be nonnegative");
  if (tau == 0.0) return x;
  Vector y(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    const double mag = std::abs(x[i]) - tau;
    y[i] = mag > 0.0 ? std::copysign(mag, x[i]) : 0.0;
  }
  return y;
}

/// Value of a smooth function; writes the gradient when `grad` is non-null.
using SmoothOracle = std::function<double(const Vector& x, Vector* grad)>;

/// min F(x) = smooth(x) + weight·‖x‖₁, or smooth(x) + r(x) when a custom
/// prox for r is supplied (then `nonsmooth_value` should evaluate r).
struct CompositeProblem {
  SmoothOracle smooth;
  double l1_weight = 0.0;
  ProxOracle prox;
  std::function<double(const Vector&)> nonsmooth_value;
  /// Known lower bound on the strong convexity modulus of F (0 if unknown).
  double strong_convexity = 0.0;

  Vector apply_prox(const Vector& x, double step) const {
    if (prox) return prox(x, step);
    return soft_threshold(x, step * l1_weight);
  }

  double nonsmooth(const Vector& x) const {
    if (nonsmooth_value) return nonsmooth_value(x);
    return l1_weight * x.lpNorm<1>();
  }

  double objective(const Vector& x) const { return smooth(x, nullptr) + nonsmooth(x); }
};

struct FistaOptions {
  double initial_lipschitz = 1.0;
  double growth = 2.0;
  int max_backtracks = 80;
};

struct FistaResult {
  Vector x;
  /// Norm of the composite gradient mapping at the last extrapolated point.
  double residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  double lipschitz = 0.0;
};

/// FISTA with backtracking on the Lipschitz estimate. Stops once the
/// gradient mapping L‖y − x⁺‖ drops to `tol`. When the problem declares a
/// strong convexity modulus μ > 0 the momentum is the constant
/// (√L − √μ)/(√L + √μ) instead of the tₖ sequence.
inline FistaResult fista(const CompositeProblem& problem, const Vector& x0,
                         double tol, int max_iter, const FistaOptions& options = {}) {
  require(tol > 0.0, "fista: tol must be positive");
  require(max_iter > 0, "fista: max_iter must be positive");
  require(options.initial_lipschitz > 0.0 && options.growth > 1.0,
          "fista: invalid backtracking options");

  FistaResult result;
  double L = options.initial_lipschitz;
  double t = 1.0;
  Vector x_prev = x0;
  Vector y = x0;
  Vector grad(x0.size());
  Vector grad_next(x0.size());
  Vector x_next;
  const double mu = problem.strong_convexity;
  constexpr double eps = std::numeric_limits<double>::epsilon();

  for (int k = 1; k <= max_iter; ++k) {
    const double fy = problem.smooth(y, &grad);
    if (!std::isfinite(fy) || !all_finite(grad)) {
      throw NumericError("fista: non-finite smooth value or gradient");
    }
    double step_sq = 0.0;
    int tries = 0;
    for (;; ++tries) {
      if (tries > options.max_backtracks) {
        throw NumericError("fista: backtracking failed to find a Lipschitz estimate");
      }
      x_next = problem.apply_prox(y - grad / L, 1.0 / L);
      const Vector d = x_next - y;
      step_sq = d.squaredNorm();
      const double f_next = problem.smooth(x_next, nullptr);
      if (!std::isfinite(f_next)) {
        L *= options.growth;
        continue;
      }
      const double curvature = 0.5 * L * step_sq;
      const double slack = 16.0 * eps * (std::abs(fy) + std::abs(f_next));
      if (curvature > slack) {
        if (f_next <= fy + grad.dot(d) + curvature + slack) break;
      } else {
        // Function values are below rounding resolution; test the gradient
        // Lipschitz bound instead.
        problem.smooth(x_next, &grad_next);
        if ((grad_next - grad).norm() <= L * std::sqrt(step_sq) * (1.0 + 1e-12)) break;
      }
      L *= options.growth;
    }
    result.iterations = k;
    result.residual = L * std::sqrt(step_sq);
    if (result.residual <= tol) {
      result.x = std::move(x_next);
      result.converged = true;
      result.lipschitz = L;
      return result;
    }
    double beta;
    if (mu > 0.0 && mu < L) {
      const double sl = std::sqrt(L), sm = std::sqrt(mu);
      beta = (sl - sm) / (sl + sm);
    } else if (mu >= L) {
      beta = 0.0;
    } else {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      beta = (t - 1.0) / t_next;
      t = t_next;
    }
    y = x_next + beta * (x_next - x_prev);
    x_prev = std::move(x_next);
  }
  result.x = std::move(x_prev);
  result.lipschitz = L;
  return result;
}

}  // namespace dcalm
