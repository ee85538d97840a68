// Copyright (c) dcalm contributors

#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "dcalm/core.hpp"
#include "dcalm/subsolvers/fista.hpp"

namespace dcalm {

struct SmoothDescentOptions {
  /// Points the iterates must keep clear of (e.g. kinks of the objective).
  std::vector<Vector> avoid;
  double min_distance = 1e-12;
  double armijo = 1e-4;
  int max_halvings = 60;
};

struct SmoothDescentResult {
  Vector x;
  double value = 0.0;
  double gradient_norm = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

namespace detail {

inline bool too_close(const Vector& x, const std::vector<Vector>& avoid,
                      double min_distance) {
  for (const Vector& a : avoid) {
    if ((x - a).norm() <= min_distance) return true;
  }
  return false;
}

}  // namespace detail

/// Quasi-Newton (BFGS) descent with Armijo backtracking. Objective values are
/// monotonically nonincreasing. Trial points falling within
/// `options.min_distance` of an avoided point are rejected by halving the
/// step, so the oracle is never evaluated there.
inline SmoothDescentResult smooth_descent(const SmoothOracle& objective,
                                          const Vector& x0, double tol, int max_iter,
                                          const SmoothDescentOptions& options = {}) {
  require(tol > 0.0, "smooth_descent: tol must be positive");
  require(max_iter >= 0, "smooth_descent: max_iter must be nonnegative");
  if (detail::too_close(x0, options.avoid, options.min_distance)) {
    throw InputError("smooth_descent: starting point lies on an avoided point");
  }

  const Index n = x0.size();
  SmoothDescentResult result;
  Vector x = x0;
  Vector grad(n);
  double f = objective(x, &grad);
  if (!std::isfinite(f) || !all_finite(grad)) {
    throw NumericError("smooth_descent: non-finite objective at start");
  }
  Matrix H = Matrix::Identity(n, n);
  bool scaled = false;
  Vector grad_new(n);

  int k = 0;
  for (; k < max_iter; ++k) {
    if (grad.norm() <= tol) break;
    Vector d = -H * grad;
    double slope = grad.dot(d);
    if (!(slope < 0.0)) {
      H.setIdentity();
      d = -grad;
      slope = -grad.squaredNorm();
    }

    bool accepted = false;
    Vector x_trial;
    double f_trial = f;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      double t = 1.0;
      for (int halving = 0; halving <= options.max_halvings; ++halving, t *= 0.5) {
        x_trial = x + t * d;
        if (detail::too_close(x_trial, options.avoid, options.min_distance)) continue;
        f_trial = objective(x_trial, &grad_new);
        if (std::isfinite(f_trial) && f_trial <= f + options.armijo * t * slope) {
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        // Retry once along steepest descent with a fresh curvature model.
        if (H.isIdentity()) break;
        H.setIdentity();
        d = -grad;
        slope = -grad.squaredNorm();
      }
    }
    if (!accepted) break;
    if (!all_finite(grad_new)) throw NumericError("smooth_descent: non-finite gradient");

    const Vector s = x_trial - x;
    const Vector yv = grad_new - grad;
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      if (!scaled) {
        H *= sy / yv.squaredNorm();
        scaled = true;
      }
      const double r = 1.0 / sy;
      const Vector Hy = H * yv;
      H += (r * r * (sy + yv.dot(Hy))) * (s * s.transpose()) -
           r * (Hy * s.transpose() + s * Hy.transpose());
    }
    x = x_trial;
    f = f_trial;
    grad = grad_new;
  }

  result.gradient_norm = grad.norm();
  result.converged = result.gradient_norm <= tol;
  result.iterations = k;
  result.value = f;
  result.x = std::move(x);
  return result;
}

}  // namespace dcalm
