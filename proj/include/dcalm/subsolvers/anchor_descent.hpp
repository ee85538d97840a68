// Copyright (c) dcalm contributors

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "dcalm/core.hpp"
#include "dcalm/subsolvers/fista.hpp"
#include "dcalm/subsolvers/smooth_descent.hpp"

namespace dcalm {

/// φ(x) = Σⱼ wⱼ‖x − aʲ‖ + ψ(x) with ψ smooth. φ is nondifferentiable exactly
/// at the anchors aʲ.
struct AnchorProblem {
  std::vector<Vector> anchors;
  std::vector<double> weights;
  SmoothOracle remainder;

  std::size_t size() const { return anchors.size(); }

  double value(const Vector& x) const {
    double v = remainder ? remainder(x, nullptr) : 0.0;
    for (std::size_t j = 0; j < anchors.size(); ++j) {
      v += weights[j] * (x - anchors[j]).norm();
    }
    return v;
  }

  /// Value and gradient of φ away from the anchors.
  double value_and_gradient(const Vector& x, Vector* grad) const {
    double v = 0.0;
    if (remainder) {
      v = remainder(x, grad);
    } else if (grad) {
      grad->setZero(x.size());
    }
    for (std::size_t j = 0; j < anchors.size(); ++j) {
      const Vector diff = x - anchors[j];
      const double dist = diff.norm();
      v += weights[j] * dist;
      if (grad && dist > 0.0) *grad += (weights[j] / dist) * diff;
    }
    return v;
  }

  /// ∇ψⱼ(aʲ) where ψⱼ := φ − wⱼ‖· − aʲ‖ is differentiable at aʲ.
  Vector reduced_gradient(std::size_t j) const {
    const Vector& a = anchors.at(j);
    Vector grad = Vector::Zero(a.size());
    if (remainder) remainder(a, &grad);
    for (std::size_t k = 0; k < anchors.size(); ++k) {
      if (k == j) continue;
      const Vector diff = a - anchors[k];
      const double dist = diff.norm();
      if (dist == 0.0) throw DataError("AnchorProblem: coincident anchors");
      grad += (weights[k] / dist) * diff;
    }
    return grad;
  }

  void validate() const {
    require(anchors.size() == weights.size(),
            "AnchorProblem: anchors and weights differ in length");
    for (double w : weights) require(w > 0.0, "AnchorProblem: weights must be positive");
  }
};

/// True iff aʲ minimizes φ, i.e. ‖∇ψⱼ(aʲ)‖ ≤ wⱼ.
inline bool anchor_minimizer_test(const AnchorProblem& ap, std::size_t j) {
  return ap.reduced_gradient(j).norm() <= ap.weights.at(j);
}

struct AnchorStep {
  Vector direction;
  double step = 0.0;
  Vector trial;
};

/// Escapes the non-minimizing anchor aʲ along d = −∇ψⱼ(aʲ), whose directional
/// derivative wⱼ‖∇ψⱼ‖ − ‖∇ψⱼ‖² is negative. The step starts at 1 and is
/// halved until φ strictly decreases at a point off every anchor.
inline AnchorStep anchor_descent_step(const AnchorProblem& ap, std::size_t j,
                                      double min_distance = 1e-12) {
  const Vector& a = ap.anchors.at(j);
  AnchorStep out;
  out.direction = -ap.reduced_gradient(j);
  const double gnorm = out.direction.norm();
  if (!(gnorm > ap.weights[j])) {
    throw InputError("anchor_descent_step: anchor is already a minimizer");
  }
  const double phi_a = ap.value(a);
  double t = 1.0;
  for (int halving = 0; halving <= 60; ++halving, t *= 0.5) {
    Vector trial = a + t * out.direction;
    if (detail::too_close(trial, ap.anchors, min_distance)) continue;
    if (ap.value(trial) < phi_a) {
      out.step = t;
      out.trial = std::move(trial);
      return out;
    }
  }
  throw NumericError("anchor_descent_step: no decrease after 60 halvings");
}

struct WeberSubproblemResult {
  Vector x;
  double value = 0.0;
  /// Set when the minimizer was certified at an anchor.
  std::optional<std::size_t> anchor;
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;
};

/// Minimizes φ: picks the best anchor, returns it if it passes the minimizer
/// test relaxed by `tol` (some subgradient there has norm ≤ tol), otherwise
/// steps off it and runs smooth descent while keeping clear of all anchors.
inline WeberSubproblemResult solve_weber_subproblem(const AnchorProblem& ap, double tol,
                                                    int max_iter = 500) {
  ap.validate();
  require(ap.size() > 0, "solve_weber_subproblem: no anchors");
  std::size_t best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < ap.size(); ++j) {
    const double v = ap.value(ap.anchors[j]);
    if (v < best_value) {
      best_value = v;
      best = j;
    }
  }

  WeberSubproblemResult out;
  const double excess = ap.reduced_gradient(best).norm() - ap.weights[best];
  if (excess <= tol) {
    out.x = ap.anchors[best];
    out.value = best_value;
    out.anchor = best;
    out.converged = true;
    out.gradient_norm = std::max(excess, 0.0);
    return out;
  }

  const AnchorStep escape = anchor_descent_step(ap, best);
  SmoothDescentOptions opts;
  opts.avoid = ap.anchors;
  const auto oracle = [&ap](const Vector& x, Vector* g) { return ap.value_and_gradient(x, g); };
  SmoothDescentResult sd = smooth_descent(oracle, escape.trial, tol, max_iter, opts);
  out.x = std::move(sd.x);
  out.value = sd.value;
  out.iterations = sd.iterations;
  out.converged = sd.converged;
  out.gradient_norm = sd.gradient_norm;
  return out;
}

}  // namespace dcalm
