// Copyright (c) dcalm contributors

#pragma once

#include <limits>
#include <memory>

#include "dcalm/core.hpp"
#include "dcalm/problem.hpp"
#include "dcalm/subsolvers/fista.hpp"

namespace dcalm {

/// Convex model minimized in every outer step:
///
///   g(x) − h(x̂) − ŝᵀ(x − x̂) + vᵀ(Ax − b) + (ρ/2)‖Ax − b‖²
///        + (1/2ρ)(‖max{0, u + ρc(x)}‖² − ‖u‖²) + (w/2)‖x − x̂‖²
///
/// where x̂ is the linearization point of h (also the prox center), ŝ ∈ ∂h(x̂),
/// (u, v) the safeguarded multiplier estimates and w the prox weight.
struct AugmentedSubproblem {
  const DcProgram* program = nullptr;
  Vector center;
  double center_h = 0.0;
  Vector center_s;
  Vector u;
  Vector v;
  double rho = 1.0;
  double prox_weight = 0.0;

  /// Every term except g(x).
  double coupling_value(const Vector& x, Vector* grad) const {
    const DcProgram& prog = *program;
    const Vector dx = x - center;
    double value = -center_h - center_s.dot(dx) + 0.5 * prox_weight * dx.squaredNorm();
    if (grad) *grad = prox_weight * dx - center_s;
    if (prog.num_equalities() > 0) {
      const Vector r = prog.A * x - prog.b;
      value += v.dot(r) + 0.5 * rho * r.squaredNorm();
      if (grad) grad->noalias() += prog.A.transpose() * (v + rho * r);
    }
    if (prog.num_inequalities > 0) {
      const ConstraintValue cv = prog.constraints(x);
      const Vector shifted = (u + rho * cv.values).cwiseMax(0.0);
      value += (shifted.squaredNorm() - u.squaredNorm()) / (2.0 * rho);
      if (grad) grad->noalias() += cv.subgradients.transpose() * shifted;
    }
    return value;
  }

  /// The part handed to gradient steps: coupling terms, plus g when the
  /// program carries no prox for g.
  double smooth_value(const Vector& x, Vector* grad) const {
    double value = coupling_value(x, grad);
    if (!program->prox_g) {
      const OracleValue gx = program->g(x);
      value += gx.value;
      if (grad) *grad += gx.subgradient;
    }
    return value;
  }

  double objective(const Vector& x) const {
    return coupling_value(x, nullptr) + program->g(x).value;
  }
};

struct InnerResult {
  Vector x;
  double residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

/// Strategy for minimizing an AugmentedSubproblem over the abstract set.
class InnerSolver {
 public:
  virtual ~InnerSolver() = default;
  virtual InnerResult solve(const AugmentedSubproblem& sub, const Vector& start,
                            double tol, int max_iter) const = 0;
};

/// Treats g as the prox-friendly part (or, without a prox, as smooth with the
/// abstract set handled by projection) and runs FISTA.
class FistaInnerSolver final : public InnerSolver {
 public:
  InnerResult solve(const AugmentedSubproblem& sub, const Vector& start, double tol,
                    int max_iter) const override {
    const DcProgram& prog = *sub.program;
    CompositeProblem cp;
    cp.smooth = [&sub](const Vector& x, Vector* grad) { return sub.smooth_value(x, grad); };
    cp.strong_convexity = sub.prox_weight;
    if (prog.prox_g) {
      if (!prog.set.is_whole_space()) {
        throw InputError("FistaInnerSolver: prox of g over a proper abstract set is unsupported");
      }
      cp.prox = prog.prox_g;
      cp.nonsmooth_value = [&prog](const Vector& x) { return prog.g(x).value; };
    } else {
      const AbstractSet& set = prog.set;
      cp.prox = [&set](const Vector& x, double) { return set.projection(x); };
      cp.nonsmooth_value = [](const Vector&) { return 0.0; };
    }
    FistaResult fr = fista(cp, prog.set.projection(start), tol, max_iter);
    return {std::move(fr.x), fr.residual, fr.iterations, fr.converged};
  }
};

inline std::shared_ptr<const InnerSolver> default_inner_solver() {
  return std::make_shared<FistaInnerSolver>();
}

}  // namespace dcalm
