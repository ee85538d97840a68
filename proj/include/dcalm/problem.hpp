// Copyright (c) dcalm contributors

#pragma once

#include <functional>
#include <optional>
#include <utility>

#include "dcalm/core.hpp"

namespace dcalm {

/// Value of a convex function at a point together with one subgradient.
struct OracleValue {
  double value = 0.0;
  Vector subgradient;
};

/// Convex function oracle. Must return the same selection for the same point.
using ConvexOracle = std::function<OracleValue(const Vector&)>;

/// Values of the m inequality constraints and one subgradient per component,
/// stored as the rows of an m×n matrix.
struct ConstraintValue {
  Vector values;
  Matrix subgradients;
};

using ConstraintOracle = std::function<ConstraintValue(const Vector&)>;

/// prox_{t·g}(x) = argmin_y g(y) + ‖y − x‖²/(2t).
using ProxOracle = std::function<Vector(const Vector&, double)>;

/// Closed convex set handle. The default instance is the whole space.
struct AbstractSet {
  std::function<Vector(const Vector&)> project;
  std::function<bool(const Vector&)> contains;

  bool is_whole_space() const { return !project; }

  Vector projection(const Vector& x) const { return project ? project(x) : x; }

  bool member(const Vector& x) const { return contains ? contains(x) : true; }
};

/// min g(x) − h(x)  s.t.  Ax = b, c(x) ≤ 0, x ∈ C.
///
/// Either block of constraints may be empty. When `prox_g` is set the inner
/// solvers treat g as the nonsmooth part of a composite objective; otherwise
/// g is assumed differentiable and its subgradient is used as a gradient.
struct DcProgram {
  Index dimension = 0;
  ConvexOracle g;
  ConvexOracle h;
  Matrix A;
  Vector b;
  Index num_inequalities = 0;
  ConstraintOracle c;
  AbstractSet set;
  ProxOracle prox_g;

  Index num_equalities() const { return A.rows(); }

  double objective(const Vector& x) const { return g(x).value - h(x).value; }

  Vector equality_residual(const Vector& x) const {
    if (A.rows() == 0) return Vector::Zero(0);
    return A * x - b;
  }

  ConstraintValue constraints(const Vector& x) const {
    if (num_inequalities == 0 || !c) {
      return {Vector::Zero(0), Matrix::Zero(0, dimension)};
    }
    ConstraintValue cv = c(x);
    if (cv.values.size() != num_inequalities ||
        cv.subgradients.rows() != num_inequalities ||
        cv.subgradients.cols() != dimension) {
      throw InputError("inequality oracle returned inconsistent dimensions");
    }
    return cv;
  }

  Vector constraint_values(const Vector& x) const { return constraints(x).values; }

  /// Throws InputError unless A, b, and the declared sizes agree.
  void validate() const {
    require(dimension > 0, "DcProgram: dimension must be positive");
    require(static_cast<bool>(g) && static_cast<bool>(h),
            "DcProgram: g and h oracles are required");
    require(A.rows() == b.size(), "DcProgram: A and b row counts differ");
    require(A.rows() == 0 || A.cols() == dimension,
            "DcProgram: A column count differs from dimension");
    require(num_inequalities >= 0, "DcProgram: negative inequality count");
    require(num_inequalities == 0 || static_cast<bool>(c),
            "DcProgram: inequality oracle missing");
  }
};

/// Candidate generalized KKT triple (x, λ, μ); λ pairs with c, μ with A.
struct PrimalDualPoint {
  Vector x;
  Vector lambda;
  Vector mu;
};

struct KktResidual {
  double stationarity_norm = 0.0;
  double equality_norm = 0.0;
  double complementarity_norm = 0.0;
  bool set_membership = true;
};

struct FeasibilityResidual {
  double equality_norm = 0.0;
  double inequality_violation = 0.0;
};

/// Returns (‖Ax − b‖, ‖max{0, c(x)}‖).
inline FeasibilityResidual feasibility_residual(const DcProgram& prog,
                                                const Vector& x) {
  require_size(x, prog.dimension, "feasibility_residual: x");
  return {prog.equality_residual(x).norm(),
          positive_part_norm(prog.constraint_values(x))};
}

/// ‖min{−c, λ}‖, zero exactly when c ≤ 0, λ ≥ 0 and λᵀc = 0.
inline double complementarity_residual(const Vector& c_values,
                                       const Vector& lambda) {
  if (c_values.size() != lambda.size()) {
    throw InputError("complementarity_residual: length mismatch");
  }
  if (c_values.size() == 0) return 0.0;
  return cwise_min(-c_values, lambda).norm();
}

/// Residuals of the generalized KKT system at `point`, using the single
/// subgradient selections t ∈ ∂g(x), s ∈ ∂h(x), ωᵢ ∈ ∂cᵢ(x) returned by the
/// oracles. `normal_element` is ν ∈ N_C(x); it defaults to zero.
inline KktResidual kkt_residual(const DcProgram& prog,
                                const PrimalDualPoint& point,
                                const std::optional<Vector>& normal_element = {}) {
  const Index n = prog.dimension;
  require_size(point.x, n, "kkt_residual: x");
  require_size(point.lambda, prog.num_inequalities, "kkt_residual: lambda");
  require_size(point.mu, prog.num_equalities(), "kkt_residual: mu");
  require((point.lambda.array() >= 0.0).all(),
          "kkt_residual: lambda must be nonnegative");

  Vector stationarity = prog.g(point.x).subgradient - prog.h(point.x).subgradient;
  KktResidual r;
  if (prog.num_equalities() > 0) {
    stationarity += prog.A.transpose() * point.mu;
    r.equality_norm = prog.equality_residual(point.x).norm();
  }
  if (prog.num_inequalities > 0) {
    const ConstraintValue cv = prog.constraints(point.x);
    stationarity += cv.subgradients.transpose() * point.lambda;
    r.complementarity_norm = complementarity_residual(cv.values, point.lambda);
  }
  if (normal_element) {
    require_size(*normal_element, n, "kkt_residual: normal cone element");
    stationarity += *normal_element;
  }
  r.stationarity_norm = stationarity.norm();
  r.set_membership = prog.set.member(point.x);
  return r;
}

/// f(y) − f(x) − sᵀ(y − x) for the selection s returned at x; nonnegative
/// for a valid subgradient oracle.
inline double subgradient_inequality_gap(const ConvexOracle& f, const Vector& x,
                                         const Vector& y) {
  const OracleValue at_x = f(x);
  return f(y).value - at_x.value - at_x.subgradient.dot(y - x);
}

}  // namespace dcalm
