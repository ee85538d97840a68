// Copyright (c) dcalm contributors

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "dcalm/core.hpp"
#include "dcalm/problem.hpp"
#include "dcalm/psalmdc.hpp"
#include "dcalm/random.hpp"
#include "dcalm/subproblem.hpp"
#include "dcalm/subsolvers/anchor_descent.hpp"
#include "dcalm/subsolvers/smooth_descent.hpp"

namespace dcalm {

/// Multisource Weber problem: place p facilities xⁱ ∈ [lo, hi]² minimizing
/// Σⱼ wⱼ minᵢ ‖xⁱ − aʲ‖. Facility i occupies coordinates (2i, 2i + 1) of the
/// stacked variable X ∈ ℝ^{2p}.
struct WeberInstance {
  std::vector<Vector> points;
  std::vector<double> weights;
  int facilities = 1;
  double lo = 0.0;
  double hi = 10.0;

  Index dimension() const { return 2 * static_cast<Index>(facilities); }

  void validate() const {
    require(facilities >= 1, "WeberInstance: need at least one facility");
    if (!(lo < hi)) throw InputError("WeberInstance: degenerate box");
    require(!points.empty(), "WeberInstance: no demand points");
    require(points.size() == weights.size(), "WeberInstance: points and weights differ in length");
    for (std::size_t j = 0; j < points.size(); ++j) {
      require(points[j].size() == 2, "WeberInstance: demand points must be planar");
      if (!(weights[j] > 0.0)) throw DataError("WeberInstance: weights must be positive");
      for (std::size_t k = 0; k < j; ++k) {
        if (points[j] == points[k]) throw DataError("WeberInstance: duplicate demand point");
      }
    }
  }
};

namespace detail {

inline Vector unit_or_zero(const Vector& diff, double dist) {
  return dist > 0.0 ? Vector(diff / dist) : Vector(Vector::Zero(diff.size()));
}

}  // namespace detail

/// f(X) = Σⱼ wⱼ minᵢ ‖xⁱ − aʲ‖.
inline double weber_objective(const WeberInstance& inst, const Vector& X) {
  require_size(X, inst.dimension(), "weber_objective: X");
  double total = 0.0;
  for (std::size_t j = 0; j < inst.points.size(); ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < inst.facilities; ++i) {
      best = std::min(best, (X.segment<2>(2 * i) - inst.points[j]).norm());
    }
    total += inst.weights[j] * best;
  }
  return total;
}

/// g(X) = Σⱼ Σᵢ wⱼ‖xⁱ − aʲ‖ with the zero subgradient at coincidences.
inline OracleValue weber_g(const WeberInstance& inst, const Vector& X) {
  require_size(X, inst.dimension(), "weber_g: X");
  OracleValue out{0.0, Vector::Zero(X.size())};
  for (std::size_t j = 0; j < inst.points.size(); ++j) {
    for (int i = 0; i < inst.facilities; ++i) {
      const Vector diff = X.segment<2>(2 * i) - inst.points[j];
      const double dist = diff.norm();
      out.value += inst.weights[j] * dist;
      out.subgradient.segment<2>(2 * i) += inst.weights[j] * detail::unit_or_zero(diff, dist);
    }
  }
  return out;
}

/// h(X) = Σⱼ wⱼ max_k Σ_{i≠k} ‖xⁱ − aʲ‖. The maximizing k is the facility
/// closest to aʲ, lowest index on ties.
inline OracleValue weber_h(const WeberInstance& inst, const Vector& X) {
  require_size(X, inst.dimension(), "weber_h: X");
  OracleValue out{0.0, Vector::Zero(X.size())};
  const int p = inst.facilities;
  std::vector<double> dist(static_cast<std::size_t>(p));
  for (std::size_t j = 0; j < inst.points.size(); ++j) {
    int closest = 0;
    for (int i = 0; i < p; ++i) {
      dist[i] = (X.segment<2>(2 * i) - inst.points[j]).norm();
      if (dist[i] < dist[closest]) closest = i;
    }
    for (int i = 0; i < p; ++i) {
      if (i == closest) continue;
      const Vector diff = X.segment<2>(2 * i) - inst.points[j];
      out.value += inst.weights[j] * dist[i];
      out.subgradient.segment<2>(2 * i) += inst.weights[j] * detail::unit_or_zero(diff, dist[i]);
    }
  }
  return out;
}

/// Box constraints as 4p affine inequalities, ordered (lo − x₁, x₁ − hi,
/// lo − x₂, x₂ − hi) per facility, facilities consecutive.
inline ConstraintValue weber_constraints(const WeberInstance& inst, const Vector& X) {
  const Index n = inst.dimension();
  ConstraintValue cv{Vector(2 * n), Matrix::Zero(2 * n, n)};
  for (Index coord = 0; coord < n; ++coord) {
    cv.values[2 * coord] = inst.lo - X[coord];
    cv.values[2 * coord + 1] = X[coord] - inst.hi;
    cv.subgradients(2 * coord, coord) = -1.0;
    cv.subgradients(2 * coord + 1, coord) = 1.0;
  }
  return cv;
}

inline DcProgram build_weber_program(const WeberInstance& inst) {
  inst.validate();
  auto shared = std::make_shared<const WeberInstance>(inst);
  DcProgram prog;
  prog.dimension = inst.dimension();
  prog.g = [shared](const Vector& X) { return weber_g(*shared, X); };
  prog.h = [shared](const Vector& X) { return weber_h(*shared, X); };
  prog.A = Matrix::Zero(0, prog.dimension);
  prog.b = Vector::Zero(0);
  prog.num_inequalities = 4 * static_cast<Index>(inst.facilities);
  prog.c = [shared](const Vector& X) { return weber_constraints(*shared, X); };
  return prog;
}

/// Splits the subproblem by facility; each block is minimized with the
/// anchor-aware strategy of solve_weber_subproblem.
class WeberInnerSolver final : public InnerSolver {
 public:
  explicit WeberInnerSolver(WeberInstance inst) : inst_(std::move(inst)) {}

  InnerResult solve(const AugmentedSubproblem& sub, const Vector& start, double tol,
                    int max_iter) const override {
    require(sub.program->set.is_whole_space(),
            "WeberInnerSolver: abstract set must be the whole space");
    InnerResult out;
    out.x = start;
    out.converged = true;
    out.residual = 0.0;
    for (int i = 0; i < inst_.facilities; ++i) {
      Vector work = out.x;
      Vector full_grad(work.size());
      AnchorProblem ap;
      ap.anchors = inst_.points;
      ap.weights = inst_.weights;
      ap.remainder = [&, i](const Vector& y, Vector* grad) {
        work.segment<2>(2 * i) = y;
        const double v = sub.coupling_value(work, grad ? &full_grad : nullptr);
        if (grad) *grad = full_grad.segment<2>(2 * i);
        return v;
      };
      const WeberSubproblemResult r = solve_weber_subproblem(ap, tol, max_iter);
      out.x.segment<2>(2 * i) = r.x;
      out.iterations += r.iterations;
      out.converged = out.converged && r.converged;
      out.residual = std::max(out.residual, r.gradient_norm);
    }
    return out;
  }

 private:
  WeberInstance inst_;
};

/// Solver settings for the location problems: σ₀ = ε₀ = 0.1, Q = 10⁻³I,
/// δ₁ = δ₂ = 10⁻³ and α = 0.9.
inline SolverParams weber_solver_params(const WeberInstance& inst) {
  SolverParams params;
  params.alpha = 0.9;
  params.sigma0 = 0.1;
  params.epsilon0 = 0.1;
  params.q = 1e-3;
  params.delta1 = 1e-3;
  params.delta2 = 1e-3;
  params.inner_max_iterations = 500;
  params.inner_solver = std::make_shared<WeberInnerSolver>(inst);
  return params;
}

/// u⁰ = 4·1 over the 4p box constraints.
inline Vector weber_initial_multipliers(const WeberInstance& inst) {
  return Vector::Constant(4 * static_cast<Index>(inst.facilities), 4.0);
}

/// Facilities drawn uniformly from the open box.
inline Vector weber_random_start(const WeberInstance& inst, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> coord(inst.lo, inst.hi);
  Vector X(inst.dimension());
  for (Index i = 0; i < X.size(); ++i) {
    double v = coord(rng);
    while (v == inst.lo) v = coord(rng);
    X[i] = v;
  }
  return X;
}

/// Reads demand points from CSV with header `x,y,w`.
inline WeberInstance load_weber_csv(const std::string& path, int facilities = 1,
                                    double lo = 0.0, double hi = 10.0) {
  std::ifstream in(path);
  if (!in) throw IoError("load_weber_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("load_weber_csv: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x,y,w") throw DataError("load_weber_csv: expected header x,y,w");
  WeberInstance inst;
  inst.facilities = facilities;
  inst.lo = lo;
  inst.hi = hi;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    double vals[3];
    int count = 0;
    while (std::getline(ss, field, ',')) {
      if (count == 3) throw DataError("load_weber_csv: too many fields on row " + std::to_string(row));
      try {
        std::size_t used = 0;
        vals[count] = std::stod(field, &used);
        if (used != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw DataError("load_weber_csv: bad number on row " + std::to_string(row));
      }
      ++count;
    }
    if (count != 3) throw DataError("load_weber_csv: expected 3 fields on row " + std::to_string(row));
    Vector a(2);
    a << vals[0], vals[1];
    inst.points.push_back(a);
    inst.weights.push_back(vals[2]);
  }
  inst.validate();
  return inst;
}

/// Seeded stand-in for the classical 50-customer data: uniform points on
/// [lo, hi]² with unit weights.
inline WeberInstance synthetic_weber_instance(std::uint64_t seed, int count = 50,
                                              int facilities = 1, double lo = 0.0,
                                              double hi = 10.0) {
  require(count >= 1, "synthetic_weber_instance: count must be positive");
  Rng rng(seed);
  std::uniform_real_distribution<double> coord(lo, hi);
  WeberInstance inst;
  inst.facilities = facilities;
  inst.lo = lo;
  inst.hi = hi;
  while (static_cast<int>(inst.points.size()) < count) {
    Vector a(2);
    a[0] = coord(rng);
    a[1] = coord(rng);
    const bool dup = std::any_of(inst.points.begin(), inst.points.end(),
                                 [&](const Vector& b) { return b == a; });
    if (dup) continue;
    inst.points.push_back(a);
    inst.weights.push_back(1.0);
  }
  inst.validate();
  return inst;
}

/// Single-facility Weber point of a weighted subset by the anchor-aware
/// strategy.
inline Vector weber_single_facility(const std::vector<Vector>& points,
                                    const std::vector<double>& weights, double tol = 1e-10) {
  AnchorProblem ap;
  ap.anchors = points;
  ap.weights = weights;
  return solve_weber_subproblem(ap, tol, 2000).x;
}

struct WeberReference {
  Vector X;
  double objective = 0.0;
};

/// Best known solution: for p = 1 a dense grid search refined by descent;
/// for p > 1 the best of `starts` seeded location–allocation runs.
inline WeberReference weber_reference_solution(const WeberInstance& inst, std::uint64_t seed,
                                               int starts = 200, int grid = 401) {
  inst.validate();
  WeberInstance single = inst;
  single.facilities = 1;
  if (inst.facilities == 1) {
    Vector best(2);
    double best_value = std::numeric_limits<double>::infinity();
    const double h = (inst.hi - inst.lo) / (grid - 1);
    Vector y(2);
    for (int a = 0; a < grid; ++a) {
      for (int b = 0; b < grid; ++b) {
        y << inst.lo + a * h, inst.lo + b * h;
        const double v = weber_objective(single, y);
        if (v < best_value) {
          best_value = v;
          best = y;
        }
      }
    }
    AnchorProblem ap;
    ap.anchors = inst.points;
    ap.weights = inst.weights;
    SmoothDescentOptions opts;
    opts.avoid = inst.points;
    Vector start = best;
    if (detail::too_close(start, inst.points, opts.min_distance)) start[0] += 0.25 * h;
    const auto oracle = [&ap](const Vector& x, Vector* g) { return ap.value_and_gradient(x, g); };
    const SmoothDescentResult refined = smooth_descent(oracle, start, 1e-11, 2000, opts);
    const Vector via_anchor = weber_single_facility(inst.points, inst.weights, 1e-11);
    WeberReference ref{refined.x, weber_objective(single, refined.x)};
    const double alt = weber_objective(single, via_anchor);
    if (alt < ref.objective) ref = {via_anchor, alt};
    if (best_value < ref.objective) ref = {best, best_value};
    return ref;
  }

  WeberReference ref{Vector(), std::numeric_limits<double>::infinity()};
  const int p = inst.facilities;
  for (int start = 0; start < starts; ++start) {
    Vector X = weber_random_start(inst, substream(seed, static_cast<std::uint64_t>(start)));
    std::vector<int> assign(inst.points.size(), -1);
    for (int sweep = 0; sweep < 100; ++sweep) {
      bool changed = false;
      for (std::size_t j = 0; j < inst.points.size(); ++j) {
        int closest = 0;
        double dmin = std::numeric_limits<double>::infinity();
        for (int i = 0; i < p; ++i) {
          const double d = (X.segment<2>(2 * i) - inst.points[j]).norm();
          if (d < dmin) {
            dmin = d;
            closest = i;
          }
        }
        if (assign[j] != closest) {
          assign[j] = closest;
          changed = true;
        }
      }
      if (!changed) break;
      for (int i = 0; i < p; ++i) {
        std::vector<Vector> pts;
        std::vector<double> ws;
        for (std::size_t j = 0; j < inst.points.size(); ++j) {
          if (assign[j] == i) {
            pts.push_back(inst.points[j]);
            ws.push_back(inst.weights[j]);
          }
        }
        if (!pts.empty()) X.segment<2>(2 * i) = weber_single_facility(pts, ws);
      }
    }
    const double value = weber_objective(inst, X);
    if (value < ref.objective) ref = {X, value};
  }
  return ref;
}

}  // namespace dcalm
