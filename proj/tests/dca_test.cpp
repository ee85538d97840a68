// Copyright (c) dcalm contributors

#include <cmath>

#include <gtest/gtest.h>

#include "dcalm/applications/recovery.hpp"
#include "dcalm/dca.hpp"
#include "dcalm/psalmdc.hpp"
#include "oracles.hpp"
#include "toy_programs.hpp"

using namespace dcalm;
using toy::row;
using toy::vec;

namespace {

DcaParams tight() {
  DcaParams params;
  params.tolerance = 1e-9;
  params.inner.tolerance = 1e-9;
  return params;
}

}  // namespace

TEST(DcaParams, Validation) {
  DcaParams params;
  EXPECT_DOUBLE_EQ(params.tolerance, 1e-3);
  EXPECT_NO_THROW(params.validate());
  params.inner.penalty_growth = 1.0;
  EXPECT_THROW(params.validate(), InputError);
  params = DcaParams{};
  params.inner.reduction_ratio = 1.0;
  EXPECT_THROW(params.validate(), InputError);
  params = DcaParams{};
  params.tolerance = 0.0;
  EXPECT_THROW(params.validate(), InputError);
}

TEST(DcaStep, ProxStepOnQuadratic) {
  const DcProgram prog =
      toy::unconstrained(1, toy::half_squared_distance(vec({0.0})), toy::zero_function());
  const InnerAlmResult r = dca_step(prog, vec({2.0}), tight());
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], 1.0, 1e-8);
}

TEST(DcaStep, IdenticalComponentsStayPut) {
  const auto g = toy::half_squared_distance(vec({1.0, -1.0}));
  const DcProgram prog = toy::unconstrained(2, g, g);
  const Vector x = vec({4.0, 0.5});
  EXPECT_NEAR((dca_step(prog, x, tight()).x - x).norm(), 0.0, 1e-9);
}

TEST(DcaStep, ConstrainedAbsoluteValueMatchesGrid) {
  DcProgram prog = toy::unconstrained(1, toy::l1_norm(), toy::zero_function());
  prog.num_inequalities = 1;
  prog.c = toy::affine_constraints(row({-1.0}), vec({1.0}));
  DcaParams params;
  params.inner.tolerance = 1e-6;
  const InnerAlmResult r = dca_step(prog, vec({3.0}), params);
  const auto model = [](double y) {
    return y >= 1.0 ? std::abs(y) + 0.5 * (y - 3.0) * (y - 3.0)
                    : std::numeric_limits<double>::infinity();
  };
  const auto [grid_x, grid_f] = oracle::grid_1d(model, -5.0, 5.0, 100001);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], 2.0, 1e-5);
  EXPECT_NEAR(r.x[0], grid_x, 1e-4);
}

TEST(DcaStep, ActiveConstraintLandsOnBoundary) {
  // |x| + ½(x − 0.5)² over x ≥ 1: minimizer at the bound with λ = 1.5.
  DcProgram prog = toy::unconstrained(1, toy::l1_norm(), toy::zero_function());
  prog.num_inequalities = 1;
  prog.c = toy::affine_constraints(row({-1.0}), vec({1.0}));
  DcaParams params;
  params.inner.tolerance = 1e-7;
  const InnerAlmResult r = dca_step(prog, vec({0.5}), params);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], 1.0, 1e-6);
  EXPECT_NEAR(r.lambda[0], 1.5, 1e-4);
}

TEST(InnerAlm, UnconstrainedUsesOneSubsolverCall) {
  const DcProgram prog =
      toy::unconstrained(2, toy::half_squared_distance(vec({1.0, 1.0})), toy::zero_function());
  const InnerAlmResult r = inner_safeguarded_alm(dca_model(prog, vec({0.0, 0.0}), 1.0), tight(),
                                                 vec({0.0, 0.0}));
  EXPECT_EQ(r.iterations, 1);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR((r.x - vec({0.5, 0.5})).norm(), 0.0, 1e-8);
}

TEST(InnerAlm, EqualityOnlyProjection) {
  // ½‖x‖² + ½‖x − 0‖² with x₁ = 1: minimizer (1, 0, 0).
  DcProgram prog = toy::unconstrained(3, toy::half_squared_distance(Vector::Zero(3)),
                                      toy::zero_function());
  prog.A = row({1.0, 0.0, 0.0});
  prog.b = vec({1.0});
  const InnerAlmResult r =
      inner_safeguarded_alm(dca_model(prog, Vector::Zero(3), 1.0), tight(), Vector::Zero(3));
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR((r.x - vec({1.0, 0.0, 0.0})).norm(), 0.0, 1e-8);
  EXPECT_NEAR(r.mu[0], -2.0, 1e-6);
}

TEST(InnerAlm, InfeasibleBoxReportsFailure) {
  // x ≥ 1 and x ≤ −1 cannot both hold.
  DcProgram prog = toy::unconstrained(1, toy::half_squared_distance(vec({0.0})),
                                      toy::zero_function());
  prog.num_inequalities = 2;
  Matrix G(2, 1);
  G << -1.0, 1.0;
  prog.c = toy::affine_constraints(G, vec({1.0, 1.0}));
  DcaParams params;
  params.inner.max_iterations = 8;
  const InnerAlmResult r =
      inner_safeguarded_alm(dca_model(prog, vec({0.0}), 1.0), params, vec({0.0}));
  EXPECT_FALSE(r.converged);
  EXPECT_GT(r.infeasibility, 0.5);
}

TEST(DcaSolve, ScalarQpAgreesWithPsalmdc) {
  const DcProgram prog = toy::scalar_qp();
  const DcaResult dca = dca_solve(prog, DcaParams{}, vec({0.0}));
  SolverParams params;
  params.delta1 = 1e-6;
  params.delta2 = 1e-6;
  params.max_outer_iterations = 5000;
  const SolveResult alm = solve(prog, params, vec({0.0}), vec({0.0}), Vector(0));
  ASSERT_EQ(dca.status, SolveStatus::Converged);
  ASSERT_EQ(alm.status, SolveStatus::Converged);
  EXPECT_NEAR(dca.point.x[0], 1.0, 10 * 1e-3);
  EXPECT_NEAR(dca.point.x[0], alm.point.x[0], 10 * 1e-3);
}

TEST(DcaSolve, FixedPointTerminatesAfterOneStep) {
  const DcaResult r = dca_solve(toy::scalar_qp(), DcaParams{}, vec({1.0}));
  EXPECT_EQ(r.status, SolveStatus::Converged);
  EXPECT_EQ(r.reports.size(), 1u);
}

TEST(DcaSolve, TimeLimitReturnsPartialReports) {
  RecoverySpec spec;
  spec.n = 256;
  spec.m = 64;
  spec.sparsity = 26;
  const SparseRecoveryInstance inst = generate_recovery_instance(spec, 3);
  DcaParams params;
  params.tolerance = 1e-14;
  params.wall_clock_limit = 1e-3;
  const DcaResult r = dca_solve(build_recovery_program(inst), params, inst.x0);
  EXPECT_EQ(r.status, SolveStatus::TimeLimit);
  EXPECT_FALSE(r.reports.empty());
}

TEST(DcaSolve, ModelAndObjectiveDecrease) {
  RecoverySpec spec;
  spec.n = 60;
  spec.m = 30;
  spec.sparsity = 4;
  spec.model = SparsityModel::L1MinusL2;
  const SparseRecoveryInstance inst = generate_recovery_instance(spec, 21);
  const DcProgram prog = build_recovery_program(inst);
  DcaParams params;
  params.inner.tolerance = 1e-8;
  Vector x = inst.x0;
  AlmMultipliers warm{Vector(0), Vector::Zero(spec.m)};
  for (int k = 0; k < 30; ++k) {
    const AugmentedSubproblem model = dca_model(prog, x, params.prox_weight);
    const InnerAlmResult step = dca_step(prog, x, params, &warm);
    ASSERT_TRUE(step.converged);
    if (k > 0) {
      // Model with the multiplier terms dropped: g − affine minorant + prox.
      const auto pure = [&](const Vector& y) {
        return prog.g(y).value - model.center_h - model.center_s.dot(y - x) +
               0.5 * (y - x).squaredNorm();
      };
      const double slack = 2 * params.inner.tolerance * (1.0 + step.mu.norm());
      EXPECT_LE(pure(step.x), pure(x) + slack);
      EXPECT_LE(prog.objective(step.x), prog.objective(x) + slack);
    }
    warm = {step.lambda, step.mu};
    x = step.x;
  }
}
