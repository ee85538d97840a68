// Copyright (c) dcalm contributors

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "dcalm/subsolvers/anchor_descent.hpp"
#include "dcalm/subsolvers/fista.hpp"
#include "dcalm/subsolvers/smooth_descent.hpp"
#include "oracles.hpp"
#include "toy_programs.hpp"

using namespace dcalm;
using toy::vec;

namespace {

SmoothOracle quadratic(Vector diag, Vector rhs) {
  return [diag = std::move(diag), rhs = std::move(rhs)](const Vector& x, Vector* grad) {
    if (grad) *grad = diag.cwiseProduct(x) - rhs;
    return 0.5 * x.dot(diag.cwiseProduct(x)) - rhs.dot(x);
  };
}

SmoothOracle half_squared_distance(Vector c, double weight = 1.0) {
  return [c = std::move(c), weight](const Vector& x, Vector* grad) {
    if (grad) *grad = weight * (x - c);
    return 0.5 * weight * (x - c).squaredNorm();
  };
}

AnchorProblem one_d(std::vector<double> anchors, std::vector<double> weights, SmoothOracle rest) {
  AnchorProblem ap;
  for (double a : anchors) ap.anchors.push_back(vec({a}));
  ap.weights = std::move(weights);
  ap.remainder = std::move(rest);
  return ap;
}

}  // namespace

TEST(SoftThreshold, ClosedForm) {
  EXPECT_EQ(soft_threshold(vec({3.0, -0.5, 0.0}), 1.0), vec({2.0, 0.0, 0.0}));
}

TEST(SoftThreshold, ZeroThresholdIsIdentity) {
  const Vector x = vec({1.5, -2.0, 0.25});
  EXPECT_EQ(soft_threshold(x, 0.0), x);
}

TEST(SoftThreshold, Boundary) { EXPECT_EQ(soft_threshold(vec({2.0}), 2.0), vec({0.0})); }

TEST(SoftThreshold, NegativeThresholdThrows) {
  EXPECT_THROW(soft_threshold(vec({1.0}), -0.1), InputError);
}

TEST(SoftThreshold, MatchesGoldenSectionOnRandomInstances) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> xs(-5.0, 5.0);
  std::uniform_real_distribution<double> taus(0.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double x = xs(rng);
    const double tau = taus(rng);
    const auto f = [&](double y) { return tau * std::abs(y) + 0.5 * (y - x) * (y - x); };
    const double ref = oracle::golden_section(f, -10.0, 10.0);
    EXPECT_NEAR(soft_threshold(vec({x}), tau)[0], ref, 1e-6);
  }
}

TEST(Fista, ScalarL1PlusQuadratic) {
  CompositeProblem cp;
  cp.smooth = half_squared_distance(vec({2.0}));
  cp.l1_weight = 1.0;
  const FistaResult r = fista(cp, vec({-4.0}), 1e-10, 1000);
  const auto f = [](double y) { return std::abs(y) + 0.5 * (y - 2.0) * (y - 2.0); };
  const auto [grid_x, grid_f] = oracle::grid_1d(f, -5.0, 5.0, 100001);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], 1.0, 1e-8);
  EXPECT_NEAR(r.x[0], grid_x, 1e-4);
  EXPECT_LE(cp.objective(r.x), grid_f + 1e-12);
}

TEST(Fista, ZeroL1WeightReturnsCenter) {
  const Vector c = vec({1.0, -2.0, 3.5});
  CompositeProblem cp;
  cp.smooth = half_squared_distance(c);
  const FistaResult r = fista(cp, Vector::Zero(3), 1e-10, 1000);
  EXPECT_NEAR((r.x - c).norm(), 0.0, 1e-9);
}

TEST(Fista, ThresholdKillsEverything) {
  CompositeProblem cp;
  cp.smooth = half_squared_distance(Vector::Zero(4));
  cp.l1_weight = 1.0;
  const FistaResult r = fista(cp, vec({3.0, -1.0, 0.5, 2.0}), 1e-10, 1000);
  EXPECT_NEAR(r.x.norm(), 0.0, 1e-10);
}

TEST(Fista, ResidualBelowToleranceOnConvergence) {
  CompositeProblem cp;
  cp.smooth = quadratic(vec({1.0, 10.0, 100.0}), vec({5.0, -3.0, 50.0}));
  cp.l1_weight = 2.0;
  const FistaResult r = fista(cp, Vector::Zero(3), 1e-9, 100000);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.residual, 1e-9);
  // Separable: each coordinate solves d·y − r + 2·sign(y) ∋ 0.
  const Vector expected = vec({3.0, -0.1, 0.48});
  EXPECT_NEAR((r.x - expected).norm(), 0.0, 1e-8);
}

TEST(Fista, MatchesGridOraclesInOneAndTwoDimensions) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> coef(-3.0, 3.0);
  std::uniform_real_distribution<double> curv(0.5, 4.0);
  std::uniform_real_distribution<double> weight(0.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = trial % 2 == 0 ? 1 : 2;
    Eigen::MatrixXd B = Eigen::MatrixXd::Random(n, n);
    const Eigen::MatrixXd H =
        B * B.transpose() + curv(rng) * Eigen::MatrixXd::Identity(n, n);
    Vector rhs(n);
    for (int i = 0; i < n; ++i) rhs[i] = coef(rng);
    const double w = weight(rng);
    CompositeProblem cp;
    cp.smooth = [H, rhs](const Vector& x, Vector* grad) {
      if (grad) *grad = H * x - rhs;
      return 0.5 * x.dot(H * x) - rhs.dot(x);
    };
    cp.l1_weight = w;
    const FistaResult r = fista(cp, Vector::Zero(n), 1e-10, 100000);
    ASSERT_TRUE(r.converged);
    if (n == 1) {
      const auto f = [&](double y) { return cp.objective(vec({y})); };
      EXPECT_NEAR(r.x[0], oracle::golden_section(f, -20.0, 20.0), 1e-6);
    } else {
      const auto f = [&](const Vector& y) { return cp.objective(y); };
      const auto [ref, ref_f] = oracle::refine_2d(f, -10.0, 10.0);
      EXPECT_NEAR((r.x - ref).norm(), 0.0, 1e-6);
      EXPECT_LE(cp.objective(r.x), ref_f + 1e-10);
    }
  }
}

TEST(Fista, AgreesWithLongRunReference) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 30;
    Eigen::MatrixXd B = Eigen::MatrixXd::Random(20, n);
    const Vector target = oracle::random_vector(rng, 20);
    CompositeProblem cp;
    cp.smooth = [B, target](const Vector& x, Vector* grad) {
      const Vector r = B * x - target;
      if (grad) *grad = B.transpose() * r + 0.1 * x;
      return 0.5 * r.squaredNorm() + 0.05 * x.squaredNorm();
    };
    cp.l1_weight = 0.3;
    cp.strong_convexity = 0.1;
    const double tol = 1e-6;
    const FistaResult r = fista(cp, Vector::Zero(n), tol, 5000);
    const FistaResult ref = fista(cp, Vector::Zero(n), 1e-13, 50000);
    ASSERT_TRUE(r.converged);
    EXPECT_LE(std::abs(cp.objective(r.x) - cp.objective(ref.x)), 10 * tol);
  }
}

TEST(Fista, CustomProxReplacesL1) {
  // Projection onto [1, 2] as the prox of the indicator.
  CompositeProblem cp;
  cp.smooth = half_squared_distance(vec({5.0}));
  cp.prox = [](const Vector& x, double) { return x.cwiseMax(1.0).cwiseMin(2.0); };
  cp.nonsmooth_value = [](const Vector&) { return 0.0; };
  const FistaResult r = fista(cp, vec({0.0}), 1e-10, 1000);
  EXPECT_NEAR(r.x[0], 2.0, 1e-12);
}

TEST(Fista, NonFiniteOracleThrows) {
  CompositeProblem cp;
  cp.smooth = [](const Vector& x, Vector* grad) {
    if (grad) *grad = x;
    return std::nan("");
  };
  EXPECT_THROW(fista(cp, vec({1.0}), 1e-8, 100), NumericError);
}

TEST(Fista, QuadraticGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(31);
  Eigen::MatrixXd B = Eigen::MatrixXd::Random(6, 6);
  const Eigen::MatrixXd H = B * B.transpose();
  const Vector rhs = oracle::random_vector(rng, 6);
  const SmoothOracle f = [&](const Vector& x, Vector* grad) {
    if (grad) *grad = H * x - rhs;
    return 0.5 * x.dot(H * x) - rhs.dot(x);
  };
  for (int trial = 0; trial < 50; ++trial) {
    const Vector x = oracle::random_vector(rng, 6);
    Vector g;
    f(x, &g);
    const Vector fd = oracle::fd_gradient([&](const Vector& y) { return f(y, nullptr); }, x);
    EXPECT_LE((g - fd).norm(), 1e-5 * std::max(1.0, g.norm()));
  }
}

TEST(SmoothDescent, DiagonalQuadratic) {
  const Vector diag = vec({1.0, 4.0, 0.5, 10.0});
  const Vector rhs = vec({1.0, -2.0, 3.0, 5.0});
  const SmoothDescentResult r = smooth_descent(quadratic(diag, rhs), Vector::Zero(4), 1e-10, 500);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR((r.x - rhs.cwiseQuotient(diag)).norm(), 0.0, 1e-9);
}

TEST(SmoothDescent, StationaryStartReturnsImmediately) {
  const Vector diag = vec({2.0, 3.0});
  const Vector rhs = vec({2.0, 3.0});
  const SmoothDescentResult r = smooth_descent(quadratic(diag, rhs), vec({1.0, 1.0}), 1e-10, 500);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_EQ(r.x, vec({1.0, 1.0}));
}

TEST(SmoothDescent, MonotoneValuesAndAnchorClearance) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> coord(0.0, 10.0);
  for (int trial = 0; trial < 10; ++trial) {
    AnchorProblem ap;
    for (int j = 0; j < 15; ++j) {
      ap.anchors.push_back(vec({coord(rng), coord(rng)}));
      ap.weights.push_back(1.0);
    }
    ap.remainder = half_squared_distance(vec({coord(rng), coord(rng)}), 0.5);
    std::vector<double> accepted;
    std::vector<Vector> evaluated;
    const SmoothOracle f = [&](const Vector& x, Vector* grad) {
      evaluated.push_back(x);
      return ap.value_and_gradient(x, grad);
    };
    SmoothDescentOptions opts;
    opts.avoid = ap.anchors;
    Vector start = vec({coord(rng), coord(rng)});
    const SmoothDescentResult r = smooth_descent(f, start, 1e-8, 500, opts);
    EXPECT_LE(r.value, ap.value(start));
    for (const Vector& x : evaluated) {
      for (const Vector& a : ap.anchors) EXPECT_GT((x - a).norm(), 1e-12);
    }
  }
}

TEST(SmoothDescent, StronglyConvexWeberRemainderReachesTolerance) {
  AnchorProblem ap;
  ap.anchors = {vec({0.0, 0.0}), vec({4.0, 0.0}), vec({0.0, 3.0})};
  ap.weights = {1.0, 1.0, 1.0};
  ap.remainder = half_squared_distance(vec({1.0, 1.0}), 2.0);
  SmoothDescentOptions opts;
  opts.avoid = ap.anchors;
  const SmoothDescentResult r = smooth_descent(
      [&](const Vector& x, Vector* g) { return ap.value_and_gradient(x, g); }, vec({2.0, 2.0}),
      1e-9, 1000, opts);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.gradient_norm, 1e-9);
}

TEST(SmoothDescent, NonFiniteValueThrows) {
  const SmoothOracle f = [](const Vector& x, Vector* g) {
    if (g) *g = x;
    return std::numeric_limits<double>::infinity();
  };
  EXPECT_THROW(smooth_descent(f, vec({1.0}), 1e-8, 10), NumericError);
}

TEST(AnchorMinimizerTest, ZeroReducedGradient) {
  const AnchorProblem ap = one_d({0.0}, {1.0}, half_squared_distance(vec({0.0})));
  EXPECT_TRUE(anchor_minimizer_test(ap, 0));
}

TEST(AnchorMinimizerTest, ComparisonAgainstWeight) {
  // ψ(x) = −3x has ‖∇ψ‖ = 3 > w = 2.
  const AnchorProblem ap = one_d({0.0}, {2.0}, [](const Vector& x, Vector* g) {
    if (g) *g = vec({-3.0});
    return -3.0 * x[0];
  });
  EXPECT_FALSE(anchor_minimizer_test(ap, 0));
}

TEST(AnchorMinimizerTest, OneDimensionalAgreesWithGrid) {
  const AnchorProblem ap = one_d({0.0}, {1.0}, half_squared_distance(vec({0.5})));
  EXPECT_TRUE(anchor_minimizer_test(ap, 0));
  const auto [x, fx] = oracle::grid_1d([&](double y) { return ap.value(vec({y})); }, -2, 2, 4001);
  EXPECT_NEAR(x, 0.0, 1e-9);
}

TEST(AnchorMinimizerTest, CoincidentAnchorsThrow) {
  const AnchorProblem ap = one_d({1.0, 1.0}, {1.0, 1.0}, half_squared_distance(vec({0.0})));
  EXPECT_THROW(anchor_minimizer_test(ap, 0), DataError);
}

TEST(AnchorDescentStep, HandEvaluatedOneDimensionalStep) {
  const AnchorProblem ap = one_d({0.0}, {1.0}, half_squared_distance(vec({3.0})));
  ASSERT_FALSE(anchor_minimizer_test(ap, 0));
  const AnchorStep step = anchor_descent_step(ap, 0);
  EXPECT_DOUBLE_EQ(step.direction[0], 3.0);
  const double grad_norm = 3.0;
  EXPECT_DOUBLE_EQ(1.0 * grad_norm - grad_norm * grad_norm, -6.0);
  EXPECT_DOUBLE_EQ(step.step, 1.0);
  EXPECT_DOUBLE_EQ(step.trial[0], 3.0);
  EXPECT_DOUBLE_EQ(ap.value(step.trial), 3.0);
  EXPECT_DOUBLE_EQ(ap.value(vec({0.0})), 4.5);
}

TEST(AnchorDescentStep, BoundaryCaseIsAMinimizer) {
  // ‖∇ψ(0)‖ = w exactly: the test accepts the anchor, the step refuses.
  const AnchorProblem ap = one_d({0.0}, {1.0}, half_squared_distance(vec({1.0})));
  EXPECT_TRUE(anchor_minimizer_test(ap, 0));
  EXPECT_THROW(anchor_descent_step(ap, 0), InputError);
}

TEST(AnchorDescentStep, TwoAnchorsTrialStrictlyBetween) {
  // |x + 1| + |x − 1| + 2(x − 0.6)²: the prox pulls right of the left anchor.
  const AnchorProblem ap =
      one_d({-1.0, 1.0}, {1.0, 1.0}, half_squared_distance(vec({0.6}), 4.0));
  ASSERT_FALSE(anchor_minimizer_test(ap, 0));
  const AnchorStep step = anchor_descent_step(ap, 0);
  EXPECT_GT(step.trial[0], -1.0);
  EXPECT_LT(step.trial[0], 1.0);
  EXPECT_LT(ap.value(step.trial), ap.value(vec({-1.0})));
  const auto [grid_x, grid_f] =
      oracle::grid_1d([&](double y) { return ap.value(vec({y})); }, -2, 2, 40001);
  EXPECT_GT(grid_x, -1.0);
  EXPECT_LT(grid_x, 1.0);
}

TEST(AnchorDescentStep, AlwaysStrictDecreaseOnRandomInstances) {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> coord(0.0, 10.0);
  int steps = 0;
  for (int trial = 0; trial < 200; ++trial) {
    AnchorProblem ap;
    for (int j = 0; j < 8; ++j) {
      ap.anchors.push_back(vec({coord(rng), coord(rng)}));
      ap.weights.push_back(0.2);
    }
    ap.remainder = half_squared_distance(vec({coord(rng), coord(rng)}), 3.0);
    for (std::size_t j = 0; j < ap.anchors.size(); ++j) {
      if (anchor_minimizer_test(ap, j)) continue;
      const AnchorStep step = anchor_descent_step(ap, j);
      ++steps;
      EXPECT_LT(ap.value(step.trial), ap.value(ap.anchors[j]));
      for (const Vector& a : ap.anchors) EXPECT_GT((step.trial - a).norm(), 0.0);
    }
  }
  EXPECT_GT(steps, 100);
}

TEST(WeberSubproblem, SingleAnchorWithCenteredProx) {
  const AnchorProblem ap = one_d({2.0}, {1.0}, half_squared_distance(vec({2.0})));
  const WeberSubproblemResult r = solve_weber_subproblem(ap, 1e-10);
  EXPECT_EQ(r.x, vec({2.0}));
  ASSERT_TRUE(r.anchor.has_value());
  EXPECT_EQ(*r.anchor, 0u);
}

TEST(WeberSubproblem, OneDimensionalMinimizerAtAnchor) {
  // 3|x| + |x − 2| + ½(x − 0.5)²: the heavy anchor 0 is optimal.
  const AnchorProblem ap = one_d({0.0, 2.0}, {3.0, 1.0}, half_squared_distance(vec({0.5})));
  const auto [grid_x, grid_f] =
      oracle::grid_1d([&](double y) { return ap.value(vec({y})); }, -3, 3, 60001);
  const WeberSubproblemResult r = solve_weber_subproblem(ap, 1e-10);
  EXPECT_NEAR(grid_x, 0.0, 1e-9);
  EXPECT_EQ(r.x, vec({0.0}));
}

TEST(WeberSubproblem, BeatsGridOnRandomPlanarInstances) {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> coord(0.0, 10.0);
  const double tol = 1e-8;
  for (int trial = 0; trial < 20; ++trial) {
    AnchorProblem ap;
    for (int j = 0; j < 12; ++j) {
      ap.anchors.push_back(vec({coord(rng), coord(rng)}));
      ap.weights.push_back(0.5 + coord(rng) / 10.0);
    }
    ap.remainder = half_squared_distance(vec({coord(rng), coord(rng)}), 0.1 * (trial % 4));
    const WeberSubproblemResult r = solve_weber_subproblem(ap, tol);
    const auto [gx, gf] = oracle::grid_2d([&](const Vector& y) { return ap.value(y); }, 0, 10, 200);
    EXPECT_LE(ap.value(r.x), gf + tol);
    double anchor_best = std::numeric_limits<double>::infinity();
    for (const Vector& a : ap.anchors) anchor_best = std::min(anchor_best, ap.value(a));
    EXPECT_LE(ap.value(r.x), anchor_best);
  }
}
