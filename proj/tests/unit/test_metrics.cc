#include "svilab/benchmarks.hpp"
#include "svilab/metrics.hpp"
#include "svilab/solvers.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace svilab {
namespace {

using testing::jp;

TEST(Residual, Examples) {
  // F(x) = x on [-1, 1]^2: x - proj(x - lambda x) = lambda x inside the box.
  const ViProblem p = testing::linear_problem(1, 1, 1.0);
  EXPECT_NEAR(residual(p, jp({0.5}, {0.0}), 0.5), 0.25, 1e-15);
  EXPECT_EQ(residual(p, jp({0.0}, {0.0}), 0.5), 0.0);
  // Clipped: F = 1 + x at x = -1 pushes outward, projection returns -1.
  const ViProblem shifted = testing::linear_problem(1, 1, 0.0, 1.0);
  EXPECT_EQ(residual(shifted, jp({-1.0}, {-1.0}), 2.0), 0.0);
  EXPECT_NEAR(residual(shifted, jp({0.0}, {0.0}), 2.0), std::sqrt(2.0), 1e-15);
  EXPECT_THROW(residual(p, jp({0.0}, {0.0}), 0.0), ConfigError);
}

TEST(Residual, VanishesAtBenchmarkSolutions) {
  const ViProblem logistic = build_logistic({});
  EXPECT_LT(residual(logistic, *logistic.known_solution, 0.1), 1e-15);
  BilinearGameSpec spec;
  spec.seed = 12;
  const ViProblem bilinear = build_bilinear(spec);
  EXPECT_LT(residual(bilinear, *bilinear.known_solution, 0.1), 1e-15);
}

TEST(GapLowerBound, Examples) {
  // F(x) = x, probes {0, 1}: max(<0, x>, <1, x - 1>) per coordinate pair.
  const ViProblem p = testing::linear_problem(1, 0 + 1, 1.0);
  const std::vector<JointPoint> probes = {jp({0.0}, {0.0}), jp({1.0}, {1.0})};
  EXPECT_EQ(gap_lower_bound(p, jp({0.5}, {0.5}), probes), 0.0);
  EXPECT_EQ(gap_lower_bound(p, jp({1.0}, {1.0}), probes), 0.0);
  EXPECT_EQ(gap_lower_bound(p, jp({-1.0}, {0.0}), probes), 0.0);
  const std::vector<JointPoint> one = {jp({-1.0}, {0.0})};
  EXPECT_EQ(gap_lower_bound(p, jp({1.0}, {0.0}), one), -2.0);
  EXPECT_THROW(gap_lower_bound(p, jp({0.0}, {0.0}), std::vector<JointPoint>{}), ConfigError);
  EXPECT_THROW(gap_lower_bound(jp({0.0}, {0.0}), ProbeSet{}), ConfigError);
}

TEST(GapLowerBound, CachedAndUncachedAgree) {
  const ViProblem p = build_logistic({});
  SampleRng rng(3);
  const ProbeSet set = make_probe_set(p, 50, rng);
  std::mt19937_64 gen(4);
  for (int t = 0; t < 50; ++t) {
    const JointPoint x = testing::random_point(gen, 1, 1, -4, 4);
    EXPECT_EQ(gap_lower_bound(x, set), gap_lower_bound(p, x, set.points));
  }
}

TEST(GapLowerBound, NonPositiveAtSolutionOfMonotoneProblem) {
  BilinearGameSpec spec;
  spec.seed = 9;
  const ViProblem p = build_bilinear(spec);
  SampleRng rng(5);
  const ProbeSet set = make_probe_set(p, 500, rng);
  EXPECT_LE(gap_lower_bound(*p.known_solution, set), 1e-12);
  // The probe set contains the solution, so any point scores at least 0.
  SampleRng other(6);
  for (int t = 0; t < 20; ++t) {
    EXPECT_GE(gap_lower_bound(random_feasible_point(p, other), set), -1e-12);
  }
}

TEST(ProbeSet, Composition) {
  const ViProblem small = build_logistic({});
  SampleRng rng(1);
  const ProbeSet grid = make_probe_set(small, 10, rng, 11);
  EXPECT_EQ(grid.size(), 121u + 1u + 10u);
  EXPECT_EQ(grid.points.front(), jp({-4.0}, {-4.0}));
  EXPECT_EQ(grid.points[120], jp({4.0}, {4.0}));
  EXPECT_EQ(grid.points[121], *small.known_solution);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_TRUE(small.feasible.contains(grid.points[i]));
    EXPECT_EQ(grid.values[i], evaluate_F(small, grid.points[i]));
  }
  BilinearGameSpec spec;
  const ViProblem big = build_bilinear(spec);
  EXPECT_EQ(make_probe_set(big, 10, rng).size(), 11u);  // no grid above three coordinates
}

TEST(AveragedGapBound, Examples) {
  EXPECT_DOUBLE_EQ(averaged_bound_constant(0.0), 2.0);
  EXPECT_DOUBLE_EQ(averaged_bound_constant(0.5), 3.5);
  const BoundInputs in{.delta = 0.5, .lambda = 0.1, .K = 100, .R = 4.0, .B = 2.0, .sigma_sq = 1.0};
  EXPECT_NEAR(averaged_gap_bound(in), 2.3, 1e-14);
  EXPECT_NEAR(averaged_gap_asymptote(in), 0.9, 1e-15);
  EXPECT_THROW(averaged_bound_constant(1.0), ConfigError);
  BoundInputs bad = in;
  bad.lambda = 0.0;
  EXPECT_THROW(averaged_gap_bound(bad), ConfigError);
  bad = in;
  bad.K = 0;
  EXPECT_THROW(averaged_gap_bound(bad), ConfigError);
}

TEST(AveragedGapBound, DecreasesInKTowardAsymptote) {
  BoundInputs in{.delta = 0.3, .lambda = 0.05, .K = 1, .R = 40.0, .B = 3.0, .sigma_sq = 0.5};
  double prev = averaged_gap_bound(in);
  for (std::uint64_t K = 2; K <= 100000; K *= 3) {
    in.K = K;
    const double b = averaged_gap_bound(in);
    EXPECT_LT(b, prev);
    EXPECT_GT(b, averaged_gap_asymptote(in));
    prev = b;
  }
}

TEST(RConstant, Conventions) {
  const FeasibleSet set{BoxConstraint::symmetric(5, 1.0), BoxConstraint::symmetric(5, 1.0)};
  EXPECT_DOUBLE_EQ(r_constant(set, RConvention::diameter_sq), 40.0);
  EXPECT_DOUBLE_EQ(r_constant(set, RConvention::diameter), std::sqrt(40.0));
}

TEST(Monotonicity, MonotoneAndViolatingFields) {
  SampleRng rng(2);
  const ViProblem bilinear = build_bilinear({});
  const MonotonicityReport ok = monotonicity_probe(bilinear, 500, rng);
  EXPECT_GE(ok.min_inner_product, -1e-12);
  EXPECT_FALSE(ok.violating_pair);

  const ViProblem anti = testing::linear_problem(1, 1, -1.0);
  const MonotonicityReport bad = monotonicity_probe(anti, 50, rng);
  EXPECT_LT(bad.min_inner_product, 0.0);
  ASSERT_TRUE(bad.violating_pair);
  const auto& [x, y] = *bad.violating_pair;
  EXPECT_LT((evaluate_F(anti, x) - evaluate_F(anti, y)).dot(x - y), -1e-10);
}

TEST(Lipschitz, EstimateIsLowerBoundAndTightForLinearMaps) {
  SampleRng rng(8);
  EXPECT_NEAR(lipschitz_estimate(testing::linear_problem(2, 2, 3.0), 100, rng), 3.0, 1e-12);
  const ViProblem logistic = build_logistic({});
  const double est = lipschitz_estimate(logistic, 2000, rng);
  EXPECT_LE(est, *logistic.lipschitz * (1 + 1e-9));
  EXPECT_GT(est, 0.3 * *logistic.lipschitz);
}

TEST(ResidualInequality, HoldsAlongExactRelaxedRuns) {
  // With eps = 0, nonexpansiveness gives res <= ||x^k - x^{k+1}|| + ||xbar^k - x^k||.
  BilinearGameSpec spec;
  const ViProblem p = build_bilinear(spec);
  const Oracle oracle(p, {});
  for (double delta : {0.0, 0.4, 0.8}) {
    SolverConfig c;
    c.algorithm = Algorithm::srfb;
    c.delta = delta;
    c.lambda = 0.3;
    SolverState s = SolverState::initial(p, JointPoint::constant(5, 5, 0.6));
    for (int k = 0; k < 300; ++k) {
      const SolverState next = srfb_step(p, c, s, oracle);
      const ResidualInequality ri =
          residual_inequality(s.x, next.x, next.x_bar_prev, 0.0, c.lambda, p);
      ASSERT_TRUE(ri.holds) << "delta=" << delta << " k=" << k << " " << ri.lhs << " > " << ri.rhs;
      s = next;
    }
  }
}

TEST(ResidualInequality, UnitNoiseCoefficientFailsForOpposingNoise) {
  // One delta = 0 step on F = (3, 3) with oracle output F + eps, eps = (-2, -2):
  // x^1 = -lambda (1, 1), res(x^0)^2 = 18 lambda^2, while the right side is
  // 2 * 2 lambda^2 + lambda^2 * 8 = 12 lambda^2. A coefficient of 4 on the
  // noise term restores the bound (36 lambda^2).
  const ViProblem p = testing::linear_problem(1, 1, 0.0, 3.0, 10.0);
  const double lambda = 0.5;
  const JointPoint x0 = jp({0.0}, {0.0});
  const JointPoint x1 = joint_project(p, x0 - lambda * jp({1.0}, {1.0}));
  const ResidualInequality ri = residual_inequality(x0, x1, x0, 8.0, lambda, p);
  EXPECT_DOUBLE_EQ(ri.lhs, 18 * lambda * lambda);
  EXPECT_DOUBLE_EQ(ri.rhs, 12 * lambda * lambda);
  EXPECT_FALSE(ri.holds);
  EXPECT_TRUE(residual_inequality_check(x0, x1, x0, 4 * 8.0, lambda, p));
}

TEST(ResidualInequality, DetectsViolation) {
  const ViProblem p = testing::linear_problem(1, 1, 1.0);
  // A "step" that did not move with no noise and no relaxation cannot bound a
  // nonzero residual.
  const JointPoint x = jp({0.5}, {0.5});
  EXPECT_FALSE(residual_inequality_check(x, x, x, 0.0, 0.5, p));
}

TEST(DistanceMetrics, Examples) {
  const Distance d = distance_metrics(jp({1.0}, {1.0}), jp({1.0}, {-1.0}), jp({-3.0}, {-1.0}));
  EXPECT_EQ(d.dist, 2.0);
  EXPECT_EQ(d.rel_dist, 0.5);
  EXPECT_THROW(distance_metrics(jp({0.0}, {0.0}), jp({1.0}, {1.0}), jp({1.0}, {1.0})), Error);
}

TEST(OracleConstants, ExactAndNoisy) {
  SampleRng rng(10);
  const ViProblem p = testing::linear_problem(1, 1, 1.0);  // ||F||^2 <= 2 on the box
  const OracleConstants exact = estimate_oracle_constants(p, {}, rng);
  EXPECT_EQ(exact.sigma_sq, 0.0);
  EXPECT_DOUBLE_EQ(exact.B, 2.0);
  OracleConfig noisy;
  noisy.scheme = OracleScheme::sa;
  noisy.noise = NoiseModel::additive(0.5);
  const OracleConstants c = estimate_oracle_constants(p, noisy, rng, 16, 2000);
  EXPECT_NEAR(c.sigma_sq, 2 * 0.25, 0.1);
  EXPECT_DOUBLE_EQ(c.B, 2.0 + c.sigma_sq);
}

}  // namespace
}  // namespace svilab
