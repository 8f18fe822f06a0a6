#include "svilab/benchmarks.hpp"
#include "svilab/oracles.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

namespace svilab {
namespace {

using testing::jp;

TEST(BatchSize, Examples) {
  EXPECT_EQ(batch_size({1.0, 1.0, 1.0, std::nullopt}, 1), 4u);
  EXPECT_EQ(batch_size({1.0, 1.0, 0.5, std::nullopt}, 1), 3u);  // ceil(2^1.5) = ceil(2.83)
}

TEST(BatchSize, NondecreasingExhaustiveSweep) {
  const BatchSchedule schedules[] = {
      {1.0, 1.0, 1.0, std::nullopt}, {0.01, 0.5, 0.1, std::nullopt},
      {3.0, 2.0, 0.5, std::nullopt}, {1.0, 1.0, 1.0, 10000},
      {0.2, 10.0, 0.05, 500}};
  for (const auto& s : schedules) {
    std::uint64_t prev = 0;
    for (std::uint64_t k = 1; k <= 10000; ++k) {
      const std::uint64_t n = batch_size(s, k);
      ASSERT_GE(n, prev) << "k=" << k;
      ASSERT_GE(n, 1u);
      if (!s.cap) {
        ASSERT_GE(static_cast<double>(n), s.b * std::pow(k + s.k0, s.a + 1.0) * (1 - 1e-15));
      }
      prev = n;
    }
  }
}

TEST(BatchSize, CapClipsAndFlags) {
  const BatchSchedule s{1.0, 1.0, 1.0, 10000};
  EXPECT_EQ(batch_size(s, 98), 9801u);
  EXPECT_FALSE(batch_capped(s, 98));
  EXPECT_EQ(batch_size(s, 99), 10000u);
  EXPECT_FALSE(batch_capped(s, 99));  // (99 + 1)^2 = 10000 exactly
  EXPECT_EQ(batch_size(s, 100), 10000u);
  EXPECT_TRUE(batch_capped(s, 100));
}

TEST(BatchSize, OverflowAndInvalidParameters) {
  EXPECT_THROW(batch_size({1e300, 1.0, 5.0, std::nullopt}, 10), ConfigError);
  EXPECT_THROW(batch_size({0.0, 1.0, 1.0, std::nullopt}, 1), ConfigError);
  EXPECT_THROW(batch_size({1.0, -1.0, 1.0, std::nullopt}, 1), ConfigError);
  EXPECT_THROW(batch_size({1.0, 1.0, 1.0, std::nullopt}, 0), ConfigError);
  // A cap absorbs overflow.
  EXPECT_EQ(batch_size({1e300, 1.0, 5.0, 7}, 10), 7u);
}

OracleConfig additive(OracleScheme scheme, double sigma, std::uint64_t seed = 1) {
  OracleConfig c;
  c.scheme = scheme;
  c.sa_batch = 3;
  c.schedule = {1.0, 1.0, 1.0, std::nullopt};
  c.noise = NoiseModel::additive(sigma);
  c.seed = seed;
  return c;
}

TEST(SampleGradient, ZeroNoiseReproducesExactMappingBitForBit) {
  const ViProblem p = build_logistic({});
  const JointPoint x = jp({0.3}, {-1.7});
  const JointPoint exact = evaluate_F(p, x);
  for (auto scheme : {OracleScheme::exact, OracleScheme::sa, OracleScheme::saa}) {
    for (std::uint64_t k : {1u, 2u, 7u}) {
      const OracleDraw d = sample_gradient(p, additive(scheme, 0.0), x, k);
      EXPECT_EQ(d.estimate, exact);
    }
  }
  EXPECT_EQ(sample_gradient(p, additive(OracleScheme::exact, 0.0), x, 1).samples_used, 0u);
  EXPECT_EQ(sample_gradient(p, additive(OracleScheme::sa, 0.0), x, 1).samples_used, 3u);
  EXPECT_EQ(sample_gradient(p, additive(OracleScheme::saa, 0.0), x, 2).samples_used, 9u);
}

TEST(SampleGradient, SaUnbiasedWithinThreeStandardErrors) {
  const ViProblem p = testing::linear_problem(2, 1, 0.5, 0.25);
  const JointPoint x = jp({0.4, -0.2}, {0.9});
  const JointPoint exact = evaluate_F(p, x);
  OracleConfig c = additive(OracleScheme::sa, 1.0, 99);
  c.sa_batch = 1;
  constexpr int kCalls = 100000;
  Vector sum = Vector::Zero(3);
  for (int i = 1; i <= kCalls; ++i) sum += sample_gradient(p, c, x, i).estimate.flat();
  const Vector mean = sum / kCalls;
  for (Index j = 0; j < 3; ++j) EXPECT_NEAR(mean[j], exact[j], 3.0 / std::sqrt(double(kCalls)));
}

TEST(SampleGradient, SaaVarianceScalesInverselyWithBatch) {
  // Per-sample E||eps||^2 = n sigma^2 = 3 for additive unit noise in R^3.
  const ViProblem p = testing::linear_problem(2, 1, 1.0);
  const JointPoint x = jp({0.1, 0.2}, {0.3});
  const JointPoint exact = evaluate_F(p, x);
  for (std::uint64_t k : {1u, 4u, 12u}) {
    const std::uint64_t n_k = batch_size({1.0, 1.0, 1.0, std::nullopt}, k);
    double acc = 0.0;
    constexpr int kReps = 400;
    for (int r = 0; r < kReps; ++r) {
      const OracleDraw d = sample_gradient(p, additive(OracleScheme::saa, 1.0, 1000 + r), x, k);
      EXPECT_EQ(d.samples_used, n_k);
      acc += stochastic_error(d.estimate, exact).sq_norm;
    }
    const double expected = 3.0 / static_cast<double>(n_k);
    EXPECT_NEAR(acc / kReps / expected, 1.0, 0.25) << "k=" << k;
  }
}

TEST(SampleGradient, DeterministicStreams) {
  BilinearGameSpec spec;
  spec.seed = 5;
  const ViProblem p = build_bilinear(spec);
  OracleConfig c;
  c.scheme = OracleScheme::sa;
  c.sa_batch = 4;
  c.seed = 17;
  const JointPoint x = JointPoint::constant(5, 5, 0.3);
  const JointPoint a = sample_gradient(p, c, x, 3).estimate;
  const JointPoint b = sample_gradient(p, c, x, 3).estimate;
  EXPECT_EQ(a, b);
  EXPECT_FALSE(a == sample_gradient(p, c, x, 4).estimate);
  EXPECT_FALSE(a == sample_gradient(p, c, x, 3, 1).estimate);
  c.seed = 18;
  EXPECT_FALSE(a == sample_gradient(p, c, x, 3).estimate);
}

TEST(SampleGradient, NonFiniteSampleIsNumericError) {
  ViProblem p = testing::zero_problem(1, 1);
  p.per_sample_gradient = [](const JointPoint& x, SampleRng& rng, JointPoint& out) {
    out = x;
    out[1] = rng.uniform() < 2.0 ? std::numeric_limits<double>::infinity() : 0.0;
  };
  OracleConfig c;
  c.scheme = OracleScheme::sa;
  EXPECT_THROW(sample_gradient(p, c, jp({0.0}, {0.0}), 1), NumericError);
}

TEST(StochasticError, Examples) {
  const JointPoint exact = jp({1.0, 2.0}, {3.0});
  const StochasticError zero = stochastic_error(exact, exact);
  EXPECT_EQ(zero.sq_norm, 0.0);
  EXPECT_EQ(zero.error, JointPoint::zeros(2, 1));
  const StochasticError e = stochastic_error(jp({4.0, 6.0}, {3.0}), exact);
  EXPECT_EQ(e.sq_norm, 25.0);
  EXPECT_THROW(stochastic_error(jp({1.0}, {1.0}), exact), DimensionError);
}

TEST(StochasticError, ZeroMeanOverReplications) {
  BilinearGameSpec spec;
  spec.seed = 2;
  spec.matrix_noise_sd = 0.5;
  const ViProblem p = build_bilinear(spec);
  const JointPoint x = JointPoint::constant(5, 5, 0.7);
  const JointPoint exact = evaluate_F(p, x);
  OracleConfig c;
  c.scheme = OracleScheme::sa;
  c.seed = 3;
  constexpr int kReps = 20000;
  Vector sum = Vector::Zero(10);
  for (int r = 1; r <= kReps; ++r) {
    sum += stochastic_error(sample_gradient(p, c, x, r).estimate, exact).error.flat();
  }
  // Per-coordinate sd of the error is 0.5 * 0.7.
  const double band = 3.0 * 0.35 / std::sqrt(double(kReps));
  for (Index j = 0; j < 10; ++j) EXPECT_NEAR(sum[j] / kReps, 0.0, band);
}

TEST(OracleConfig, Validation) {
  OracleConfig c;
  c.scheme = OracleScheme::sa;
  c.sa_batch = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c.sa_batch = 1;
  c.noise.sigma = -1.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

}  // namespace
}  // namespace svilab
