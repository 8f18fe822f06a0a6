#pragma once

// Solution-quality measures and probes of the standing assumptions.

#include "svilab/core.hpp"
#include "svilab/oracles.hpp"
#include "svilab/rng.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace svilab {

/// Natural residual ||x - proj(x - lambda F(x))||. Zero exactly at solutions.
double residual(const ViProblem& problem, const JointPoint& x, double lambda);

/// Probe points together with their cached pseudogradients.
struct ProbeSet {
  std::vector<JointPoint> points;
  std::vector<JointPoint> values;

  std::size_t size() const { return points.size(); }
};

/// Uniform random point of the feasible box.
JointPoint random_feasible_point(const ViProblem& problem, SampleRng& rng);

/// Deterministic grid (only when dim <= 3) + known solution + `random_count`
/// uniform feasible points.
ProbeSet make_probe_set(const ViProblem& problem, std::size_t random_count, SampleRng& rng,
                        Index grid_points_per_dim = 11);

/// max over probes y of <F(y), x - y>. The gap function maximizes over all of
/// Omega, so this is a lower bound on it.
double gap_lower_bound(const ViProblem& problem, const JointPoint& x,
                       std::span<const JointPoint> probes);
double gap_lower_bound(const JointPoint& x, const ProbeSet& probes);

/// Constants of the averaged-iterate error bound.
struct BoundInputs {
  double delta = 0.0;
  double lambda = 0.0;
  std::uint64_t K = 1;
  double R = 0.0;
  double B = 0.0;
  double sigma_sq = 0.0;

  void validate() const;
};

/// c = (2 - delta^2) / (1 - delta).
double averaged_bound_constant(double delta);

/// c R / (lambda K) + (2 B^2 + sigma^2) lambda.
double averaged_gap_bound(const BoundInputs& inputs);

/// K -> infinity limit (2 B^2 + sigma^2) lambda.
double averaged_gap_asymptote(const BoundInputs& inputs);

/// The set-size constant R can be read as the squared diameter (default) or
/// the diameter itself; both are exposed.
enum class RConvention { diameter, diameter_sq };

double r_constant(const FeasibleSet& set, RConvention convention);

struct MonotonicityReport {
  double min_inner_product = 0.0;
  std::optional<std::pair<JointPoint, JointPoint>> violating_pair;
};

/// min over sampled feasible pairs of <F(x) - F(y), x - y>; records the first
/// pair below -1e-10.
MonotonicityReport monotonicity_probe(const ViProblem& problem, std::size_t num_pairs,
                                      SampleRng& rng);

/// max over sampled pairs of ||F(x) - F(y)|| / ||x - y||. A lower bound on
/// the Lipschitz constant. Coincident pairs are skipped.
double lipschitz_estimate(const ViProblem& problem, std::size_t num_pairs, SampleRng& rng);

struct ResidualInequality {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// res(x^k)^2 <= 2||x^k - x^{k+1}||^2 + 4||xbar^k - x^k||^2 + lambda^2 ||eps_k||^2,
/// evaluated for one completed relaxed forward-backward step. Tolerance 1e-9
/// on the right-hand side.
ResidualInequality residual_inequality(const JointPoint& x_k, const JointPoint& x_k1,
                                       const JointPoint& x_bar_k, double eps_norm_sq,
                                       double lambda, const ViProblem& problem);

bool residual_inequality_check(const JointPoint& x_k, const JointPoint& x_k1,
                               const JointPoint& x_bar_k, double eps_norm_sq, double lambda,
                               const ViProblem& problem);

struct Distance {
  double dist = 0.0;
  double rel_dist = 0.0;
};

/// dist = ||x - x*||, rel_dist = dist / ||x0 - x*||. Throws when x0 = x*.
Distance distance_metrics(const JointPoint& x, const JointPoint& x_star, const JointPoint& x0);

/// Empirical constants for the averaged bound: B bounds the second moment of
/// the oracle output (max ||F||^2 over box vertices or random points plus the
/// oracle variance) and sigma_sq the variance E||eps||^2 of one oracle call.
struct OracleConstants {
  double B = 0.0;
  double sigma_sq = 0.0;
};

OracleConstants estimate_oracle_constants(const ViProblem& problem, const OracleConfig& oracle,
                                          SampleRng& rng, std::size_t points = 64,
                                          std::size_t draws_per_point = 64);

}  // namespace svilab
