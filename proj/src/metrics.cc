#include "svilab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace svilab {

double residual(const ViProblem& problem, const JointPoint& x, double lambda) {
  if (!(lambda > 0.0)) throw ConfigError("residual: lambda must be positive");
  const JointPoint step = joint_project(problem, x - lambda * evaluate_F(problem, x));
  return (x - step).norm();
}

JointPoint random_feasible_point(const ViProblem& problem, SampleRng& rng) {
  JointPoint p = JointPoint::zeros(problem.n_g, problem.n_d);
  const auto fill = [&rng](auto block, const BoxConstraint& box) {
    for (Index i = 0; i < box.size(); ++i) block[i] = rng.uniform(box.lower()[i], box.upper()[i]);
  };
  fill(p.g_block(), problem.feasible.g);
  fill(p.d_block(), problem.feasible.d);
  return p;
}

namespace {

Vector stacked_lower(const FeasibleSet& set) {
  Vector v(set.g.size() + set.d.size());
  v << set.g.lower(), set.d.lower();
  return v;
}

Vector stacked_upper(const FeasibleSet& set) {
  Vector v(set.g.size() + set.d.size());
  v << set.g.upper(), set.d.upper();
  return v;
}

void add_probe(const ViProblem& problem, ProbeSet& set, JointPoint point) {
  set.values.push_back(evaluate_F(problem, point));
  set.points.push_back(std::move(point));
}

}  // namespace

ProbeSet make_probe_set(const ViProblem& problem, std::size_t random_count, SampleRng& rng,
                        Index grid_points_per_dim) {
  ProbeSet set;
  const Index n = problem.dim();
  if (n <= 3 && grid_points_per_dim >= 2) {
    const Vector lo = stacked_lower(problem.feasible);
    const Vector hi = stacked_upper(problem.feasible);
    Index total = 1;
    for (Index i = 0; i < n; ++i) total *= grid_points_per_dim;
    for (Index flat = 0; flat < total; ++flat) {
      Vector v(n);
      Index rem = flat;
      for (Index i = 0; i < n; ++i) {
        const Index step = rem % grid_points_per_dim;
        rem /= grid_points_per_dim;
        v[i] = lo[i] + (hi[i] - lo[i]) * static_cast<double>(step) /
                           static_cast<double>(grid_points_per_dim - 1);
      }
      add_probe(problem, set, JointPoint::from_flat(std::move(v), problem.n_g));
    }
  }
  if (problem.known_solution) add_probe(problem, set, *problem.known_solution);
  for (std::size_t i = 0; i < random_count; ++i) {
    add_probe(problem, set, random_feasible_point(problem, rng));
  }
  return set;
}

double gap_lower_bound(const ViProblem& problem, const JointPoint& x,
                       std::span<const JointPoint> probes) {
  if (probes.empty()) throw ConfigError("gap_lower_bound: probe set is empty");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& y : probes) best = std::max(best, evaluate_F(problem, y).dot(x - y));
  return best;
}

double gap_lower_bound(const JointPoint& x, const ProbeSet& probes) {
  if (probes.size() == 0) throw ConfigError("gap_lower_bound: probe set is empty");
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < probes.size(); ++i) {
    best = std::max(best, probes.values[i].dot(x - probes.points[i]));
  }
  return best;
}

void BoundInputs::validate() const {
  if (!(delta >= 0.0) || !(delta < 1.0)) {
    throw ConfigError(fmt::format("bound: delta must lie in [0, 1), got {}", delta));
  }
  if (!(lambda > 0.0)) throw ConfigError("bound: lambda must be positive");
  if (K < 1) throw ConfigError("bound: K must be positive");
  if (!(R >= 0.0) || !(B >= 0.0) || !(sigma_sq >= 0.0)) {
    throw ConfigError("bound: R, B and sigma_sq must be nonnegative");
  }
}

double averaged_bound_constant(double delta) {
  if (!(delta >= 0.0) || !(delta < 1.0)) {
    throw ConfigError(fmt::format("bound: delta must lie in [0, 1), got {}", delta));
  }
  return (2.0 - delta * delta) / (1.0 - delta);
}

double averaged_gap_asymptote(const BoundInputs& in) {
  in.validate();
  return (2.0 * in.B * in.B + in.sigma_sq) * in.lambda;
}

double averaged_gap_bound(const BoundInputs& in) {
  in.validate();
  const double c = averaged_bound_constant(in.delta);
  return c * in.R / (in.lambda * static_cast<double>(in.K)) + averaged_gap_asymptote(in);
}

double r_constant(const FeasibleSet& set, RConvention convention) {
  const double d2 = diameter_sq(set);
  return convention == RConvention::diameter_sq ? d2 : std::sqrt(d2);
}

MonotonicityReport monotonicity_probe(const ViProblem& problem, std::size_t num_pairs,
                                      SampleRng& rng) {
  if (num_pairs < 1) throw ConfigError("monotonicity_probe: need at least one pair");
  MonotonicityReport report;
  report.min_inner_product = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < num_pairs; ++i) {
    JointPoint x = random_feasible_point(problem, rng);
    JointPoint y = random_feasible_point(problem, rng);
    const double ip = (evaluate_F(problem, x) - evaluate_F(problem, y)).dot(x - y);
    report.min_inner_product = std::min(report.min_inner_product, ip);
    if (ip < -1e-10 && !report.violating_pair) {
      report.violating_pair = std::make_pair(std::move(x), std::move(y));
    }
  }
  return report;
}

double lipschitz_estimate(const ViProblem& problem, std::size_t num_pairs, SampleRng& rng) {
  if (num_pairs < 1) throw ConfigError("lipschitz_estimate: need at least one pair");
  double best = 0.0;
  for (std::size_t i = 0; i < num_pairs; ++i) {
    const JointPoint x = random_feasible_point(problem, rng);
    const JointPoint y = random_feasible_point(problem, rng);
    const double gap = (x - y).norm();
    if (gap == 0.0) continue;
    best = std::max(best, (evaluate_F(problem, x) - evaluate_F(problem, y)).norm() / gap);
  }
  return best;
}

ResidualInequality residual_inequality(const JointPoint& x_k, const JointPoint& x_k1,
                                       const JointPoint& x_bar_k, double eps_norm_sq,
                                       double lambda, const ViProblem& problem) {
  ResidualInequality out;
  const double res = residual(problem, x_k, lambda);
  out.lhs = res * res;
  out.rhs = 2.0 * (x_k - x_k1).squared_norm() + 4.0 * (x_bar_k - x_k).squared_norm() +
            lambda * lambda * eps_norm_sq;
  out.holds = out.lhs <= out.rhs + 1e-9;
  return out;
}

bool residual_inequality_check(const JointPoint& x_k, const JointPoint& x_k1,
                               const JointPoint& x_bar_k, double eps_norm_sq, double lambda,
                               const ViProblem& problem) {
  return residual_inequality(x_k, x_k1, x_bar_k, eps_norm_sq, lambda, problem).holds;
}

Distance distance_metrics(const JointPoint& x, const JointPoint& x_star, const JointPoint& x0) {
  const double base = (x0 - x_star).norm();
  if (base == 0.0) {
    throw Error("distance_metrics: start point coincides with the solution");
  }
  Distance d;
  d.dist = (x - x_star).norm();
  d.rel_dist = d.dist / base;
  return d;
}

OracleConstants estimate_oracle_constants(const ViProblem& problem, const OracleConfig& oracle,
                                          SampleRng& rng, std::size_t points,
                                          std::size_t draws_per_point) {
  std::vector<JointPoint> where;
  const Index n = problem.dim();
  if (n <= 12) {
    const Vector lo = stacked_lower(problem.feasible);
    const Vector hi = stacked_upper(problem.feasible);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
      Vector v(n);
      for (Index i = 0; i < n; ++i) v[i] = (mask >> i) & 1U ? hi[i] : lo[i];
      where.push_back(JointPoint::from_flat(std::move(v), problem.n_g));
    }
  }
  for (std::size_t i = 0; i < points; ++i) where.push_back(random_feasible_point(problem, rng));

  double max_f2 = 0.0;
  for (const auto& p : where) max_f2 = std::max(max_f2, evaluate_F(problem, p).squared_norm());

  double sigma_sq = 0.0;
  if (oracle.scheme != OracleScheme::exact && draws_per_point > 0) {
    OracleConfig probe = oracle;
    probe.seed = rng();
    const std::size_t variance_points = std::min<std::size_t>(where.size(), 16);
    for (std::size_t i = 0; i < variance_points; ++i) {
      const JointPoint& x = where[where.size() - 1 - i];
      const JointPoint exact = evaluate_F(problem, x);
      double acc = 0.0;
      for (std::size_t r = 0; r < draws_per_point; ++r) {
        // k = 1 gives the smallest SAA batch, hence the largest variance.
        acc += stochastic_error(sample_gradient(problem, probe, x, 1, r).estimate, exact).sq_norm;
      }
      sigma_sq = std::max(sigma_sq, acc / static_cast<double>(draws_per_point));
    }
  }
  return {max_f2 + sigma_sq, sigma_sq};
}

}  // namespace svilab
