#include "svilab/solvers.hpp"

#include <chrono>
#include <cmath>

#include <fmt/format.h>

namespace svilab {

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::srfb: return "SRFB";
    case Algorithm::asrfb: return "aSRFB";
    case Algorithm::sfb: return "SFB";
    case Algorithm::eg: return "EG";
    case Algorithm::past_eg: return "PastEG";
    case Algorithm::adam: return "Adam";
  }
  return "?";
}

std::optional<Algorithm> parse_algorithm(std::string_view text) {
  for (Algorithm a : {Algorithm::srfb, Algorithm::asrfb, Algorithm::sfb, Algorithm::eg,
                      Algorithm::past_eg, Algorithm::adam}) {
    if (text == to_string(a)) return a;
  }
  return std::nullopt;
}

std::string_view to_string(AveragingMode mode) {
  switch (mode) {
    case AveragingMode::none: return "none";
    case AveragingMode::batch_mean: return "batch-mean";
    case AveragingMode::online: return "online";
  }
  return "?";
}

std::optional<AveragingMode> parse_averaging(std::string_view text) {
  for (AveragingMode m : {AveragingMode::none, AveragingMode::batch_mean, AveragingMode::online}) {
    if (text == to_string(m)) return m;
  }
  return std::nullopt;
}

SolverState SolverState::initial(const ViProblem& problem, const JointPoint& x0) {
  problem.require_dims(x0, "initial state");
  if (!problem.feasible.contains(x0)) throw ConfigError("initial point is not feasible");
  const JointPoint zero = JointPoint::zeros(problem.n_g, problem.n_d);
  SolverState s;
  s.x = x0;
  s.x_bar_prev = x0;
  s.avg = x0;
  s.avg_sum = zero;
  s.past_grad = zero;
  s.adam_m = zero;
  s.adam_v = zero;
  s.last_estimate = zero;
  return s;
}

Oracle::Oracle(const ViProblem& problem, OracleConfig config)
    : problem_(&problem), config_(std::move(config)) {
  config_.validate();
}

JointPoint relax(const JointPoint& x, const JointPoint& x_bar_prev, double delta) {
  if (!(delta >= 0.0) || !(delta < 1.0)) {
    throw ConfigError(fmt::format("relaxation delta must lie in [0, 1), got {}", delta));
  }
  x.require_shape(x_bar_prev, "relax");
  return (1.0 - delta) * x + delta * x_bar_prev;
}

JointPoint online_average_update(const JointPoint& X_prev, const JointPoint& x_new, double weight) {
  if (!(weight >= 0.0) || !(weight <= 1.0)) {
    throw ConfigError(fmt::format("averaging weight must lie in [0, 1], got {}", weight));
  }
  X_prev.require_shape(x_new, "online_average_update");
  return (1.0 - weight) * X_prev + weight * x_new;
}

double step_size_bound(double ell, double delta) {
  if (!(delta > 0.0)) throw ConfigError("step_size_bound: delta must be positive");
  if (!(ell >= 0.0)) throw ConfigError("step_size_bound: Lipschitz constant must be nonnegative");
  return 1.0 / (2.0 * delta * (2.0 * ell + 1.0));
}

namespace {

// proj(base - Lambda direction), Lambda = diag(lambda_g I, lambda_d I).
JointPoint forward_backward(const ViProblem& problem, const SolverConfig& config,
                            const JointPoint& base, const JointPoint& direction) {
  JointPoint moved = base;
  moved.g_block() -= config.lambda_g.value_or(config.lambda) * direction.g_block();
  moved.d_block() -= config.lambda_d.value_or(config.lambda) * direction.d_block();
  return joint_project(problem, moved);
}

void account(SolverState& s, const OracleDraw& draw) {
  s.counters.grad_evals += 1;
  s.counters.samples_drawn += draw.samples_used;
  s.batch_capped = s.batch_capped || draw.capped;
}

}  // namespace

SolverState srfb_step(const ViProblem& problem, const SolverConfig& config,
                      const SolverState& state, const Oracle& oracle) {
  SolverState next = state;
  next.k = state.k + 1;
  const JointPoint x_bar = relax(state.x, state.x_bar_prev, config.delta);
  // The forward step reads x^k, not xbar^k.
  OracleDraw draw = oracle(state.x, next.k);
  account(next, draw);
  next.x = forward_backward(problem, config, x_bar, draw.estimate);
  next.counters.projections += 1;
  next.x_bar_prev = x_bar;
  next.last_estimate = std::move(draw.estimate);
  return next;
}

SolverState sfb_step(const ViProblem& problem, const SolverConfig& config,
                     const SolverState& state, const Oracle& oracle) {
  SolverState next = state;
  next.k = state.k + 1;
  OracleDraw draw = oracle(state.x, next.k);
  account(next, draw);
  next.x = forward_backward(problem, config, state.x, draw.estimate);
  next.counters.projections += 1;
  next.last_estimate = std::move(draw.estimate);
  return next;
}

SolverState eg_step(const ViProblem& problem, const SolverConfig& config,
                    const SolverState& state, const Oracle& oracle) {
  SolverState next = state;
  next.k = state.k + 1;
  const OracleDraw first = oracle(state.x, next.k, 0);
  account(next, first);
  const JointPoint mid = forward_backward(problem, config, state.x, first.estimate);
  OracleDraw second = oracle(mid, next.k, 1);
  account(next, second);
  next.x = forward_backward(problem, config, state.x, second.estimate);
  next.counters.projections += 2;
  next.last_estimate = std::move(second.estimate);
  return next;
}

SolverState past_eg_step(const ViProblem& problem, const SolverConfig& config,
                         const SolverState& state, const Oracle& oracle) {
  SolverState next = state;
  next.k = state.k + 1;
  const JointPoint mid = forward_backward(problem, config, state.x, state.past_grad);
  OracleDraw draw = oracle(mid, next.k);
  account(next, draw);
  next.x = forward_backward(problem, config, state.x, draw.estimate);
  next.counters.projections += 2;
  next.past_grad = draw.estimate;
  next.last_estimate = std::move(draw.estimate);
  return next;
}

SolverState adam_step(const ViProblem& problem, const SolverConfig& config,
                      const SolverState& state, const Oracle& oracle) {
  const AdamParams& p = config.adam;
  if (!(p.epsilon > 0.0)) throw ConfigError("Adam epsilon must be positive");
  SolverState next = state;
  next.k = state.k + 1;
  OracleDraw draw = oracle(state.x, next.k);
  account(next, draw);
  const Vector& g = draw.estimate.flat();
  next.adam_m.flat() = p.beta1 * state.adam_m.flat() + (1.0 - p.beta1) * g;
  next.adam_v.flat() = p.beta2 * state.adam_v.flat() + (1.0 - p.beta2) * g.cwiseProduct(g);
  const double t = static_cast<double>(next.k);
  const double m_corr = 1.0 - std::pow(p.beta1, t);
  const double v_corr = 1.0 - std::pow(p.beta2, t);
  JointPoint direction = next.adam_m;
  direction.flat() = (next.adam_m.flat() / m_corr).array() /
                     ((next.adam_v.flat() / v_corr).array().sqrt() + p.epsilon);
  next.x = forward_backward(problem, config, state.x, direction);
  next.counters.projections += 1;
  next.last_estimate = std::move(draw.estimate);
  return next;
}

SolverState solver_step(const ViProblem& problem, const SolverConfig& config,
                        const SolverState& state, const Oracle& oracle) {
  SolverState next;
  switch (config.algorithm) {
    case Algorithm::srfb:
    case Algorithm::asrfb: next = srfb_step(problem, config, state, oracle); break;
    case Algorithm::sfb: next = sfb_step(problem, config, state, oracle); break;
    case Algorithm::eg: next = eg_step(problem, config, state, oracle); break;
    case Algorithm::past_eg: next = past_eg_step(problem, config, state, oracle); break;
    case Algorithm::adam: next = adam_step(problem, config, state, oracle); break;
  }
  next.avg_sum += next.x;
  if (config.averaging == AveragingMode::online) {
    // X^1 = x^1 whatever the weight rule.
    const double w = next.k == 1 ? 1.0
                                 : config.online_weight.value_or(1.0 / static_cast<double>(next.k));
    next.avg = online_average_update(next.avg, next.x, w);
  } else {
    next.avg = next.avg_sum * (1.0 / static_cast<double>(next.k));
  }
  return next;
}

bool ValidationReport::has_errors() const {
  for (const auto& i : issues) {
    if (i.severity == ConfigIssue::Severity::error) return true;
  }
  return false;
}

std::vector<std::string> ValidationReport::errors() const {
  std::vector<std::string> out;
  for (const auto& i : issues) {
    if (i.severity == ConfigIssue::Severity::error) out.push_back(i.message);
  }
  return out;
}

std::vector<std::string> ValidationReport::warnings() const {
  std::vector<std::string> out;
  for (const auto& i : issues) {
    if (i.severity == ConfigIssue::Severity::warning) out.push_back(i.message);
  }
  return out;
}

ValidationReport validate_config(const SolverConfig& config, const ViProblem& problem) {
  ValidationReport report;
  const auto error = [&](std::string m) {
    report.issues.push_back({ConfigIssue::Severity::error, std::move(m)});
  };
  const auto warn = [&](std::string m) {
    report.issues.push_back({ConfigIssue::Severity::warning, std::move(m)});
  };

  if (!(config.lambda > 0.0) || !std::isfinite(config.lambda)) {
    error(fmt::format("lambda must be positive and finite, got {}", config.lambda));
  }
  for (const auto& [label, value] : {std::pair{"lambda_g", config.lambda_g},
                                     std::pair{"lambda_d", config.lambda_d}}) {
    if (!value) continue;
    if (!(*value > 0.0) || !std::isfinite(*value)) {
      error(fmt::format("{} must be positive and finite, got {}", label, *value));
    } else {
      warn(fmt::format("per-player step size {} is outside theory", label));
    }
  }
  if (config.K < 1) error("iteration budget K must be positive");
  if (config.is_relaxed() && (!(config.delta >= 0.0) || !(config.delta < 1.0))) {
    error(fmt::format("delta must lie in [0, 1), got {}", config.delta));
  }
  if (config.algorithm == Algorithm::asrfb && config.averaging == AveragingMode::none) {
    error("aSRFB requires averaging (batch-mean or online)");
  }
  if (config.online_weight && (!(*config.online_weight >= 0.0) || !(*config.online_weight <= 1.0))) {
    error(fmt::format("online weight must lie in [0, 1], got {}", *config.online_weight));
  }
  if (config.algorithm == Algorithm::adam) {
    if (!(config.adam.epsilon > 0.0)) error("Adam epsilon must be positive");
    if (!(config.adam.beta1 >= 0.0 && config.adam.beta1 < 1.0) ||
        !(config.adam.beta2 >= 0.0 && config.adam.beta2 < 1.0)) {
      error("Adam betas must lie in [0, 1)");
    }
  }
  try {
    config.oracle.validate();
  } catch (const ConfigError& e) {
    error(e.what());
  }
  if (report.has_errors()) return report;

  if (config.algorithm == Algorithm::srfb) {
    if (config.delta < kGoldenThreshold) {
      warn(fmt::format("delta={} is below the golden-ratio threshold {:.6f}; outside theory",
                       config.delta, kGoldenThreshold));
    }
    if (problem.lipschitz && config.delta > 0.0) {
      const double bound = step_size_bound(*problem.lipschitz, config.delta);
      if (config.lambda > bound) {
        warn(fmt::format("lambda={} exceeds the step-size bound {} for ell={}; outside theory",
                         config.lambda, bound, *problem.lipschitz));
      }
    } else if (!problem.lipschitz) {
      warn("no Lipschitz constant known; step-size premise unchecked");
    }
    if (config.oracle.scheme == OracleScheme::sa) {
      warn("SRFB with a fixed-batch SA oracle is outside theory (use SAA or averaging)");
    }
    if (config.oracle.scheme == OracleScheme::saa && config.oracle.schedule.cap) {
      warn("batch-size cap voids the growing-batch premise once reached");
    }
  }
  return report;
}

namespace {

std::optional<double> rel_dist_or_empty(const ViProblem& problem, const JointPoint& x,
                                        const JointPoint& x0) {
  if (!problem.known_solution) return std::nullopt;
  if ((x0 - *problem.known_solution).norm() == 0.0) return std::nullopt;
  return distance_metrics(x, *problem.known_solution, x0).rel_dist;
}

}  // namespace

RunResult run_solver(const ViProblem& problem, const SolverConfig& config, const JointPoint& x0,
                     const RunOptions& options) {
  const ValidationReport report = validate_config(config, problem);
  if (report.has_errors()) {
    throw ConfigError(fmt::format("config '{}': {}", config.name, report.errors().front()));
  }
  if (options.log_every < 1) throw ConfigError("log_every must be at least 1");

  OracleConfig oc = config.oracle;
  oc.seed = config.seed;
  const Oracle oracle(problem, oc);

  RunResult result;
  result.state = SolverState::initial(problem, x0);
  result.trace.reserve(static_cast<std::size_t>((config.K + options.log_every - 1) / options.log_every));
  const bool check = options.check_residual_inequality && config.is_relaxed();
  std::chrono::nanoseconds elapsed{0};

  for (std::uint64_t k = 1; k <= config.K; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    SolverState next = solver_step(problem, config, result.state, oracle);
    elapsed += std::chrono::steady_clock::now() - t0;

    if (check) {
      const double eps_sq =
          stochastic_error(next.last_estimate, evaluate_F(problem, result.state.x)).sq_norm;
      if (!residual_inequality_check(result.state.x, next.x, next.x_bar_prev, eps_sq,
                                     config.lambda, problem)) {
        ++result.residual_inequality_failures;
      }
    }
    result.state = std::move(next);

    if (k % options.log_every == 0 || k == config.K) {
      const SolverState& s = result.state;
      TraceRecord rec;
      rec.k = k;
      rec.rel_dist = rel_dist_or_empty(problem, s.x, x0);
      rec.rel_dist_avg = rel_dist_or_empty(problem, s.avg, x0);
      rec.residual = residual(problem, s.x, config.lambda);
      if (options.probes) {
        const JointPoint& reported = config.averaging == AveragingMode::none ? s.x : s.avg;
        rec.gap_lb = gap_lower_bound(reported, *options.probes);
      }
      rec.counters = s.counters;
      if (options.record_wall_time) rec.wall_ns = elapsed.count();
      result.trace.push_back(rec);
    }
  }
  result.average = result.state.avg;
  result.batch_capped = result.state.batch_capped;
  return result;
}

RunResult asrfb_run(const ViProblem& problem, const SolverConfig& config, const JointPoint& x0,
                    const RunOptions& options) {
  if (!config.is_relaxed()) throw ConfigError("asrfb_run needs a relaxed (SRFB/aSRFB) config");
  if (config.averaging == AveragingMode::none) {
    throw ConfigError("asrfb_run needs batch-mean or online averaging");
  }
  return run_solver(problem, config, x0, options);
}

}  // namespace svilab
