#pragma once

// Equilibrium-seeking iterations. Every step ends with a projection onto
// Omega, so iterates stay feasible.
//
//   SRFB    xbar^k = (1 - delta) x^k + delta xbar^{k-1}
//           x^{k+1} = proj(xbar^k - lambda F(x^k))
//   aSRFB   SRFB plus the average X^K of x^1..x^K
//   SFB     x^{k+1} = proj(x^k - lambda F(x^k))
//   EG      y = proj(x^k - lambda F(x^k)), x^{k+1} = proj(x^k - lambda F(y))
//   PastEG  y = proj(x^k - lambda g^{k-1}), g^k = F(y), x^{k+1} = proj(x^k - lambda g^k)
//   Adam    bias-corrected moment step on each player's own block

#include "svilab/core.hpp"
#include "svilab/metrics.hpp"
#include "svilab/oracles.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace svilab {

enum class Algorithm { srfb, asrfb, sfb, eg, past_eg, adam };

std::string_view to_string(Algorithm algorithm);
std::optional<Algorithm> parse_algorithm(std::string_view text);

enum class AveragingMode { none, batch_mean, online };

std::string_view to_string(AveragingMode mode);
std::optional<AveragingMode> parse_averaging(std::string_view text);

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// (sqrt(5) - 1) / 2, the smallest relaxation accepted without a warning
/// by the non-averaged scheme.
inline constexpr double kGoldenThreshold = 0.6180339887498949;

struct SolverConfig {
  std::string name;
  Algorithm algorithm = Algorithm::srfb;
  double delta = 0.618;
  double lambda = 0.1;
  // Per-player overrides of lambda; accepted but outside the theory.
  std::optional<double> lambda_g;
  std::optional<double> lambda_d;
  std::uint64_t K = 10000;
  AveragingMode averaging = AveragingMode::none;
  // Constant online weight; unset means 1/k (uniform averaging).
  std::optional<double> online_weight;
  AdamParams adam;
  OracleConfig oracle;
  std::uint64_t seed = 0;

  bool is_relaxed() const {
    return algorithm == Algorithm::srfb || algorithm == Algorithm::asrfb;
  }
};

struct Counters {
  std::uint64_t grad_evals = 0;
  std::uint64_t projections = 0;
  std::uint64_t samples_drawn = 0;

  bool operator==(const Counters&) const = default;
};

struct SolverState {
  JointPoint x;           // x^k
  JointPoint x_bar_prev;  // xbar^{k-1}
  JointPoint avg;         // X^k
  JointPoint avg_sum;     // sum of x^1..x^k (batch mean)
  JointPoint past_grad;   // PastEG g^{k-1}
  JointPoint adam_m;
  JointPoint adam_v;
  JointPoint last_estimate;  // oracle output of the last forward step
  Counters counters;
  std::uint64_t k = 0;
  bool batch_capped = false;

  /// xbar^{-1} = x^0, so the first relaxation is a no-op.
  static SolverState initial(const ViProblem& problem, const JointPoint& x0);
};

/// Thin binding of a problem to an oracle configuration and seed.
class Oracle {
 public:
  Oracle(const ViProblem& problem, OracleConfig config);

  OracleDraw operator()(const JointPoint& x, std::uint64_t k, std::uint64_t call = 0) const {
    return sample_gradient(*problem_, config_, x, k, call);
  }
  const OracleConfig& config() const { return config_; }

 private:
  const ViProblem* problem_;
  OracleConfig config_;
};

/// (1 - delta) x + delta x_bar_prev, delta in [0, 1).
JointPoint relax(const JointPoint& x, const JointPoint& x_bar_prev, double delta);

/// (1 - weight) X_prev + weight x_new, weight in [0, 1].
JointPoint online_average_update(const JointPoint& X_prev, const JointPoint& x_new, double weight);

/// 1 / (2 delta (2 ell + 1)).
double step_size_bound(double ell, double delta);

SolverState srfb_step(const ViProblem& problem, const SolverConfig& config,
                      const SolverState& state, const Oracle& oracle);
SolverState sfb_step(const ViProblem& problem, const SolverConfig& config,
                     const SolverState& state, const Oracle& oracle);
SolverState eg_step(const ViProblem& problem, const SolverConfig& config,
                    const SolverState& state, const Oracle& oracle);
SolverState past_eg_step(const ViProblem& problem, const SolverConfig& config,
                         const SolverState& state, const Oracle& oracle);
SolverState adam_step(const ViProblem& problem, const SolverConfig& config,
                      const SolverState& state, const Oracle& oracle);

/// Dispatches on config.algorithm (aSRFB steps like SRFB) and updates the
/// running average.
SolverState solver_step(const ViProblem& problem, const SolverConfig& config,
                        const SolverState& state, const Oracle& oracle);

struct ConfigIssue {
  enum class Severity { warning, error };
  Severity severity;
  std::string message;
};

struct ValidationReport {
  std::vector<ConfigIssue> issues;

  bool has_errors() const;
  std::vector<std::string> errors() const;
  std::vector<std::string> warnings() const;
};

/// Hard errors block a run; warnings mark runs outside the convergence theory.
ValidationReport validate_config(const SolverConfig& config, const ViProblem& problem);

struct TraceRecord {
  std::uint64_t k = 0;
  std::optional<double> rel_dist;
  std::optional<double> rel_dist_avg;
  std::optional<double> residual;
  std::optional<double> gap_lb;
  Counters counters;
  std::optional<std::int64_t> wall_ns;
};

struct RunOptions {
  std::uint64_t log_every = 1;
  // Gap lower bound of the reported iterate (the average when averaging is
  // on) is logged when set.
  const ProbeSet* probes = nullptr;
  bool record_wall_time = true;
  bool check_residual_inequality = false;
};

struct RunResult {
  SolverState state;
  JointPoint average;
  std::vector<TraceRecord> trace;
  std::uint64_t residual_inequality_failures = 0;
  bool batch_capped = false;
};

/// Runs config.K iterations from x0, logging every `log_every` steps and at
/// k = K. Throws ConfigError if validation reports errors.
RunResult run_solver(const ViProblem& problem, const SolverConfig& config, const JointPoint& x0,
                     const RunOptions& options = {});

/// aSRFB entry point; requires averaging != none. Returns X^K in `average`.
RunResult asrfb_run(const ViProblem& problem, const SolverConfig& config, const JointPoint& x0,
                    const RunOptions& options = {});

}  // namespace svilab
