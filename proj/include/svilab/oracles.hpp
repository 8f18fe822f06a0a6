#pragma once

// Stochastic estimates of the pseudogradient: exact evaluation, fixed
// mini-batch stochastic approximation (SA) and the increasing-batch sample
// average approximation (SAA).

#include "svilab/core.hpp"
#include "svilab/rng.hpp"

#include <cstdint>
#include <optional>

namespace svilab {

enum class NoiseKind {
  /// F(x) + sigma * N(0, I) per sample.
  additive_gaussian,
  /// The problem's own per-sample gradient (e.g. a random payoff matrix).
  structural,
};

struct NoiseModel {
  NoiseKind kind = NoiseKind::structural;
  double sigma = 0.0;

  static NoiseModel additive(double sigma) { return {NoiseKind::additive_gaussian, sigma}; }
  static NoiseModel structural() { return {NoiseKind::structural, 0.0}; }
};

/// N_k = ceil(b (k + k0)^(a + 1)), optionally clipped to `cap`.
struct BatchSchedule {
  double b = 1.0;
  double k0 = 1.0;
  double a = 1.0;
  std::optional<std::uint64_t> cap;

  void validate() const;
};

enum class OracleScheme { exact, sa, saa };

struct OracleConfig {
  OracleScheme scheme = OracleScheme::exact;
  std::uint64_t sa_batch = 1;
  BatchSchedule schedule;
  NoiseModel noise;
  std::uint64_t seed = 0;

  void validate() const;
};

std::uint64_t batch_size(const BatchSchedule& schedule, std::uint64_t k);

/// True when the schedule's cap is below the uncapped size at step k.
bool batch_capped(const BatchSchedule& schedule, std::uint64_t k);

struct OracleDraw {
  JointPoint estimate;
  std::uint64_t samples_used = 0;
  bool capped = false;
};

/// Draws the estimate used at iteration `k` (k >= 1). `call` separates
/// several oracle calls inside one iteration (extragradient uses two).
/// Sample s of that call reads the stream keyed (seed, k, call, s), so the
/// result depends only on the arguments.
OracleDraw sample_gradient(const ViProblem& problem, const OracleConfig& config,
                           const JointPoint& x, std::uint64_t k, std::uint64_t call = 0);

/// Per-sample draw (before batching) for sample index `sample`.
void draw_sample(const ViProblem& problem, const NoiseModel& noise, const JointPoint& x,
                 const JointPoint* exact, SampleRng& rng, JointPoint& out);

struct StochasticError {
  JointPoint error;
  double sq_norm = 0.0;
};

/// eps = estimate - exact and ||eps||^2.
StochasticError stochastic_error(const JointPoint& estimate, const JointPoint& exact);

}  // namespace svilab
