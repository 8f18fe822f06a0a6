#include "svilab/oracles.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace svilab {

void BatchSchedule::validate() const {
  if (!(b > 0.0) || !(k0 > 0.0) || !(a > 0.0) || !std::isfinite(b) || !std::isfinite(k0) ||
      !std::isfinite(a)) {
    throw ConfigError(fmt::format("batch schedule needs b, k0, a > 0 (got b={}, k0={}, a={})", b,
                                  k0, a));
  }
  if (cap && *cap == 0) throw ConfigError("batch schedule cap must be positive");
}

void OracleConfig::validate() const {
  if (scheme == OracleScheme::sa && sa_batch < 1) {
    throw ConfigError("SA batch size must be at least 1");
  }
  if (scheme == OracleScheme::saa) schedule.validate();
  if (!(noise.sigma >= 0.0) || !std::isfinite(noise.sigma)) {
    throw ConfigError("noise sigma must be finite and nonnegative");
  }
}

namespace {

std::uint64_t uncapped_batch(const BatchSchedule& schedule, std::uint64_t k) {
  if (k < 1) throw ConfigError("batch_size: iteration index starts at 1");
  schedule.validate();
  const double raw =
      std::ceil(schedule.b * std::pow(static_cast<double>(k) + schedule.k0, schedule.a + 1.0));
  // 2^63 keeps the conversion below exact and well inside uint64.
  if (!std::isfinite(raw) || raw >= 9223372036854775808.0) {
    throw ConfigError(fmt::format("batch size at k={} overflows the integer range", k));
  }
  return static_cast<std::uint64_t>(raw);
}

}  // namespace

bool batch_capped(const BatchSchedule& schedule, std::uint64_t k) {
  if (!schedule.cap) return false;
  // Anything above the cap counts as capped, including overflow.
  try {
    return uncapped_batch(schedule, k) > *schedule.cap;
  } catch (const ConfigError&) {
    return true;
  }
}

std::uint64_t batch_size(const BatchSchedule& schedule, std::uint64_t k) {
  if (schedule.cap && batch_capped(schedule, k)) return *schedule.cap;
  return uncapped_batch(schedule, k);
}

void draw_sample(const ViProblem& problem, const NoiseModel& noise, const JointPoint& x,
                 const JointPoint* exact, SampleRng& rng, JointPoint& out) {
  if (noise.kind == NoiseKind::structural && problem.per_sample_gradient) {
    problem.per_sample_gradient(x, rng, out);
    return;
  }
  out = exact ? *exact : evaluate_F(problem, x);
  if (noise.kind == NoiseKind::additive_gaussian && noise.sigma > 0.0) {
    for (Index i = 0; i < out.size(); ++i) out[i] += noise.sigma * rng.normal();
  }
}

OracleDraw sample_gradient(const ViProblem& problem, const OracleConfig& config,
                           const JointPoint& x, std::uint64_t k, std::uint64_t call) {
  problem.require_dims(x, "sample_gradient");
  if (k < 1) throw ConfigError("sample_gradient: iteration index starts at 1");

  OracleDraw draw;
  if (config.scheme == OracleScheme::exact) {
    draw.estimate = evaluate_F(problem, x);
    return draw;
  }

  std::uint64_t n = config.sa_batch;
  if (config.scheme == OracleScheme::saa) {
    n = batch_size(config.schedule, k);
    draw.capped = batch_capped(config.schedule, k);
  }
  if (n < 1) throw ConfigError("oracle batch size must be at least 1");

  std::optional<JointPoint> exact;
  const bool structural = config.noise.kind == NoiseKind::structural && problem.per_sample_gradient;
  if (!structural) exact = evaluate_F(problem, x);

  JointPoint sample = JointPoint::zeros(problem.n_g, problem.n_d);
  JointPoint mean = JointPoint::zeros(problem.n_g, problem.n_d);
  for (std::uint64_t s = 0; s < n; ++s) {
    SampleRng rng = SampleRng::keyed(config.seed, k, call, s);
    draw_sample(problem, config.noise, x, exact ? &*exact : nullptr, rng, sample);
    // A finite sum proves every entry finite; the scan runs only otherwise.
    if (!std::isfinite(sample.flat().sum())) {
      if (auto bad = first_non_finite(sample.flat())) {
        throw NumericError(
            fmt::format("sample {} of the oracle at k={} is not finite (coordinate {})", s, k, *bad),
            static_cast<Index>(s));
      }
    }
    // Running mean: reproduces a constant sample bit-for-bit.
    mean.flat() += (sample.flat() - mean.flat()) / static_cast<double>(s + 1);
  }
  draw.estimate = std::move(mean);
  draw.samples_used = n;
  return draw;
}

StochasticError stochastic_error(const JointPoint& estimate, const JointPoint& exact) {
  StochasticError e{estimate - exact, 0.0};
  e.sq_norm = e.error.squared_norm();
  return e;
}

}  // namespace svilab
