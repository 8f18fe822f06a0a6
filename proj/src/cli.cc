#include "svilab/cli.hpp"

#include "svilab/benchmarks.hpp"
#include "svilab/trace_io.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <cmath>
#include <iostream>
#include <map>

namespace svilab::cli {

namespace {

constexpr std::size_t kMonotonicityPairs = 10000;
constexpr std::size_t kDefaultBoundProbes = 256;

ExperimentOptions experiment_options(const ExperimentConfig& config, const ViProblem& problem) {
  ExperimentOptions o;
  o.replications = config.replications;
  o.log_every = config.log_every;
  o.master_seed = config.master_seed;
  o.workers = config.workers;
  o.record_wall_time = config.wall_time;
  o.gap_probes = config.gap_probes;
  o.x0 = config_start(config, problem);
  return o;
}

void print_warnings(const ViProblem& problem, std::ostream& err) {
  for (const auto& w : problem.warnings) fmt::print(err, "warning: {}\n", w);
}

OracleConfig seeded(OracleConfig oc, std::uint64_t seed) {
  oc.seed = seed;
  return oc;
}

}  // namespace

std::vector<PremiseReport> assess(const ExperimentConfig& config, const ViProblem& problem) {
  SampleRng probe_rng(hash_key({config.master_seed, 0x636865636bULL}));
  const MonotonicityReport mono = monotonicity_probe(problem, kMonotonicityPairs, probe_rng);
  const bool monotone = !mono.violating_pair;
  SampleRng lip_rng(hash_key({config.master_seed, 0x6c6970ULL}));
  const double sampled_ell = lipschitz_estimate(problem, kMonotonicityPairs, lip_rng);
  const double ell = problem.lipschitz.value_or(sampled_ell);
  const double R = config.bound.R.value_or(r_constant(problem.feasible, config.r_convention));

  std::vector<PremiseReport> reports;
  for (const SolverConfig& c : config.algorithms) {
    PremiseReport r;
    r.algorithm = c.name;
    r.delta = c.delta;
    r.lambda = c.lambda;
    r.lipschitz = ell;
    r.monotone = monotone;
    r.min_inner_product = mono.min_inner_product;
    r.R = R;
    SampleRng const_rng(hash_key({config.master_seed, 0x636f6e7374ULL}));
    r.constants = estimate_oracle_constants(problem, seeded(c.oracle, config.master_seed), const_rng);
    if (config.bound.B) r.constants.B = *config.bound.B;
    if (config.bound.sigma_sq) r.constants.sigma_sq = *config.bound.sigma_sq;
    if (c.is_relaxed() && c.delta > 0.0) r.step_bound = step_size_bound(ell, c.delta);
    for (const auto& w : validate_config(c, problem).warnings()) r.notes.push_back(w);

    const auto common_srfb = [&](GuaranteeCheck& t) {
      if (!monotone) t.failures.push_back("monotonicity violated");
      if (c.delta < kGoldenThreshold) {
        t.failures.push_back(fmt::format("delta {} below {:.6f}", c.delta, kGoldenThreshold));
      }
      if (r.step_bound && c.lambda > *r.step_bound * (1.0 + 1e-12)) {
        t.failures.push_back(fmt::format("lambda {} above bound {}", c.lambda, *r.step_bound));
      }
      if (!r.step_bound) t.failures.push_back("step-size bound undefined for delta = 0");
      if (c.lambda_g || c.lambda_d) t.failures.push_back("per-player step sizes");
    };

    if (c.averaging != AveragingMode::none && c.is_relaxed()) {
      GuaranteeCheck t{"averaged-iterate gap bound", {}};
      if (!monotone) t.failures.push_back("monotonicity violated");
      if (c.lambda_g || c.lambda_d) t.failures.push_back("per-player step sizes");
      r.c = averaged_bound_constant(c.delta);
      r.bound_preview = averaged_gap_bound(
          {c.delta, c.lambda, c.K, R, r.constants.B, r.constants.sigma_sq});
      r.guarantees.push_back(std::move(t));
    }
    if (c.algorithm == Algorithm::srfb) {
      if (c.oracle.scheme == OracleScheme::exact) {
        GuaranteeCheck t{"last-iterate convergence (exact mapping)", {}};
        common_srfb(t);
        r.guarantees.push_back(std::move(t));
      } else {
        GuaranteeCheck t{"last-iterate convergence (SAA)", {}};
        common_srfb(t);
        if (c.oracle.scheme != OracleScheme::saa) {
          t.failures.push_back("oracle is not SAA with a growing batch");
        } else if (batch_capped(c.oracle.schedule, c.K)) {
          std::uint64_t k = 1;
          while (!batch_capped(c.oracle.schedule, k)) ++k;
          t.failures.push_back(fmt::format("batch cap {} reached at k={}", *c.oracle.schedule.cap, k));
        }
        r.guarantees.push_back(std::move(t));
      }
    }
    if (r.guarantees.empty()) r.notes.push_back("baseline: no convergence result of this library applies");
    reports.push_back(std::move(r));
  }
  return reports;
}

int cmd_run(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  const ViProblem problem = build_problem(config);
  print_warnings(problem, err);
  const TraceTable table = run_experiment(problem, config.algorithms, experiment_options(config, problem));

  int code = kSuccess;
  try {
    if (config.output_path == "-") {
      if (config.output_format == OutputFormat::csv) write_csv(out, table);
      else write_jsonl(out, table);
    } else {
      write_trace_file(config.output_path, table, config.output_format);
    }
  } catch (const IoError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kRunFailure;
  }

  struct Totals {
    double rel_sum = 0.0;
    int rel_n = 0;
    Counters counters;
    std::int64_t wall = 0;
    int failed = 0;
    bool capped = false;
  };
  std::map<std::size_t, Totals> by_config;
  std::int64_t total_wall = 0;
  for (const RunSummary& run : table.runs) {
    Totals& t = by_config[run.run_id / config.replications];
    if (!run.ok) {
      ++t.failed;
      fmt::print(err, "error: run {} ({}, replication {}): {}\n", run.run_id, run.algorithm,
                 run.replication, run.error);
      code = kRunFailure;
      continue;
    }
    t.capped = t.capped || run.batch_capped;
    if (run.final_record) {
      const TraceRecord& f = *run.final_record;
      if (f.rel_dist) {
        t.rel_sum += *f.rel_dist;
        ++t.rel_n;
      }
      t.counters.grad_evals += f.counters.grad_evals;
      t.counters.projections += f.counters.projections;
      t.counters.samples_drawn += f.counters.samples_drawn;
      t.wall += f.wall_ns.value_or(0);
    }
  }
  if (config.output_path != "-") {
    fmt::print(out, "wrote {} rows to {}\n", table.rows.size(), config.output_path);
  }
  std::ostream& summary = config.output_path == "-" ? err : out;
  fmt::print(summary, "{:<12} {:>22} {:>12} {:>12} {:>14} {:>14}\n", "algorithm",
             "final rel_dist (mean)", "grad_evals", "projections", "samples", "wall_ms");
  for (const auto& [ci, t] : by_config) {
    const std::string rel = t.rel_n ? format_real(t.rel_sum / t.rel_n) : "n/a";
    fmt::print(summary, "{:<12} {:>22} {:>12} {:>12} {:>14} {:>14.3f}{}\n", config.algorithms[ci].name,
               rel, t.counters.grad_evals, t.counters.projections, t.counters.samples_drawn,
               static_cast<double>(t.wall) / 1e6, t.capped ? "  [batch capped]" : "");
    total_wall += t.wall;
  }
  fmt::print(summary, "total solver wall time: {:.3f} ms\n", static_cast<double>(total_wall) / 1e6);
  return code;
}

int cmd_check(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  const ViProblem problem = build_problem(config);
  print_warnings(problem, err);
  const auto reports = assess(config, problem);
  fmt::print(out, "problem: {} (n_g={}, n_d={})\n", problem.name, problem.n_g, problem.n_d);
  if (!reports.empty()) {
    const PremiseReport& any = reports.front();
    fmt::print(out, "  lipschitz constant: {}{}\n", any.lipschitz,
               problem.lipschitz ? " (declared)" : " (sampled estimate)");
    fmt::print(out, "  monotonicity: min <F(x)-F(y), x-y> = {} over {} pairs: {}\n",
               any.min_inner_product, kMonotonicityPairs,
               any.monotone ? "monotone" : "violated (outside theory)");
    fmt::print(out, "  R ({}): {}\n", to_string(config.r_convention), any.R);
  }
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const PremiseReport& r = reports[i];
    const SolverConfig& c = config.algorithms[i];
    fmt::print(out, "[{}] {} delta={} lambda={} K={} oracle={}\n", r.algorithm,
               to_string(c.algorithm), r.delta, r.lambda, c.K,
               c.oracle.scheme == OracleScheme::exact ? "exact"
               : c.oracle.scheme == OracleScheme::sa  ? "sa"
                                                      : "saa");
    if (c.is_relaxed()) {
      const bool in_range = r.delta >= 0.0 && r.delta < 1.0;
      fmt::print(out, "  delta in [0, 1): {}; golden threshold {:.6f}: {}\n", in_range ? "ok" : "no",
                 kGoldenThreshold, r.delta >= kGoldenThreshold ? "met" : "not met");
    }
    if (r.step_bound) {
      fmt::print(out, "  step size: lambda={} vs bound 1/(2 delta (2 ell + 1))={}: {}\n", r.lambda,
                 *r.step_bound, r.lambda <= *r.step_bound * (1.0 + 1e-12) ? "ok" : "exceeds");
    }
    if (c.oracle.scheme == OracleScheme::saa) {
      const BatchSchedule& s = c.oracle.schedule;
      bool nondecreasing = true;
      std::uint64_t prev = 0;
      const std::uint64_t horizon = std::min<std::uint64_t>(c.K, 100000);
      for (std::uint64_t k = 1; k <= horizon; ++k) {
        const std::uint64_t n = batch_size(s, k);
        nondecreasing = nondecreasing && n >= prev;
        prev = n;
      }
      fmt::print(out, "  batch schedule: N_k = ceil({} (k + {})^{}){}; nondecreasing: {}; N_K = {}\n",
                 s.b, s.k0, s.a + 1.0, s.cap ? fmt::format(", cap {}", *s.cap) : "",
                 nondecreasing ? "yes" : "no", batch_size(s, c.K));
    }
    fmt::print(out, "  B estimate: {}  sigma^2 estimate: {}\n", r.constants.B, r.constants.sigma_sq);
    if (r.c) {
      fmt::print(out, "  averaged bound preview: c = {:.6g}, bound at K={}: {}\n", *r.c, c.K,
                 *r.bound_preview);
    }
    for (const auto& t : r.guarantees) {
      if (t.satisfied()) {
        fmt::print(out, "  {}: premises satisfied\n", t.guarantee);
      } else {
        fmt::print(out, "  {}: outside theory ({})\n", t.guarantee, fmt::join(t.failures, "; "));
      }
    }
    for (const auto& n : r.notes) fmt::print(out, "  note: {}\n", n);
  }
  return kSuccess;
}

int cmd_bound(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg = config;
  cfg.algorithms.clear();
  for (const auto& c : config.algorithms) {
    if (c.is_relaxed() && c.averaging != AveragingMode::none) cfg.algorithms.push_back(c);
  }
  if (cfg.algorithms.empty()) {
    throw ConfigError("bound: no SRFB/aSRFB algorithm with averaging in the config");
  }
  if (cfg.gap_probes == 0) cfg.gap_probes = kDefaultBoundProbes;

  const ViProblem problem = build_problem(cfg);
  print_warnings(problem, err);
  const TraceTable table = run_experiment(problem, cfg.algorithms, experiment_options(cfg, problem));
  for (const auto& run : table.runs) {
    if (!run.ok) {
      fmt::print(err, "error: run {} ({}): {}\n", run.run_id, run.algorithm, run.error);
      return kRunFailure;
    }
  }

  const double R = cfg.bound.R.value_or(r_constant(problem.feasible, cfg.r_convention));
  for (std::size_t ci = 0; ci < cfg.algorithms.size(); ++ci) {
    const SolverConfig& c = cfg.algorithms[ci];
    SampleRng rng(hash_key({cfg.master_seed, 0x636f6e7374ULL}));
    OracleConstants oc = estimate_oracle_constants(problem, seeded(c.oracle, cfg.master_seed), rng);
    if (cfg.bound.B) oc.B = *cfg.bound.B;
    if (cfg.bound.sigma_sq) oc.sigma_sq = *cfg.bound.sigma_sq;

    std::map<std::uint64_t, std::pair<double, int>> gap_by_k;
    for (const auto& row : table.rows) {
      if (row.run_id / cfg.replications != ci || !row.record.gap_lb) continue;
      auto& [sum, n] = gap_by_k[row.record.k];
      sum += *row.record.gap_lb;
      ++n;
    }
    BoundInputs in{c.delta, c.lambda, c.K, R, oc.B, oc.sigma_sq};
    fmt::print(out, "[{}] delta={} lambda={} R({})={} B={} sigma^2={} c={:.6g}\n", c.name, c.delta,
               c.lambda, to_string(cfg.r_convention), R, oc.B, oc.sigma_sq,
               averaged_bound_constant(c.delta));
    fmt::print(out, "  asymptote (2 B^2 + sigma^2) lambda = {}\n", averaged_gap_asymptote(in));
    fmt::print(out, "  {:>10} {:>24} {:>24} {:>8}\n", "K", "bound", "gap_lb (mean)", "holds");
    bool all_hold = true;
    for (const auto& [k, acc] : gap_by_k) {
      in.K = k;
      const double bound = averaged_gap_bound(in);
      const double gap = acc.first / acc.second;
      all_hold = all_hold && gap <= bound;
      fmt::print(out, "  {:>10} {:>24} {:>24} {:>8}\n", k, format_real(bound), format_real(gap),
                 gap <= bound ? "yes" : "no");
    }
    fmt::print(out, "  measured gap lower bound {} the bound at every logged K\n",
               all_hold ? "stays below" : "EXCEEDS");
  }
  return kSuccess;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stochastic variational inequality solvers and benchmark runner", "svilab"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> output;
  std::optional<std::string> format;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<std::uint64_t> log_every;
  std::optional<std::string> r_convention;
  bool no_wall_time = false;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "Experiment config file (YAML)")->required();
    sub->add_option("--output", output, "Trace output path ('-' for stdout)");
    sub->add_option("--format", format, "Trace format")->check(CLI::IsMember({"csv", "jsonl"}));
    sub->add_option("--seed", seed, "Master seed");
    sub->add_option("--workers", workers, "Concurrent runs (0 = all cores)");
    sub->add_option("--log-every", log_every, "Trace logging period")->check(CLI::PositiveNumber);
    sub->add_option("--r-convention", r_convention, "Set-size constant convention")
        ->check(CLI::IsMember({"diameter", "diameter-sq"}));
    sub->add_flag("--no-wall-time", no_wall_time, "Leave wall_ns empty for byte-stable traces");
  };
  CLI::App* run = app.add_subcommand("run", "Run the configured experiment and write traces");
  CLI::App* check = app.add_subcommand("check", "Report which convergence premises hold");
  CLI::App* bound = app.add_subcommand("bound", "Compare the averaged-iterate bound with measurements");
  for (CLI::App* sub : {run, check, bound}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kConfigError;
  }

  ExperimentConfig config;
  try {
    config = parse_config_file(config_path);
    if (output) config.output_path = *output;
    if (format) config.output_format = *format == "csv" ? OutputFormat::csv : OutputFormat::jsonl;
    if (seed) config.master_seed = *seed;
    if (workers) config.workers = *workers;
    if (log_every) config.log_every = *log_every;
    if (r_convention) config.r_convention = *parse_r_convention(*r_convention);
    if (no_wall_time) config.wall_time = false;
  } catch (const ConfigError& e) {
    fmt::print(err, "config error: {}: {}\n", config_path, e.what());
    return kConfigError;
  } catch (const Error& e) {
    fmt::print(err, "config error: {}: {}\n", config_path, e.what());
    return kConfigError;
  }

  try {
    if (run->parsed()) return cmd_run(config, out, err);
    if (check->parsed()) return cmd_check(config, out, err);
    return cmd_bound(config, out, err);
  } catch (const ConfigError& e) {
    fmt::print(err, "config error: {}\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kRunFailure;
  }
}

}  // namespace svilab::cli
