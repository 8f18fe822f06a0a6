#include "svilab/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

namespace svilab {

std::string_view to_string(OutputFormat format) {
  return format == OutputFormat::csv ? "csv" : "jsonl";
}

std::string_view to_string(RConvention convention) {
  return convention == RConvention::diameter ? "diameter" : "diameter-sq";
}

std::optional<RConvention> parse_r_convention(std::string_view text) {
  if (text == "diameter") return RConvention::diameter;
  if (text == "diameter-sq") return RConvention::diameter_sq;
  return std::nullopt;
}

namespace {

[[noreturn]] void fail_at(const YAML::Node& node, const std::string& message) {
  const YAML::Mark mark = node.Mark();
  const bool known = !mark.is_null();
  const int line = known ? mark.line + 1 : 0;
  const int column = known ? mark.column + 1 : 0;
  if (known) throw ParseError(fmt::format("line {}, column {}: {}", line, column, message), line, column);
  throw ParseError(message, 0, 0);
}

// A mapping whose keys are consumed one by one; leftovers are rejected.
class Section {
 public:
  Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
    if (!node_.IsMap()) fail_at(node_, fmt::format("'{}' must be a mapping", path_));
  }

  YAML::Node take(const std::string& key) {
    used_.insert(key);
    return std::as_const(node_)[key];
  }

  bool has(const std::string& key) const { return static_cast<bool>(std::as_const(node_)[key]); }

  std::string key_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  std::optional<double> real(const std::string& key) {
    YAML::Node n = take(key);
    if (!n) return std::nullopt;
    return as_real(n, key_path(key));
  }

  std::optional<std::uint64_t> count(const std::string& key) {
    YAML::Node n = take(key);
    if (!n) return std::nullopt;
    return as_count(n, key_path(key));
  }

  std::optional<std::string> text(const std::string& key) {
    YAML::Node n = take(key);
    if (!n) return std::nullopt;
    if (!n.IsScalar()) fail_at(n, fmt::format("'{}' must be a scalar", key_path(key)));
    return n.Scalar();
  }

  std::optional<bool> flag(const std::string& key) {
    YAML::Node n = take(key);
    if (!n) return std::nullopt;
    try {
      return n.as<bool>();
    } catch (const YAML::Exception&) {
      fail_at(n, fmt::format("'{}' must be true or false", key_path(key)));
    }
  }

  std::optional<Vector> vector(const std::string& key) {
    YAML::Node n = take(key);
    if (!n) return std::nullopt;
    return as_vector(n, key_path(key));
  }

  void finish() const {
    for (const auto& kv : node_) {
      const std::string key = kv.first.as<std::string>();
      if (!used_.count(key)) {
        fail_at(kv.first, fmt::format("unknown key '{}'", key_path(key)));
      }
    }
  }

  static double as_real(const YAML::Node& n, const std::string& path) {
    if (!n.IsScalar()) fail_at(n, fmt::format("'{}' must be a number", path));
    try {
      const double v = n.as<double>();
      if (!std::isfinite(v)) fail_at(n, fmt::format("'{}' must be finite", path));
      return v;
    } catch (const YAML::Exception&) {
      fail_at(n, fmt::format("'{}' must be a number, got '{}'", path, n.Scalar()));
    }
  }

  static std::uint64_t as_count(const YAML::Node& n, const std::string& path) {
    if (!n.IsScalar()) fail_at(n, fmt::format("'{}' must be a nonnegative integer", path));
    const std::string& s = n.Scalar();
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      fail_at(n, fmt::format("'{}' must be a nonnegative integer, got '{}'", path, s));
    }
    return v;
  }

  static Vector as_vector(const YAML::Node& n, const std::string& path) {
    if (!n.IsSequence()) fail_at(n, fmt::format("'{}' must be a list of numbers", path));
    Vector v(static_cast<Index>(n.size()));
    for (std::size_t i = 0; i < n.size(); ++i) {
      v[static_cast<Index>(i)] = as_real(n[i], fmt::format("{}[{}]", path, i));
    }
    return v;
  }

  const YAML::Node& node() const { return node_; }

 private:
  YAML::Node node_;
  std::string path_;
  std::set<std::string> used_;
};

AffineGameSpec parse_affine_file(const std::filesystem::path& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::BadFile&) {
    throw ConfigError(fmt::format("cannot read problem file '{}'", path.string()));
  } catch (const YAML::ParserException& e) {
    throw ParseError(fmt::format("{}: line {}, column {}: {}", path.string(), e.mark.line + 1,
                                 e.mark.column + 1, e.msg),
                     e.mark.line + 1, e.mark.column + 1);
  }
  Section s(root, "");
  AffineGameSpec spec;
  const auto need = [&](auto opt, const char* key) {
    if (!opt) fail_at(root, fmt::format("problem file '{}' lacks '{}'", path.string(), key));
    return *opt;
  };
  spec.n_g = static_cast<Index>(need(s.count("n_g"), "n_g"));
  spec.n_d = static_cast<Index>(need(s.count("n_d"), "n_d"));
  const Index n = spec.n_g + spec.n_d;
  YAML::Node rows = s.take("matrix");
  if (!rows || !rows.IsSequence() || static_cast<Index>(rows.size()) != n) {
    fail_at(rows ? rows : root, fmt::format("'matrix' must list {} rows", n));
  }
  spec.matrix.resize(n, n);
  for (Index i = 0; i < n; ++i) {
    const Vector row = Section::as_vector(rows[static_cast<std::size_t>(i)], fmt::format("matrix[{}]", i));
    if (row.size() != n) fail_at(rows[static_cast<std::size_t>(i)], fmt::format("matrix row must have {} entries", n));
    spec.matrix.row(i) = row.transpose();
  }
  spec.offset = need(s.vector("offset"), "offset");
  spec.lower = need(s.vector("lower"), "lower");
  spec.upper = need(s.vector("upper"), "upper");
  spec.solution = s.vector("solution");
  spec.start = s.vector("start");
  s.finish();
  return spec;
}

OracleConfig parse_oracle(Section& s, const std::string& path) {
  OracleConfig oc;
  if (auto scheme = s.text("scheme")) {
    if (*scheme == "exact") oc.scheme = OracleScheme::exact;
    else if (*scheme == "sa") oc.scheme = OracleScheme::sa;
    else if (*scheme == "saa") oc.scheme = OracleScheme::saa;
    else fail_at(s.node()["scheme"], fmt::format("'{}.scheme' must be exact, sa or saa", path));
  }
  if (auto batch = s.count("batch")) {
    if (*batch < 1) fail_at(s.node()["batch"], fmt::format("'{}.batch' must be at least 1", path));
    oc.sa_batch = *batch;
  }
  if (YAML::Node sched = s.take("schedule")) {
    Section ss(sched, path + ".schedule");
    oc.schedule.b = ss.real("b").value_or(oc.schedule.b);
    oc.schedule.k0 = ss.real("k0").value_or(oc.schedule.k0);
    oc.schedule.a = ss.real("a").value_or(oc.schedule.a);
    oc.schedule.cap = ss.count("cap");
    ss.finish();
    try {
      oc.schedule.validate();
    } catch (const ConfigError& e) {
      fail_at(sched, e.what());
    }
  }
  if (YAML::Node noise = s.take("noise")) {
    Section ns(noise, path + ".noise");
    if (auto kind = ns.text("kind")) {
      if (*kind == "structural") oc.noise.kind = NoiseKind::structural;
      else if (*kind == "additive-gaussian") oc.noise.kind = NoiseKind::additive_gaussian;
      else fail_at(noise["kind"], fmt::format("'{}.noise.kind' must be structural or additive-gaussian", path));
    }
    if (auto sigma = ns.real("sigma")) {
      if (*sigma < 0.0) fail_at(noise["sigma"], fmt::format("'{}.noise.sigma' must be >= 0", path));
      oc.noise.sigma = *sigma;
    }
    ns.finish();
  }
  s.finish();
  return oc;
}

struct PendingAlgorithm {
  SolverConfig config;
  bool lambda_from_bound = true;
  YAML::Node node;
};

PendingAlgorithm parse_algorithm_entry(const YAML::Node& node, std::size_t index) {
  const std::string path = fmt::format("algorithms[{}]", index);
  Section s(node, path);
  PendingAlgorithm out;
  out.node = node;
  SolverConfig& c = out.config;

  const auto algo_text = s.text("algorithm");
  if (!algo_text) fail_at(node, fmt::format("'{}.algorithm' is required", path));
  const auto algo = parse_algorithm(*algo_text);
  if (!algo) {
    fail_at(node["algorithm"], fmt::format("'{}.algorithm' must be one of SRFB, aSRFB, SFB, EG, "
                                           "PastEG, Adam; got '{}'",
                                           path, *algo_text));
  }
  c.algorithm = *algo;
  c.name = s.text("name").value_or(std::string(to_string(c.algorithm)));
  if (c.name.empty() || c.name.find_first_of(",\"\n\r") != std::string::npos) {
    fail_at(node, fmt::format("'{}.name' must be nonempty without commas, quotes or newlines", path));
  }

  c.delta = s.real("delta").value_or(kDefaultDelta);
  if (!(c.delta >= 0.0 && c.delta < 1.0)) {
    fail_at(node["delta"], fmt::format("'{}.delta' must lie in [0, 1), got {}", path, c.delta));
  }

  if (YAML::Node lam = s.take("lambda")) {
    if (lam.IsScalar() && lam.Scalar() == "bound") {
      out.lambda_from_bound = true;
    } else {
      c.lambda = Section::as_real(lam, path + ".lambda");
      if (!(c.lambda > 0.0)) fail_at(lam, fmt::format("'{}.lambda' must be positive", path));
      out.lambda_from_bound = false;
    }
  }
  for (const char* key : {"lambda_g", "lambda_d"}) {
    if (auto v = s.real(key)) {
      if (!(*v > 0.0)) fail_at(node[key], fmt::format("'{}.{}' must be positive", path, key));
      (std::string(key) == "lambda_g" ? c.lambda_g : c.lambda_d) = *v;
    }
  }

  c.K = s.count("iterations").value_or(kDefaultIterations);
  if (c.K < 1) fail_at(node["iterations"], fmt::format("'{}.iterations' must be positive", path));

  c.averaging = c.algorithm == Algorithm::asrfb ? AveragingMode::batch_mean : AveragingMode::none;
  if (auto avg = s.text("averaging")) {
    const auto mode = parse_averaging(*avg);
    if (!mode) {
      fail_at(node["averaging"],
              fmt::format("'{}.averaging' must be none, batch-mean or online", path));
    }
    c.averaging = *mode;
  }
  if (c.algorithm == Algorithm::asrfb && c.averaging == AveragingMode::none) {
    fail_at(node["averaging"], fmt::format("'{}': aSRFB requires averaging", path));
  }
  if (auto w = s.real("online_weight")) {
    if (c.averaging != AveragingMode::online) {
      fail_at(node["online_weight"], fmt::format("'{}.online_weight' needs averaging: online", path));
    }
    if (!(*w > 0.0 && *w <= 1.0)) {
      fail_at(node["online_weight"], fmt::format("'{}.online_weight' must lie in (0, 1]", path));
    }
    c.online_weight = *w;
  }

  if (YAML::Node adam = s.take("adam")) {
    Section as(adam, path + ".adam");
    c.adam.beta1 = as.real("beta1").value_or(c.adam.beta1);
    c.adam.beta2 = as.real("beta2").value_or(c.adam.beta2);
    c.adam.epsilon = as.real("epsilon").value_or(c.adam.epsilon);
    as.finish();
    if (!(c.adam.epsilon > 0.0)) fail_at(adam, fmt::format("'{}.adam.epsilon' must be positive", path));
    if (!(c.adam.beta1 >= 0.0 && c.adam.beta1 < 1.0 && c.adam.beta2 >= 0.0 && c.adam.beta2 < 1.0)) {
      fail_at(adam, fmt::format("'{}.adam' betas must lie in [0, 1)", path));
    }
  }

  if (YAML::Node oracle = s.take("oracle")) {
    Section os(oracle, path + ".oracle");
    c.oracle = parse_oracle(os, path + ".oracle");
  }
  s.finish();
  return out;
}

}  // namespace

double effective_lipschitz(const ViProblem& problem) {
  if (problem.lipschitz) return *problem.lipschitz;
  SampleRng rng(hash_key({0x6c697073ULL}));
  return lipschitz_estimate(problem, 10000, rng);
}

ExperimentConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ParseError(fmt::format("line {}, column {}: {}", e.mark.line + 1, e.mark.column + 1, e.msg),
                     e.mark.line + 1, e.mark.column + 1);
  }
  if (!root || root.IsNull()) throw ParseError("config is empty", 0, 0);
  Section top(root, "");
  ExperimentConfig cfg;

  YAML::Node problem = top.take("problem");
  if (!problem) fail_at(root, "'problem' is required");
  {
    Section ps(problem, "problem");
    const auto type = ps.text("type");
    if (!type) fail_at(problem, "'problem.type' is required");
    if (*type == "bilinear") {
      BilinearGameSpec spec;
      if (auto v = ps.count("n_g")) spec.n_g = static_cast<Index>(*v);
      if (auto v = ps.count("n_d")) spec.n_d = static_cast<Index>(*v);
      spec.a = ps.vector("a");
      spec.b = ps.vector("b");
      spec.matrix_mean = ps.real("matrix_mean").value_or(spec.matrix_mean);
      spec.matrix_noise_sd = ps.real("matrix_noise_sd").value_or(spec.matrix_noise_sd);
      spec.box_halfwidth = ps.real("box_halfwidth").value_or(spec.box_halfwidth);
      spec.seed = ps.count("seed").value_or(spec.seed);
      cfg.problem = spec;
    } else if (*type == "logistic") {
      LogisticGameSpec spec;
      spec.omega = ps.real("omega").value_or(spec.omega);
      spec.box_halfwidth = ps.real("box_halfwidth").value_or(spec.box_halfwidth);
      cfg.problem = spec;
    } else if (*type == "custom") {
      const auto file = ps.text("file");
      if (!file) fail_at(problem, "'problem.file' is required for custom problems");
      std::filesystem::path p(*file);
      if (p.is_relative()) p = base_dir / p;
      cfg.problem = CustomProblemFile{p, parse_affine_file(p)};
    } else {
      fail_at(problem["type"], fmt::format("'problem.type' must be bilinear, logistic or custom; got '{}'", *type));
    }
    if (auto x0 = ps.vector("x0")) cfg.x0 = std::vector<double>(x0->begin(), x0->end());
    ps.finish();
  }

  YAML::Node algos = top.take("algorithms");
  if (!algos || !algos.IsSequence() || algos.size() == 0) {
    fail_at(algos ? algos : root, "'algorithms' must be a nonempty list");
  }
  std::vector<PendingAlgorithm> pending;
  std::set<std::string> names;
  for (std::size_t i = 0; i < algos.size(); ++i) {
    pending.push_back(parse_algorithm_entry(algos[i], i));
    if (!names.insert(pending.back().config.name).second) {
      fail_at(algos[i], fmt::format("duplicate algorithm name '{}'", pending.back().config.name));
    }
  }

  cfg.replications = top.count("replications").value_or(cfg.replications);
  if (cfg.replications < 1) fail_at(root["replications"], "'replications' must be at least 1");
  cfg.log_every = top.count("log_every").value_or(cfg.log_every);
  if (cfg.log_every < 1) fail_at(root["log_every"], "'log_every' must be at least 1");
  cfg.output_path = top.text("output").value_or(cfg.output_path);
  if (auto fmt_text = top.text("format")) {
    if (*fmt_text == "csv") cfg.output_format = OutputFormat::csv;
    else if (*fmt_text == "jsonl") cfg.output_format = OutputFormat::jsonl;
    else fail_at(root["format"], "'format' must be csv or jsonl");
  }
  cfg.master_seed = top.count("master_seed").value_or(cfg.master_seed);
  cfg.gap_probes = static_cast<std::size_t>(top.count("gap_probes").value_or(0));
  cfg.workers = static_cast<unsigned>(top.count("workers").value_or(0));
  cfg.wall_time = top.flag("wall_time").value_or(true);
  if (auto rc = top.text("r_convention")) {
    const auto conv = parse_r_convention(*rc);
    if (!conv) fail_at(root["r_convention"], "'r_convention' must be diameter or diameter-sq");
    cfg.r_convention = *conv;
  }
  if (YAML::Node bound = top.take("bound")) {
    Section bs(bound, "bound");
    cfg.bound.R = bs.real("R");
    cfg.bound.B = bs.real("B");
    cfg.bound.sigma_sq = bs.real("sigma_sq");
    bs.finish();
    for (const auto& v : {cfg.bound.R, cfg.bound.B, cfg.bound.sigma_sq}) {
      if (v && *v < 0.0) fail_at(bound, "'bound' entries must be nonnegative");
    }
  }
  top.finish();

  // Resolve step sizes and validate against the built problem.
  const ViProblem built = build_problem(cfg);
  const JointPoint start = config_start(cfg, built);
  (void)start;
  double ell = -1.0;
  for (auto& p : pending) {
    SolverConfig& c = p.config;
    if (p.lambda_from_bound) {
      if (ell < 0.0) ell = effective_lipschitz(built);
      const double delta_ref = c.is_relaxed() && c.delta > 0.0 ? c.delta : kDefaultDelta;
      c.lambda = step_size_bound(ell, delta_ref);
    }
    const ValidationReport report = validate_config(c, built);
    if (report.has_errors()) fail_at(p.node, fmt::format("algorithm '{}': {}", c.name, report.errors().front()));
    cfg.algorithms.push_back(std::move(c));
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path.has_parent_path() ? path.parent_path() : ".");
}

ViProblem build_problem(const ExperimentConfig& config) {
  return std::visit(
      [](const auto& spec) -> ViProblem {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, BilinearGameSpec>) return build_bilinear(spec);
        else if constexpr (std::is_same_v<T, LogisticGameSpec>) return build_logistic(spec);
        else return build_affine(spec.spec);
      },
      config.problem);
}

JointPoint config_start(const ExperimentConfig& config, const ViProblem& problem) {
  if (!config.x0) return resolve_start(problem, std::nullopt);
  if (static_cast<Index>(config.x0->size()) != problem.dim()) {
    throw ConfigError(fmt::format("'problem.x0' has {} entries, the problem has dimension {}",
                                  config.x0->size(), problem.dim()));
  }
  Vector v = Eigen::Map<const Vector>(config.x0->data(), problem.dim());
  JointPoint x0 = JointPoint::from_flat(std::move(v), problem.n_g);
  if (!problem.feasible.contains(x0)) throw ConfigError("'problem.x0' is not feasible");
  return x0;
}

}  // namespace svilab
