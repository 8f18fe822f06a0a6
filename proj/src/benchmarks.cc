#include "svilab/benchmarks.hpp"

#include "svilab/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include <fmt/format.h>

namespace svilab {

Eigen::MatrixXd antidiagonal(Index rows, Index cols, const Vector& entries) {
  const Index m = std::min(rows, cols);
  if (entries.size() != m) {
    throw DimensionError(fmt::format("antidiagonal of a {}x{} matrix has {} entries, got {}", rows,
                                     cols, m, entries.size()));
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, cols);
  for (Index i = 0; i < m; ++i) out(i, cols - 1 - i) = entries[i];
  return out;
}

namespace {

// F_g = M x_d + a, F_d = -(M' x_g + b) with M antidiagonal.
void bilinear_field(const Vector& entries, const Vector& a, const Vector& b, const JointPoint& x,
                    JointPoint& out) {
  const Index n_d = x.n_d();
  auto g = out.g_block();
  auto d = out.d_block();
  g = a;
  d = -b;
  const auto xg = x.g_block();
  const auto xd = x.d_block();
  for (Index i = 0; i < entries.size(); ++i) {
    const Index j = n_d - 1 - i;
    g[i] += entries[i] * xd[j];
    d[j] -= entries[i] * xg[i];
  }
}

}  // namespace

ViProblem build_bilinear(const BilinearGameSpec& spec) {
  if (spec.n_g < 1 || spec.n_d < 1) throw ConfigError("bilinear: dimensions must be positive");
  if (!(spec.box_halfwidth > 0.0)) throw ConfigError("bilinear: box_halfwidth must be positive");
  if (!(spec.matrix_noise_sd >= 0.0)) throw ConfigError("bilinear: matrix_noise_sd must be >= 0");
  if (!std::isfinite(spec.matrix_mean)) throw ConfigError("bilinear: matrix_mean must be finite");

  SampleRng draw(hash_key({spec.seed, 0x62696c696eULL}));
  const auto offset = [&draw](const std::optional<Vector>& given, Index n, const char* label) {
    if (given) {
      if (given->size() != n) {
        throw DimensionError(fmt::format("bilinear: '{}' has length {}, expected {}", label,
                                         given->size(), n));
      }
      return *given;
    }
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = draw.uniform(-0.5, 0.5);
    return v;
  };
  const Vector a = offset(spec.a, spec.n_g, "a");
  const Vector b = offset(spec.b, spec.n_d, "b");

  const Index m = std::min(spec.n_g, spec.n_d);
  const Vector mean_entries = Vector::Constant(m, spec.matrix_mean);
  const double mean = spec.matrix_mean;
  const double sd = spec.matrix_noise_sd;

  ViProblem p;
  p.name = "bilinear";
  p.n_g = spec.n_g;
  p.n_d = spec.n_d;
  p.feasible = FeasibleSet{BoxConstraint::symmetric(spec.n_g, spec.box_halfwidth),
                           BoxConstraint::symmetric(spec.n_d, spec.box_halfwidth)};
  p.exact_pseudogradient = [mean_entries, a, b](const JointPoint& x) {
    JointPoint out = JointPoint::zeros(x.n_g(), x.n_d());
    bilinear_field(mean_entries, a, b, x, out);
    return out;
  };
  p.per_sample_gradient = [m, mean, sd, a, b](const JointPoint& x, SampleRng& rng,
                                               JointPoint& out) {
    // bilinear_field with one fresh M draw, inlined to keep the sampling loop
    // allocation-free.
    const Index n_d = x.n_d();
    auto g = out.g_block();
    auto d = out.d_block();
    g = a;
    d = -b;
    for (Index i = 0; i < m; ++i) {
      const double e = rng.normal(mean, sd);
      const Index j = n_d - 1 - i;
      g[i] += e * x.d_block()[j];
      d[j] -= e * x.g_block()[i];
    }
  };
  p.lipschitz = std::abs(mean);
  p.default_start = JointPoint::zeros(spec.n_g, spec.n_d);

  // Stationary point: E[M] x_d = -a, E[M]' x_g = -b.
  const Eigen::MatrixXd M = antidiagonal(spec.n_g, spec.n_d, mean_entries);
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> solve_d(M);
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> solve_g(M.transpose());
  const Vector xd = solve_d.solve(-a);
  const Vector xg = solve_g.solve(-b);
  const double consistency = (M * xd + a).norm() + (M.transpose() * xg + b).norm();
  JointPoint candidate(xg, xd);
  if (consistency > 1e-12 * (1.0 + a.norm() + b.norm())) {
    p.warnings.push_back("bilinear: no stationary point exists; known solution omitted");
  } else if (!p.feasible.contains(candidate)) {
    p.warnings.push_back(
        "bilinear: stationary point lies outside the box; known solution omitted and distance "
        "metrics disabled");
  } else {
    p.known_solution = std::move(candidate);
  }
  return p;
}

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

ViProblem build_logistic(const LogisticGameSpec& spec) {
  if (!(spec.box_halfwidth > 0.0)) throw ConfigError("logistic: box_halfwidth must be positive");
  if (!std::isfinite(spec.omega)) throw ConfigError("logistic: omega must be finite");
  const double omega = spec.omega;
  const double h = spec.box_halfwidth;

  ViProblem p;
  p.name = "logistic";
  p.n_g = 1;
  p.n_d = 1;
  p.feasible = FeasibleSet{BoxConstraint::symmetric(1, h), BoxConstraint::symmetric(1, h)};
  p.exact_pseudogradient = [omega](const JointPoint& x) {
    const double g = x[0];
    const double d = x[1];
    const double s = sigmoid(d * g);
    Vector fg(1), fd(1);
    fg << -d * s;
    fd << -omega * sigmoid(-d * omega) + g * s;
    return JointPoint(fg, fd);
  };

  // Lipschitz constant as the largest Jacobian spectral norm on a grid.
  constexpr int kGrid = 201;
  double ell = 0.0;
  for (int i = 0; i < kGrid; ++i) {
    for (int j = 0; j < kGrid; ++j) {
      const double g = -h + 2.0 * h * i / (kGrid - 1);
      const double d = -h + 2.0 * h * j / (kGrid - 1);
      const double s = sigmoid(d * g);
      const double ds = s * (1.0 - s);
      const double so = sigmoid(-d * omega);
      Eigen::Matrix2d J;
      J << -d * d * ds, -s - d * g * ds, s + g * d * ds,
          omega * omega * so * (1.0 - so) + g * g * ds;
      ell = std::max(ell, Eigen::JacobiSVD<Eigen::Matrix2d>(J).singularValues()[0]);
    }
  }
  p.lipschitz = ell;

  Vector sg(1), sd(1);
  sg << omega;
  sd << 0.0;
  JointPoint solution(sg, sd);
  if (p.feasible.contains(solution)) {
    p.known_solution = std::move(solution);
  } else {
    p.warnings.push_back("logistic: equilibrium (omega, 0) lies outside the box");
  }
  Vector start(1);
  start << 0.5;
  p.default_start = joint_project(p, JointPoint(start, start));
  return p;
}

ViProblem build_affine(const AffineGameSpec& spec) {
  const Index n = spec.n_g + spec.n_d;
  if (spec.n_g < 1 || spec.n_d < 1) throw ConfigError("affine: dimensions must be positive");
  if (spec.matrix.rows() != n || spec.matrix.cols() != n) {
    throw DimensionError(fmt::format("affine: matrix must be {}x{}", n, n));
  }
  if (spec.offset.size() != n || spec.lower.size() != n || spec.upper.size() != n) {
    throw DimensionError(fmt::format("affine: offset and bounds must have length {}", n));
  }
  const Eigen::MatrixXd A = spec.matrix;
  const Vector q = spec.offset;
  const Index n_g = spec.n_g;

  ViProblem p;
  p.name = "affine";
  p.n_g = spec.n_g;
  p.n_d = spec.n_d;
  p.feasible = FeasibleSet{BoxConstraint(spec.lower.head(n_g), spec.upper.head(n_g)),
                           BoxConstraint(spec.lower.tail(spec.n_d), spec.upper.tail(spec.n_d))};
  p.exact_pseudogradient = [A, q, n_g](const JointPoint& x) {
    return JointPoint::from_flat(A * x.flat() + q, n_g);
  };
  p.lipschitz = n > 0 ? Eigen::JacobiSVD<Eigen::MatrixXd>(A).singularValues()[0] : 0.0;
  if (spec.solution) {
    if (spec.solution->size() != n) throw DimensionError("affine: solution has the wrong length");
    JointPoint s = JointPoint::from_flat(*spec.solution, n_g);
    if (!p.feasible.contains(s)) throw ConfigError("affine: solution lies outside the box");
    p.known_solution = std::move(s);
  }
  if (spec.start) {
    if (spec.start->size() != n) throw DimensionError("affine: start has the wrong length");
    p.default_start = JointPoint::from_flat(*spec.start, n_g);
  }
  return p;
}

bool TraceTable::any_failed() const {
  return std::any_of(runs.begin(), runs.end(), [](const RunSummary& r) { return !r.ok; });
}

JointPoint resolve_start(const ViProblem& problem, const std::optional<JointPoint>& x0) {
  if (x0) return *x0;
  if (problem.default_start) return *problem.default_start;
  return joint_project(problem, JointPoint::zeros(problem.n_g, problem.n_d));
}

TraceTable run_experiment(const ViProblem& problem, const std::vector<SolverConfig>& configs,
                          const ExperimentOptions& options) {
  if (options.replications < 1) throw ConfigError("replications must be at least 1");
  if (options.log_every < 1) throw ConfigError("log_every must be at least 1");
  const JointPoint x0 = resolve_start(problem, options.x0);
  problem.require_dims(x0, "run_experiment start");
  if (!problem.feasible.contains(x0)) throw ConfigError("start point is not feasible");

  std::optional<ProbeSet> probes;
  if (options.gap_probes > 0) {
    SampleRng rng(hash_key({options.master_seed, 0x70726f6265ULL}));
    probes = make_probe_set(problem, options.gap_probes, rng);
  }

  const std::size_t total = configs.size() * options.replications;
  std::vector<RunSummary> summaries(total);
  std::vector<std::vector<TraceRecord>> traces(total);

  const auto run_one = [&](std::size_t run_id) {
    const std::size_t ci = run_id / options.replications;
    const std::uint64_t rep = run_id % options.replications;
    SolverConfig cfg = configs[ci];
    cfg.seed = derive_seed(options.master_seed, rep);
    RunSummary& sum = summaries[run_id];
    sum.run_id = run_id;
    sum.algorithm = cfg.name.empty() ? std::string(to_string(cfg.algorithm)) : cfg.name;
    sum.replication = rep;
    sum.seed = cfg.seed;
    try {
      sum.warnings = validate_config(cfg, problem).warnings();
      RunOptions ro;
      ro.log_every = options.log_every;
      ro.probes = probes ? &*probes : nullptr;
      ro.record_wall_time = options.record_wall_time;
      ro.check_residual_inequality = options.check_residual_inequality;
      RunResult res = run_solver(problem, cfg, x0, ro);
      sum.ok = true;
      sum.batch_capped = res.batch_capped;
      sum.residual_inequality_failures = res.residual_inequality_failures;
      if (!res.trace.empty()) sum.final_record = res.trace.back();
      sum.final_x = res.state.x;
      sum.final_average = res.average;
      traces[run_id] = std::move(res.trace);
    } catch (const std::exception& e) {
      sum.ok = false;
      sum.error = e.what();
    }
  };

  unsigned workers = options.workers ? options.workers : std::thread::hardware_concurrency();
  workers = std::max(1U, std::min<unsigned>(workers, static_cast<unsigned>(total)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < total; ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < total; i = next.fetch_add(1)) run_one(i);
      });
    }
  }

  TraceTable table;
  for (std::size_t i = 0; i < total; ++i) {
    for (const auto& rec : traces[i]) {
      table.rows.push_back({i, summaries[i].algorithm, summaries[i].replication, rec});
    }
  }
  table.runs = std::move(summaries);
  return table;
}

}  // namespace svilab
