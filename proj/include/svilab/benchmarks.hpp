#pragma once

// Benchmark games and the batch experiment driver.

#include "svilab/core.hpp"
#include "svilab/solvers.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace svilab {

/// Zero-sum bilinear game J = x_g' M(xi) x_d + x_g' a + x_d' b with an
/// antidiagonal random M. x_g minimizes, x_d maximizes.
struct BilinearGameSpec {
  Index n_g = 5;
  Index n_d = 5;
  // Drawn once from U[-0.5, 0.5] (seeded) when absent.
  std::optional<Vector> a;
  std::optional<Vector> b;
  double matrix_mean = 1.0;
  double matrix_noise_sd = 0.1;
  double box_halfwidth = 1.0;
  std::uint64_t seed = 0;
};

/// Antidiagonal matrix with entries[i] at (i, cols - 1 - i).
Eigen::MatrixXd antidiagonal(Index rows, Index cols, const Vector& entries);

ViProblem build_bilinear(const BilinearGameSpec& spec);

/// min_{x_g} max_{x_d} -log(1 + e^{-x_d omega}) - log(1 + e^{x_d x_g}) on a
/// square box; scalar players.
struct LogisticGameSpec {
  double omega = -2.0;
  double box_halfwidth = 4.0;
};

double sigmoid(double t);

ViProblem build_logistic(const LogisticGameSpec& spec);

/// Affine field F(x) = A x + q on a box, loaded from a problem file. The
/// per-sample gradient is F itself; noise comes from the oracle config.
struct AffineGameSpec {
  Index n_g = 0;
  Index n_d = 0;
  Eigen::MatrixXd matrix;
  Vector offset;
  Vector lower;
  Vector upper;
  std::optional<Vector> solution;
  std::optional<Vector> start;
};

ViProblem build_affine(const AffineGameSpec& spec);

struct ExperimentOptions {
  std::uint64_t replications = 1;
  std::uint64_t log_every = 1;
  std::uint64_t master_seed = 0;
  // 0 selects the hardware concurrency.
  unsigned workers = 0;
  bool record_wall_time = true;
  std::size_t gap_probes = 0;
  bool check_residual_inequality = false;
  std::optional<JointPoint> x0;
};

struct TraceRow {
  std::size_t run_id = 0;
  std::string algorithm;
  std::uint64_t replication = 0;
  TraceRecord record;
};

struct RunSummary {
  std::size_t run_id = 0;
  std::string algorithm;
  std::uint64_t replication = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::vector<std::string> warnings;
  bool batch_capped = false;
  std::uint64_t residual_inequality_failures = 0;
  std::optional<TraceRecord> final_record;
  std::optional<JointPoint> final_x;
  std::optional<JointPoint> final_average;
};

struct TraceTable {
  std::vector<TraceRow> rows;
  std::vector<RunSummary> runs;

  bool any_failed() const;
};

/// Start point: explicit, else the problem default, else the origin
/// projected onto Omega.
JointPoint resolve_start(const ViProblem& problem, const std::optional<JointPoint>& x0);

/// Runs every (config, replication) pair. Replication r of every config
/// uses seed derive_seed(master_seed, r); run_id = config_index *
/// replications + r. Rows come out in run_id order regardless of worker
/// scheduling. A failing run is recorded in `runs` and does not stop the
/// others.
TraceTable run_experiment(const ViProblem& problem, const std::vector<SolverConfig>& configs,
                          const ExperimentOptions& options);

}  // namespace svilab
