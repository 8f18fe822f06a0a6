#pragma once

// Experiment configuration files. The format is YAML; README.md holds the
// full key reference.

#include "svilab/benchmarks.hpp"
#include "svilab/metrics.hpp"
#include "svilab/solvers.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace svilab {

/// Malformed input. Line and column are 1-based; 0 when unknown.
class ParseError : public ConfigError {
 public:
  ParseError(const std::string& what, int line, int column)
      : ConfigError(what), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

enum class OutputFormat { csv, jsonl };

struct CustomProblemFile {
  std::filesystem::path path;
  AffineGameSpec spec;
};

/// Optional overrides of the averaged-bound constants; unset entries are
/// estimated from the problem.
struct BoundOverrides {
  std::optional<double> R;
  std::optional<double> B;
  std::optional<double> sigma_sq;
};

struct ExperimentConfig {
  std::variant<BilinearGameSpec, LogisticGameSpec, CustomProblemFile> problem;
  std::optional<std::vector<double>> x0;
  std::vector<SolverConfig> algorithms;
  std::uint64_t replications = 1;
  std::uint64_t log_every = 1;
  std::string output_path = "trace.csv";
  OutputFormat output_format = OutputFormat::csv;
  std::uint64_t master_seed = 0;
  std::size_t gap_probes = 0;
  unsigned workers = 0;
  bool wall_time = true;
  RConvention r_convention = RConvention::diameter_sq;
  BoundOverrides bound;
};

/// Defaults applied by the parser.
inline constexpr double kDefaultDelta = 0.618;
inline constexpr std::uint64_t kDefaultIterations = 10000;

/// Parses and validates a config. `base_dir` resolves relative problem-file
/// paths. Step sizes given as "bound" (the default) are resolved against the
/// built problem's Lipschitz constant.
ExperimentConfig parse_config_text(const std::string& text,
                                   const std::filesystem::path& base_dir = ".");
ExperimentConfig parse_config_file(const std::filesystem::path& path);

ViProblem build_problem(const ExperimentConfig& config);

/// Lipschitz constant used for default step sizes: the problem's declared
/// constant, else a seeded pair-sampling estimate.
double effective_lipschitz(const ViProblem& problem);

/// Start point for runs of this config.
JointPoint config_start(const ExperimentConfig& config, const ViProblem& problem);

std::string_view to_string(OutputFormat format);
std::string_view to_string(RConvention convention);
std::optional<RConvention> parse_r_convention(std::string_view text);

}  // namespace svilab
