#pragma once

// svilab command line: run / check / bound.

#include "svilab/config.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace svilab::cli {

enum ExitCode : int { kSuccess = 0, kRunFailure = 1, kConfigError = 2 };

struct GuaranteeCheck {
  std::string guarantee;
  std::vector<std::string> failures;

  bool satisfied() const { return failures.empty(); }
};

/// Per-algorithm view of the convergence premises.
struct PremiseReport {
  std::string algorithm;
  double delta = 0.0;
  double lambda = 0.0;
  double lipschitz = 0.0;
  std::optional<double> step_bound;
  bool monotone = false;
  double min_inner_product = 0.0;
  double R = 0.0;
  OracleConstants constants;
  std::optional<double> c;
  std::optional<double> bound_preview;
  std::vector<std::string> notes;
  std::vector<GuaranteeCheck> guarantees;
};

std::vector<PremiseReport> assess(const ExperimentConfig& config, const ViProblem& problem);

int cmd_run(const ExperimentConfig& config, std::ostream& out, std::ostream& err);
int cmd_check(const ExperimentConfig& config, std::ostream& out, std::ostream& err);
int cmd_bound(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

/// Full command-line entry; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace svilab::cli
