#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "cylstokes/config.hpp"
#include "cylstokes/report.hpp"

namespace cylstokes {

/// Checks every module precondition reachable from the configuration; throws ConfigError
/// naming the offending field.
void validate(const ExperimentConfig& cfg);

ExperimentReport run_eig(const ExperimentConfig& cfg);
ExperimentReport run_ar(const ExperimentConfig& cfg);
ExperimentReport run_mode_solve(const ExperimentConfig& cfg);
ExperimentReport run_mode_sweep(const ExperimentConfig& cfg);
ExperimentReport run_deriv_check(const ExperimentConfig& cfg);
ExperimentReport run_resolvent_sweep(const ExperimentConfig& cfg);
ExperimentReport run_rbound(const ExperimentConfig& cfg);
ExperimentReport run_decay(const ExperimentConfig& cfg);
ExperimentReport run_maxreg(const ExperimentConfig& cfg);

struct ExperimentEntry {
  std::string name;
  std::string help;
  std::function<ExperimentReport(const ExperimentConfig&)> run;
};

/// The experiments of the suite in run order.
const std::vector<ExperimentEntry>& experiment_registry();

struct SuiteResult {
  std::vector<ExperimentReport> reports;
  std::vector<double> seconds;  // wall time per report (console only, never written)
  bool pass() const;
};

/// Runs the named experiments, writes their reports under out_dir and logs one line each.
SuiteResult run_suite(const ExperimentConfig& cfg, const std::vector<std::string>& names, const std::string& out_dir,
                      std::ostream& log);
/// Every registered experiment plus the suite summary and the plot script.
SuiteResult run_all(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& log);

}  // namespace cylstokes
