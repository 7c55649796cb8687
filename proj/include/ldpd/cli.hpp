#pragma once

#include <filesystem>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ldpd/config.hpp"
#include "ldpd/functionals.hpp"

namespace ldpd {

/// Bad command line or configuration (exit code 2).
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitValidation = 3, kExitRuntime = 4 };

/// Output directory layout shared by all commands:
///
///   <dir>/config.resolved          effective configuration of simulate / fit
///   <dir>/summarize.resolved       effective configuration of summarize
///   <dir>/diagnose.resolved        effective configuration of diagnose
///   <dir>/data.csv, truth.csv, manifest.json      (simulate)
///   <dir>/draws/                   draw store (fit)
///   <dir>/report.txt               run report (fit)
///   <dir>/tables/                  correlations.csv, correlation_matrix.csv,
///                                  medians.csv, bayes_factor.csv (summarize);
///                                  diagnostics.csv, trend.csv (diagnose)
///   <dir>/curves/<profile>_<kind>.csv              (summarize)

/// Writes data.csv, truth.csv, manifest.json and config.resolved.
void cmd_simulate(Config& cfg, std::ostream& log);

/// Runs the chains and writes draws/, report.txt and config.resolved. With
/// `resume`, the chains continue from the checkpoints in draws/ up to
/// chain.iterations and the new draws are appended.
void cmd_fit(Config& cfg, bool resume, std::ostream& log);

/// Posterior tables and curves from an existing draw store.
void cmd_summarize(Config& cfg, std::ostream& log);

/// ESS, split R-hat and trend test per scalar parameter.
void cmd_diagnose(Config& cfg, std::ostream& log);

/// Profiles named by [profile.<name>] sections; `target = both` (the default)
/// yields <name>_onset and <name>_gap.
std::vector<CovariateProfile> profiles_from_config(Config& cfg, std::size_t p, std::size_t q);

/// Full command line (without the program name). Returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ldpd
