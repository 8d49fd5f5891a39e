#pragma once

#include <iosfwd>
#include <string>

#include "qrad/run_config.hpp"
#include "qrad/sweep_result.hpp"

namespace qrad::cli {

enum ExitCode : int {
    kSuccess = 0,
    kConfigError = 2,
    kPartialFailure = 3,
    kNumericalFailure = 4,
};

struct CommandOutcome {
    SweepResult result;
    int exit_code = kSuccess;
};

// Share of grid points that must succeed for a sweep to exit 0.
inline constexpr double kSweepSuccessFraction = 0.9;

CommandOutcome cmd_qi_error(const RunConfig& config);
CommandOutcome cmd_bias_sweep(const RunConfig& config);
CommandOutcome cmd_gain_sweep(const RunConfig& config);
CommandOutcome cmd_link(const RunConfig& config);
CommandOutcome cmd_montecarlo(const RunConfig& config);

// Coupling used by the device sweeps: the configured kappa, or the one that
// reproduces the calibration gain.
double resolve_kappa(const RunConfig& config);

// qrad <subcommand> --config <path> [--out <path>] [--seed <u64>] [--points N]
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qrad::cli
