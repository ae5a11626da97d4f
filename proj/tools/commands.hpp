#pragma once

#include "run_config.hpp"

#include "msp/estimation.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace msp::app {

enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericalError = 3, kAcceptanceFailure = 4 };

[[nodiscard]] EstimationOptions estimation_options(const RunConfig& cfg);

struct MomentsRun {
    MomentEstimate estimate;
    ScalingFit fit;
    ScalingTheory theory;
    std::string table;      // moments.csv
    std::string fit_table;  // moments_fit.csv
};

[[nodiscard]] MomentsRun compute_moments(const ProcessSpec& spec, const RunConfig& cfg);

/// Each command writes its CSV files, an optional SVG and <command>.manifest.json
/// into cfg.out_dir and returns an ExitCode. Errors propagate as exceptions.
int run_path(const RunConfig& cfg);
int run_moments(const RunConfig& cfg);
int run_holder(const RunConfig& cfg);

/// `msp_binary`: executable used by the determinism check; empty runs it in process.
int run_verify(const RunConfig& cfg, const std::string& msp_binary, bool verbose);

}  // namespace msp::app
