#pragma once

// The acceptance suite: one check per numbered criterion.

#include "msp/quadrature.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace msp::app {

struct CheckResult {
    int id = 0;
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double threshold = 0.0;
    double seconds = 0.0;
    std::string detail;
};

struct AcceptanceSettings {
    /// Reduced sample sizes; noise-driven tolerances are widened to match.
    bool quick = false;
    /// Criterion numbers to run; empty runs all.
    std::vector<int> checks;
    int workers = 1;
    std::uint64_t seed = 20240601;
    double c_alpha_multiplier = 1.0;
    /// Replaces the default quadrature settings of the constant cross-check.
    std::optional<QuadratureConfig> quadrature;
    /// msp executable for the determinism check; empty runs it in process.
    std::string msp_binary;
    std::filesystem::path scratch = "acceptance_scratch";
};

using ProgressFn = std::function<void(const CheckResult&)>;

[[nodiscard]] std::vector<CheckResult> run_acceptance(const AcceptanceSettings& settings,
                                                      const ProgressFn& progress = {});

/// "[PASS]  3  name  measured=... threshold=...  (12.3 s)  detail"
[[nodiscard]] std::string format_check(const CheckResult& r);

}  // namespace msp::app
