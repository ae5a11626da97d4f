#pragma once

// JSON run configuration for the msp command line tool.
//
// {
//   "process":    {"kind": "levy", "alpha": "1.5", "hurst": "0.7", "b": "1",
//                  "domain": [0, 1], "c": 1.2, "d": 1.8,
//                  "lfsm": {"b_plus": 1, "b_minus": 1}},
//   "simulation": {"n_terms": 20000, "m_paths": 1000, "seed": 1, "workers": 1,
//                  "tail_compensation": true, "compensated_sum": false},
//   "path":       {"grid": {"start": 0, "stop": 1, "count": 101} | [t...], "paths": 1},
//   "moments":    {"t": 0.5, "eta": 0.5,
//                  "eps": [e...] | {"start_exp": -4, "stop_exp": -10, "base": 2}},
//   "holder":     {"t": 0.5 | [t...], "r_levels": [r...] | {"start_exp": ..., "stop_exp": ..., "base": 2},
//                  "alpha_holder": 0.5, "bootstrap": 999, "level": 0.95},
//   "verify":     {"profile": "default" | "quick", "checks": [1, 2, ...], "seed": 20240601,
//                  "faults": {"c_alpha_multiplier": 1, "quadrature": {"abs_tol": ..., "rel_tol": ...,
//                             "max_subdivisions": ..., "half_periods": ...}}},
//   "output":     {"dir": "out", "svg": false}
// }
//
// Every section and key is optional. A run manifest is also accepted: its
// "config" member is read in place of the whole document.

#include "msp/kernels.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace msp::app {

struct RunConfig {
    ProcessInputs process;

    std::size_t n_terms = 20'000;
    int m_paths = 1000;
    std::uint64_t seed = 1;
    int workers = 1;
    bool tail_compensation = true;
    bool compensated_sum = false;

    nlohmann::json grid_spec = nlohmann::json{{"start", 0.0}, {"stop", 1.0}, {"count", 101}};
    std::vector<double> grid;
    int path_count = 1;

    double moment_t = 0.5;
    double eta = 0.5;
    nlohmann::json eps_spec = nlohmann::json{{"start_exp", -4}, {"stop_exp", -10}, {"base", 2}};
    std::vector<double> eps;

    std::vector<double> holder_t{0.5};
    nlohmann::json r_spec = nlohmann::json{{"start_exp", -4}, {"stop_exp", -10}, {"base", 2}};
    std::vector<double> r_levels;
    std::optional<double> alpha_holder;
    int bootstrap = 999;
    double level = 0.95;

    std::string profile = "default";
    std::uint64_t verify_seed = 20240601;
    std::vector<int> checks;
    double fault_c_alpha = 1.0;
    std::optional<QuadratureConfig> fault_quadrature;

    std::string out_dir = "out";
    bool svg = false;
};

/// Parses and validates; throws ConfigError naming the offending field.
[[nodiscard]] RunConfig parse_config(const nlohmann::json& doc);
[[nodiscard]] RunConfig load_config_file(const std::string& path);

/// Complete configuration with every default written out.
[[nodiscard]] nlohmann::json config_to_json(const RunConfig& cfg);

/// base^e for e = start_exp, ..., stop_exp in unit steps.
[[nodiscard]] std::vector<double> log_spaced(int start_exp, int stop_exp, double base);

}  // namespace msp::app
