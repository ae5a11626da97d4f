#include "commands.hpp"
#include "run_config.hpp"

#include "msp/errors.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <iostream>
#include <optional>

namespace {

std::string self_path(const char* argv0) {
    std::error_code ec;
    auto p = std::filesystem::read_symlink("/proc/self/exe", ec);
    if (!ec) return p.string();
    return std::filesystem::absolute(argv0).string();
}

}  // namespace

int main(int argc, char** argv) {
    using namespace msp;
    using namespace msp::app;

    CLI::App app{"Multistable process simulation and verification"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::optional<std::string> out_dir;
    bool svg = false;
    std::optional<int> workers;
    std::optional<std::uint64_t> seed;
    app.add_option("--config", config_path, "JSON run configuration (or a run manifest)");
    app.add_option("--out", out_dir, "Output directory");
    app.add_flag("--svg", svg, "Also write SVG charts");
    app.add_option("--workers", workers, "Worker threads")->check(CLI::Range(1, 1024));
    app.add_option("--seed", seed, "Master seed, overrides the configuration");

    auto* path = app.add_subcommand("path", "Simulate diagonal paths Y(t) on a grid");
    auto* moments = app.add_subcommand("moments", "Increment moments and their log-log fit");
    auto* holder = app.add_subcommand("holder", "Pointwise Holder exponent estimates");
    auto* verify = app.add_subcommand("verify", "Run the acceptance checks");
    bool quiet = false;
    verify->add_flag("--quiet", quiet, "Do not print one line per check");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kConfigError;
    }

    try {
        RunConfig cfg = config_path.empty() ? parse_config(nlohmann::json::object()) : load_config_file(config_path);
        if (out_dir) cfg.out_dir = *out_dir;
        if (svg) cfg.svg = true;
        if (workers) cfg.workers = *workers;
        if (seed) {
            cfg.seed = *seed;
            cfg.verify_seed = *seed;
        }

        if (path->parsed()) return run_path(cfg);
        if (moments->parsed()) return run_moments(cfg);
        if (holder->parsed()) return run_holder(cfg);
        if (verify->parsed()) return run_verify(cfg, self_path(argv[0]), !quiet);
    } catch (const ConfigError& e) {
        std::cerr << "msp: config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const ParseError& e) {
        std::cerr << "msp: config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const DomainError& e) {
        std::cerr << "msp: numerical failure: " << e.what() << "\n";
        return kNumericalError;
    } catch (const NumericalError& e) {
        std::cerr << "msp: numerical failure: " << e.what() << "\n";
        return kNumericalError;
    } catch (const std::exception& e) {
        std::cerr << "msp: error: " << e.what() << "\n";
        return kNumericalError;
    }
    return kConfigError;
}
