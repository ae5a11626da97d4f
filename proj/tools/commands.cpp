#include "commands.hpp"

#include "acceptance.hpp"
#include "report.hpp"

#include "msp/errors.hpp"
#include "msp/parallel.hpp"
#include "msp/stable_math.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <iostream>

#ifndef MSP_VERSION
#define MSP_VERSION "0.0.0"
#endif

namespace msp::app {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Non-finite numbers have no JSON form; they are written as strings.
json jnum(double x) {
    if (std::isfinite(x)) return x;
    return format_number(x);
}

std::string utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Collects the files of one command and writes them with the manifest.
class Emitter {
public:
    Emitter(const RunConfig& cfg, std::string command)
        : cfg_(cfg), command_(std::move(command)), dir_(cfg.out_dir), start_(std::chrono::steady_clock::now()) {
        ensure_directory(dir_);
        manifest_ = {{"command", command_}, {"version", MSP_VERSION}, {"config", config_to_json(cfg)}};
        manifest_["started_utc"] = utc_now();
        manifest_["n_terms"] = cfg.n_terms;
        manifest_["warnings"] = json::array();
        manifest_["constants"] = json::object();
    }

    void file(const std::string& name, std::string_view content) {
        write_file(dir_ / name, content);
        files_.push_back(name);
    }

    void svg(const std::string& name, std::string_view title, std::string_view x, std::string_view y,
             const std::vector<SvgSeries>& series) {
        if (cfg_.svg) file(name, svg_chart(title, x, y, series));
    }

    json& manifest() { return manifest_; }

    void warnings(const std::vector<std::string>& w) {
        for (const auto& s : w) manifest_["warnings"].push_back(s);
    }

    void finish() {
        manifest_["wall_clock_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        manifest_["files"] = files_;
        const std::string name = command_ + ".manifest.json";
        write_file(dir_ / name, manifest_.dump(2) + "\n");
    }

private:
    const RunConfig& cfg_;
    std::string command_;
    fs::path dir_;
    std::chrono::steady_clock::time_point start_;
    json manifest_;
    std::vector<std::string> files_;
};

json c_alpha_at(const ProcessSpec& spec, double t) {
    const double a = spec.alpha(t);
    return {{"t", t}, {"alpha", a}, {"c_alpha", c_alpha(a)}};
}

}  // namespace

EstimationOptions estimation_options(const RunConfig& cfg) {
    EstimationOptions o;
    o.n_terms = cfg.n_terms;
    o.seed = cfg.seed;
    o.workers = cfg.workers;
    o.tail_compensation = cfg.tail_compensation;
    o.field.compensated_sum = cfg.compensated_sum;
    return o;
}

MomentsRun compute_moments(const ProcessSpec& spec, const RunConfig& cfg) {
    MomentsRun run;
    run.estimate = estimate_increment_moments(spec, cfg.moment_t, cfg.eta, cfg.eps, cfg.m_paths,
                                              estimation_options(cfg));
    run.theory = theoretical_scaling(spec, cfg.moment_t, cfg.eta);
    run.fit = fit_scaling(run.estimate);

    CsvTable table({"eps", "eta", "estimate", "stderr", "theory_estimate"});
    for (const auto& l : run.estimate.levels)
        table.add_row({l.eps, cfg.eta, l.estimate, l.std_error,
                       std::exp(run.theory.intercept) * std::pow(l.eps, run.theory.slope)});
    run.table = table.str();

    CsvTable fit({"slope", "slope_se", "intercept", "intercept_se", "theory_slope", "theory_intercept"});
    fit.add_row({run.fit.slope, run.fit.slope_se, run.fit.intercept, run.fit.intercept_se, run.theory.slope,
                 run.theory.intercept});
    run.fit_table = fit.str();
    return run;
}

int run_path(const RunConfig& cfg) {
    const ProcessSpec spec = make_process(cfg.process);
    Emitter out(cfg, "path");
    out.warnings(spec.warnings);

    const auto n = static_cast<std::size_t>(cfg.path_count);
    std::vector<PathSample> paths(n);
    FieldOptions fo;
    fo.compensated_sum = cfg.compensated_sum;
    parallel_for(n, cfg.workers, [&](std::size_t p) {
        const auto env = build_environment(spec, cfg.n_terms, cfg.seed, p);
        paths[p] = eval_diagonal_path(env, spec, cfg.grid, fo);
    });

    const bool several = n > 1;
    CsvTable table(several ? std::vector<std::string>{"path_id", "t", "y"} : std::vector<std::string>{"t", "y"});
    std::vector<SvgSeries> series;
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t k = 0; k < cfg.grid.size(); ++k) {
            const double y = paths[p].values[k];
            if (!std::isfinite(y)) throw NumericalError("path " + std::to_string(p) + ": non-finite value at t=" +
                                                        format_number(cfg.grid[k]));
            if (several)
                table.add_row({static_cast<double>(p), cfg.grid[k], y});
            else
                table.add_row({cfg.grid[k], y});
        }
        series.push_back({"path " + std::to_string(p), cfg.grid, paths[p].values});
    }
    out.file("path.csv", table.str());
    out.svg("path.svg", std::string(to_string(spec.kind)) + " path, alpha(t) = " + cfg.process.alpha, "t", "Y(t)",
            series);

    json ca = json::array();
    for (double t : {cfg.grid.front(), cfg.grid[cfg.grid.size() / 2], cfg.grid.back()}) ca.push_back(c_alpha_at(spec, t));
    out.manifest()["constants"] = {{"c", spec.c}, {"d", spec.d}, {"c_alpha", ca}};
    out.manifest()["drop_counts"] = json::object();
    out.finish();
    return kOk;
}

int run_moments(const RunConfig& cfg) {
    const ProcessSpec spec = make_process(cfg.process);
    Emitter out(cfg, "moments");
    out.warnings(spec.warnings);

    const MomentsRun run = compute_moments(spec, cfg);
    out.file("moments.csv", run.table);
    out.file("moments_fit.csv", run.fit_table);

    std::vector<double> le, lm, lt;
    for (const auto& l : run.estimate.levels) {
        le.push_back(std::log2(l.eps));
        lm.push_back(std::log(l.estimate));
        lt.push_back(run.theory.intercept + run.theory.slope * std::log(l.eps));
    }
    out.svg("moments.svg", "log E|Y(t+eps) - Y(t)|^eta", "log2 eps", "log moment",
            {{"estimate", le, lm, true}, {"theory", le, lt, false}});

    json zeros = json::object();
    for (const auto& l : run.estimate.levels) zeros[format_number(l.eps)] = l.zero_count;
    out.manifest()["drop_counts"] = {{"zero_increments_kept", zeros}};
    out.manifest()["constants"] = {{"c_alpha", c_alpha_at(spec, cfg.moment_t)},
                                   {"h", spec.h(cfg.moment_t)},
                                   {"sigma", run.theory.sigma},
                                   {"prefactor", std::exp(run.theory.intercept)},
                                   {"theory_slope", run.theory.slope},
                                   {"theory_intercept", run.theory.intercept}};
    out.manifest()["fit"] = {{"weighted", run.fit.weighted}, {"chi2", run.fit.chi2}};
    out.finish();
    return kOk;
}

int run_holder(const RunConfig& cfg) {
    const ProcessSpec spec = make_process(cfg.process);
    Emitter out(cfg, "holder");
    out.warnings(spec.warnings);

    HolderOptions ho;
    ho.bootstrap = cfg.bootstrap;
    ho.level = cfg.level;
    const EstimationOptions eo = estimation_options(cfg);

    CsvTable table({"t", "estimate", "ci_lo", "ci_hi", "theory", "drop_count"});
    json drops = json::object();
    json targets = json::array();
    std::vector<double> ts, est, lo, hi, th;
    for (double t : cfg.holder_t) {
        const HolderEstimate h = holder_pathwise(spec, t, cfg.r_levels, cfg.m_paths, eo, cfg.alpha_holder, ho);
        table.add_row({t, h.estimate, h.ci_lo, h.ci_hi, h.target.value, static_cast<double>(h.drop_count)});
        drops[format_number(t)] = h.drop_count;
        json target = c_alpha_at(spec, t);
        target["theory"] = jnum(h.target.value);
        target["upper_bound"] = h.target.upper_bound;
        target["note"] = h.target.note;
        target["paths_used"] = h.paths_used;
        targets.push_back(target);
        ts.push_back(t);
        est.push_back(h.estimate);
        lo.push_back(h.ci_lo);
        hi.push_back(h.ci_hi);
        th.push_back(h.target.value);
    }
    out.file("holder.csv", table.str());
    out.svg("holder.svg", "pointwise Holder exponent", "t", "exponent",
            {{"estimate", ts, est, true}, {"ci_lo", ts, lo, true}, {"ci_hi", ts, hi, true}, {"theory", ts, th, false}});
    out.manifest()["drop_counts"] = {{"zero_increments_dropped", drops}};
    out.manifest()["constants"] = {{"targets", targets}};
    out.finish();
    return kOk;
}

int run_verify(const RunConfig& cfg, const std::string& msp_binary, bool verbose) {
    Emitter out(cfg, "verify");

    AcceptanceSettings s;
    s.quick = cfg.profile == "quick";
    s.checks = cfg.checks;
    s.workers = cfg.workers;
    s.seed = cfg.verify_seed;
    s.c_alpha_multiplier = cfg.fault_c_alpha;
    s.quadrature = cfg.fault_quadrature;
    s.msp_binary = msp_binary;
    s.scratch = fs::path(cfg.out_dir) / "verify_scratch";

    const auto results = run_acceptance(s, [&](const CheckResult& r) {
        if (verbose) std::cout << format_check(r) << std::endl;
    });

    CsvTable table({"id", "name", "passed", "measured", "threshold", "seconds"});
    std::string text;
    int failed = 0;
    json failures = json::array();
    for (const auto& r : results) {
        table.add_cells({std::to_string(r.id), "\"" + r.name + "\"", r.passed ? "1" : "0", format_number(r.measured),
                         format_number(r.threshold), format_number(r.seconds)});
        text += format_check(r) + "\n";
        if (!r.passed) {
            ++failed;
            failures.push_back({{"id", r.id}, {"name", r.name}, {"detail", r.detail}});
        }
    }
    text += std::to_string(results.size() - static_cast<std::size_t>(failed)) + " of " +
            std::to_string(results.size()) + " checks passed\n";
    out.file("verify.csv", table.str());
    out.file("verify.txt", text);
    out.manifest()["failures"] = failures;
    out.manifest()["profile"] = cfg.profile;
    out.finish();

    if (failed) {
        for (const auto& f : failures)
            std::cerr << "msp: check " << f["id"].get<int>() << " failed: " << f["name"].get<std::string>() << "\n";
        return kAcceptanceFailure;
    }
    return kOk;
}

}  // namespace msp::app
