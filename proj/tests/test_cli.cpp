#include "doctest.h"

#include "commands.hpp"
#include "report.hpp"
#include "run_config.hpp"

#include "msp/errors.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace msp;
using namespace msp::app;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::path(MSP_TEST_SCRATCH) / "cli";

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::stringstream b;
    b << in.rdbuf();
    return b.str();
}

// Writes the config, runs `msp <cmd> --config <file> --out <dir> <extra>`, returns the exit status.
int run_msp(const std::string& name, const std::string& cmd, const json& config, const std::string& extra = "") {
    const fs::path dir = kRoot / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    const fs::path cfg = dir / "config.json";
    std::ofstream(cfg) << config.dump(2);
    const std::string line = std::string(MSP_BINARY) + " " + cmd + " --config " + cfg.string() + " --out " +
                             (dir / "out").string() + " " + extra + " > " + (dir / "log.txt").string() + " 2>&1";
    const int status = std::system(line.c_str());
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

fs::path out(const std::string& name) { return kRoot / name / "out"; }

}  // namespace

TEST_CASE("number formatting") {
    CHECK(format_number(0.1) == "0.10000000000000001");
    CHECK(format_number(1.0) == "1");
    CHECK(format_number(-0.125) == "-0.125");
    CHECK(format_number(1e22) == "1e+22");
    CHECK(format_number(1.0 / 3.0) == "0.33333333333333331");
    CHECK(format_number(std::nan("")) == "nan");

    CsvTable t({"a", "b"});
    t.add_row({1.0, 0.5});
    CHECK(t.str() == "a,b\n1,0.5\n");
    CHECK_THROWS_AS(t.add_row({1.0}), Error);
}

TEST_CASE("config parsing") {
    const RunConfig d = parse_config(json::object());
    CHECK(d.eps.size() == 7);
    CHECK(d.eps.front() == 0.0625);
    CHECK(d.eps.back() == std::ldexp(1.0, -10));
    CHECK(d.grid.size() == 101);
    CHECK(d.grid.back() == 1.0);

    CHECK(log_spaced(-1, -3, 2.0) == std::vector<double>{0.5, 0.25, 0.125});
    CHECK(log_spaced(2, 2, 10.0) == std::vector<double>{100.0});

    const RunConfig c = parse_config(json::parse(R"({
        "process": {"kind": "lmmm", "alpha": 1.6, "hurst": "0.7+0.1*t", "domain": [-1, 2]},
        "simulation": {"seed": 18446744073709551615, "workers": 3},
        "holder": {"t": 0.25, "r_levels": [0.5, 0.25]},
        "moments": {"eps": {"start_exp": -2, "stop_exp": -4, "base": 3}}})"));
    CHECK(c.process.kind == ProcessKind::Lmmm);
    CHECK(c.process.alpha == "1.6");
    CHECK(c.seed == 18446744073709551615ULL);
    CHECK(c.holder_t == std::vector<double>{0.25});
    CHECK(c.eps[2] == doctest::Approx(1.0 / 81));

    // Round trip through the normalized echo.
    const RunConfig back = parse_config(config_to_json(c));
    CHECK(config_to_json(back) == config_to_json(c));
    // A manifest is read through its config member.
    CHECK(config_to_json(parse_config(json{{"version", "x"}, {"config", config_to_json(c)}})) == config_to_json(c));

    auto message = [](const char* text) {
        try {
            (void)parse_config(json::parse(text));
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    CHECK(message(R"({"simulation": {"n_term": 5}})") == "simulation: unknown key 'n_term'");
    CHECK(message(R"({"simulation": {"n_terms": 0}})").starts_with("simulation.n_terms:"));
    CHECK(message(R"({"simulation": {"seed": -1}})").starts_with("simulation.seed:"));
    CHECK(message(R"({"moments": {"eps": []}})") == "moments.eps: empty list");
    CHECK(message(R"({"moments": {"eta": "x"}})") == "moments.eta: expected a number");
    CHECK(message(R"({"moments": {"t": 1.5}})").starts_with("moments.t: 1.5 is outside the domain"));
    CHECK(message(R"({"process": {"kind": "fbm"}})").starts_with("process.kind:"));
    CHECK(message(R"({"path": {"grid": [0.5, 0.5]}})") == "path.grid: must be strictly increasing");
    CHECK(message(R"({"verify": {"checks": [12]}})").starts_with("verify.checks:"));
    CHECK(message(R"({"verify": {"profile": "full"}})").starts_with("verify.profile:"));
    CHECK(message(R"([1, 2])") == "config: expected an object");
}

TEST_CASE("msp path") {
    REQUIRE(run_msp("p0", "path", {{"path", {{"grid", {0.0}}}}}) == 0);
    CHECK(slurp(out("p0") / "path.csv") == "t,y\n0,0\n");
    const json m = json::parse(slurp(out("p0") / "path.manifest.json"));
    CHECK(m["files"] == json{"path.csv"});
    CHECK(m["config"]["process"]["kind"] == "levy");

    const json two = {{"simulation", {{"seed", 7}, {"n_terms", 2000}}},
                      {"path", {{"grid", {{"start", 0.0}, {"stop", 1.0}, {"count", 11}}}, {"paths", 2}}}};
    REQUIRE(run_msp("p1", "path", two) == 0);
    REQUIRE(run_msp("p2", "path", two, "--workers 2 --svg") == 0);
    const std::string a = slurp(out("p1") / "path.csv");
    CHECK(a == slurp(out("p2") / "path.csv"));
    CHECK(a.starts_with("path_id,t,y\n"));
    CHECK(fs::exists(out("p2") / "path.svg"));
    CHECK_FALSE(fs::exists(out("p1") / "path.svg"));

    // Row k of path 0 and path 1 differ away from t = 0.
    std::istringstream rows(a);
    std::string line;
    std::vector<std::string> ys;
    while (std::getline(rows, line))
        if (line.find(",0.5,") != std::string::npos) ys.push_back(line.substr(line.rfind(',') + 1));
    REQUIRE(ys.size() == 2);
    CHECK(ys[0] != ys[1]);

    REQUIRE(run_msp("p3", "path", two, "--seed 8") == 0);
    CHECK(slurp(out("p3") / "path.csv") != a);
}

TEST_CASE("msp path warns on a negative lmmm exponent") {
    const json cfg = {{"process", {{"kind", "lmmm"}, {"alpha", "1.5"}, {"hurst", "0.4"}}},
                      {"simulation", {{"n_terms", 1000}}},
                      {"path", {{"grid", {0.25, 0.5}}}}};
    REQUIRE(run_msp("w", "path", cfg) == 0);
    const json m = json::parse(slurp(out("w") / "path.manifest.json"));
    REQUIRE(m["warnings"].size() == 1);
    CHECK(m["warnings"][0].get<std::string>().starts_with("H - 1/alpha is negative"));
}

TEST_CASE("msp moments and re-running from the manifest") {
    const json cfg = {{"simulation", {{"n_terms", 2000}, {"m_paths", 200}, {"seed", 11}}},
                      {"moments", {{"t", 0.3}, {"eps", {{"start_exp", -3}, {"stop_exp", -6}}}}}};
    REQUIRE(run_msp("m0", "moments", cfg) == 0);
    const std::string table = slurp(out("m0") / "moments.csv");
    CHECK(table.starts_with("eps,eta,estimate,stderr,theory_estimate\n0.125,0.5,"));
    const std::string fit = slurp(out("m0") / "moments_fit.csv");
    CHECK(fit.starts_with("slope,slope_se,intercept,intercept_se,theory_slope,theory_intercept\n"));
    CHECK(fit.find(",0.33333333333333331,") != std::string::npos);

    const json manifest = json::parse(slurp(out("m0") / "moments.manifest.json"));
    CHECK(manifest["constants"]["sigma"] == 1.0);
    REQUIRE(run_msp("m1", "moments", manifest, "--workers 4") == 0);
    CHECK(slurp(out("m1") / "moments.csv") == table);
    CHECK(slurp(out("m1") / "moments_fit.csv") == fit);

    CHECK(run_msp("m2", "moments", {{"moments", {{"eps", json::array()}}}}) == 2);
    CHECK(slurp(kRoot / "m2" / "log.txt").find("moments.eps") != std::string::npos);
    CHECK(run_msp("m3", "moments", {{"moments", {{"eps", {0.1, 0.05}}}}}) == 2);  // fewer than three levels
}

TEST_CASE("msp moments for lmmm uses sigma_lmmm") {
    const json cfg = {{"process", {{"kind", "lmmm"}, {"alpha", "1.6"}, {"hurst", "0.8"}}},
                      {"simulation", {{"n_terms", 1000}, {"m_paths", 20}}},
                      {"moments", {{"eps", {{"start_exp", -3}, {"stop_exp", -5}}}}}};
    REQUIRE(run_msp("ml", "moments", cfg) == 0);
    const json m = json::parse(slurp(out("ml") / "moments.manifest.json"));
    CHECK(m["constants"]["sigma"].get<double>() == doctest::Approx(sigma_lmmm(1.6, 0.8)).epsilon(1e-12));
}

TEST_CASE("msp holder theory column") {
    const json base = {{"simulation", {{"n_terms", 2000}, {"m_paths", 20}}},
                       {"holder", {{"t", 0.5}, {"r_levels", {{"start_exp", -2}, {"stop_exp", -6}}}, {"bootstrap", 99}}}};
    REQUIRE(run_msp("h0", "holder", base) == 0);
    std::string csv = slurp(out("h0") / "holder.csv");
    CHECK(csv.starts_with("t,estimate,ci_lo,ci_hi,theory,drop_count\n0.5,"));
    CHECK(csv.find(",0.66666666666666663,") != std::string::npos);

    json rough = base;
    rough["process"] = {{"alpha", "0.8+0.1*abs(t-0.5)^0.5"}};
    rough["holder"]["alpha_holder"] = 0.5;
    REQUIRE(run_msp("h1", "holder", rough) == 0);
    CHECK(slurp(out("h1") / "holder.csv").find(",0.5,") != std::string::npos);

    json lm = base;
    lm["process"] = {{"kind", "lmmm"}, {"alpha", "1.7"}, {"hurst", "0.7+0.1*t"}};
    lm["holder"]["t"] = 0.3;
    REQUIRE(run_msp("h2", "holder", lm) == 0);
    CHECK(slurp(out("h2") / "holder.csv").find(",0.72999999999999998,") != std::string::npos);
}

TEST_CASE("msp verify exit codes and fault hooks") {
    CHECK(run_msp("v0", "verify", {{"verify", {{"checks", {1, 9, 11}}}}}) == 0);
    CHECK(slurp(out("v0") / "verify.csv").starts_with("id,name,passed,measured,threshold,seconds\n1,"));
    CHECK(fs::exists(out("v0") / "verify.txt"));

    const json loose = {{"abs_tol", 0.5}, {"rel_tol", 0.5}, {"max_subdivisions", 1}, {"half_periods", 2}};
    CHECK(run_msp("v1", "verify", {{"verify", {{"checks", {1}}, {"faults", {{"quadrature", loose}}}}}}) == 4);
    CHECK(slurp(kRoot / "v1" / "log.txt").find("check 1 failed") != std::string::npos);

    CHECK(run_msp("v2", "verify", {{"verify", {{"profile", "quick"}, {"checks", {2}}, {"faults", {{"c_alpha_multiplier", 2.0}}}}}}) ==
          4);
    CHECK(slurp(kRoot / "v2" / "log.txt").find("check 2 failed") != std::string::npos);
}

TEST_CASE("msp command line errors") {
    CHECK(run_msp("e0", "path", {{"nope", 1}}) == 2);
    CHECK(run_msp("e1", "frobnicate", json::object()) == 2);
    CHECK(run_msp("e2", "path", json::object(), "--workers 0") == 2);
    CHECK(run_msp("e3", "path", {{"process", {{"alpha", "1.5+"}}}}) == 2);
    CHECK(slurp(kRoot / "e3" / "log.txt").find("alpha") != std::string::npos);
}
