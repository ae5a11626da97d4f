#include "run_config.hpp"

#include "msp/errors.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace msp::app {
namespace {

using nlohmann::json;

// Reads the members of one JSON object, remembering which keys were used so
// that leftovers can be reported as unknown.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    [[nodiscard]] const json* find(const std::string& key) {
        used_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() || it->is_null() ? nullptr : &*it;
    }

    [[nodiscard]] std::string field(const std::string& key) const { return path_ + "." + key; }

    double number(const std::string& key, double fallback) {
        const json* v = find(key);
        if (!v) return fallback;
        if (!v->is_number()) throw ConfigError(field(key) + ": expected a number");
        const double x = v->get<double>();
        if (!std::isfinite(x)) throw ConfigError(field(key) + ": must be finite");
        return x;
    }

    long long integer(const std::string& key, long long fallback, long long lo, long long hi) {
        const json* v = find(key);
        if (!v) return fallback;
        if (!v->is_number_integer()) throw ConfigError(field(key) + ": expected an integer");
        const long long x = v->get<long long>();
        if (x < lo || x > hi)
            throw ConfigError(field(key) + ": " + std::to_string(x) + " is outside [" + std::to_string(lo) + ", " +
                              std::to_string(hi) + "]");
        return x;
    }

    std::uint64_t seed(const std::string& key, std::uint64_t fallback) {
        const json* v = find(key);
        if (!v) return fallback;
        if (!v->is_number_unsigned()) throw ConfigError(field(key) + ": expected a non-negative integer");
        return v->get<std::uint64_t>();
    }

    bool boolean(const std::string& key, bool fallback) {
        const json* v = find(key);
        if (!v) return fallback;
        if (!v->is_boolean()) throw ConfigError(field(key) + ": expected true or false");
        return v->get<bool>();
    }

    // Model functions may be given as expression strings or plain numbers.
    std::string expression(const std::string& key, const std::string& fallback) {
        const json* v = find(key);
        if (!v) return fallback;
        if (v->is_string()) return v->get<std::string>();
        if (v->is_number()) return v->dump();
        throw ConfigError(field(key) + ": expected an expression string or a number");
    }

    std::string text(const std::string& key, const std::string& fallback) {
        const json* v = find(key);
        if (!v) return fallback;
        if (!v->is_string()) throw ConfigError(field(key) + ": expected a string");
        return v->get<std::string>();
    }

    void finish() const {
        for (const auto& [key, value] : j_.items())
            if (!used_.contains(key)) throw ConfigError(path_ + ": unknown key '" + key + "'");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

std::vector<double> number_list(const json& v, const std::string& field) {
    if (!v.is_array()) throw ConfigError(field + ": expected a list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) throw ConfigError(field + "[" + std::to_string(i) + "]: expected a number");
        out.push_back(v[i].get<double>());
        if (!std::isfinite(out.back())) throw ConfigError(field + "[" + std::to_string(i) + "]: must be finite");
    }
    return out;
}

// A list of values or {start_exp, stop_exp, base}.
std::vector<double> levels(const json& v, const std::string& field) {
    if (v.is_array()) return number_list(v, field);
    Section s(v, field);
    const auto a = static_cast<int>(s.integer("start_exp", -4, -60, 60));
    const auto b = static_cast<int>(s.integer("stop_exp", -10, -60, 60));
    const double base = s.number("base", 2.0);
    s.finish();
    if (!(base > 1.0)) throw ConfigError(field + ".base: must exceed 1");
    return log_spaced(a, b, base);
}

std::vector<double> grid_from(const json& v, const std::string& field) {
    if (v.is_array()) {
        auto g = number_list(v, field);
        if (g.empty()) throw ConfigError(field + ": empty grid");
        for (std::size_t i = 1; i < g.size(); ++i)
            if (!(g[i] > g[i - 1])) throw ConfigError(field + ": must be strictly increasing");
        return g;
    }
    Section s(v, field);
    const double a = s.number("start", 0.0);
    const double b = s.number("stop", 1.0);
    const auto n = static_cast<int>(s.integer("count", 101, 1, 10'000'000));
    s.finish();
    if (n == 1) return {a};
    if (!(b > a)) throw ConfigError(field + ": stop must exceed start");
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) g[static_cast<std::size_t>(k)] = k == n - 1 ? b : a + (b - a) * k / (n - 1);
    return g;
}

void within_domain(double t, const Interval& dom, const std::string& field) {
    if (!dom.contains(t))
        throw ConfigError(field + ": " + json(t).dump() + " is outside the domain [" + json(dom.lo).dump() + ", " +
                          json(dom.hi).dump() + "]");
}

void parse_process(const json& j, RunConfig& cfg) {
    Section s(j, "process");
    ProcessInputs& p = cfg.process;
    p.kind = [&] {
        try {
            return process_kind_from_string(s.text("kind", "levy"));
        } catch (const ConfigError& e) {
            throw ConfigError(s.field("kind") + ": " + e.what());
        }
    }();
    p.alpha = s.expression("alpha", p.alpha);
    p.b = s.expression("b", p.b);
    if (s.find("hurst")) p.hurst = s.expression("hurst", "");
    if (const json* d = s.find("domain")) {
        auto v = number_list(*d, s.field("domain"));
        if (v.size() != 2) throw ConfigError(s.field("domain") + ": expected [lo, hi]");
        p.domain = {v[0], v[1]};
    }
    p.c = s.number("c", 0.0);
    p.d = s.number("d", 0.0);
    if (const json* l = s.find("lfsm")) {
        Section ls(*l, s.field("lfsm"));
        p.lfsm.b_plus = ls.number("b_plus", 1.0);
        p.lfsm.b_minus = ls.number("b_minus", 1.0);
        ls.finish();
    }
    s.finish();
}

QuadratureConfig parse_quadrature(const json& j, const std::string& field) {
    Section s(j, field);
    QuadratureConfig q;
    q.abs_tol = s.number("abs_tol", q.abs_tol);
    q.rel_tol = s.number("rel_tol", q.rel_tol);
    q.max_subdivisions = static_cast<int>(s.integer("max_subdivisions", q.max_subdivisions, 1, 1'000'000));
    q.half_periods = static_cast<int>(s.integer("half_periods", q.half_periods, 1, 1'000'000));
    s.finish();
    try {
        q.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(field + ": " + e.what());
    }
    return q;
}

}  // namespace

std::vector<double> log_spaced(int start_exp, int stop_exp, double base) {
    std::vector<double> out;
    const int step = stop_exp >= start_exp ? 1 : -1;
    for (int e = start_exp;; e += step) {
        out.push_back(std::pow(base, e));
        if (e == stop_exp) break;
    }
    return out;
}

RunConfig parse_config(const json& input) {
    const json& doc = input.contains("config") && input.contains("version") ? input.at("config") : input;
    RunConfig cfg;
    Section top(doc, "config");

    if (const json* j = top.find("process")) parse_process(*j, cfg);

    if (const json* j = top.find("simulation")) {
        Section s(*j, "simulation");
        cfg.n_terms = static_cast<std::size_t>(s.integer("n_terms", static_cast<long long>(cfg.n_terms), 1, 100'000'000));
        cfg.m_paths = static_cast<int>(s.integer("m_paths", cfg.m_paths, 2, 100'000'000));
        cfg.seed = s.seed("seed", cfg.seed);
        cfg.workers = static_cast<int>(s.integer("workers", cfg.workers, 1, 1024));
        cfg.tail_compensation = s.boolean("tail_compensation", cfg.tail_compensation);
        cfg.compensated_sum = s.boolean("compensated_sum", cfg.compensated_sum);
        s.finish();
    }

    if (const json* j = top.find("path")) {
        Section s(*j, "path");
        if (const json* g = s.find("grid")) cfg.grid_spec = *g;
        cfg.path_count = static_cast<int>(s.integer("paths", cfg.path_count, 1, 1'000'000));
        s.finish();
    }

    if (const json* j = top.find("moments")) {
        Section s(*j, "moments");
        cfg.moment_t = s.number("t", cfg.moment_t);
        cfg.eta = s.number("eta", cfg.eta);
        if (const json* e = s.find("eps")) cfg.eps_spec = *e;
        s.finish();
    }

    if (const json* j = top.find("holder")) {
        Section s(*j, "holder");
        if (const json* t = s.find("t")) {
            if (t->is_number())
                cfg.holder_t = {t->get<double>()};
            else
                cfg.holder_t = number_list(*t, "holder.t");
        }
        if (const json* r = s.find("r_levels")) cfg.r_spec = *r;
        if (s.find("alpha_holder")) cfg.alpha_holder = s.number("alpha_holder", 0.0);
        cfg.bootstrap = static_cast<int>(s.integer("bootstrap", cfg.bootstrap, 1, 1'000'000));
        cfg.level = s.number("level", cfg.level);
        s.finish();
    }

    if (const json* j = top.find("verify")) {
        Section s(*j, "verify");
        cfg.profile = s.text("profile", cfg.profile);
        cfg.verify_seed = s.seed("seed", cfg.verify_seed);
        if (const json* c = s.find("checks")) {
            for (double x : number_list(*c, "verify.checks")) {
                if (x != std::floor(x) || x < 1 || x > 11)
                    throw ConfigError("verify.checks: " + json(x).dump() + " is not a criterion number 1..11");
                cfg.checks.push_back(static_cast<int>(x));
            }
        }
        if (const json* f = s.find("faults")) {
            Section fs(*f, "verify.faults");
            cfg.fault_c_alpha = fs.number("c_alpha_multiplier", 1.0);
            if (const json* q = fs.find("quadrature")) cfg.fault_quadrature = parse_quadrature(*q, "verify.faults.quadrature");
            fs.finish();
        }
        s.finish();
    }

    if (const json* j = top.find("output")) {
        Section s(*j, "output");
        cfg.out_dir = s.text("dir", cfg.out_dir);
        cfg.svg = s.boolean("svg", cfg.svg);
        s.finish();
    }
    top.finish();

    // Value checks that do not need the process.
    cfg.grid = grid_from(cfg.grid_spec, "path.grid");
    cfg.eps = levels(cfg.eps_spec, "moments.eps");
    cfg.r_levels = levels(cfg.r_spec, "holder.r_levels");
    if (cfg.eps.empty()) throw ConfigError("moments.eps: empty list");
    for (double e : cfg.eps)
        if (!(e > 0.0)) throw ConfigError("moments.eps: values must be positive");
    if (!(cfg.eta > 0.0)) throw ConfigError("moments.eta: must be positive");
    if (cfg.holder_t.empty()) throw ConfigError("holder.t: empty list");
    if (!(cfg.level > 0.0 && cfg.level < 1.0)) throw ConfigError("holder.level: must lie in (0, 1)");
    if (cfg.profile != "default" && cfg.profile != "quick")
        throw ConfigError("verify.profile: expected 'default' or 'quick', got '" + cfg.profile + "'");
    if (!(cfg.fault_c_alpha > 0.0)) throw ConfigError("verify.faults.c_alpha_multiplier: must be positive");
    if (cfg.out_dir.empty()) throw ConfigError("output.dir: empty path");

    for (double t : cfg.grid) within_domain(t, cfg.process.domain, "path.grid");
    within_domain(cfg.moment_t, cfg.process.domain, "moments.t");
    for (double t : cfg.holder_t) within_domain(t, cfg.process.domain, "holder.t");
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    json doc;
    try {
        doc = json::parse(buf.str());
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": invalid JSON (" + e.what() + ")");
    }
    return parse_config(doc);
}

json config_to_json(const RunConfig& cfg) {
    const ProcessInputs& p = cfg.process;
    json process = {{"kind", std::string(to_string(p.kind))},
                    {"alpha", p.alpha},
                    {"b", p.b},
                    {"domain", {p.domain.lo, p.domain.hi}},
                    {"c", p.c},
                    {"d", p.d},
                    {"lfsm", {{"b_plus", p.lfsm.b_plus}, {"b_minus", p.lfsm.b_minus}}}};
    if (p.hurst) process["hurst"] = *p.hurst;

    json holder = {{"t", cfg.holder_t},
                   {"r_levels", cfg.r_spec},
                   {"bootstrap", cfg.bootstrap},
                   {"level", cfg.level}};
    if (cfg.alpha_holder) holder["alpha_holder"] = *cfg.alpha_holder;

    json faults = {{"c_alpha_multiplier", cfg.fault_c_alpha}};
    if (cfg.fault_quadrature) {
        const QuadratureConfig& q = *cfg.fault_quadrature;
        faults["quadrature"] = {{"abs_tol", q.abs_tol},
                                {"rel_tol", q.rel_tol},
                                {"max_subdivisions", q.max_subdivisions},
                                {"half_periods", q.half_periods}};
    }

    return {{"process", process},
            {"simulation",
             {{"n_terms", cfg.n_terms},
              {"m_paths", cfg.m_paths},
              {"seed", cfg.seed},
              {"workers", cfg.workers},
              {"tail_compensation", cfg.tail_compensation},
              {"compensated_sum", cfg.compensated_sum}}},
            {"path", {{"grid", cfg.grid_spec}, {"paths", cfg.path_count}}},
            {"moments", {{"t", cfg.moment_t}, {"eta", cfg.eta}, {"eps", cfg.eps_spec}}},
            {"holder", holder},
            {"verify",
             {{"profile", cfg.profile}, {"seed", cfg.verify_seed}, {"checks", cfg.checks}, {"faults", faults}}},
            {"output", {{"dir", cfg.out_dir}, {"svg", cfg.svg}}}};
}

}  // namespace msp::app
