#include "doctest.h"

#include "msp/errors.hpp"
#include "msp/fkl_engine.hpp"
#include "msp/stable_math.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

using namespace msp;

namespace {

ProcessSpec levy_const(const char* alpha) {
    ProcessInputs in;
    in.alpha = alpha;
    return make_process(in);
}

ProcessSpec lmmm_spec() {
    ProcessInputs in;
    in.kind = ProcessKind::Lmmm;
    in.alpha = "1.7+0.2*sin(2*pi*t)";
    in.hurst = "0.7+0.1*t";
    return make_process(in);
}

// Plain two-sample KS distance; the library version is tested separately.
double ks_distance(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
    }
    return d;
}

}  // namespace

TEST_CASE("environment construction") {
    const ProcessSpec spec = levy_const("1.5");
    SUBCASE("first arrival is unit exponential, signs are fair") {
        const int m = 100'000;
        double g = 0.0;
        double s = 0.0;
        for (int k = 0; k < m; ++k) {
            const PoissonEnvironment env = build_environment(spec, 1, 3, static_cast<std::uint64_t>(k));
            g += env.gamma[0];
            s += env.signs[0];
        }
        CHECK(g / m == doctest::Approx(1.0).epsilon(0.01));
        CHECK(std::fabs(s / m) <= 3.0 / std::sqrt(static_cast<double>(m)));
    }
    SUBCASE("E[Gamma_i] = i") {
        double g = 0.0;
        for (int k = 0; k < 2000; ++k) g += build_environment(spec, 100, 4, static_cast<std::uint64_t>(k)).gamma[99];
        CHECK(g / 2000.0 == doctest::Approx(100.0).epsilon(0.01));
    }
    SUBCASE("reproducible, increasing, coupled") {
        const PoissonEnvironment a = build_environment(spec, 500, 11, 7);
        const PoissonEnvironment b = build_environment(spec, 500, 11, 7);
        const PoissonEnvironment c = build_environment(spec, 1000, 11, 7);
        CHECK(a.gamma == b.gamma);
        CHECK(a.points == b.points);
        CHECK(a.signs == b.signs);
        CHECK(a.log_weight == b.log_weight);
        CHECK(a.gamma[0] > 0.0);
        for (std::size_t i = 1; i < a.size(); ++i) CHECK(a.gamma[i] > a.gamma[i - 1]);
        CHECK(std::equal(a.gamma.begin(), a.gamma.end(), c.gamma.begin()));
        CHECK(std::equal(a.points.begin(), a.points.end(), c.points.begin()));
        CHECK(std::equal(a.signs.begin(), a.signs.end(), c.signs.begin()));
        CHECK(build_environment(spec, 500, 11, 8).gamma != a.gamma);
    }
    CHECK_THROWS_AS((void)build_environment(spec, 0, 1, 1), ConfigError);
}

TEST_CASE("field basics") {
    const ProcessSpec spec = levy_const("1.5+0.3*sin(2*pi*t)");
    PoissonEnvironment env = build_environment(spec, 2000, 5, 1);
    CHECK(eval_field(env, spec, 0.0, 0.3) == 0.0);

    const std::vector<double> grid{0.1, 0.25, 0.5, 0.9};
    const PathSample y = eval_diagonal_path(env, spec, grid);
    CHECK(y.values.size() == 4);
    const std::vector<double> one{0.25};
    CHECK(eval_diagonal_path(env, spec, one).values[0] == eval_field(env, spec, 0.25, 0.25));
    CHECK(y.values[1] == eval_field(env, spec, 0.25, 0.25));

    SUBCASE("flipping every sign negates the field") {
        PoissonEnvironment flipped = env;
        for (auto& s : flipped.signs) s = -s;
        const PathSample z = eval_diagonal_path(flipped, spec, grid);
        for (std::size_t k = 0; k < grid.size(); ++k) CHECK(z.values[k] == -y.values[k]);
    }
    SUBCASE("compensated summation stays close") {
        FieldOptions opts;
        opts.compensated_sum = true;
        CHECK(eval_field(env, spec, 0.7, 0.7, opts) == doctest::Approx(eval_field(env, spec, 0.7, 0.7)).epsilon(1e-12));
    }
    SUBCASE("the C_alpha hook rescales the field") {
        FieldOptions opts;
        opts.c_alpha_multiplier = 4.0;
        const double a = spec.alpha(0.6);
        CHECK(eval_field(env, spec, 0.6, 0.6, opts) ==
              doctest::Approx(std::pow(4.0, 1.0 / a) * eval_field(env, spec, 0.6, 0.6)).epsilon(1e-13));
    }
    const std::vector<double> bad{0.5, 0.5};
    CHECK_THROWS_AS((void)eval_diagonal_path(env, spec, bad), ConfigError);
}

TEST_CASE("constant-alpha Levy paths move only at covered points") {
    const ProcessSpec spec = levy_const("1.3");
    const PoissonEnvironment env = build_environment(spec, 300, 21, 0);
    std::vector<double> grid(400);
    for (std::size_t k = 0; k < grid.size(); ++k) grid[k] = (static_cast<double>(k) + 0.5) / 400.0;
    const PathSample y = eval_diagonal_path(env, spec, grid);
    const double amp = field_amplitude(spec, 0.5);
    int flat = 0;
    for (std::size_t k = 1; k < grid.size(); ++k) {
        double jump = 0.0;
        bool covered = false;
        for (std::size_t i = 0; i < env.size(); ++i) {
            if (env.points[i] > grid[k - 1] && env.points[i] <= grid[k]) {
                covered = true;
                jump += env.signs[i] * std::pow(env.gamma[i], -1.0 / 1.3);
            }
        }
        const double dy = y.values[k] - y.values[k - 1];
        if (!covered) {
            CHECK(dy == 0.0);
            ++flat;
        } else {
            CHECK(dy == doctest::Approx(amp * jump).epsilon(1e-9).scale(1.0));
        }
    }
    CHECK(flat > 50);
}

TEST_CASE("X(1) matches the CMS law at constant alpha") {
    for (double alpha : {0.8, 1.8}) {
        const ProcessSpec spec = levy_const(alpha == 0.8 ? "0.8" : "1.8");
        const int m = 3000;
        std::vector<double> x(m), ref(m);
        const FieldPoint p{1.0, 1.0};
        for (int k = 0; k < m; ++k) {
            const PoissonEnvironment env = build_environment(spec, 20'000, 77, static_cast<std::uint64_t>(k));
            x[static_cast<std::size_t>(k)] = eval_field(env, spec, 1.0, 1.0) + sample_remainder(env, spec, {&p, 1})[0];
        }
        Xoshiro256pp rng(78, 0, StreamId::Oracle);
        for (auto& r : ref) r = cms_sample(alpha, 1.0, rng);
        const double crit = 1.628 * std::sqrt(2.0 / m);
        INFO("alpha=", alpha);
        CHECK(ks_distance(x, ref) < crit);
    }
}

TEST_CASE("remainder covariance") {
    SUBCASE("Levy closed form") {
        const ProcessSpec spec = levy_const("1.5");
        const PoissonEnvironment env = build_environment(spec, 1000, 2, 3);
        const FieldPoint pts[] = {{0.2, 0.2}, {0.6, 0.6}};
        const auto cov = remainder_covariance(env, spec, pts);
        const double q = 1.0 / 1.5;
        const double base = std::pow(c_alpha(1.5), 2.0 * q) * std::pow(env.gamma.back(), 1.0 - 2.0 * q) / (2.0 * q - 1.0);
        CHECK(cov[0] == doctest::Approx(0.2 * base).epsilon(1e-13));
        CHECK(cov[1] == doctest::Approx(0.2 * base).epsilon(1e-13));
        CHECK(cov[3] == doctest::Approx(0.6 * base).epsilon(1e-13));
    }
    // The discarded terms N < i <= 2N of a coupled pair have conditional
    // covariance cov_N - cov_2N; compare with the empirical one.
    auto check_coupled = [](const ProcessSpec& spec, const std::vector<FieldPoint>& pts, int m, double tol) {
        const std::size_t k = pts.size();
        std::vector<double> predicted(k * k, 0.0), empirical(k * k, 0.0);
        for (int e = 0; e < m; ++e) {
            const auto idx = static_cast<std::uint64_t>(e);
            const PoissonEnvironment small = build_environment(spec, 400, 31, idx);
            const PoissonEnvironment big = build_environment(spec, 800, 31, idx);
            const auto ys = eval_field_points(small, spec, pts);
            const auto yb = eval_field_points(big, spec, pts);
            const auto cs = remainder_covariance(small, spec, pts);
            const auto cb = remainder_covariance(big, spec, pts);
            for (std::size_t a = 0; a < k; ++a) {
                for (std::size_t b = 0; b < k; ++b) {
                    predicted[a * k + b] += (cs[a * k + b] - cb[a * k + b]) / m;
                    empirical[a * k + b] += (yb[a] - ys[a]) * (yb[b] - ys[b]) / m;
                }
            }
        }
        for (std::size_t a = 0; a < k * k; ++a) {
            INFO("entry ", a, " predicted=", predicted[a], " empirical=", empirical[a]);
            CHECK(empirical[a] == doctest::Approx(predicted[a]).epsilon(tol));
        }
    };
    SUBCASE("Levy coupled check") {
        check_coupled(levy_const("1.5+0.3*sin(2*pi*t)"), {{0.3, 0.3}, {0.35, 0.35}}, 4000, 0.1);
    }
    SUBCASE("lmmm coupled check") { check_coupled(lmmm_spec(), {{0.3, 0.3}, {0.5, 0.5}}, 4000, 0.2); }
    SUBCASE("draws are reproducible") {
        const ProcessSpec spec = lmmm_spec();
        const PoissonEnvironment env = build_environment(spec, 300, 8, 1);
        const FieldPoint pts[] = {{0.3, 0.3}, {0.4, 0.4}, {0.5, 0.5}};
        CHECK(sample_remainder(env, spec, pts) == sample_remainder(env, spec, pts));
    }
}

TEST_CASE("truncation diagnostic") {
    CHECK(power_tail_sum(1000.0, 2.0) == doctest::Approx(1.0 / 1000.0 - 0.5e-6 + 1.0 / 6.0 * 1e-9).epsilon(1e-9));
    double prev = HUGE_VAL;
    for (double n : {1e2, 1e3, 1e4, 1e5}) {
        const double v = power_tail_sum(n, 2.0 / 1.5);
        CHECK(v < prev);
        prev = v;
    }
    CHECK(power_tail_sum(1e4, 2.0 / 1.95) > power_tail_sum(1e4, 2.0 / 1.2));

    const ProcessSpec spec = levy_const("1.5");
    const std::vector<double> grid{0.2, 0.5, 1.0};
    const TruncationReport rep = truncation_diagnostic(spec, grid, 10'000, 5, 5);
    INFO("discrepancy=", rep.max_discrepancy, " proxy=", rep.proxy);
    CHECK(rep.max_discrepancy > 0.0);
    CHECK(rep.max_discrepancy < 10.0 * rep.proxy);
    CHECK_THROWS_AS((void)truncation_diagnostic(spec, grid, 100, 5, 0), ConfigError);
}
