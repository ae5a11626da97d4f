#include "doctest.h"

#include "msp/errors.hpp"
#include "msp/estimation.hpp"
#include "msp/stable_math.hpp"

#include <cmath>
#include <numbers>
#include <vector>

using namespace msp;

namespace {

ProcessSpec levy(const char* alpha) {
    ProcessInputs in;
    in.alpha = alpha;
    return make_process(in);
}

ProcessSpec lmmm(const char* alpha, const char* hurst) {
    ProcessInputs in;
    in.kind = ProcessKind::Lmmm;
    in.alpha = alpha;
    in.hurst = hurst;
    return make_process(in);
}

std::vector<double> dyadic(int lo, int hi) {
    std::vector<double> r;
    for (int k = lo; k <= hi; ++k) r.push_back(std::ldexp(1.0, -k));
    return r;
}

MomentEstimate synthetic(double c, double s, bool with_se) {
    MomentEstimate me;
    for (double e : dyadic(3, 9)) me.levels.push_back({e, c * std::pow(e, s), with_se ? 0.01 * c * std::pow(e, s) : 0.0, 0});
    return me;
}

}  // namespace

TEST_CASE("two-sample KS") {
    const std::vector<double> a{0.1, 0.4, 0.2, 0.9};
    CHECK(ks_two_sample(a, a).statistic == 0.0);
    std::vector<double> u(500), v(500);
    Xoshiro256pp rng(1, 0, StreamId::Oracle);
    for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] = rng.uniform();
        v[i] = rng.uniform() + 1.0;
    }
    const KsResult disjoint = ks_two_sample(u, v);
    CHECK(disjoint.statistic == 1.0);
    CHECK(disjoint.critical_5 == doctest::Approx(1.358 * std::sqrt(2.0 / 500.0)).epsilon(1e-3));
    CHECK(disjoint.critical_1 == doctest::Approx(1.628 * std::sqrt(2.0 / 500.0)).epsilon(1e-3));
    CHECK_THROWS_AS((void)ks_two_sample(a, std::vector<double>{}), ConfigError);

    SUBCASE("size under the null") {
        int below = 0;
        const int n = 20'000;
        std::vector<double> x(n), y(n);
        for (int rep = 0; rep < 50; ++rep) {
            Xoshiro256pp gx(100 + rep, 0, StreamId::Oracle);
            Xoshiro256pp gy(100 + rep, 1, StreamId::Oracle);
            for (int i = 0; i < n; ++i) {
                x[static_cast<std::size_t>(i)] = cms_sample(1.5, 1.0, gx);
                y[static_cast<std::size_t>(i)] = cms_sample(1.5, 1.0, gy);
            }
            const KsResult k = ks_two_sample(x, y);
            if (k.statistic < k.critical_5) ++below;
        }
        CHECK(below >= 45);
    }
}

TEST_CASE("fit_scaling") {
    SUBCASE("exact power law") {
        for (bool with_se : {true, false}) {
            const ScalingFit f = fit_scaling(synthetic(0.37, 0.61, with_se));
            CHECK(f.weighted == with_se);
            CHECK(std::fabs(f.slope - 0.61) < 1e-12);
            CHECK(std::fabs(f.intercept - std::log(0.37)) < 1e-12);
        }
    }
    SUBCASE("constant series") { CHECK(std::fabs(fit_scaling(synthetic(2.0, 0.0, true)).slope) < 1e-14); }
    SUBCASE("errors") {
        MomentEstimate me = synthetic(1.0, 0.5, true);
        me.levels[2].estimate = 0.0;
        try {
            (void)fit_scaling(me);
            FAIL("expected an error");
        } catch (const NumericalError& e) {
            CHECK(std::string(e.what()).find(std::to_string(me.levels[2].eps)) != std::string::npos);
        }
        me.levels.resize(2);
        CHECK_THROWS_AS((void)fit_scaling(me), ConfigError);
    }
}

TEST_CASE("theoretical_scaling") {
    CHECK(theoretical_scaling(levy("1.5"), 0.5, 0.5).slope == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(theoretical_scaling(levy("1"), 0.5, 0.5).intercept == doctest::Approx(std::log(std::sqrt(2.0))).epsilon(1e-9));
    const ScalingTheory th = theoretical_scaling(lmmm("1.6", "0.7"), 0.5, 0.5);
    CHECK(th.slope == doctest::Approx(0.35).epsilon(1e-15));
    CHECK(th.sigma == doctest::Approx(sigma_lmmm(1.6, 0.7)).epsilon(1e-14));
    CHECK(th.intercept == doctest::Approx(std::log(sas_abs_moment(1.6, th.sigma, 0.5))).epsilon(1e-12));

    ProcessInputs scaled;
    scaled.alpha = "1.5";
    scaled.b = "2";
    CHECK(theoretical_scaling(make_process(scaled), 0.5, 0.5).intercept ==
          doctest::Approx(theoretical_scaling(levy("1.5"), 0.5, 0.5).intercept + 0.5 * std::log(2.0)).epsilon(1e-13));
}

TEST_CASE("increment moments") {
    const ProcessSpec spec = levy("1.5");
    EstimationOptions opts;
    opts.n_terms = 5000;
    opts.seed = 9;
    const double eps = std::ldexp(1.0, -6);

    SUBCASE("matches the stable moment") {
        const double e[] = {eps};
        const MomentEstimate me = estimate_increment_moments(spec, 0.5, 0.5, e, 10'000, opts);
        const double exact = sas_abs_moment(1.5, std::pow(eps, 1.0 / 1.5), 0.5);
        INFO("estimate=", me.levels[0].estimate, " exact=", exact, " se=", me.levels[0].std_error);
        CHECK(std::fabs(me.levels[0].estimate - exact) < 3.0 * me.levels[0].std_error);
    }
    SUBCASE("zero step gives zero") {
        const double e[] = {0.0, eps};
        const MomentEstimate me = estimate_increment_moments(spec, 0.5, 0.5, e, 10, opts);
        CHECK(me.levels[0].estimate == 0.0);
        CHECK(me.levels[0].std_error == 0.0);
        CHECK(me.levels[1].estimate > 0.0);
    }
    SUBCASE("standard error follows 1/sqrt(M)") {
        // Quadrupling M halves the standard error.
        const double e[] = {eps};
        const double a = estimate_increment_moments(spec, 0.5, 0.5, e, 1000, opts).levels[0].std_error;
        const double b = estimate_increment_moments(spec, 0.5, 0.5, e, 4000, opts).levels[0].std_error;
        CHECK(a / b == doctest::Approx(2.0).epsilon(0.2));
    }
    SUBCASE("independent of the worker count") {
        const std::vector<double> e = dyadic(4, 6);
        EstimationOptions par = opts;
        par.workers = 4;
        const MomentEstimate x = estimate_increment_moments(spec, 0.3, 0.5, e, 200, opts);
        const MomentEstimate y = estimate_increment_moments(spec, 0.3, 0.5, e, 200, par);
        for (std::size_t k = 0; k < e.size(); ++k) {
            CHECK(x.levels[k].estimate == y.levels[k].estimate);
            CHECK(x.levels[k].std_error == y.levels[k].std_error);
        }
    }
    SUBCASE("invalid input") {
        const double e[] = {eps};
        CHECK_THROWS_AS((void)estimate_increment_moments(spec, 0.5, 1.5, e, 10, opts), ConfigError);
        CHECK_THROWS_AS((void)estimate_increment_moments(spec, 0.5, 0.0, e, 10, opts), ConfigError);
        const double far[] = {0.7};
        CHECK_THROWS_AS((void)estimate_increment_moments(spec, 0.5, 0.5, far, 10, opts), ConfigError);
        CHECK_THROWS_AS((void)estimate_increment_moments(spec, 0.5, 0.5, std::vector<double>{}, 10, opts), ConfigError);
    }
}

TEST_CASE("Hoelder estimation") {
    SUBCASE("injected power signal") {
        const double u = 0.4;
        const std::vector<double> r = dyadic(2, 10);
        const HolderEstimate h = holder_from_increments(
            [&](int, std::span<const double> rs) {
                std::vector<double> out;
                for (double s : rs) out.push_back(std::pow(std::fabs(u + s - u), 0.7) - std::pow(std::fabs(u - u), 0.7));
                return out;
            },
            u, r, 20, 1);
        CHECK(std::fabs(h.estimate - 0.7) < 1e-6);
        CHECK(std::fabs(h.ci_lo - 0.7) < 1e-6);
        CHECK(std::fabs(h.ci_hi - 0.7) < 1e-6);
        CHECK(h.drop_count == 0);
    }
    SUBCASE("zero increments are dropped and counted") {
        const std::vector<double> r = dyadic(2, 5);
        const HolderEstimate h = holder_from_increments(
            [](int p, std::span<const double> rs) {
                std::vector<double> out;
                for (double s : rs) out.push_back(std::pow(s, 0.5));
                if (p % 2 == 0) out[1] = 0.0;
                return out;
            },
            0.5, r, 10, 1);
        CHECK(h.drop_count == 5);
        CHECK(h.paths_used == 10);
        CHECK(h.estimate == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("level checks") {
        auto source = [](int, std::span<const double> rs) { return std::vector<double>(rs.begin(), rs.end()); };
        CHECK_THROWS_AS((void)holder_from_increments(source, 0.5, std::vector<double>{0.25, 0.1}, 5, 1), ConfigError);
        CHECK_THROWS_AS((void)holder_from_increments(source, 0.5, std::vector<double>{0.125, 0.25}, 5, 1), ConfigError);
        CHECK_THROWS_AS((void)holder_from_increments(source, 0.5, std::vector<double>{0.25}, 5, 1), ConfigError);
    }
    SUBCASE("targets") {
        CHECK(holder_target(levy("1.5"), 0.5).value == doctest::Approx(2.0 / 3.0));
        const HolderTarget rough = holder_target(levy("0.8+0.1*abs(t-0.5)^0.5"), 0.5, 0.5);
        CHECK(rough.value == doctest::Approx(0.5));
        CHECK(rough.upper_bound == doctest::Approx(1.25));
        CHECK(std::isnan(holder_target(levy("1.2+0.1*abs(t-0.5)^0.5"), 0.5, 0.5).value));
        CHECK(holder_target(levy("0.8+0.1*t"), 0.5).value == doctest::Approx(1.0));
        CHECK(holder_target(lmmm("1.6", "0.7+0.1*t"), 0.5).value == doctest::Approx(0.75));
        CHECK(std::isnan(holder_target(lmmm("1.2", "0.6"), 0.5).value));
    }
    SUBCASE("Levy paths at constant alpha") {
        EstimationOptions opts;
        opts.seed = 4;
        const std::vector<double> r = dyadic(2, 12);
        const HolderEstimate h = holder_pathwise(levy("1.5"), 0.5, r, 100, opts);
        INFO("estimate=", h.estimate, " ci=[", h.ci_lo, ", ", h.ci_hi, "]");
        CHECK(std::fabs(h.estimate - 2.0 / 3.0) < 0.1);
        CHECK(h.ci_lo <= h.estimate);
        CHECK(h.ci_hi >= h.estimate);
        CHECK(0.5 * (h.ci_hi - h.ci_lo) <= 0.1);
        opts.workers = 3;
        CHECK(holder_pathwise(levy("1.5"), 0.5, r, 100, opts).path_slopes == h.path_slopes);
    }
    SUBCASE("moment route") {
        ScalingFit fit;
        fit.slope = 0.3;
        fit.slope_se = 0.01;
        const HolderEstimate h = holder_from_moments(fit, 0.5, 0.5);
        CHECK(h.estimate == doctest::Approx(0.6));
        CHECK(h.ci_hi - h.ci_lo == doctest::Approx(2.0 * 1.959963984540054 * 0.02).epsilon(1e-9));
    }
}

TEST_CASE("small-ball probe") {
    EstimationOptions opts;
    opts.n_terms = 5000;
    opts.seed = 12;
    const std::vector<double> r = dyadic(4, 8);
    const std::vector<double> x{0.0, 0.05, 0.1, 0.2, 1e9};
    const SmallBallReport rep = small_ball_probe(levy("1.5"), 0.3, r, x, 2000, opts);
    for (const SmallBallRow& row : rep.rows) {
        if (row.x == 0.0) CHECK(row.probability == 0.0);
        if (row.x == 1e9) CHECK(row.probability == 1.0);
    }
    const auto [lo, hi] = std::minmax_element(rep.k_per_r.begin(), rep.k_per_r.end());
    INFO("K range ", *lo, " .. ", *hi);
    CHECK(std::isfinite(rep.k_max));
    CHECK(*hi <= 2.0 * *lo);
}

TEST_CASE("Levy increment characteristic function") {
    const ProcessSpec multi = levy("1.5+0.3*sin(2*pi*t)");
    const double r = std::ldexp(1.0, -6);
    CHECK(levy_increment_cf(multi, 0.3, r, 0.0) == 1.0);

    for (const char* a : {"0.6", "1", "1.5", "1.9"}) {
        const double alpha = std::stod(a);
        for (double v : {0.1, 0.7, 1.3, 3.0}) {
            INFO("alpha=", a, " v=", v);
            CHECK(std::fabs(levy_increment_cf(levy(a), 0.3, r, v) - sas_cf(alpha, 1.0, v)) < 1e-6);
        }
    }
    double prev = 1.0;
    for (int k = 0; k <= 25; ++k) {
        const double phi = levy_increment_cf(multi, 0.3, r, 5.0 * k / 25.0);
        CHECK(phi <= prev);
        CHECK(phi > 0.0);
        prev = phi;
    }
    CHECK_THROWS_AS((void)levy_increment_cf(lmmm("1.6", "0.7"), 0.3, r, 1.0), ConfigError);
    CHECK_THROWS_AS((void)levy_increment_cf(multi, 0.99, 0.02, 1.0), ConfigError);

    SUBCASE("empirical comparison") {
        EstimationOptions opts;
        opts.n_terms = 5000;
        const std::vector<double> v{0.0, 0.5, 1.0, 2.0};
        const EcfReport rep = ecf_compare(multi, 0.3, r, v, 2000, opts);
        CHECK(rep.gap[0] == 0.0);
        CHECK(rep.empirical[0] == 1.0);
        CHECK(rep.sup_gap < 3.0 / std::sqrt(2000.0));
        const EcfReport ctl = ecf_compare_closed_form(levy("1.5"), 0.3, r, v, 2000, opts);
        CHECK(ctl.sup_gap < 3.0 / std::sqrt(2000.0));
        CHECK_THROWS_AS((void)ecf_compare_closed_form(multi, 0.3, r, v, 10, opts), ConfigError);
    }
}

TEST_CASE("condition probes") {
    const ProcessSpec spec = levy("1.5+0.3*sin(2*pi*t)");
    Xoshiro256pp rng(3, 0, StreamId::Oracle);
    for (int k = 0; k < 10; ++k) {
        const double t = 0.05 + 0.8 * rng.uniform();
        const double r[] = {(1.0 - t) * rng.uniform_open()};
        CHECK(condition_probe(spec, Condition::C9, t, r)[0] == 1.0);
        CHECK(condition_probe(spec, Condition::Cu14, t, r)[0] == 1.0);
        CHECK(condition_probe(spec, Condition::Cu15, t, r)[0] == 0.0);
        CHECK(condition_probe(spec, Condition::C13, t, r)[0] == t);
    }
    CHECK_THROWS_AS((void)condition_from_string("C10"), ConfigError);
    CHECK(condition_from_string("Cu14") == Condition::Cu14);

    const std::vector<double> r{0.05, 0.01};
    SUBCASE("lmmm C9 is sigma^alpha") {
        const ProcessSpec m = lmmm("1.6", "0.8");
        const double target = std::pow(sigma_lmmm(1.6, 0.8), 1.6);
        for (double v : condition_probe(m, Condition::C9, 0.4, r)) CHECK(v == doctest::Approx(target).epsilon(1e-6));
    }
    SUBCASE("lmmm square integrals") {
        const ProcessSpec m = lmmm("1.6", "0.7+0.1*t");
        for (Condition c : {Condition::C11, Condition::C12, Condition::C13, Condition::Cu14, Condition::Cu15}) {
            for (double v : condition_probe(m, c, 0.4, r)) {
                INFO(to_string(c));
                CHECK(std::isfinite(v));
                CHECK(v >= 0.0);
            }
        }
        // H - 1/alpha = -1.7: the square integral diverges at the singular points.
        CHECK(std::isinf(condition_probe(lmmm("0.5", "0.3"), Condition::C13, 0.4, r)[0]));
    }
}
