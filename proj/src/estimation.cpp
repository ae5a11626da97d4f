#include "msp/estimation.hpp"

#include "msp/errors.hpp"
#include "msp/parallel.hpp"
#include "msp/stable_math.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace msp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_domain(const ProcessSpec& spec, double x, const char* what) {
    if (!spec.domain.contains(x))
        throw ConfigError(std::string(what) + " = " + std::to_string(x) + " lies outside the domain [" +
                          std::to_string(spec.domain.lo) + ", " + std::to_string(spec.domain.hi) + "]");
}

void require_paths(int m_paths, int least) {
    if (m_paths < least) throw ConfigError("m_paths must be at least " + std::to_string(least));
}

// Type-7 quantile of sorted data.
double quantile_sorted(std::span<const double> v, double p) {
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return quantile_sorted(v, 0.5);
}

// Increments at a single step r for m_paths environments numbered
// first_index, first_index + 1, ...
std::vector<double> increments_at(const ProcessSpec& spec, double t, double r, int m_paths,
                                  std::uint64_t first_index, const EstimationOptions& opts) {
    std::vector<double> out(static_cast<std::size_t>(m_paths));
    const double step[] = {r};
    parallel_for(out.size(), opts.workers, [&](std::size_t p) {
        const PoissonEnvironment env = build_environment(spec, opts.n_terms, opts.seed, first_index + p);
        out[p] = path_increments(env, spec, t, step, opts)[0];
    });
    return out;
}

// int_0^inf sin^2(g(y)) dy with g(y) = c1 y^-q1 - c0 y^-q0, worked in s = log y.
// Below s_lo, |g| is large and monotone and sin^2 averages to 1/2 (plus a
// boundary correction from one integration by parts); above s_hi, |g| is
// small and sin^2 z = z^2 - z^4/3 is integrated in closed form.
class Sin2PowerIntegral {
public:
    Sin2PowerIntegral(double c1, double q1, double c0, double q0) : c1_(c1), q1_(q1), c0_(c0), q0_(q0) {
        // Normal form: c1 > 0 or both zero; c0 < 0 means the terms add.
        if (q1_ == q0_) {
            c1_ = std::fabs(c1_ - c0_);
            c0_ = 0.0;
        } else if (c1_ == 0.0) {
            c1_ = std::fabs(c0_);
            q1_ = q0_;
            c0_ = 0.0;
        } else if (c1_ < 0.0) {
            c1_ = -c1_;
            c0_ = -c0_;
        }
        q_max_ = c0_ != 0.0 ? std::max(q1_, q0_) : q1_;
    }

    double value(const QuadratureConfig& cfg) const {
        if (c1_ == 0.0) return 0.0;
        const double s_lo = low_cut();
        const double s_hi = high_cut(s_lo);

        const double y_lo = std::exp(s_lo);
        double total = 0.5 * y_lo - y_lo * std::sin(2.0 * g(s_lo)) / (4.0 * dg(s_lo));

        const auto integrand = [&](double s) {
            const double z = std::sin(g(s));
            return z * z * std::exp(s);
        };
        double s = s_lo;
        while (s < s_hi) {
            const double slope = std::fabs(dg(s));
            const double curve = q_max_ * std::sqrt(magnitude(s));
            double step = 0.5;
            if (slope > 0.0) step = std::min(step, 0.5 / slope);
            if (curve > 0.0) step = std::min(step, 1.0 / curve);
            const double next = std::min(s + step, s_hi);
            const QuadResult piece = integrate_adaptive(integrand, s, next, cfg);
            if (!piece.converged) throw NumericalError("levy_increment_cf: y-integral did not converge");
            total += piece.value;
            s = next;
        }
        return total + tail(std::exp(s_hi));
    }

private:
    double term(double c, double q, double s) const { return c == 0.0 ? 0.0 : std::exp(std::log(std::fabs(c)) - q * s); }
    double g(double s) const {
        const double b = term(c0_, q0_, s);
        return term(c1_, q1_, s) - (c0_ < 0.0 ? -b : b);
    }
    double dg(double s) const {
        const double b = q0_ * term(c0_, q0_, s);
        return -q1_ * term(c1_, q1_, s) + (c0_ < 0.0 ? -b : b);
    }
    double magnitude(double s) const { return term(c1_, q1_, s) + term(c0_, q0_, s); }
    bool huge(double s) const { return std::log(c1_) - q1_ * s > 600.0 || (c0_ != 0.0 && std::log(std::fabs(c0_)) - q0_ * s > 600.0); }

    // Largest s below which |g| >= kBig and is monotone.
    double low_cut() const {
        double start = std::numeric_limits<double>::infinity();
        if (c0_ > 0.0) {
            const double dq = q1_ - q0_;
            const double zero = std::log(c1_ / c0_) / dq;
            const double extremum = std::log(q1_ * c1_ / (q0_ * c0_)) / dq;
            start = std::min(zero, extremum);
        }
        // Where the dominant term alone reaches 2 kBig.
        const double guess = (std::log(c1_) - std::log(2.0 * kBig)) / q1_;
        double hi = std::isfinite(start) ? std::min(start, guess) : guess;
        auto big_enough = [&](double s) { return huge(s) || std::fabs(g(s)) >= kBig; };
        double lo = hi - 1.0;
        double width = 1.0;
        while (!big_enough(lo)) {
            hi = lo;
            width *= 2.0;
            lo -= width;
            if (width > 1e6) throw NumericalError("levy_increment_cf: no oscillatory region found");
        }
        if (big_enough(hi)) return hi;
        for (int k = 0; k < 200 && hi - lo > 1e-12 * (1.0 + std::fabs(lo)); ++k) {
            const double mid = 0.5 * (lo + hi);
            (big_enough(mid) ? lo : hi) = mid;
        }
        return lo;
    }

    // Smallest s above which c1 y^-q1 + |c0| y^-q0 <= kSmall.
    double high_cut(double s_lo) const {
        double lo = s_lo;
        double hi = s_lo + 1.0;
        double width = 1.0;
        while (magnitude(hi) > kSmall) {
            lo = hi;
            width *= 2.0;
            hi += width;
        }
        for (int k = 0; k < 200 && hi - lo > 1e-12 * (1.0 + std::fabs(hi)); ++k) {
            const double mid = 0.5 * (lo + hi);
            (magnitude(mid) > kSmall ? lo : hi) = mid;
        }
        return hi;
    }

    // int_Y^inf (z^2 - z^4 / 3) dy, z = c1 y^-q1 - c0 y^-q0.
    double tail(double y) const {
        auto power_moment = [&](int n) {
            double sum = 0.0;
            double binom = 1.0;
            for (int k = 0; k <= n; ++k) {
                const double p = (n - k) * q1_ + k * q0_;
                const double coeff = binom * std::pow(c1_, n - k) * std::pow(-c0_, k);
                if (coeff != 0.0) sum += coeff * std::pow(y, 1.0 - p) / (p - 1.0);
                binom = binom * (n - k) / (k + 1);
            }
            return sum;
        };
        return power_moment(2) - power_moment(4) / 3.0;
    }

    static constexpr double kBig = 1e3;
    static constexpr double kSmall = 1e-3;
    double c1_, q1_, c0_, q0_;
    double q_max_ = 0.0;
};

double ols_slope(std::span<const double> x, std::span<const double> y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    return sxy / sxx;
}

void require_levy_interior(const ProcessSpec& spec, double t, double r) {
    if (spec.kind != ProcessKind::Levy) throw ConfigError("characteristic function is implemented for the Levy kernel only");
    if (!(t > 0.0 && t < 1.0 && r > 0.0 && t + r < 1.0))
        throw ConfigError("characteristic function needs t and t + r in (0, 1)");
}

EcfReport empirical_cf(const ProcessSpec& spec, double t, double r, std::span<const double> v_grid, int m_paths,
                       const EstimationOptions& opts) {
    require_paths(m_paths, 1);
    const std::vector<double> inc = increments_at(spec, t, r, m_paths, 0, opts);
    const double scale = std::pow(r, spec.h(t));
    EcfReport rep;
    rep.v.assign(v_grid.begin(), v_grid.end());
    for (double v : v_grid) {
        if (!(v >= 0.0)) throw ConfigError("v grid must be non-negative");
        double sum = 0.0;
        for (double d : inc) sum += std::cos(v * d / scale);
        rep.empirical.push_back(sum / m_paths);
    }
    return rep;
}

void finish_gaps(EcfReport& rep) {
    rep.gap.resize(rep.v.size());
    rep.sup_gap = 0.0;
    for (std::size_t k = 0; k < rep.v.size(); ++k) {
        rep.gap[k] = std::fabs(rep.empirical[k] - rep.reference[k]);
        rep.sup_gap = std::max(rep.sup_gap, rep.gap[k]);
    }
}

// Exponent H - 1/alpha of a power-type kernel at u, if the kernel has one.
std::optional<double> kernel_exponent(const ProcessSpec& spec, double u) {
    if (const auto* k = dynamic_cast<const LmmmKernel*>(spec.kernel.get())) return k->exponent(u);
    if (const auto* k = dynamic_cast<const LfsmKernel*>(spec.kernel.get())) return k->exponent();
    return std::nullopt;
}

double levy_condition(Condition c, double t, double r) {
    const double covered = std::min(r, std::max(0.0, 1.0 - t));
    switch (c) {
        case Condition::C9:
        case Condition::Cu14: return covered / r;
        case Condition::C11:
        case Condition::C12: return std::min(t + r, 1.0);
        case Condition::C13: return std::min(t, 1.0);
        case Condition::Cu15: return 0.0;
    }
    return kNaN;
}

double quadrature_condition(const ProcessSpec& spec, Condition c, double t, double r, const QuadratureConfig& quad) {
    const Kernel& f = *spec.kernel;
    const double a = spec.alpha(t);
    const double h = spec.h(t);
    const std::vector<double> pts{0.0, t, t + r};
    auto integral = [&](auto&& fn) { return integrate_real_line(fn, pts, quad).value; };
    auto square_diverges = [&](double u) {
        const std::optional<double> k = kernel_exponent(spec, u);
        return k && !(*k > -0.5 && *k < 0.5);
    };
    const double inf = std::numeric_limits<double>::infinity();
    switch (c) {
        case Condition::C9:
            return integral([&](double x) { return std::pow(std::fabs(f.evaluate(t + r, t, x) - f.evaluate(t, t, x)), a); }) /
                   std::pow(r, h * a);
        case Condition::C11:
            if (square_diverges(t)) return inf;
            return integral([&](double x) { const double v = f.evaluate(t + r, t, x); return v * v; });
        case Condition::C12:
            if (square_diverges(t + r)) return inf;
            return integral([&](double x) { const double v = f.evaluate(t + r, t + r, x); return v * v; });
        case Condition::C13:
            if (square_diverges(t)) return inf;
            return integral([&](double x) { const double v = f.evaluate(t, t, x); return v * v; });
        case Condition::Cu14:
            if (square_diverges(t)) return inf;
            return integral([&](double x) { const double v = f.evaluate(t + r, t, x) - f.evaluate(t, t, x); return v * v; }) /
                   std::pow(r, 1.0 + 2.0 * (h - 1.0 / a));
        case Condition::Cu15:
            if (square_diverges(t) || square_diverges(t + r)) return inf;
            return integral([&](double x) {
                       const double v = f.evaluate(t + r, t + r, x) - f.evaluate(t + r, t, x);
                       return v * v;
                   }) /
                   (r * r);
    }
    return kNaN;
}

}  // namespace

std::vector<double> path_increments(const PoissonEnvironment& env, const ProcessSpec& spec, double t,
                                    std::span<const double> r, const EstimationOptions& opts) {
    std::vector<FieldPoint> pts;
    pts.reserve(r.size() + 1);
    pts.push_back({t, t});
    for (double step : r) pts.push_back({t + step, t + step});
    std::vector<double> y = eval_field_points(env, spec, pts, opts.field);
    if (opts.tail_compensation) {
        const std::vector<double> extra = sample_remainder(env, spec, pts, opts.field);
        for (std::size_t k = 0; k < y.size(); ++k) y[k] += extra[k];
    }
    std::vector<double> out(r.size());
    for (std::size_t k = 0; k < r.size(); ++k) {
        out[k] = r[k] == 0.0 ? 0.0 : y[k + 1] - y[0];
        if (!std::isfinite(out[k])) throw NumericalError("non-finite increment");
    }
    return out;
}

MomentEstimate estimate_increment_moments(const ProcessSpec& spec, double t, double eta,
                                          std::span<const double> eps_list, int m_paths,
                                          const EstimationOptions& opts) {
    if (!(eta > 0.0 && eta < spec.c))
        throw ConfigError("moment order eta = " + std::to_string(eta) + " must lie in (0, c) with c = " +
                          std::to_string(spec.c));
    if (eps_list.empty()) throw ConfigError("eps list is empty");
    require_paths(m_paths, 2);
    require_domain(spec, t, "t");
    for (double e : eps_list) {
        if (!(e >= 0.0)) throw ConfigError("eps values must be non-negative");
        require_domain(spec, t + e, "t + eps");
    }

    const std::size_t m = static_cast<std::size_t>(m_paths);
    const std::size_t levels = eps_list.size();
    std::vector<double> powered(levels * m, 0.0);
    parallel_for(levels * m, opts.workers, [&](std::size_t job) {
        const std::size_t level = job / m;
        if (eps_list[level] == 0.0) return;
        const PoissonEnvironment env = build_environment(spec, opts.n_terms, opts.seed, job);
        const double step[] = {eps_list[level]};
        powered[job] = std::pow(std::fabs(path_increments(env, spec, t, step, opts)[0]), eta);
    });

    MomentEstimate me;
    me.t = t;
    me.eta = eta;
    me.m_paths = m_paths;
    me.n_terms = opts.n_terms;
    me.seed = opts.seed;
    for (std::size_t level = 0; level < levels; ++level) {
        MomentLevel ml;
        ml.eps = eps_list[level];
        double sum = 0.0;
        for (std::size_t p = 0; p < m; ++p) {
            sum += powered[level * m + p];
            if (powered[level * m + p] == 0.0) ++ml.zero_count;
        }
        ml.estimate = sum / static_cast<double>(m);
        double ss = 0.0;
        for (std::size_t p = 0; p < m; ++p) ss += (powered[level * m + p] - ml.estimate) * (powered[level * m + p] - ml.estimate);
        ml.std_error = std::sqrt(ss / static_cast<double>(m - 1) / static_cast<double>(m));
        me.levels.push_back(ml);
    }
    return me;
}

ScalingTheory theoretical_scaling(const ProcessSpec& spec, double t, double eta, const QuadratureConfig& quad) {
    const double a = spec.alpha(t);
    ScalingTheory th;
    switch (spec.kind) {
        case ProcessKind::Levy: th.sigma = 1.0; break;
        case ProcessKind::Lmmm: th.sigma = sigma_lmmm(a, (*spec.hurst)(t), quad); break;
        case ProcessKind::LfsmControl: th.sigma = kernel_unit_scale(*spec.kernel, a, quad); break;
        default: throw ConfigError("theoretical_scaling: unsupported process");
    }
    th.slope = eta * spec.h(t);
    th.intercept = std::log(sas_abs_moment(a, 1.0, eta, quad)) + eta * std::log(th.sigma) +
                   eta * std::log(std::fabs(spec.b(t)));
    return th;
}

ScalingFit fit_scaling(const MomentEstimate& me) {
    const std::size_t n = me.levels.size();
    if (n < 3) throw ConfigError("fit_scaling needs at least 3 eps levels");
    std::vector<double> x(n), y(n), w(n, 1.0);
    bool weighted = true;
    for (std::size_t k = 0; k < n; ++k) {
        const MomentLevel& l = me.levels[k];
        if (!(l.estimate > 0.0))
            throw NumericalError("moment estimate at eps = " + std::to_string(l.eps) + " is not positive");
        if (!(l.eps > 0.0)) throw ConfigError("eps must be positive for the log-log fit");
        x[k] = std::log(l.eps);
        y[k] = std::log(l.estimate);
        if (!(l.std_error > 0.0)) weighted = false;
    }
    if (weighted) {
        for (std::size_t k = 0; k < n; ++k) {
            const double rel = me.levels[k].std_error / me.levels[k].estimate;
            w[k] = 1.0 / (rel * rel);
        }
    }
    const double sw = std::accumulate(w.begin(), w.end(), 0.0);
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        mx += w[k] * x[k];
        my += w[k] * y[k];
    }
    mx /= sw;
    my /= sw;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        sxx += w[k] * (x[k] - mx) * (x[k] - mx);
        sxy += w[k] * (x[k] - mx) * (y[k] - my);
    }
    if (!(sxx > 0.0)) throw ConfigError("fit_scaling needs distinct eps levels");

    ScalingFit fit;
    fit.weighted = weighted;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.residuals.resize(n);
    double rss = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        fit.residuals[k] = y[k] - (fit.intercept + fit.slope * x[k]);
        rss += w[k] * fit.residuals[k] * fit.residuals[k];
    }
    fit.chi2 = rss;
    // Known variances when weighted; residual variance otherwise.
    const double s2 = weighted ? 1.0 : rss / static_cast<double>(n - 2);
    fit.slope_se = std::sqrt(s2 / sxx);
    fit.intercept_se = std::sqrt(s2 * (1.0 / sw + mx * mx / sxx));
    return fit;
}

HolderTarget holder_target(const ProcessSpec& spec, double t, std::optional<double> alpha_holder) {
    HolderTarget tg;
    tg.upper_bound = spec.h(t);
    if (spec.kind != ProcessKind::Levy) {
        const double k = (*spec.hurst)(t) - 1.0 / spec.alpha(t);
        if (k >= 0.0) {
            tg.value = (*spec.hurst)(t);
            tg.note = "H(t)";
        } else {
            tg.value = kNaN;
            tg.note = "H - 1/alpha < 0: no theoretical target";
        }
        return tg;
    }
    const double a = spec.alpha(t);
    if (alpha_holder) {
        const double beta = *alpha_holder;
        if (a >= 1.0) {
            tg.value = kNaN;
            tg.note = "alpha >= 1 with rough alpha: no theoretical target";
        } else if (std::fabs(1.0 / a - beta) < 1e-12) {
            tg.value = kNaN;
            tg.note = "1/alpha equals the Hoelder exponent of alpha: not covered";
        } else {
            tg.value = std::min(1.0 / a, beta);
            tg.note = "min(1/alpha, Hoelder exponent of alpha)";
        }
        return tg;
    }
    if (spec.alpha.is_constant() || a >= 1.0) {
        tg.value = 1.0 / a;
        tg.note = "1/alpha";
        return tg;
    }
    const double slope = fd_derivative(spec.alpha.ast(), t, 1e-5);
    if (std::fabs(slope) > 1e-8) {
        tg.value = std::min(1.0 / a, 1.0);
        tg.note = "min(1/alpha, 1): alpha has non-zero derivative";
    } else {
        tg.value = kNaN;
        tg.note = "alpha' = 0 with alpha < 1: Hoelder exponent of alpha unknown";
    }
    return tg;
}

HolderEstimate holder_from_increments(const IncrementSource& source, double t, std::span<const double> r_levels,
                                      int m_paths, std::uint64_t seed, const HolderOptions& hopts) {
    if (r_levels.size() < 2) throw ConfigError("at least two r levels are needed");
    for (std::size_t k = 0; k < r_levels.size(); ++k) {
        int e = 0;
        if (!(r_levels[k] > 0.0) || std::frexp(r_levels[k], &e) != 0.5)
            throw ConfigError("r levels must be positive powers of 2");
        if (k > 0 && !(r_levels[k] < r_levels[k - 1])) throw ConfigError("r levels must be decreasing");
    }
    require_paths(m_paths, 1);
    if (hopts.bootstrap < 1 || !(hopts.level > 0.0 && hopts.level < 1.0))
        throw ConfigError("bootstrap count must be positive and level in (0, 1)");

    std::vector<double> logr(r_levels.size());
    for (std::size_t k = 0; k < r_levels.size(); ++k) logr[k] = std::log(r_levels[k]);

    HolderEstimate est;
    est.t = t;
    est.method = "pathwise";
    for (int p = 0; p < m_paths; ++p) {
        const std::vector<double> inc = source(p, r_levels);
        std::vector<double> x, y;
        for (std::size_t k = 0; k < inc.size(); ++k) {
            if (inc[k] == 0.0) {
                ++est.drop_count;
                continue;
            }
            x.push_back(logr[k]);
            y.push_back(std::log(std::fabs(inc[k])));
        }
        if (x.size() >= 2) est.path_slopes.push_back(ols_slope(x, y));
    }
    est.paths_used = static_cast<int>(est.path_slopes.size());
    if (est.path_slopes.empty()) throw NumericalError("no path had two non-zero increments");
    est.estimate = median_of(est.path_slopes);

    Xoshiro256pp rng(seed, 0, StreamId::Bootstrap);
    const std::size_t n = est.path_slopes.size();
    std::vector<double> medians(static_cast<std::size_t>(hopts.bootstrap));
    std::vector<double> resample(n);
    for (auto& med : medians) {
        for (auto& v : resample) v = est.path_slopes[static_cast<std::size_t>(rng.uniform() * static_cast<double>(n))];
        med = median_of(resample);
    }
    std::sort(medians.begin(), medians.end());
    est.ci_lo = quantile_sorted(medians, 0.5 * (1.0 - hopts.level));
    est.ci_hi = quantile_sorted(medians, 0.5 * (1.0 + hopts.level));
    if (!(est.estimate > 0.0 && est.estimate <= 1.5))
        throw NumericalError("Hoelder estimate " + std::to_string(est.estimate) + " outside the sanity range (0, 1.5]");
    return est;
}

HolderEstimate holder_pathwise(const ProcessSpec& spec, double t, std::span<const double> r_levels, int m_paths,
                               const EstimationOptions& opts, std::optional<double> alpha_holder,
                               const HolderOptions& hopts) {
    if (!(t > spec.domain.lo && t < spec.domain.hi)) throw ConfigError("t must be interior to the domain");
    if (!r_levels.empty()) require_domain(spec, t + r_levels[0], "t + r");
    require_paths(m_paths, 1);

    // Paths are simulated up front so the bootstrap sees them in index order.
    std::vector<std::vector<double>> inc(static_cast<std::size_t>(m_paths));
    parallel_for(inc.size(), opts.workers, [&](std::size_t p) {
        const PoissonEnvironment env = build_environment(spec, opts.n_terms, opts.seed, p);
        inc[p] = path_increments(env, spec, t, r_levels, opts);
    });
    HolderEstimate est = holder_from_increments(
        [&](int p, std::span<const double>) { return inc[static_cast<std::size_t>(p)]; }, t, r_levels, m_paths,
        opts.seed, hopts);
    est.target = holder_target(spec, t, alpha_holder);
    return est;
}

HolderEstimate holder_from_moments(const ScalingFit& fit, double t, double eta, double level) {
    if (!(eta > 0.0)) throw ConfigError("eta must be positive");
    const double z = boost::math::quantile(boost::math::normal(), 0.5 * (1.0 + level));
    HolderEstimate est;
    est.t = t;
    est.method = "moment";
    est.estimate = fit.slope / eta;
    est.ci_lo = (fit.slope - z * fit.slope_se) / eta;
    est.ci_hi = (fit.slope + z * fit.slope_se) / eta;
    return est;
}

SmallBallReport small_ball_probe(const ProcessSpec& spec, double t, std::span<const double> r_list,
                                 std::span<const double> x_list, int m_paths, const EstimationOptions& opts) {
    require_paths(m_paths, 1);
    for (double r : r_list) {
        if (!(r > 0.0)) throw ConfigError("r values must be positive");
        require_domain(spec, t + r, "t + r");
    }
    for (double x : x_list) {
        if (!(x >= 0.0)) throw ConfigError("x values must be non-negative");
    }
    const double h = spec.h(t);
    SmallBallReport rep;
    for (std::size_t k = 0; k < r_list.size(); ++k) {
        const double r = r_list[k];
        std::vector<double> inc =
            increments_at(spec, t, r, m_paths, static_cast<std::uint64_t>(k) * static_cast<std::uint64_t>(m_paths), opts);
        for (auto& d : inc) d = std::fabs(d);
        std::sort(inc.begin(), inc.end());
        const double scale = std::pow(r, h);
        double kr = 0.0;
        for (double x : x_list) {
            const auto below = std::lower_bound(inc.begin(), inc.end(), x * scale) - inc.begin();
            const double prob = static_cast<double>(below) / m_paths;
            rep.rows.push_back({r, x, prob});
            if (x > 0.0) kr = std::max(kr, prob / x);
        }
        rep.k_per_r.push_back(kr);
        rep.k_max = std::max(rep.k_max, kr);
    }
    return rep;
}

double levy_increment_cf(const ProcessSpec& spec, double t, double r, double v, const QuadratureConfig& quad) {
    require_levy_interior(spec, t, r);
    if (!(v >= 0.0)) throw ConfigError("v must be non-negative");
    if (v == 0.0) return 1.0;
    quad.validate();
    const double a0 = field_amplitude(spec, t);
    const double a1 = field_amplitude(spec, t + r);
    const double q0 = 1.0 / spec.alpha(t);
    const double q1 = 1.0 / spec.alpha(t + r);
    const double scale = v / (2.0 * std::pow(r, spec.h(t)));
    // x in [0, t]: both terms; x in (t, t + r]: only the new one.
    const double both = Sin2PowerIntegral(scale * a1, q1, scale * a0, q0).value(quad);
    const double fresh = Sin2PowerIntegral(scale * a1, q1, 0.0, q0).value(quad);
    return std::exp(-2.0 * (t * both + r * fresh));
}

double sas_cf(double alpha, double scale, double v) { return std::exp(-std::pow(std::fabs(scale * v), alpha)); }

EcfReport ecf_compare(const ProcessSpec& spec, double t, double r, std::span<const double> v_grid, int m_paths,
                      const EstimationOptions& opts) {
    require_levy_interior(spec, t, r);
    EcfReport rep = empirical_cf(spec, t, r, v_grid, m_paths, opts);
    for (double v : v_grid) rep.reference.push_back(levy_increment_cf(spec, t, r, v, opts.quad));
    finish_gaps(rep);
    return rep;
}

EcfReport ecf_compare_closed_form(const ProcessSpec& spec, double t, double r, std::span<const double> v_grid,
                                  int m_paths, const EstimationOptions& opts) {
    require_levy_interior(spec, t, r);
    if (!spec.alpha.is_constant() || !spec.b.is_constant())
        throw ConfigError("closed-form CF control needs constant alpha and b");
    EcfReport rep = empirical_cf(spec, t, r, v_grid, m_paths, opts);
    const double a = spec.alpha(t);
    for (double v : v_grid) rep.reference.push_back(sas_cf(a, std::fabs(spec.b(t)), v));
    finish_gaps(rep);
    return rep;
}

std::string_view to_string(Condition c) {
    switch (c) {
        case Condition::C9: return "C9";
        case Condition::C11: return "C11";
        case Condition::C12: return "C12";
        case Condition::C13: return "C13";
        case Condition::Cu14: return "Cu14";
        case Condition::Cu15: return "Cu15";
    }
    return "?";
}

Condition condition_from_string(std::string_view name) {
    for (Condition c : {Condition::C9, Condition::C11, Condition::C12, Condition::C13, Condition::Cu14, Condition::Cu15}) {
        if (name == to_string(c)) return c;
    }
    throw ConfigError("unsupported condition tag '" + std::string(name) + "'");
}

std::vector<double> condition_probe(const ProcessSpec& spec, Condition c, double t, std::span<const double> r_list,
                                    const QuadratureConfig& quad) {
    std::vector<double> out;
    out.reserve(r_list.size());
    for (double r : r_list) {
        if (!(r > 0.0)) throw ConfigError("r values must be positive");
        out.push_back(spec.kind == ProcessKind::Levy ? levy_condition(c, t, r) : quadrature_condition(spec, c, t, r, quad));
    }
    return out;
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw ConfigError("ks_two_sample needs two non-empty samples");
    std::vector<double> x(a.begin(), a.end());
    std::vector<double> y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double n = static_cast<double>(x.size());
    const double m = static_cast<double>(y.size());
    std::size_t i = 0;
    std::size_t j = 0;
    KsResult res;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] <= v) ++i;
        while (j < y.size() && y[j] <= v) ++j;
        res.statistic = std::max(res.statistic, std::fabs(static_cast<double>(i) / n - static_cast<double>(j) / m));
    }
    // c(a) = sqrt(-log(a / 2) / 2) of the limiting Kolmogorov law.
    const double spread = std::sqrt((n + m) / (n * m));
    res.critical_5 = std::sqrt(-0.5 * std::log(0.025)) * spread;
    res.critical_1 = std::sqrt(-0.5 * std::log(0.005)) * spread;
    return res;
}

}  // namespace msp
