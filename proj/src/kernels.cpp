#include "msp/kernels.hpp"

#include "msp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

namespace msp {

namespace {

constexpr double kBandNorm = 6.0 / (std::numbers::pi * std::numbers::pi);

// sum_{j > n} j^-2 by Euler-Maclaurin; relative error below 1e-16 for n >= 64.
double zeta2_tail(double n) {
    const double inv = 1.0 / n;
    const double inv2 = inv * inv;
    return inv - 0.5 * inv2 + inv2 * inv / 6.0 - inv2 * inv2 * inv / 30.0;
}

double pos_pow(double z, double k) { return z > 0.0 ? std::pow(z, k) : 0.0; }

// 0^k for k != 0.
double zero_pow(double k) { return k > 0.0 ? 0.0 : HUGE_VAL; }

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

ZetaBandMeasure::ZetaBandMeasure() {
    cumulative_.resize(kTableBands);
    // Survival sums accumulated from the small end keep the table accurate near 1.
    double survive = zeta2_tail(kTableBands);
    for (int j = kTableBands; j >= 1; --j) {
        cumulative_[static_cast<std::size_t>(j - 1)] = 1.0 - kBandNorm * survive;
        survive += 1.0 / (static_cast<double>(j) * j);
    }
}

double ZetaBandMeasure::band_from_uniform(double u) const {
    if (u < cumulative_.back()) {
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        return static_cast<double>(it - cumulative_.begin() + 1);
    }
    // Tail: smallest j > table with P(J > j) <= 1 - u.
    const double target = (1.0 - u) / kBandNorm;
    double j = std::max(std::floor(1.0 / target), static_cast<double>(kTableBands + 1));
    while (zeta2_tail(j) > target) j += 1.0;
    while (j > kTableBands + 1 && zeta2_tail(j - 1.0) <= target) j -= 1.0;
    return j;
}

double ZetaBandMeasure::sample(Xoshiro256pp& rng) const {
    const double j = band_from_uniform(rng.uniform());
    const double offset = rng.uniform();
    return rng.rademacher() > 0.0 ? (j - 1.0) + offset : -j + offset;
}

double ZetaBandMeasure::band_of(double x) { return x >= 0.0 ? std::floor(x) + 1.0 : std::ceil(-x); }

double ZetaBandMeasure::weight(double x) const {
    const double j = band_of(x);
    return 2.0 * j * j / kBandNorm;
}

void Kernel::evaluate_batch(double t, double u, std::span<const double> xs, std::span<double> out) const {
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = evaluate(t, u, xs[i]);
}

void LevyKernel::evaluate_batch(double t, double, std::span<const double> xs, std::span<double> out) const {
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = (xs[i] >= 0.0 && xs[i] <= t) ? 1.0 : 0.0;
}

std::optional<double> LevyKernel::exact_cross_moment(double s, double s2, double) const {
    return std::clamp(std::min(s, s2), 0.0, 1.0);
}

double shifted_power_difference(double t, double x, double k) {
    if (k == 0.0) return 0.0;
    const double B = std::fabs(x);
    const bool outside = x < std::min(0.0, t) || x > std::max(0.0, t);
    if (outside && std::fabs(t) < 0.5 * B) {
        // |t - x| - |x| is exactly t (x < 0) or -t (x > 0) here.
        const double d = x < 0.0 ? t : -t;
        return std::pow(B, k) * std::expm1(k * std::log1p(d / B));
    }
    if (t == 0.0) return 0.0;
    auto p = [k](double z) { return z > 0.0 ? std::pow(z, k) : zero_pow(k); };
    return p(std::fabs(t - x)) - p(B);
}

LmmmKernel::LmmmKernel(FuncSpec alpha, FuncSpec hurst) : alpha_(std::move(alpha)), hurst_(std::move(hurst)) {}

double LmmmKernel::exponent(double u) const { return hurst_(u) - 1.0 / alpha_(u); }

double LmmmKernel::evaluate(double t, double u, double x) const { return shifted_power_difference(t, x, exponent(u)); }

void LmmmKernel::evaluate_batch(double t, double u, std::span<const double> xs, std::span<double> out) const {
    const double k = exponent(u);
    if (k == 0.0) {
        std::fill(out.begin(), out.end(), 0.0);
        return;
    }
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = shifted_power_difference(t, xs[i], k);
}

Interval LmmmKernel::x_support() const { return {-HUGE_VAL, HUGE_VAL}; }

LfsmKernel::LfsmKernel(double alpha, double hurst, double b_plus, double b_minus)
    : alpha_(alpha), hurst_(hurst), b_plus_(b_plus), b_minus_(b_minus), kappa_(hurst - 1.0 / alpha) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("lfsm: alpha must lie in (0, 2)");
    if (!(hurst > 0.0 && hurst < 1.0)) throw DomainError("lfsm: H must lie in (0, 1)");
}

double LfsmKernel::evaluate(double t, double, double x) const {
    if (x < std::min(0.0, t)) return b_plus_ * shifted_power_difference(t, x, kappa_);
    if (x > std::max(0.0, t)) return b_minus_ * shifted_power_difference(t, x, kappa_);
    return b_plus_ * (pos_pow(t - x, kappa_) - pos_pow(-x, kappa_)) + b_minus_ * (pos_pow(x - t, kappa_) - pos_pow(x, kappa_));
}

Interval LfsmKernel::x_support() const { return {-HUGE_VAL, HUGE_VAL}; }

KernelAndMeasure levy_kernel() {
    return {std::make_shared<LevyKernel>(), std::make_shared<UnitIntervalMeasure>()};
}

KernelAndMeasure lmmm_kernel(const FuncSpec& alpha, const FuncSpec& hurst) {
    return {std::make_shared<LmmmKernel>(alpha, hurst), std::make_shared<ZetaBandMeasure>()};
}

KernelAndMeasure lfsm_kernel(double alpha, double hurst, double b_plus, double b_minus) {
    return {std::make_shared<LfsmKernel>(alpha, hurst, b_plus, b_minus), std::make_shared<ZetaBandMeasure>()};
}

double kernel_unit_scale(const Kernel& kernel, double alpha, const QuadratureConfig& cfg) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("kernel_unit_scale: alpha must lie in (0, 2)");
    cfg.validate();
    auto pts = kernel.singular_points(1.0, 1.0);
    pts.push_back(0.5);
    const QuadResult r =
        integrate_real_line([&](double x) { return std::pow(std::fabs(kernel.evaluate(1.0, 1.0, x)), alpha); }, pts,
                            cfg);
    return std::pow(r.value, 1.0 / alpha);
}

double sigma_lmmm(double alpha, double hurst, const QuadratureConfig& cfg) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("sigma_lmmm: alpha must lie in (0, 2)");
    if (!(hurst > 0.0 && hurst < 1.0)) throw DomainError("sigma_lmmm: H must lie in (0, 1)");
    if (hurst - 1.0 / alpha == 0.0) return 0.0;
    return kernel_unit_scale(LfsmKernel(alpha, hurst, 1.0, 1.0), alpha, cfg);
}

std::string_view to_string(ProcessKind kind) {
    switch (kind) {
        case ProcessKind::Levy: return "levy";
        case ProcessKind::Lmmm: return "lmmm";
        case ProcessKind::LfsmControl: return "lfsm";
    }
    return "?";
}

ProcessKind process_kind_from_string(std::string_view name) {
    if (name == "levy") return ProcessKind::Levy;
    if (name == "lmmm") return ProcessKind::Lmmm;
    if (name == "lfsm" || name == "lfsm-control") return ProcessKind::LfsmControl;
    throw ConfigError("process: unknown tag '" + std::string(name) + "' (expected levy, lmmm or lfsm)");
}

double ProcessSpec::h(double t) const {
    if (kind == ProcessKind::Levy) return 1.0 / alpha(t);
    return (*hurst)(t);
}

ProcessSpec make_process(const ProcessInputs& in) {
    if (!(in.domain.lo < in.domain.hi)) throw ConfigError("domain: lower bound must be below upper bound");

    auto parse = [&](const std::string& src, const char* field) {
        try {
            return FuncSpec(src, in.domain);
        } catch (const ParseError& e) {
            throw ConfigError(std::string(field) + ": " + e.what());
        }
    };
    auto check = [&](const FuncSpec& fs, double lo, double hi, const char* field) {
        try {
            return validate_range(fs, lo, hi, in.validation_grid);
        } catch (const DomainError& e) {
            throw ConfigError(std::string(field) + ": " + e.what());
        }
    };

    ProcessSpec spec;
    spec.kind = in.kind;
    spec.domain = in.domain;
    spec.lfsm = in.lfsm;
    spec.alpha = parse(in.alpha, "alpha");
    spec.b = parse(in.b, "b");

    const RangeReport ar = check(spec.alpha, 0.0, 2.0, "alpha");
    if (!(ar.min > 0.0 && ar.max < 2.0))
        throw ConfigError("alpha: range [" + fmt(ar.min) + ", " + fmt(ar.max) + "] is not inside (0, 2)");
    spec.c = in.c;
    spec.d = in.d;
    if (spec.c == 0.0 && spec.d == 0.0) {
        spec.c = ar.min;
        spec.d = ar.max;
    }
    if (!(spec.c > 0.0 && spec.c <= spec.d && spec.d < 2.0))
        throw ConfigError("stability_bounds: need 0 < c <= d < 2");
    if (!check(spec.alpha, spec.c, spec.d, "alpha").passed)
        throw ConfigError("alpha: range [" + fmt(ar.min) + ", " + fmt(ar.max) + "] leaves [c, d] = [" +
                          fmt(spec.c) + ", " + fmt(spec.d) + "]");
    (void)check(spec.b, -HUGE_VAL, HUGE_VAL, "b");

    if (in.kind != ProcessKind::Levy) {
        if (!in.hurst) throw ConfigError("H: required for process '" + std::string(to_string(in.kind)) + "'");
        spec.hurst = parse(*in.hurst, "H");
        const RangeReport hr = check(*spec.hurst, 0.0, 1.0, "H");
        if (!(hr.min > 0.0 && hr.max < 1.0))
            throw ConfigError("H: range [" + fmt(hr.min) + ", " + fmt(hr.max) + "] is not inside (0, 1)");
        double worst = HUGE_VAL;
        double where = in.domain.lo;
        for (int k = 0; k < in.validation_grid; ++k) {
            const double t = in.domain.lo + in.domain.width() * k / (in.validation_grid - 1);
            const double kappa = (*spec.hurst)(t) - 1.0 / spec.alpha(t);
            if (kappa < worst) {
                worst = kappa;
                where = t;
            }
        }
        if (worst < 0.0)
            spec.warnings.push_back("H - 1/alpha is negative (min " + fmt(worst) + " at t=" + fmt(where) +
                                    "); no Holder target is asserted there");
    }

    switch (in.kind) {
        case ProcessKind::Levy: {
            auto km = levy_kernel();
            spec.kernel = km.kernel;
            spec.measure = km.measure;
            const Interval sup = spec.kernel->x_support();
            if (in.domain.lo < sup.lo || in.domain.hi > sup.hi)
                throw ConfigError("domain: must lie inside [0, 1] for the levy kernel");
            break;
        }
        case ProcessKind::Lmmm: {
            auto km = lmmm_kernel(spec.alpha, *spec.hurst);
            spec.kernel = km.kernel;
            spec.measure = km.measure;
            break;
        }
        case ProcessKind::LfsmControl: {
            if (!spec.alpha.is_constant() || !spec.hurst->is_constant())
                throw ConfigError("lfsm: alpha and H must be constant expressions");
            auto km = lfsm_kernel(spec.alpha(in.domain.lo), (*spec.hurst)(in.domain.lo), in.lfsm.b_plus,
                                  in.lfsm.b_minus);
            spec.kernel = km.kernel;
            spec.measure = km.measure;
            break;
        }
    }
    return spec;
}

}  // namespace msp
