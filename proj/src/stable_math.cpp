#include "msp/stable_math.hpp"

#include "msp/errors.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

namespace msp {

namespace {

void require_open_0_2(double eta, const char* who) {
    if (!(eta > 0.0 && eta < 2.0))
        throw DomainError(std::string(who) + ": index must lie in (0, 2), got " + std::to_string(eta));
}

// Sum of int over consecutive half-periods [start + k*width, start + (k+1)*width]
// of an integrand whose sign alternates between them.
double alternating_tail(const Integrand& f, double start, double width, const QuadratureConfig& cfg) {
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(cfg.half_periods));
    for (int k = 0; k < cfg.half_periods; ++k) {
        const double a = start + k * width;
        const QuadResult piece = integrate_adaptive(f, a, a + width, cfg);
        terms.push_back(piece.value);
    }
    return euler_accelerated_sum(terms);
}

// int_0^end x^(1-eta) g(x) dx for bounded smooth g. The substitution
// x = v^p with p = 1/(2-eta) absorbs the x^(1-eta) factor exactly, leaving
// p * g(v^p) on [0, end^(1/p)].
double smoothed_head(double eta, double end, const std::function<double(double)>& g, const QuadratureConfig& cfg) {
    const double p = 1.0 / (2.0 - eta);
    const QuadResult r =
        integrate_adaptive([&](double v) { return p * g(std::pow(v, p)); }, 0.0, std::pow(end, 1.0 / p), cfg);
    return r.value;
}

}  // namespace

double c_alpha(double eta) {
    require_open_0_2(eta, "c_alpha");
    const double eps = 1.0 - eta;
    if (eps == 0.0) return 2.0 / std::numbers::pi;
    // int_0^inf x^-eta sin x dx = Gamma(1-eta) cos(pi eta/2) = Gamma(1+eps) sin(pi eps/2) / eps
    return eps / (std::tgamma(1.0 + eps) * std::sin(0.5 * std::numbers::pi * eps));
}

double c_alpha_quadrature(double eta, const QuadratureConfig& cfg) {
    require_open_0_2(eta, "c_alpha_quadrature");
    cfg.validate();
    const Integrand f = [eta](double x) { return std::pow(x, -eta) * std::sin(x); };
    const double head = smoothed_head(eta, std::numbers::pi, [](double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }, cfg);
    const double tail = alternating_tail(f, std::numbers::pi, std::numbers::pi, cfg);
    return 1.0 / (head + tail);
}

double sin2_integral(double eta, const QuadratureConfig& cfg) {
    require_open_0_2(eta, "sin2_integral");
    cfg.validate();
    // sin^2 u = (1 - cos 2u)/2 past the first zero of cos 2u beyond pi.
    const double start = 1.25 * std::numbers::pi;
    const double head = smoothed_head(eta, start,
                                      [](double u) {
                                          const double s = u == 0.0 ? 1.0 : std::sin(u) / u;
                                          return s * s;
                                      },
                                      cfg);
    const double flat = std::pow(start, -eta) / (2.0 * eta);
    const double osc = alternating_tail([eta](double u) { return std::pow(u, -eta - 1.0) * std::cos(2.0 * u); }, start,
                                        0.5 * std::numbers::pi, cfg);
    const double value = head + flat - 0.5 * osc;
    if (!(value > 0.0) || !std::isfinite(value)) throw NumericalError("sin2_integral produced a non-positive value");
    return value;
}

double sas_abs_moment(double alpha, double sigma, double eta, const QuadratureConfig& cfg) {
    require_open_0_2(alpha, "sas_abs_moment");
    if (!(sigma > 0.0)) throw DomainError("sas_abs_moment: scale must be positive");
    if (!(eta > 0.0)) throw DomainError("sas_abs_moment: moment order must be positive");
    if (eta >= alpha) throw DomainError("sas_abs_moment: moment of order >= alpha is infinite");
    const double prefactor =
        std::pow(2.0, eta - 1.0) * gamma_fn(1.0 - eta / alpha) / (eta * sin2_integral(eta, cfg));
    return std::pow(sigma, eta) * prefactor;
}

double gamma_fn(double x) {
    if (x <= 0.0 && std::trunc(x) == x) throw DomainError("gamma_fn: pole at non-positive integer");
    const double g = std::tgamma(x);
    if (!std::isfinite(g)) throw DomainError("gamma_fn: overflow");
    return g;
}

double cms_transform(double alpha, double sigma, double angle, double expo) {
    if (alpha == 1.0) return sigma * std::tan(angle);
    const double a = std::sin(alpha * angle) / std::pow(std::cos(angle), 1.0 / alpha);
    const double b = std::pow(std::cos((1.0 - alpha) * angle) / expo, (1.0 - alpha) / alpha);
    return sigma * a * b;
}

double cms_sample(double alpha, double sigma, Xoshiro256pp& rng) {
    const double angle = std::numbers::pi * (rng.uniform_open() - 0.5);
    const double expo = rng.exponential();
    return cms_transform(alpha, sigma, angle, expo);
}

}  // namespace msp
