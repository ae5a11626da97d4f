#pragma once

#include <functional>
#include <span>

namespace msp {

struct QuadratureConfig {
    double abs_tol = 1e-13;
    double rel_tol = 1e-11;
    int max_subdivisions = 4000;
    /// Number of half-periods summed (then Euler-accelerated) for
    /// oscillatory integrals over (0, inf).
    int half_periods = 64;

    /// Throws ConfigError when a field is out of range.
    void validate() const;
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    int subdivisions = 0;
    bool converged = false;
};

using Integrand = std::function<double(double)>;

/// Globally adaptive Gauss-Kronrod (7/15) on [a, b]. Intended for smooth or
/// oscillatory integrands; does not extrapolate endpoint singularities.
[[nodiscard]] QuadResult integrate_adaptive(const Integrand& f, double a, double b, const QuadratureConfig& cfg);

/// Double-exponential (tanh-sinh) rule on [a, b]; handles integrable
/// algebraic endpoint singularities.
[[nodiscard]] QuadResult integrate_endpoint_singular(const Integrand& f, double a, double b,
                                                     const QuadratureConfig& cfg);

/// Sum of an alternating series a_0 - a_1 + ... given the signed terms,
/// accelerated by repeated averaging of partial sums (Euler transform).
[[nodiscard]] double euler_accelerated_sum(std::span<const double> signed_terms);

/// Integral over the real line of a function with integrable singularities
/// at `breakpoints` and algebraic decay at +-inf. The line is split at the
/// breakpoints and at +-tail_start; tails use x = tail_start * e^y, integrated
/// to y = 600 and closed with an exponential remainder. Throws NumericalError
/// if any piece misses tolerance.
[[nodiscard]] QuadResult integrate_real_line(const Integrand& f, std::span<const double> breakpoints,
                                             const QuadratureConfig& cfg, double tail_start = 50.0);

/// Same as integrate_real_line but restricted to [lo, hi] (no tails).
[[nodiscard]] QuadResult integrate_segmented(const Integrand& f, double lo, double hi,
                                             std::span<const double> breakpoints, const QuadratureConfig& cfg);

}  // namespace msp
