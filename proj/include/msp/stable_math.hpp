#pragma once

// Special functions for symmetric alpha-stable laws.

#include "msp/quadrature.hpp"
#include "msp/rng.hpp"

namespace msp {

/// C_eta = 1 / int_0^inf x^-eta sin(x) dx, closed form, eta in (0, 2).
/// Evaluated as eps / (Gamma(1+eps) sin(pi eps / 2)) with eps = 1 - eta,
/// which is continuous through eta = 1 (value 2/pi).
[[nodiscard]] double c_alpha(double eta);

/// Independent route for C_eta: half-period quadrature of the conditionally
/// convergent integral with Euler acceleration. Used as a cross-check.
[[nodiscard]] double c_alpha_quadrature(double eta, const QuadratureConfig& cfg = {});

/// int_0^inf u^(-eta-1) sin^2(u) du by quadrature, eta in (0, 2).
[[nodiscard]] double sin2_integral(double eta, const QuadratureConfig& cfg = {});

/// E|X|^eta for X symmetric alpha-stable with scale sigma, 0 < eta < alpha < 2:
/// sigma^eta 2^(eta-1) Gamma(1 - eta/alpha) / (eta sin2_integral(eta)).
[[nodiscard]] double sas_abs_moment(double alpha, double sigma, double eta, const QuadratureConfig& cfg = {});

/// Gamma function; throws DomainError at the poles 0, -1, -2, ...
[[nodiscard]] double gamma_fn(double x);

/// Chambers-Mallows-Stuck transform for the symmetric case.
/// `angle` is uniform on (-pi/2, pi/2) and `expo` is a unit exponential.
/// Odd in `angle`: cms_transform(a, s, -v, w) == -cms_transform(a, s, v, w).
[[nodiscard]] double cms_transform(double alpha, double sigma, double angle, double expo);

/// One draw from the symmetric alpha-stable law with scale sigma
/// (characteristic function exp(-sigma^alpha |v|^alpha)).
[[nodiscard]] double cms_sample(double alpha, double sigma, Xoshiro256pp& rng);

}  // namespace msp
