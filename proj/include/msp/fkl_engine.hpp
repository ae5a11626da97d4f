#pragma once

// Truncated Ferguson-Klass-LePage series for the random field
//
//   X(t, u) = b(u) C_{alpha(u)}^{1/alpha(u)}
//             sum_{i<=N} gamma_i Gamma_i^{-1/alpha(u)} w(V_i)^{1/alpha(u)} f(t, u, V_i)
//
// and its diagonal Y(t) = X(t, t).

#include "msp/kernels.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace msp {

/// One realization of the Poisson data driving the series. Arrivals, points
/// and signs come from three independent streams keyed by (seed, index), so
/// the first N terms of a 2N-term environment equal the N-term environment.
struct PoissonEnvironment {
    std::vector<double> gamma;       // Gamma_i, strictly increasing
    std::vector<double> log_gamma;   // log Gamma_i
    std::vector<double> points;      // V_i
    std::vector<double> signs;       // gamma_i in {-1, +1}
    std::vector<double> log_weight;  // log w(V_i)
    std::uint64_t seed = 0;
    std::uint64_t index = 0;

    [[nodiscard]] std::size_t size() const noexcept { return gamma.size(); }
};

[[nodiscard]] PoissonEnvironment build_environment(const ProcessSpec& spec, std::size_t n_terms, std::uint64_t seed,
                                                   std::uint64_t index);

struct FieldOptions {
    /// Multiplies C_alpha before the 1/alpha power. Fault-injection hook; 1 in normal runs.
    double c_alpha_multiplier = 1.0;
    /// Neumaier-compensated summation over the terms.
    bool compensated_sum = false;
};

struct FieldPoint {
    double t = 0.0;
    double u = 0.0;
};

/// b(u) C_{alpha(u)}^{1/alpha(u)} with the fault hook applied.
[[nodiscard]] double field_amplitude(const ProcessSpec& spec, double u, const FieldOptions& opts = {});

[[nodiscard]] double eval_field(const PoissonEnvironment& env, const ProcessSpec& spec, double t, double u,
                                const FieldOptions& opts = {});

/// eval_field at each point, sharing per-u constants between consecutive points.
[[nodiscard]] std::vector<double> eval_field_points(const PoissonEnvironment& env, const ProcessSpec& spec,
                                                    std::span<const FieldPoint> pts, const FieldOptions& opts = {});

struct PathSample {
    std::vector<double> grid;
    std::vector<double> values;
    std::uint64_t seed = 0;
    std::uint64_t index = 0;
    std::size_t n_terms = 0;
};

/// Y(t_k) = X(t_k, t_k) on a strictly increasing grid, one environment.
[[nodiscard]] PathSample eval_diagonal_path(const PoissonEnvironment& env, const ProcessSpec& spec,
                                            std::span<const double> grid, const FieldOptions& opts = {});

/// Gaussian draw matching the conditional covariance of the discarded terms
/// i > N at the given points, given Gamma_N:
///   Cov = a(u_k) a(u_l) Gamma_N^(1-p) / (p-1) E[w^p f_k f_l],  p = 1/alpha(u_k) + 1/alpha(u_l).
/// The expectation is exact when the kernel provides it and is otherwise the
/// average over the environment's own points. Uses the Remainder stream of
/// (env.seed, env.index).
[[nodiscard]] std::vector<double> sample_remainder(const PoissonEnvironment& env, const ProcessSpec& spec,
                                                   std::span<const FieldPoint> pts, const FieldOptions& opts = {});

/// Conditional covariance matrix used by sample_remainder (row-major, k x k).
[[nodiscard]] std::vector<double> remainder_covariance(const PoissonEnvironment& env, const ProcessSpec& spec,
                                                       std::span<const FieldPoint> pts, const FieldOptions& opts = {});

struct TruncationReport {
    std::size_t n_terms = 0;
    int pilot = 0;
    /// max over pilot paths and grid points of |Y_2N - Y_N|.
    double max_discrepancy = 0.0;
    /// (sum_{i>N} i^(-2/d))^(1/2) * max_term.
    double proxy = 0.0;
    /// Empirical max of |b C^{1/alpha} w^{1/alpha} f| over pilot points and grid.
    double max_term = 0.0;
};

/// sum_{i>n} i^-s for s > 1.
[[nodiscard]] double power_tail_sum(double n, double s);

[[nodiscard]] TruncationReport truncation_diagnostic(const ProcessSpec& spec, std::span<const double> grid,
                                                     std::size_t n_terms, std::uint64_t seed, int pilot);

}  // namespace msp
