#pragma once

// Monte Carlo verification layer: increment moments and their log-log
// fits, Hoelder exponent estimates, the small-ball probe, the increment
// characteristic function, integral conditions on the kernels and the
// two-sample Kolmogorov-Smirnov statistic.

#include "msp/fkl_engine.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace msp {

struct EstimationOptions {
    std::size_t n_terms = 20'000;
    std::uint64_t seed = 1;
    int workers = 1;
    /// Add a Gaussian draw for the discarded series terms (see sample_remainder).
    bool tail_compensation = true;
    FieldOptions field;
    QuadratureConfig quad;
};

/// Y(t + r_k) - Y(t) for each k, from one environment.
[[nodiscard]] std::vector<double> path_increments(const PoissonEnvironment& env, const ProcessSpec& spec, double t,
                                                  std::span<const double> r, const EstimationOptions& opts);

struct MomentLevel {
    double eps = 0.0;
    double estimate = 0.0;
    double std_error = 0.0;
    int zero_count = 0;
};

struct MomentEstimate {
    double t = 0.0;
    double eta = 0.0;
    std::vector<MomentLevel> levels;
    int m_paths = 0;
    std::size_t n_terms = 0;
    std::uint64_t seed = 0;
};

/// m(eps) = mean over m_paths independent environments of |Y(t+eps) - Y(t)|^eta.
/// Environment index of (level k, path p) is k * m_paths + p.
[[nodiscard]] MomentEstimate estimate_increment_moments(const ProcessSpec& spec, double t, double eta,
                                                        std::span<const double> eps_list, int m_paths,
                                                        const EstimationOptions& opts);

struct ScalingTheory {
    double slope = 0.0;
    double intercept = 0.0;
    /// Scale of the tangent stable law at unit step (1 for Levy, sigma_lmmm otherwise).
    double sigma = 1.0;
};

/// Small-eps law E|Y(t+eps) - Y(t)|^eta ~ exp(intercept) eps^slope.
[[nodiscard]] ScalingTheory theoretical_scaling(const ProcessSpec& spec, double t, double eta,
                                                const QuadratureConfig& quad = {});

struct ScalingFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double intercept_se = 0.0;
    std::vector<double> residuals;
    double chi2 = 0.0;
    bool weighted = false;
};

/// Weighted least squares of log m on log eps with weights (m / se)^2;
/// unit weights when some standard error is zero.
[[nodiscard]] ScalingFit fit_scaling(const MomentEstimate& me);

struct HolderTarget {
    /// NaN when there is no theoretical value.
    double value = 0.0;
    /// h(t), the general upper bound.
    double upper_bound = 0.0;
    std::string note;
};

/// `alpha_holder`: declared Hoelder exponent of alpha at t, for rough alpha.
[[nodiscard]] HolderTarget holder_target(const ProcessSpec& spec, double t,
                                         std::optional<double> alpha_holder = std::nullopt);

struct HolderEstimate {
    double t = 0.0;
    double estimate = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::string method;
    HolderTarget target;
    int drop_count = 0;
    int paths_used = 0;
    std::vector<double> path_slopes;
};

struct HolderOptions {
    int bootstrap = 999;
    double level = 0.95;
};

/// Increments Y(t + r_k) - Y(t) of path `p` at the given levels.
using IncrementSource = std::function<std::vector<double>(int p, std::span<const double> r)>;

/// Median over paths of the per-path log|increment| vs log r slope, with a
/// percentile bootstrap interval over paths. Zero increments are dropped
/// and counted; a path left with fewer than two levels is skipped.
[[nodiscard]] HolderEstimate holder_from_increments(const IncrementSource& source, double t,
                                                   std::span<const double> r_levels, int m_paths,
                                                   std::uint64_t seed, const HolderOptions& hopts = {});

[[nodiscard]] HolderEstimate holder_pathwise(const ProcessSpec& spec, double t, std::span<const double> r_levels,
                                             int m_paths, const EstimationOptions& opts,
                                             std::optional<double> alpha_holder = std::nullopt,
                                             const HolderOptions& hopts = {});

/// Hoelder estimate slope / eta from a moment fit, with a normal interval.
[[nodiscard]] HolderEstimate holder_from_moments(const ScalingFit& fit, double t, double eta, double level = 0.95);

struct SmallBallRow {
    double r = 0.0;
    double x = 0.0;
    double probability = 0.0;
};

struct SmallBallReport {
    std::vector<SmallBallRow> rows;
    /// max over x of probability / x, per r.
    std::vector<double> k_per_r;
    double k_max = 0.0;
};

/// Empirical P(|Y(t+r) - Y(t)| < x r^h(t)).
[[nodiscard]] SmallBallReport small_ball_probe(const ProcessSpec& spec, double t, std::span<const double> r_list,
                                               std::span<const double> x_list, int m_paths,
                                               const EstimationOptions& opts);

/// Characteristic function of (Y(t+r) - Y(t)) / r^h(t) for the Levy kernel,
/// by numerical integration over the Poisson intensity.
[[nodiscard]] double levy_increment_cf(const ProcessSpec& spec, double t, double r, double v,
                                       const QuadratureConfig& quad = {});

/// exp(-|scale v|^alpha).
[[nodiscard]] double sas_cf(double alpha, double scale, double v);

struct EcfReport {
    std::vector<double> v;
    std::vector<double> empirical;
    std::vector<double> reference;
    std::vector<double> gap;
    double sup_gap = 0.0;
};

/// Empirical CF of (Y(t+r) - Y(t)) / r^h(t) against levy_increment_cf.
[[nodiscard]] EcfReport ecf_compare(const ProcessSpec& spec, double t, double r, std::span<const double> v_grid,
                                    int m_paths, const EstimationOptions& opts);

/// Same empirical CF against exp(-|b v|^alpha) for a constant-alpha Levy spec.
[[nodiscard]] EcfReport ecf_compare_closed_form(const ProcessSpec& spec, double t, double r,
                                                std::span<const double> v_grid, int m_paths,
                                                const EstimationOptions& opts);

enum class Condition { C9, C11, C12, C13, Cu14, Cu15 };

[[nodiscard]] std::string_view to_string(Condition c);
[[nodiscard]] Condition condition_from_string(std::string_view name);

/// The integral (or ratio) defining the condition at (t, r), for each r.
/// Closed form for the Levy kernel, quadrature otherwise. Infinite when
/// the integral diverges.
[[nodiscard]] std::vector<double> condition_probe(const ProcessSpec& spec, Condition c, double t,
                                                  std::span<const double> r_list, const QuadratureConfig& quad = {});

struct KsResult {
    double statistic = 0.0;
    double critical_5 = 0.0;
    double critical_1 = 0.0;
};

[[nodiscard]] KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

}  // namespace msp
