#include "msp/fkl_engine.hpp"

#include "msp/errors.hpp"
#include "msp/stable_math.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace msp {

namespace {

double checked_alpha(const ProcessSpec& spec, double u) {
    const double a = spec.alpha(u);
    if (!(a > 0.0 && a < 2.0))
        throw DomainError("alpha(" + std::to_string(u) + ") = " + std::to_string(a) + " is outside (0, 2)");
    return a;
}

// Constants of one evaluation point, reused while u does not change.
struct PointConstants {
    double u = std::numeric_limits<double>::quiet_NaN();
    double q = 0.0;
    double amplitude = 0.0;

    void update(const ProcessSpec& spec, double new_u, const FieldOptions& opts) {
        if (new_u == u) return;
        u = new_u;
        q = 1.0 / checked_alpha(spec, u);
        amplitude = field_amplitude(spec, u, opts);
    }
};

double series_sum(const PoissonEnvironment& env, std::span<const double> f, double q, bool compensated) {
    const std::size_t n = env.size();
    double sum = 0.0;
    double carry = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (f[i] == 0.0) continue;
        const double term = env.signs[i] * std::exp(q * (env.log_weight[i] - env.log_gamma[i])) * f[i];
        if (compensated) {
            const double s = sum + term;
            carry += std::fabs(sum) >= std::fabs(term) ? (sum - s) + term : (term - s) + sum;
            sum = s;
        } else {
            sum += term;
        }
    }
    return sum + carry;
}

}  // namespace

PoissonEnvironment build_environment(const ProcessSpec& spec, std::size_t n_terms, std::uint64_t seed,
                                     std::uint64_t index) {
    if (n_terms < 1) throw ConfigError("n_terms must be at least 1");
    PoissonEnvironment env;
    env.seed = seed;
    env.index = index;
    env.gamma.resize(n_terms);
    env.log_gamma.resize(n_terms);
    env.points.resize(n_terms);
    env.signs.resize(n_terms);
    env.log_weight.resize(n_terms);

    Xoshiro256pp arrivals(seed, index, StreamId::Arrivals);
    Xoshiro256pp points(seed, index, StreamId::Points);
    Xoshiro256pp signs(seed, index, StreamId::Signs);
    const MeasureSpec& measure = *spec.measure;
    double g = 0.0;
    for (std::size_t i = 0; i < n_terms; ++i) {
        g += arrivals.exponential();
        env.gamma[i] = g;
        env.log_gamma[i] = std::log(g);
        const double v = measure.sample(points);
        env.points[i] = v;
        env.log_weight[i] = measure.log_weight(v);
        env.signs[i] = signs.rademacher();
    }
    return env;
}

double field_amplitude(const ProcessSpec& spec, double u, const FieldOptions& opts) {
    const double a = checked_alpha(spec, u);
    return spec.b(u) * std::pow(c_alpha(a) * opts.c_alpha_multiplier, 1.0 / a);
}

std::vector<double> eval_field_points(const PoissonEnvironment& env, const ProcessSpec& spec,
                                      std::span<const FieldPoint> pts, const FieldOptions& opts) {
    std::vector<double> out(pts.size());
    std::vector<double> f(env.size());
    PointConstants pc;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        pc.update(spec, pts[k].u, opts);
        spec.kernel->evaluate_batch(pts[k].t, pts[k].u, env.points, f);
        out[k] = pc.amplitude * series_sum(env, f, pc.q, opts.compensated_sum);
    }
    return out;
}

double eval_field(const PoissonEnvironment& env, const ProcessSpec& spec, double t, double u, const FieldOptions& opts) {
    const FieldPoint p{t, u};
    return eval_field_points(env, spec, std::span<const FieldPoint>(&p, 1), opts)[0];
}

PathSample eval_diagonal_path(const PoissonEnvironment& env, const ProcessSpec& spec, std::span<const double> grid,
                              const FieldOptions& opts) {
    for (std::size_t k = 1; k < grid.size(); ++k) {
        if (!(grid[k] > grid[k - 1])) throw ConfigError("path grid must be strictly increasing");
    }
    std::vector<FieldPoint> pts(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) pts[k] = {grid[k], grid[k]};
    PathSample path;
    path.grid.assign(grid.begin(), grid.end());
    path.values = eval_field_points(env, spec, pts, opts);
    path.seed = env.seed;
    path.index = env.index;
    path.n_terms = env.size();
    for (double v : path.values) {
        if (!std::isfinite(v)) throw NumericalError("non-finite path value");
    }
    return path;
}

std::vector<double> remainder_covariance(const PoissonEnvironment& env, const ProcessSpec& spec,
                                         std::span<const FieldPoint> pts, const FieldOptions& opts) {
    const std::size_t k = pts.size();
    const std::size_t n = env.size();
    std::vector<double> q(k), amp(k);
    for (std::size_t a = 0; a < k; ++a) {
        q[a] = 1.0 / checked_alpha(spec, pts[a].u);
        amp[a] = field_amplitude(spec, pts[a].u, opts);
    }
    const double gamma_n = env.gamma.back();

    // Kernel values at the environment's points, only when no closed form exists.
    const bool exact = spec.kernel->exact_cross_moment(pts[0].t, pts[0].t, 2.0 * q[0]).has_value();
    std::vector<std::vector<double>> f;
    if (!exact) {
        f.assign(k, std::vector<double>(n));
        for (std::size_t a = 0; a < k; ++a) spec.kernel->evaluate_batch(pts[a].t, pts[a].u, env.points, f[a]);
    }

    std::vector<double> cov(k * k);
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a; b < k; ++b) {
            const double p = q[a] + q[b];
            double moment = 0.0;
            if (exact) {
                moment = *spec.kernel->exact_cross_moment(pts[a].t, pts[b].t, p);
            } else {
                for (std::size_t i = 0; i < n; ++i) {
                    const double fa = f[a][i];
                    if (fa == 0.0) continue;
                    moment += std::exp(p * env.log_weight[i]) * fa * f[b][i];
                }
                moment /= static_cast<double>(n);
            }
            const double c = amp[a] * amp[b] * std::pow(gamma_n, 1.0 - p) / (p - 1.0) * moment;
            cov[a * k + b] = c;
            cov[b * k + a] = c;
        }
    }
    return cov;
}

std::vector<double> sample_remainder(const PoissonEnvironment& env, const ProcessSpec& spec,
                                     std::span<const FieldPoint> pts, const FieldOptions& opts) {
    const std::size_t k = pts.size();
    const std::vector<double> cov = remainder_covariance(env, spec, pts, opts);
    Xoshiro256pp rng(env.seed, env.index, StreamId::Remainder);
    std::vector<double> out(k);
    if (k == 1) {
        out[0] = std::sqrt(std::max(cov[0], 0.0)) * rng.normal();
        return out;
    }
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
        cov.data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success) throw NumericalError("remainder covariance decomposition failed");
    Eigen::VectorXd z(static_cast<Eigen::Index>(k));
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
    const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Eigen::VectorXd x = es.eigenvectors() * root.cwiseProduct(z);
    for (std::size_t i = 0; i < k; ++i) out[i] = x[static_cast<Eigen::Index>(i)];
    return out;
}

double power_tail_sum(double n, double s) {
    if (!(s > 1.0)) throw DomainError("power_tail_sum: exponent must exceed 1");
    // Euler-Maclaurin: int_n^inf x^-s dx - n^-s / 2 + s n^(-s-1) / 12.
    return std::pow(n, 1.0 - s) / (s - 1.0) - 0.5 * std::pow(n, -s) + s * std::pow(n, -s - 1.0) / 12.0;
}

TruncationReport truncation_diagnostic(const ProcessSpec& spec, std::span<const double> grid, std::size_t n_terms,
                                       std::uint64_t seed, int pilot) {
    if (pilot < 1) throw ConfigError("truncation diagnostic needs at least one pilot path");
    TruncationReport rep;
    rep.n_terms = n_terms;
    rep.pilot = pilot;
    std::vector<double> f(2 * n_terms);
    for (int p = 0; p < pilot; ++p) {
        const auto index = static_cast<std::uint64_t>(p);
        const PoissonEnvironment small = build_environment(spec, n_terms, seed, index);
        const PoissonEnvironment big = build_environment(spec, 2 * n_terms, seed, index);
        const PathSample ys = eval_diagonal_path(small, spec, grid);
        const PathSample yb = eval_diagonal_path(big, spec, grid);
        for (std::size_t k = 0; k < grid.size(); ++k) {
            rep.max_discrepancy = std::max(rep.max_discrepancy, std::fabs(yb.values[k] - ys.values[k]));
            const double q = 1.0 / checked_alpha(spec, grid[k]);
            const double amp = std::fabs(field_amplitude(spec, grid[k]));
            spec.kernel->evaluate_batch(grid[k], grid[k], big.points, f);
            for (std::size_t i = 0; i < big.size(); ++i)
                rep.max_term = std::max(rep.max_term, amp * std::exp(q * big.log_weight[i]) * std::fabs(f[i]));
        }
    }
    rep.proxy = std::sqrt(power_tail_sum(static_cast<double>(n_terms), 2.0 / spec.d)) * rep.max_term;
    return rep;
}

}  // namespace msp
