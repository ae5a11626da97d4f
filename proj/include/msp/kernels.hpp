#pragma once

// Measure spaces and kernel functions f(t, u, x) of the implemented
// processes. Finite-measure and sigma-finite constructions share one code
// path through a per-point weight w(x): the constant m(E) in the finite
// case, the density ratio r(x) = dm/dm_hat in the sigma-finite case.

#include "msp/func_expr.hpp"
#include "msp/quadrature.hpp"
#include "msp/rng.hpp"

#include <cmath>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace msp {

/// Probability measure m_hat to sample points from, with the weight w(x).
class MeasureSpec {
public:
    virtual ~MeasureSpec() = default;

    [[nodiscard]] virtual std::string_view tag() const = 0;
    /// One i.i.d. draw from m_hat.
    [[nodiscard]] virtual double sample(Xoshiro256pp& rng) const = 0;
    /// w(x) > 0 for every point the sampler can return.
    [[nodiscard]] virtual double weight(double x) const = 0;
    [[nodiscard]] virtual double log_weight(double x) const { return std::log(weight(x)); }
};

/// Lebesgue measure on [0, 1]; m(E) = 1 so w == 1.
class UnitIntervalMeasure final : public MeasureSpec {
public:
    [[nodiscard]] std::string_view tag() const override { return "lebesgue[0,1]"; }
    [[nodiscard]] double sample(Xoshiro256pp& rng) const override { return rng.uniform(); }
    [[nodiscard]] double weight(double) const override { return 1.0; }
    [[nodiscard]] double log_weight(double) const override { return 0.0; }
};

/// Lebesgue measure on R seen through the probability measure
/// m_hat(dx) = (3/pi^2) sum_j j^-2 1{x in [-j,-j+1) u [j-1,j)} dx.
/// Band j is drawn with probability 6/(pi^2 j^2); w(x) = pi^2 j^2 / 3.
class ZetaBandMeasure final : public MeasureSpec {
public:
    ZetaBandMeasure();

    [[nodiscard]] std::string_view tag() const override { return "lebesgue(R) via zeta(2) bands"; }
    [[nodiscard]] double sample(Xoshiro256pp& rng) const override;
    [[nodiscard]] double weight(double x) const override;

    /// Band index j >= 1 containing x.
    [[nodiscard]] static double band_of(double x);
    /// Inverse CDF of the band law: smallest j with P(J <= j) > u, u in [0, 1).
    [[nodiscard]] double band_from_uniform(double u) const;

private:
    static constexpr int kTableBands = 4096;
    std::vector<double> cumulative_;  // cumulative_[j-1] = P(J <= j)
};

/// f(t, u, x) together with what quadrature and the engine need to know.
class Kernel {
public:
    virtual ~Kernel() = default;

    [[nodiscard]] virtual std::string_view tag() const = 0;
    [[nodiscard]] virtual double evaluate(double t, double u, double x) const = 0;

    /// out[i] = f(t, u, xs[i]); overridden where per-(t,u) setup is costly.
    virtual void evaluate_batch(double t, double u, std::span<const double> xs, std::span<double> out) const;

    /// Points of (t, x) space where f(t, u, .) is not smooth, for quadrature splits.
    [[nodiscard]] virtual std::vector<double> singular_points(double t, double u) const = 0;

    /// Closed interval of x outside which f vanishes (whole line if unbounded).
    [[nodiscard]] virtual Interval x_support() const = 0;

    /// E_mhat[ w(V)^q_sum f(s,s,V) f(s2,s2,V) ] when known in closed form.
    [[nodiscard]] virtual std::optional<double> exact_cross_moment(double /*s*/, double /*s2*/,
                                                                   double /*q_sum*/) const {
        return std::nullopt;
    }
};

/// f(t, u, x) = 1 if 0 <= x <= t else 0 (closed at both ends).
class LevyKernel final : public Kernel {
public:
    [[nodiscard]] std::string_view tag() const override { return "levy"; }
    [[nodiscard]] double evaluate(double t, double, double x) const override { return (x >= 0.0 && x <= t) ? 1.0 : 0.0; }
    void evaluate_batch(double t, double u, std::span<const double> xs, std::span<double> out) const override;
    [[nodiscard]] std::vector<double> singular_points(double t, double) const override { return {0.0, t}; }
    [[nodiscard]] Interval x_support() const override { return {0.0, 1.0}; }
    [[nodiscard]] std::optional<double> exact_cross_moment(double s, double s2, double q_sum) const override;
};

/// f(t, u, x) = |t - x|^k(u) - |x|^k(u), k(u) = H(u) - 1/alpha(u).
class LmmmKernel final : public Kernel {
public:
    LmmmKernel(FuncSpec alpha, FuncSpec hurst);

    [[nodiscard]] std::string_view tag() const override { return "lmmm"; }
    [[nodiscard]] double evaluate(double t, double u, double x) const override;
    void evaluate_batch(double t, double u, std::span<const double> xs, std::span<double> out) const override;
    [[nodiscard]] std::vector<double> singular_points(double t, double) const override { return {0.0, t}; }
    [[nodiscard]] Interval x_support() const override;

    /// H(u) - 1/alpha(u).
    [[nodiscard]] double exponent(double u) const;

private:
    FuncSpec alpha_;
    FuncSpec hurst_;
};

/// Linear fractional stable motion kernel at constant (alpha, H):
/// b+ ((t-x)_+^k - (-x)_+^k) + b- ((t-x)_-^k - (-x)_-^k), k = H - 1/alpha,
/// where z_+^k is taken as 0 for z <= 0.
class LfsmKernel final : public Kernel {
public:
    LfsmKernel(double alpha, double hurst, double b_plus, double b_minus);

    [[nodiscard]] std::string_view tag() const override { return "lfsm"; }
    [[nodiscard]] double evaluate(double t, double u, double x) const override;
    [[nodiscard]] std::vector<double> singular_points(double t, double) const override { return {0.0, t}; }
    [[nodiscard]] Interval x_support() const override;

    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] double hurst() const noexcept { return hurst_; }
    [[nodiscard]] double exponent() const noexcept { return kappa_; }

private:
    double alpha_;
    double hurst_;
    double b_plus_;
    double b_minus_;
    double kappa_;
};

/// |t - x|^k - |x|^k, accurate for |x| >> |t| (the shift enters exactly
/// rather than through the rounded t - x). Zero when k == 0.
[[nodiscard]] double shifted_power_difference(double t, double x, double k);

struct KernelAndMeasure {
    std::shared_ptr<const Kernel> kernel;
    std::shared_ptr<const MeasureSpec> measure;
};

[[nodiscard]] KernelAndMeasure levy_kernel();
[[nodiscard]] KernelAndMeasure lmmm_kernel(const FuncSpec& alpha, const FuncSpec& hurst);
/// The lfsm kernel lives on the same sigma-finite space as the lmmm.
[[nodiscard]] KernelAndMeasure lfsm_kernel(double alpha, double hurst, double b_plus, double b_minus);

/// (int_R | |1-x|^k - |x|^k |^alpha dx)^(1/alpha), k = H - 1/alpha: the
/// scale of the lfsm tangent variable at time 1. Zero when k == 0.
[[nodiscard]] double sigma_lmmm(double alpha, double hurst, const QuadratureConfig& cfg = {});

/// (int |f(1, u, x)|^alpha m(dx))^(1/alpha) for a constant-parameter kernel
/// on the whole line (Lebesgue m).
[[nodiscard]] double kernel_unit_scale(const Kernel& kernel, double alpha, const QuadratureConfig& cfg = {});

enum class ProcessKind { Levy, Lmmm, LfsmControl };

[[nodiscard]] std::string_view to_string(ProcessKind kind);
[[nodiscard]] ProcessKind process_kind_from_string(std::string_view name);

struct LfsmParams {
    double b_plus = 1.0;
    double b_minus = 1.0;
};

/// Everything that defines one multistable process Y(t) = X(t, t).
struct ProcessSpec {
    ProcessKind kind = ProcessKind::Levy;
    std::shared_ptr<const Kernel> kernel;
    std::shared_ptr<const MeasureSpec> measure;
    FuncSpec alpha;
    FuncSpec b;
    std::optional<FuncSpec> hurst;
    Interval domain;
    double c = 0.0;
    double d = 0.0;
    LfsmParams lfsm;
    /// Non-fatal findings from validation (e.g. H - 1/alpha < 0 somewhere).
    std::vector<std::string> warnings;

    /// Localisability exponent h(t): 1/alpha(t) (Levy), H(t) (lmmm, lfsm).
    [[nodiscard]] double h(double t) const;
};

struct ProcessInputs {
    ProcessKind kind = ProcessKind::Levy;
    std::string alpha = "1.5";
    std::string b = "1";
    std::optional<std::string> hurst;
    Interval domain{0.0, 1.0};
    double c = 0.0;
    double d = 0.0;
    LfsmParams lfsm;
    int validation_grid = 1001;
};

/// Parses and validates the model functions and assembles kernel + measure.
/// Throws ConfigError on any violated invariant.
[[nodiscard]] ProcessSpec make_process(const ProcessInputs& in);

}  // namespace msp
