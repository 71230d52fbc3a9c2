// Closed-form barrier families with parameter recipes and sampled
// verification of strict sub/supersolution margins.
#pragma once

#include "ellpar/nonlinearity.hpp"
#include "ellpar/operators.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ellpar {

enum class BarrierSign { Sub, Super };

[[nodiscard]] const char* to_string(BarrierSign sign);

/// phi and its analytic derivatives; r is |x| (or x_1 for the heat kernel).
struct BarrierPoint {
    double phi = 0.0;
    double phi_t = 0.0;
    double phi_r = 0.0;
    double phi_rr = 0.0;
};

/// One phase profile psi(rho) = alpha (rho^-gamma - rho0^-gamma) + beta (rho^2 - rho0^2)
/// with psi'(rho0) = slope > 0.
struct RadialPhase {
    double alpha = 0.0;
    double beta = 0.0;
    double c = 0.0;
    double slope = 0.0;
};

/// Two-phase radial barrier. The profiles increase in rho, so the positive
/// phase lies outside the front |x| = R(t) = rho0 - omega_hat t, which
/// advances into the negative phase at speed omega_hat. The time term is the
/// exact front-pinning function tau(t) = -psi(R(t)), with tau'(0) = c.
/// The super variant is the negation of the sub variant.
struct RadialPowerBarrier {
    double rho0 = 0.0;
    double alpha = 0.0; ///< positive phase
    double beta = 0.0;  ///< positive phase
    double c = 0.0;     ///< omega_hat * a_hat
    double gamma = 0.0;
    double a_hat = 0.0;
    double b_hat = 0.0;
    double omega_hat = 0.0;
    double eps = 0.0; ///< window half-width in rho and t
    BarrierSign sign = BarrierSign::Sub;
    RadialPhase negative; ///< phase with slope |b_hat|
    int n_dim = 2;
    double tau1 = 0.0; ///< positive phase
    double tau2 = 0.0;
    double rho_c = 0.0; ///< +inf when delta1 = 0

    [[nodiscard]] RadialPhase positive() const { return {alpha, beta, c, a_hat}; }
};

/// Throws InfeasibleError when rho0 > rho_c, DomainError on bad input
/// (slopes, speed, divergence-form operator).
[[nodiscard]] RadialPowerBarrier solve_radial_barrier(const OperatorSpec& op, double rho0,
                                                      double a_hat, double b_hat,
                                                      double omega_hat,
                                                      BarrierSign sign = BarrierSign::Sub);

/// Throws DomainError outside rho0 - eps < |x| < rho0 + eps, -eps < t < eps.
[[nodiscard]] BarrierPoint eval_radial_barrier(const RadialPowerBarrier& bar, double x_norm,
                                               double t);

/// alpha (psi - eps)_+ - alpha/2 (psi - eps)_- with the 1D heat kernel
/// psi = s^-1/2 exp(-x1^2 / (4 k s)), s = t + eta, on x1 in [d, 2d],
/// t in [0, delta].
struct HeatKernelBarrier {
    double k = 0.0;
    double eps = 0.0;
    double eta = 0.0;
    double alpha_scale = 0.0;
    double d = 0.0;
    double delta = 0.0;
    double c_bound = 0.0;
};

/// Sup over x1 in [d, 2d], t in (0, 2 delta) of t^2 times the bracketed
/// coefficient; negative exactly when the bracket is negative throughout.
[[nodiscard]] double heat_kernel_bracket_sup(const OperatorSpec& op, double k, double d,
                                             double delta);

[[nodiscard]] HeatKernelBarrier solve_heat_kernel_barrier(const OperatorSpec& op, double d,
                                                          double delta, double c_bound);

[[nodiscard]] BarrierPoint eval_heat_kernel_barrier(const HeatKernelBarrier& bar, double x1,
                                                    double t);

/// phi(x, t) = psi(|x| - omega t - rho0), psi(s) = log(a k s + 1) / k, a strict
/// supersolution of the divergence-form problem for 0 <= s <= eta.
struct LogDivBarrier {
    double k1 = 0.0;
    double k2 = 0.0;
    double k = 0.0;
    double a = 0.0;
    double eta = 0.0;
    double eta0 = 0.0;
    double omega = 0.0;
    double rho0 = 0.0;
    double M = 0.0;
    int n_dim = 2;

    [[nodiscard]] double psi(double s) const;
    /// Lower end of the time window (-rho0 / (2 omega), or -inf).
    [[nodiscard]] double t_min() const;
};

[[nodiscard]] LogDivBarrier solve_logdiv_barrier(const PsiSpec& psi, const BSpec& bspec,
                                                 double omega, double rho0, double M,
                                                 int n_dim);

[[nodiscard]] BarrierPoint eval_logdiv_barrier(const LogDivBarrier& bar, double x_norm,
                                               double t);

struct ParabolaBarrier {
    enum class Variant { DecrParabola, EpsEta };
    Variant variant = Variant::DecrParabola;
    double gamma = 0.0; ///< decr-parabola
    double M = 0.0;     ///< eps-eta
    double eps = 0.0;
    double eta = 0.0;
    double r = 0.0;
    int n_dim = 2;
    double Lambda = 1.0;

    /// (-t/(2 gamma) - 4|x|^2 + 1)_+ with gamma = min{1/(16 n lambda + 8 delta1 + 2 delta0), 1}.
    static ParabolaBarrier decr_parabola(const OperatorSpec& op);
    /// (4M/eps)(4 n Lambda t + |x|^2 + eta) on B_sqrt(eps) x (-eps/(8 n Lambda), 0].
    /// Throws InfeasibleError when the smallness conditions on eps fail.
    static ParabolaBarrier eps_eta(const OperatorSpec& op, double M, double r, double eps,
                                   double eta);
};

[[nodiscard]] BarrierPoint eval_parabola_barrier(const ParabolaBarrier& bar, double x_norm,
                                                 double t);

/// Sampled residual b(phi)_t - F(D^2 phi, D phi, phi). For a subsolution the
/// worst residual is the maximum, for a supersolution the minimum. The
/// relative residual divides by |b(phi)_t| + |F| at the same point; a strict
/// certificate needs it beyond 1e-6 in the right direction everywhere.
struct MarginReport {
    std::string family;
    BarrierSign sign = BarrierSign::Sub;
    bool strict = true;
    bool pass = false;
    std::size_t samples = 0;
    double worst_residual = 0.0;
    double worst_relative = 0.0;
    double scale = 0.0; ///< largest |b(phi)_t| + |F| seen
    /// |D phi+| - |D phi-| on the front at t = 0 (two-phase families).
    std::optional<double> flux_gap;
    /// Family-specific side conditions, each also folded into pass.
    std::vector<std::pair<std::string, double>> extras;
};

inline constexpr double kMarginRelative = 1e-6;

[[nodiscard]] MarginReport verify_subsolution_margin(const RadialPowerBarrier& bar,
                                                     const OperatorSpec& op, const BSpec& b,
                                                     std::optional<BnFamily> bn,
                                                     std::size_t samples);
[[nodiscard]] MarginReport verify_subsolution_margin(const HeatKernelBarrier& bar,
                                                     const OperatorSpec& op, const BSpec& b,
                                                     std::optional<BnFamily> bn,
                                                     std::size_t samples);
[[nodiscard]] MarginReport verify_subsolution_margin(const LogDivBarrier& bar,
                                                     const OperatorSpec& op, const BSpec& b,
                                                     std::optional<BnFamily> bn,
                                                     std::size_t samples);
[[nodiscard]] MarginReport verify_subsolution_margin(const ParabolaBarrier& bar,
                                                     const OperatorSpec& op, const BSpec& b,
                                                     std::optional<BnFamily> bn,
                                                     std::size_t samples);

/// Open intervals of a 1D set together with the per-node inclusion mask.
struct OffsetSet {
    std::vector<bool> mask;
    std::vector<std::pair<double, double>> intervals;
};

/// Intervals where the piecewise-linear interpolant of u is > 0 (positive)
/// or < 0 (negative).
[[nodiscard]] std::vector<std::pair<double, double>>
sign_intervals(const std::vector<double>& x, const std::vector<double>& u, bool positive);

/// super: {dist(x, {u0 > 0}) < t^1/4}; sub: {dist(x, {u0 < 0}) > t^1/4},
/// both relative to the linear interpolant of u0 on [x.front(), x.back()].
[[nodiscard]] OffsetSet front_offset_sets(const std::vector<double>& x,
                                          const std::vector<double>& u0, double t,
                                          BarrierSign sign);

} // namespace ellpar
