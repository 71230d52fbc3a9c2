#include "ellpar/barriers.hpp"

#include "ellpar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace ellpar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double time_slope(const BSpec& b, std::optional<BnFamily> bn, double z)
{
    return bn ? regularized_b_derivative(b, *bn, z) : b_derivative(b, z);
}

// Evenly spaced interior samples of (lo, hi).
double interior(double lo, double hi, std::size_t i, std::size_t m)
{
    return lo + (hi - lo) * (static_cast<double>(i) + 0.5) / static_cast<double>(m);
}

double endpoints(double lo, double hi, std::size_t i, std::size_t m)
{
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(m - 1);
}

std::size_t side(std::size_t samples)
{
    const auto m = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(samples))));
    return std::max<std::size_t>(m, 2);
}

// Running worst-case bookkeeping shared by all families.
struct Accumulator {
    BarrierSign sign;
    std::size_t count = 0;
    double worst = 0.0;
    double worst_rel = 0.0;
    double scale = 0.0;

    void add(double bt, double f)
    {
        const double res = bt - f;
        const double local = std::max(std::abs(bt) + std::abs(f), 1e-300);
        const double rel = res / local;
        if (count == 0) {
            worst = res;
            worst_rel = rel;
        } else if (sign == BarrierSign::Sub) {
            worst = std::max(worst, res);
            worst_rel = std::max(worst_rel, rel);
        } else {
            worst = std::min(worst, res);
            worst_rel = std::min(worst_rel, rel);
        }
        scale = std::max(scale, local);
        ++count;
    }

    void fill(MarginReport& rep) const
    {
        rep.samples = count;
        rep.worst_residual = worst;
        rep.worst_relative = worst_rel;
        rep.scale = scale;
    }

    [[nodiscard]] bool strict_pass() const
    {
        return count > 0 && (sign == BarrierSign::Sub ? worst_rel <= -kMarginRelative
                                                     : worst_rel >= kMarginRelative);
    }
};

// ---------------------------------------------------------------- radial

double phase_psi(const RadialPhase& ph, double rho0, double gamma, double rho)
{
    return ph.alpha * (std::pow(rho, -gamma) - std::pow(rho0, -gamma)) +
           ph.beta * (rho * rho - rho0 * rho0);
}

double phase_d1(const RadialPhase& ph, double gamma, double rho)
{
    return -ph.alpha * gamma * std::pow(rho, -gamma - 1.0) + 2.0 * ph.beta * rho;
}

double phase_d2(const RadialPhase& ph, double gamma, double rho)
{
    return ph.alpha * gamma * (gamma + 1.0) * std::pow(rho, -gamma - 2.0) + 2.0 * ph.beta;
}

RadialPhase solve_phase(double slope, double omega, double rho0, double gamma, double tau2)
{
    RadialPhase ph;
    ph.slope = slope;
    ph.c = omega * slope;
    ph.beta = 2.0 * std::max(ph.c / tau2, slope / (2.0 * rho0));
    ph.alpha = (2.0 * ph.beta * rho0 - slope) * std::pow(rho0, gamma + 1.0) / gamma;
    return ph;
}

// Unsigned (sub variant) point of one phase, front at R = rho0 - omega t.
BarrierPoint phase_point(const RadialPowerBarrier& bar, const RadialPhase& ph, double rho, double t)
{
    const double R = bar.rho0 - bar.omega_hat * t;
    BarrierPoint p;
    p.phi = phase_psi(ph, bar.rho0, bar.gamma, rho) - phase_psi(ph, bar.rho0, bar.gamma, R);
    p.phi_t = phase_d1(ph, bar.gamma, R) * bar.omega_hat;
    p.phi_r = phase_d1(ph, bar.gamma, rho);
    p.phi_rr = phase_d2(ph, bar.gamma, rho);
    return p;
}

BarrierPoint sub_point(const RadialPowerBarrier& bar, double rho, double t)
{
    const double R = bar.rho0 - bar.omega_hat * t;
    return phase_point(bar, rho >= R ? bar.positive() : bar.negative, rho, t);
}

// phi_t - M-(D^2 phi) + delta1 |D phi| + delta0 |phi|, an upper bound for the
// subsolution residual of every operator in the structural class.
double envelope_residual(const OperatorSpec& op, int n_dim, double rho, const BarrierPoint& p)
{
    std::vector<double> eigs(static_cast<std::size_t>(n_dim - 1), p.phi_r / rho);
    eigs.push_back(p.phi_rr);
    return p.phi_t - pucci_minus(eigs, op.lambda, op.Lambda) + op.delta1 * std::abs(p.phi_r) +
           op.delta0 * std::abs(p.phi);
}

} // namespace

const char* to_string(BarrierSign sign)
{
    return sign == BarrierSign::Sub ? "sub" : "super";
}

RadialPowerBarrier solve_radial_barrier(const OperatorSpec& op, double rho0, double a_hat,
                                        double b_hat, double omega_hat, BarrierSign sign)
{
    op.validate();
    if (op.kind == OperatorSpec::Kind::Divergence) {
        throw DomainError("solve_radial_barrier: divergence form needs the logarithmic barrier");
    }
    if (!(rho0 > 0.0) || !(a_hat > 0.0) || !(b_hat < 0.0) || !(a_hat + b_hat > 0.0) ||
        !(omega_hat >= 0.0) || !std::isfinite(omega_hat)) {
        throw DomainError("solve_radial_barrier: need rho0 > 0, a_hat > 0 > b_hat, "
                          "a_hat + b_hat > 0, omega_hat >= 0");
    }
    const double n1 = op.n_dim - 1;
    RadialPowerBarrier bar;
    bar.rho_c = op.delta1 > 0.0 ? (op.lambda + n1 * op.Lambda) / (2.0 * op.delta1) : kInf;
    if (rho0 > bar.rho_c) {
        throw InfeasibleError("solve_radial_barrier: rho0 exceeds rho_c = " +
                              std::to_string(bar.rho_c));
    }
    bar.rho0 = rho0;
    bar.a_hat = a_hat;
    bar.b_hat = b_hat;
    bar.omega_hat = omega_hat;
    bar.sign = sign;
    bar.n_dim = op.n_dim;

    // gamma + 1 > ((n-1) Lambda + delta1 rho0) / lambda, integer, doubled
    const double gstar = (n1 * op.Lambda + op.delta1 * rho0) / op.lambda - 1.0;
    bar.gamma = 2.0 * std::max(std::ceil(gstar), 1.0);
    bar.tau2 = 2.0 * (op.lambda + n1 * op.Lambda - op.delta1 * rho0);

    const RadialPhase pos = solve_phase(a_hat, omega_hat, rho0, bar.gamma, bar.tau2);
    bar.alpha = pos.alpha;
    bar.beta = pos.beta;
    bar.c = pos.c;
    bar.negative = solve_phase(-b_hat, omega_hat, rho0, bar.gamma, bar.tau2);
    bar.tau1 = (op.lambda * (bar.gamma + 1.0) - n1 * op.Lambda - op.delta1 * rho0) * bar.gamma *
               std::pow(rho0, -bar.gamma - 2.0);

    // window: halve until the structural residual stays below half its
    // value on the initial front
    bar.eps = rho0;
    const double centre = std::max(envelope_residual(op, bar.n_dim, rho0,
                                                     phase_point(bar, bar.positive(), rho0, 0.0)),
                                   envelope_residual(op, bar.n_dim, rho0,
                                                     phase_point(bar, bar.negative, rho0, 0.0)));
    if (!(centre < 0.0)) {
        throw InfeasibleError("solve_radial_barrier: recipe produced no strict margin");
    }
    double eps = rho0 / (2.0 * (1.0 + omega_hat));
    constexpr std::size_t m = 21;
    for (int it = 0; it < 60; ++it, eps *= 0.5) {
        double worst = -kInf;
        for (std::size_t i = 0; i < m; ++i) {
            const double rho = interior(rho0 - eps, rho0 + eps, i, m);
            for (std::size_t j = 0; j < m; ++j) {
                const double t = interior(-eps, eps, j, m);
                worst = std::max(worst, envelope_residual(op, bar.n_dim, rho, sub_point(bar, rho, t)));
            }
        }
        if (worst <= 0.5 * centre) {
            bar.eps = eps;
            return bar;
        }
    }
    throw InfeasibleError("solve_radial_barrier: no validity window found");
}

BarrierPoint eval_radial_barrier(const RadialPowerBarrier& bar, double x_norm, double t)
{
    if (!(std::abs(x_norm - bar.rho0) < bar.eps) || !(std::abs(t) < bar.eps)) {
        throw DomainError("eval_radial_barrier: point outside the validity window");
    }
    BarrierPoint p = sub_point(bar, x_norm, t);
    if (bar.sign == BarrierSign::Super) {
        p = {-p.phi, -p.phi_t, -p.phi_r, -p.phi_rr};
    }
    return p;
}

MarginReport verify_subsolution_margin(const RadialPowerBarrier& bar, const OperatorSpec& op,
                                       const BSpec& b, std::optional<BnFamily> bn,
                                       std::size_t samples)
{
    if (op.n_dim != bar.n_dim) {
        throw std::invalid_argument("verify_subsolution_margin: dimension mismatch");
    }
    MarginReport rep;
    rep.family = "radial";
    rep.sign = bar.sign;
    Accumulator acc{bar.sign};
    const std::size_t m = side(samples);
    const double e = bar.eps * (1.0 - 1e-9);
    for (std::size_t i = 0; i < m; ++i) {
        const double rho = interior(bar.rho0 - e, bar.rho0 + e, i, m);
        for (std::size_t j = 0; j < m; ++j) {
            const double t = interior(-e, e, j, m);
            const BarrierPoint p = eval_radial_barrier(bar, rho, t);
            const double bt = time_slope(b, bn, p.phi) * p.phi_t;
            const double f = evaluate_radial(op, b, bar.n_dim - 1, rho, p.phi_r, p.phi_rr, p.phi);
            acc.add(bt, f);
        }
    }
    acc.fill(rep);

    const double s = bar.sign == BarrierSign::Sub ? 1.0 : -1.0;
    auto gap_at = [&](double t) {
        const double R = bar.rho0 - bar.omega_hat * t;
        return s * (std::abs(phase_d1(bar.positive(), bar.gamma, R)) -
                    std::abs(phase_d1(bar.negative, bar.gamma, R)));
    };
    rep.flux_gap = gap_at(0.0);
    double window_gap = gap_at(-e);
    for (std::size_t j = 0; j < m; ++j) {
        const double g = gap_at(interior(-e, e, j, m));
        window_gap = s > 0 ? std::min(window_gap, g) : std::max(window_gap, g);
    }
    rep.extras.emplace_back("window_flux_gap", window_gap);
    rep.pass = acc.strict_pass() && s * *rep.flux_gap > 0.0 && s * window_gap > 0.0;
    return rep;
}

// ----------------------------------------------------------- heat kernel

double heat_kernel_bracket_sup(const OperatorSpec& op, double k, double d, double delta)
{
    // t^2 times the bracket is increasing in t, so its sup over (0, 2 delta)
    // is the value at t = 2 delta, a concave quadratic in x1 for k < lambda.
    if (!(k > 0.0) || !(k < op.lambda)) {
        throw DomainError("heat_kernel_bracket_sup: need 0 < k < lambda");
    }
    const double qa = (k - op.lambda) / (4.0 * k * k);
    const double qb = op.delta1 * delta / k;
    const double qc = (op.lambda - k) * delta / k + 4.0 * op.delta0 * delta * delta;
    const double xv = std::clamp(-qb / (2.0 * qa), d, 2.0 * d);
    return qa * xv * xv + qb * xv + qc;
}

HeatKernelBarrier solve_heat_kernel_barrier(const OperatorSpec& op, double d, double delta,
                                            double c_bound)
{
    op.validate();
    if (!(d > 0.0) || !(delta > 0.0) || !(c_bound > 0.0)) {
        throw DomainError("solve_heat_kernel_barrier: d, delta and c must be positive");
    }
    HeatKernelBarrier bar;
    bar.d = d;
    bar.delta = delta;
    bar.c_bound = c_bound;
    double k = 0.5 * std::min(d * d / (4.0 * delta), op.lambda);
    int it = 0;
    while (heat_kernel_bracket_sup(op, k, d, delta) >= 0.0) {
        if (++it > 200) {
            throw InfeasibleError("solve_heat_kernel_barrier: no admissible k");
        }
        k *= 0.5;
    }
    bar.k = k;

    auto log_lower = [&](double eta) { return -0.5 * std::log(eta) - d * d / (4.0 * k * eta); };
    auto log_upper = [&](double eta) {
        return -0.5 * std::log(delta + eta) - d * d / (k * (delta + eta));
    };
    double eta = 0.5 * delta;
    it = 0;
    while (!(log_lower(eta) < log_upper(eta))) {
        if (++it > 200) {
            throw InfeasibleError("solve_heat_kernel_barrier: no admissible eta");
        }
        eta *= 0.5;
    }
    bar.eta = eta;
    bar.eps = std::exp(0.5 * (log_lower(eta) + log_upper(eta)));
    if (!(bar.eps > 0.0)) {
        throw InfeasibleError("solve_heat_kernel_barrier: eps underflows");
    }
    // psi <= eta^-1/2 on the window, so alpha eta^-1/2 = c/2 keeps phi < c
    bar.alpha_scale = 0.5 * c_bound * std::sqrt(eta);
    return bar;
}

BarrierPoint eval_heat_kernel_barrier(const HeatKernelBarrier& bar, double x1, double t)
{
    if (!(x1 >= bar.d && x1 <= 2.0 * bar.d && t >= 0.0 && t <= bar.delta)) {
        throw DomainError("eval_heat_kernel_barrier: point outside the validity window");
    }
    const double s = t + bar.eta;
    const double k = bar.k;
    const double psi = std::exp(-x1 * x1 / (4.0 * k * s)) / std::sqrt(s);
    const double f = psi >= bar.eps ? bar.alpha_scale : 0.5 * bar.alpha_scale;
    BarrierPoint p;
    p.phi = f * (psi - bar.eps);
    p.phi_t = f * psi * (-0.5 / s + x1 * x1 / (4.0 * k * s * s));
    p.phi_r = -f * psi * x1 / (2.0 * k * s);
    p.phi_rr = f * psi * (x1 * x1 / (4.0 * k * k * s * s) - 0.5 / (k * s));
    return p;
}

MarginReport verify_subsolution_margin(const HeatKernelBarrier& bar, const OperatorSpec& op,
                                       const BSpec& b, std::optional<BnFamily> bn,
                                       std::size_t samples)
{
    MarginReport rep;
    rep.family = "heatkernel";
    rep.sign = BarrierSign::Sub;
    Accumulator acc{BarrierSign::Sub};
    const std::size_t m = side(samples);
    const auto n = static_cast<Eigen::Index>(op.n_dim);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
    double phi_max = -kInf;
    for (std::size_t i = 0; i < m; ++i) {
        const double x = endpoints(bar.d, 2.0 * bar.d, i, m);
        for (std::size_t j = 0; j < m; ++j) {
            const double t = bar.delta * static_cast<double>(j + 1) / static_cast<double>(m);
            const BarrierPoint q = eval_heat_kernel_barrier(bar, x, t);
            M(0, 0) = q.phi_rr;
            p(0) = q.phi_r;
            acc.add(time_slope(b, bn, q.phi) * q.phi_t, evaluate_operator(op, M, p, q.phi, b));
            phi_max = std::max(phi_max, q.phi);
        }
    }
    acc.fill(rep);

    // psi is decreasing in x1: extremes over [d, 2d] sit at the ends
    const double start = eval_heat_kernel_barrier(bar, bar.d, 0.0).phi;
    const double finish = eval_heat_kernel_barrier(bar, 2.0 * bar.d, bar.delta).phi;
    phi_max = std::max(phi_max, eval_heat_kernel_barrier(bar, bar.d, 0.0).phi);
    const double bracket = heat_kernel_bracket_sup(op, bar.k, bar.d, bar.delta);
    rep.extras.emplace_back("max_phi_at_t0", start);
    rep.extras.emplace_back("min_phi_at_delta", finish);
    rep.extras.emplace_back("max_phi_minus_c", phi_max - bar.c_bound);
    rep.extras.emplace_back("bracket_sup", bracket);

    // front where psi = eps: x1^2 = 4 k s log(1 / (eps sqrt(s)))
    for (std::size_t j = 0; j < m && !rep.flux_gap; ++j) {
        const double t = bar.delta * static_cast<double>(j + 1) / static_cast<double>(m);
        const double s = t + bar.eta;
        const double arg = -std::log(bar.eps * std::sqrt(s));
        if (arg <= 0.0) {
            continue;
        }
        const double xf = std::sqrt(4.0 * bar.k * s * arg);
        if (xf >= bar.d && xf <= 2.0 * bar.d) {
            const double grad = bar.eps * xf / (2.0 * bar.k * s);
            rep.flux_gap = bar.alpha_scale * grad - 0.5 * bar.alpha_scale * grad;
        }
    }
    rep.pass = acc.strict_pass() && start < 0.0 && finish > 0.0 && phi_max < bar.c_bound &&
               bracket < 0.0 && (!rep.flux_gap || *rep.flux_gap > 0.0);
    return rep;
}

// ------------------------------------------------------ logarithmic barrier

namespace {

// Max of f over [lo, hi]: uniform nodes plus extra points, then golden-section
// refinement inside the bracket of the best node.
double maximize_sampled(const std::function<double(double)>& f, double lo, double hi,
                        const std::vector<double>& extra)
{
    constexpr std::size_t nodes = 1000;
    double best = -kInf;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < nodes; ++i) {
        const double v = f(endpoints(lo, hi, i, nodes));
        if (v > best) {
            best = v;
            arg = i;
        }
    }
    for (double s : extra) {
        if (s >= lo && s <= hi) {
            best = std::max(best, f(s));
        }
    }
    double a = endpoints(lo, hi, arg == 0 ? 0 : arg - 1, nodes);
    double c = endpoints(lo, hi, std::min(arg + 1, nodes - 1), nodes);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = c - g * (c - a);
    double x2 = a + g * (c - a);
    double f1 = f(x1);
    double f2 = f(x2);
    for (int it = 0; it < 80; ++it) {
        if (f1 > f2) {
            c = x2;
            x2 = x1;
            f2 = f1;
            x1 = c - g * (c - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (c - a);
            f2 = f(x2);
        }
        best = std::max({best, f1, f2});
    }
    return best;
}

} // namespace

double LogDivBarrier::psi(double s) const
{
    return std::log1p(a * k * s) / k;
}

double LogDivBarrier::t_min() const
{
    return omega > 0.0 ? -rho0 / (2.0 * omega) : -kInf;
}

LogDivBarrier solve_logdiv_barrier(const PsiSpec& psi, const BSpec& bspec, double omega,
                                   double rho0, double M, int n_dim)
{
    if (!(omega >= 0.0) || !(rho0 > 0.0) || !(M > 0.0) || n_dim < 1) {
        throw DomainError("solve_logdiv_barrier: need omega >= 0, rho0 > 0, M > 0, n >= 1");
    }
    LogDivBarrier bar;
    bar.omega = omega;
    bar.rho0 = rho0;
    bar.M = M;
    bar.n_dim = n_dim;

    // left limits at table breakpoints, where b' jumps
    std::vector<double> extra;
    for (std::size_t i = 1; i < bspec.breakpoints.size(); ++i) {
        extra.push_back(bspec.breakpoints[i]);
        extra.push_back(std::nextafter(bspec.breakpoints[i], 0.0));
    }
    auto g1 = [&](double s) { return omega * b_derivative(bspec, s) / psi_eval(psi, b_eval(bspec, s)); };
    auto g2 = [&](double s) {
        const double y = b_eval(bspec, s);
        return std::abs(psi_derivative(psi, y)) * b_derivative(bspec, s) / psi_eval(psi, y);
    };
    bar.k1 = maximize_sampled(g1, 0.0, 3.0 * M, extra) + 2.0 * (n_dim - 1) / rho0;
    bar.k2 = maximize_sampled(g2, 0.0, 3.0 * M, extra);
    if (bar.k1 == 0.0) {
        // n = 1, omega = 0: any positive upper bound serves
        bar.k1 = 1.0 / rho0;
    }
    bar.eta0 = 1.0 / bar.k1;
    bar.eta = 0.5 * bar.eta0;

    auto admissible = [&](double k) {
        return (k - bar.k2) / (k * bar.k1) - 1.0 / k > bar.eta &&
               std::log((k - bar.k2) / bar.k1) / k < 2.0 * M;
    };
    double k = bar.k2 + 1.0;
    int it = 0;
    while (!admissible(k)) {
        if (++it > 200) {
            throw InfeasibleError("solve_logdiv_barrier: no admissible k");
        }
        k *= 2.0;
    }
    bar.k = k;
    // log(a k eta + 1) / k = 5M/2, the middle of (2M, 3M)
    bar.a = std::expm1(2.5 * M * k) / (k * bar.eta);
    if (!std::isfinite(bar.a)) {
        throw InfeasibleError("solve_logdiv_barrier: a exceeds double range");
    }
    const double top = bar.psi(bar.eta);
    if (!(top > 2.0 * M && top < 3.0 * M) || !(bar.a > 1.0)) {
        throw InfeasibleError("solve_logdiv_barrier: computed a misses (2M, 3M)");
    }
    return bar;
}

namespace {

// Point at offset s = |x| - omega t - rho0 from the front.
BarrierPoint logdiv_point(const LogDivBarrier& bar, double s)
{
    const double q = bar.a * bar.k * s + 1.0;
    BarrierPoint p;
    p.phi = bar.psi(s);
    const double d1 = bar.a / q;
    p.phi_t = -bar.omega * d1;
    p.phi_r = d1;
    p.phi_rr = -bar.a * bar.a * bar.k / (q * q);
    return p;
}

} // namespace

BarrierPoint eval_logdiv_barrier(const LogDivBarrier& bar, double x_norm, double t)
{
    const double s = x_norm - bar.omega * t - bar.rho0;
    if (!(s >= 0.0 && s <= bar.eta) || !(t > bar.t_min())) {
        throw DomainError("eval_logdiv_barrier: point outside the validity window");
    }
    return logdiv_point(bar, s);
}

MarginReport verify_subsolution_margin(const LogDivBarrier& bar, const OperatorSpec& op,
                                       const BSpec& b, std::optional<BnFamily> bn,
                                       std::size_t samples)
{
    if (op.n_dim != bar.n_dim) {
        throw std::invalid_argument("verify_subsolution_margin: dimension mismatch");
    }
    MarginReport rep;
    rep.family = "logdiv";
    rep.sign = BarrierSign::Super;
    Accumulator acc{BarrierSign::Super};
    const std::size_t m = side(samples);
    const double T = std::min(-bar.t_min(), 1.0);
    for (std::size_t j = 0; j < m; ++j) {
        const double t = endpoints(-0.99 * T, T, j, m);
        for (std::size_t i = 0; i < m; ++i) {
            const double s = endpoints(0.0, bar.eta, i, m);
            const double rho = bar.rho0 + bar.omega * t + s;
            const BarrierPoint p = logdiv_point(bar, s);
            const double f = evaluate_radial(op, b, bar.n_dim - 1, rho, p.phi_r, p.phi_rr, p.phi);
            acc.add(time_slope(b, bn, p.phi) * p.phi_t, f);
        }
    }
    acc.fill(rep);
    const double psi0 = bar.psi(0.0);
    const double top = bar.psi(bar.eta) - 2.0 * bar.M;
    rep.extras.emplace_back("psi_at_0", psi0);
    rep.extras.emplace_back("psi_at_eta_minus_2M", top);
    rep.pass = acc.strict_pass() && psi0 == 0.0 && top > 0.0;
    return rep;
}

// ------------------------------------------------------------- parabolas

ParabolaBarrier ParabolaBarrier::decr_parabola(const OperatorSpec& op)
{
    op.validate();
    ParabolaBarrier bar;
    bar.variant = Variant::DecrParabola;
    bar.n_dim = op.n_dim;
    bar.Lambda = op.Lambda;
    bar.gamma = std::min(1.0 / (16.0 * op.n_dim * op.lambda + 8.0 * op.delta1 + 2.0 * op.delta0), 1.0);
    return bar;
}

ParabolaBarrier ParabolaBarrier::eps_eta(const OperatorSpec& op, double M, double r, double eps,
                                         double eta)
{
    op.validate();
    if (!(M > 0.0) || !(r > 0.0) || !(eps > 0.0) || !(eta > 0.0) || !(eta < eps)) {
        throw DomainError("eps_eta barrier: need M, r > 0 and 0 < eta < eps");
    }
    const double nL = op.n_dim * op.Lambda;
    const double se = std::sqrt(eps);
    const double dsum = op.delta0 + op.delta1;
    if (dsum > 0.0 && !(se < 2.0 * nL / (3.0 * dsum))) {
        throw InfeasibleError("eps_eta barrier: eps^1/2 >= 2 n Lambda / (3 (delta0 + delta1))");
    }
    if (!(std::cbrt(r * eps / (8.0 * nL)) > se)) {
        throw InfeasibleError("eps_eta barrier: cbrt(r eps / (8 n Lambda)) <= eps^1/2");
    }
    ParabolaBarrier bar;
    bar.variant = Variant::EpsEta;
    bar.M = M;
    bar.eps = eps;
    bar.eta = eta;
    bar.r = r;
    bar.n_dim = op.n_dim;
    bar.Lambda = op.Lambda;
    return bar;
}

BarrierPoint eval_parabola_barrier(const ParabolaBarrier& bar, double x_norm, double t)
{
    BarrierPoint p;
    if (bar.variant == ParabolaBarrier::Variant::DecrParabola) {
        const double q = -t / (2.0 * bar.gamma) - 4.0 * x_norm * x_norm + 1.0;
        if (q > 0.0) {
            p = {q, -1.0 / (2.0 * bar.gamma), -8.0 * x_norm, -8.0};
        }
        return p;
    }
    const double nL = bar.n_dim * bar.Lambda;
    if (!(x_norm < std::sqrt(bar.eps)) || !(t > -bar.eps / (8.0 * nL)) || !(t <= 0.0)) {
        throw DomainError("eval_parabola_barrier: point outside the validity window");
    }
    const double f = 4.0 * bar.M / bar.eps;
    p.phi = f * (4.0 * nL * t + x_norm * x_norm + bar.eta);
    p.phi_t = 4.0 * f * nL;
    p.phi_r = 2.0 * f * x_norm;
    p.phi_rr = 2.0 * f;
    return p;
}

MarginReport verify_subsolution_margin(const ParabolaBarrier& bar, const OperatorSpec& op,
                                       const BSpec& b, std::optional<BnFamily> bn,
                                       std::size_t samples)
{
    if (op.n_dim != bar.n_dim) {
        throw std::invalid_argument("verify_subsolution_margin: dimension mismatch");
    }
    MarginReport rep;
    const std::size_t m = side(samples);
    auto residual_at = [&](Accumulator& acc, double rho, double t) {
        const BarrierPoint p = eval_parabola_barrier(bar, rho, t);
        const double f = evaluate_radial(op, b, bar.n_dim - 1, rho, p.phi_r, p.phi_rr, p.phi);
        acc.add(time_slope(b, bn, p.phi) * p.phi_t, f);
    };
    if (bar.variant == ParabolaBarrier::Variant::DecrParabola) {
        rep.family = "decr-parabola";
        rep.sign = BarrierSign::Sub;
        rep.strict = false;
        Accumulator acc{BarrierSign::Sub};
        // the positive set {phi > 0} for t in [0, gamma]
        for (std::size_t j = 0; j < m; ++j) {
            const double t = endpoints(0.0, bar.gamma, j, m);
            const double rmax = 0.5 * std::sqrt(1.0 - t / (2.0 * bar.gamma));
            for (std::size_t i = 0; i < m; ++i) {
                residual_at(acc, interior(0.0, rmax, i, m), t);
            }
        }
        acc.fill(rep);
        rep.pass = rep.worst_relative <= 1e-12;
        return rep;
    }
    rep.family = "eps-eta";
    rep.sign = BarrierSign::Super;
    Accumulator acc{BarrierSign::Super};
    const double nL = bar.n_dim * bar.Lambda;
    const double t0 = -bar.eps / (8.0 * nL);
    const double se = std::sqrt(bar.eps);
    double boundary = kInf;
    for (std::size_t j = 0; j < m; ++j) {
        const double t = interior(t0, 0.0, j, m);
        for (std::size_t i = 0; i < m; ++i) {
            const double rho = interior(0.0, se, i, m);
            if (eval_parabola_barrier(bar, rho, t).phi > 0.0) {
                residual_at(acc, rho, t);
            }
        }
        const double f = 4.0 * bar.M / bar.eps;
        boundary = std::min(boundary, f * (4.0 * nL * t + bar.eps + bar.eta) - 2.0 * bar.M);
    }
    acc.fill(rep);
    rep.extras.emplace_back("boundary_min_minus_2M", boundary);
    rep.pass = acc.strict_pass() && boundary >= 0.0;
    return rep;
}

// ---------------------------------------------------------- offset sets

std::vector<std::pair<double, double>> sign_intervals(const std::vector<double>& x,
                                                      const std::vector<double>& u, bool positive)
{
    if (x.size() != u.size() || x.size() < 2) {
        throw std::invalid_argument("sign_intervals: need matching samples, at least 2");
    }
    std::vector<std::pair<double, double>> out;
    auto in = [&](double v) { return positive ? v > 0.0 : v < 0.0; };
    auto crossing = [&](std::size_t i) {
        return x[i] + (x[i + 1] - x[i]) * u[i] / (u[i] - u[i + 1]);
    };
    std::optional<double> open;
    if (in(u[0])) {
        open = x[0];
    }
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const bool a = in(u[i]);
        const bool c = in(u[i + 1]);
        if (a && !c) {
            out.emplace_back(*open, u[i + 1] == 0.0 ? x[i + 1] : crossing(i));
            open.reset();
        } else if (!a && c) {
            open = u[i] == 0.0 ? x[i] : crossing(i);
        }
    }
    if (open) {
        out.emplace_back(*open, x.back());
    }
    return out;
}

OffsetSet front_offset_sets(const std::vector<double>& x, const std::vector<double>& u0, double t,
                            BarrierSign sign)
{
    if (!(t >= 0.0)) {
        throw DomainError("front_offset_sets: t must be nonnegative");
    }
    const double d = std::pow(t, 0.25);
    const double lo = x.front();
    const double hi = x.back();
    const bool super = sign == BarrierSign::Super;
    const auto base = sign_intervals(x, u0, super);

    // merged closures of the base intervals widened by d
    std::vector<std::pair<double, double>> grown;
    for (auto [a, b] : base) {
        a -= d;
        b += d;
        if (!grown.empty() && a <= grown.back().second) {
            grown.back().second = std::max(grown.back().second, b);
        } else {
            grown.emplace_back(a, b);
        }
    }
    OffsetSet out;
    out.mask.resize(x.size());
    if (super) {
        for (const auto& [a, b] : grown) {
            out.intervals.emplace_back(std::max(a, lo), std::min(b, hi));
        }
        // sorted sweep over the nodes against the open grown intervals
        std::size_t k = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            while (k < grown.size() && grown[k].second <= x[i]) {
                ++k;
            }
            out.mask[i] = k < grown.size() && grown[k].first < x[i];
        }
        return out;
    }
    double cursor = lo;
    for (const auto& [a, b] : grown) {
        if (a > cursor) {
            out.intervals.emplace_back(cursor, std::min(a, hi));
        }
        cursor = std::max(cursor, b);
    }
    if (cursor < hi) {
        out.intervals.emplace_back(cursor, hi);
    }
    std::size_t k = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        while (k < grown.size() && grown[k].second < x[i]) {
            ++k;
        }
        // dist(x, base) > d means outside every closed grown interval
        out.mask[i] = !(k < grown.size() && grown[k].first <= x[i]);
    }
    return out;
}

} // namespace ellpar
