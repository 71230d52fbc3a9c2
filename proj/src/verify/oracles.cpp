#include "ellpar/oracles.hpp"

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <random>
#include <stdexcept>

namespace ellpar::oracle {

namespace {

bool closed_body(double dx_norm, double dt, double r)
{
    const double e = dx_norm > r ? dx_norm - r : 0.0;
    return e * e * e + dt * dt <= r * r;
}

} // namespace

double bn_mpfr(int n, double s)
{
    constexpr mpfr_prec_t prec = 256;
    mpfr_t nn, a, b, num, den, out;
    mpfr_inits2(prec, nn, a, b, num, den, out, static_cast<mpfr_ptr>(nullptr));
    mpfr_set_si(nn, n, MPFR_RNDN);
    mpfr_exp(a, nn, MPFR_RNDN); // e^n
    mpfr_set_d(b, s, MPFR_RNDN);
    mpfr_mul(b, b, nn, MPFR_RNDN);
    mpfr_mul(b, b, nn, MPFR_RNDN);
    mpfr_exp(b, b, MPFR_RNDN);        // e^{n^2 s}
    mpfr_add(num, a, b, MPFR_RNDN);   // e^n + e^{n^2 s}
    mpfr_add_ui(den, a, 1, MPFR_RNDN); // e^n + 1
    mpfr_div(out, num, den, MPFR_RNDN);
    mpfr_log(out, out, MPFR_RNDN);
    mpfr_div(out, out, nn, MPFR_RNDN);
    mpfr_div(out, out, nn, MPFR_RNDN);
    const double v = mpfr_get_d(out, MPFR_RNDN);
    mpfr_clears(nn, a, b, num, den, out, static_cast<mpfr_ptr>(nullptr));
    return v;
}

bool minkowski_contains_sampled(std::span<const double> dx, double dt, double r,
                                std::size_t samples)
{
    if (dx.empty() || dx.size() > 2) {
        throw std::invalid_argument("minkowski_contains_sampled: 1 or 2 space dimensions");
    }
    auto in_e = [&](double y0, double y1) {
        const double a = dx[0] - y0;
        const double b = dx.size() == 2 ? dx[1] - y1 : 0.0;
        const double d = std::sqrt(a * a + b * b);
        return d * d * d + dt * dt < r * r;
    };
    if (dx.size() == 1) {
        for (std::size_t k = 0; k < samples; ++k) {
            const double y = -r + 2.0 * r * (static_cast<double>(k) + 0.5) / static_cast<double>(samples);
            if (in_e(y, 0.0)) {
                return true;
            }
        }
        return false;
    }
    // polar lattice with one ring hugging the rim, so the sampled union
    // reaches to within the angular resolution of the true sum
    const std::vector<double> rings{1.0 - 1e-9, 0.875, 0.625, 0.375, 0.125};
    const std::size_t spokes = std::max<std::size_t>(1, samples / rings.size());
    for (double frac : rings) {
        const double rad = r * frac;
        for (std::size_t b = 0; b < spokes; ++b) {
            const double th = 2.0 * std::numbers::pi * static_cast<double>(b) / static_cast<double>(spokes);
            if (in_e(rad * std::cos(th), rad * std::sin(th))) {
                return true;
            }
        }
    }
    return false;
}

double lateral_distance_scan(double r, double s, double t, std::size_t steps)
{
    // Body centred at (xi, -r) with |xi| = r - s; the observation point is
    // the origin. Boundary points of the slice are found by bisection of the
    // membership test along rays from xi, then the nearest one is taken.
    const double xi = r - s;
    const double dt = t + r;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < steps; ++k) {
        const double th = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(steps);
        double lo = 0.0;
        double hi = 4.0 * r + 1.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (closed_body(mid, dt, r) ? lo : hi) = mid;
        }
        const double bx = xi + lo * std::cos(th);
        const double by = lo * std::sin(th);
        best = std::min(best, std::hypot(bx, by));
    }
    return best;
}

PucciBrute pucci_bruteforce_2x2(const Eigen::Matrix2d& M, double lambda, double Lambda,
                                std::size_t samples, std::uint64_t seed)
{
    PucciBrute out{-std::numeric_limits<double>::infinity(),
                   std::numeric_limits<double>::infinity()};
    auto visit = [&](double a1, double a2, double th) {
        const double c = std::cos(th);
        const double s = std::sin(th);
        Eigen::Matrix2d R;
        R << c, -s, s, c;
        const Eigen::Matrix2d A = R * Eigen::Vector2d(a1, a2).asDiagonal() * R.transpose();
        const double v = (A * M).trace();
        out.sup = std::max(out.sup, v);
        out.inf = std::min(out.inf, v);
    };
    const std::size_t half = samples / 2;
    const std::size_t angles = std::max<std::size_t>(1, half / 4);
    for (std::size_t k = 0; k < angles; ++k) {
        const double th = std::numbers::pi * static_cast<double>(k) / static_cast<double>(angles);
        visit(Lambda, lambda, th);
        visit(lambda, Lambda, th);
        visit(Lambda, Lambda, th);
        visit(lambda, lambda, th);
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ev(lambda, Lambda);
    std::uniform_real_distribution<double> ang(0.0, std::numbers::pi);
    for (std::size_t k = half; k < samples; ++k) {
        visit(ev(rng), ev(rng), ang(rng));
    }
    return out;
}

namespace {

// psi'' such that F = 0 at (rho, psi', psi''), for trace and Pucci kinds.
double solve_second(const OperatorSpec& op, int tangential, double rho, double d1)
{
    const double et = d1 / rho;
    const double m = tangential;
    double kt = 1.0;
    double kpos = 1.0;
    double kneg = 1.0;
    switch (op.kind) {
    case OperatorSpec::Kind::Trace:
        break;
    case OperatorSpec::Kind::PucciPlus:
        kt = et > 0.0 ? op.Lambda : op.lambda;
        kpos = op.Lambda;
        kneg = op.lambda;
        break;
    case OperatorSpec::Kind::PucciMinus:
        kt = et > 0.0 ? op.lambda : op.Lambda;
        kpos = op.lambda;
        kneg = op.Lambda;
        break;
    default:
        throw std::invalid_argument("radial_shooting: trace or Pucci operators only");
    }
    const double target = -kt * m * et;
    return target > 0.0 ? target / kpos : target / kneg;
}

struct State {
    double u;
    double v;
};

// Integrates from rho_lo with initial slope v0, storing (u, v) at each node.
std::vector<State> integrate(const OperatorSpec& op, int tangential, double rho_lo, double h,
                             std::size_t steps, double u0, double v0)
{
    std::vector<State> out(steps + 1);
    out[0] = {u0, v0};
    auto f = [&](double rho, State s) {
        return State{s.v, solve_second(op, tangential, rho, s.v)};
    };
    for (std::size_t k = 0; k < steps; ++k) {
        const double rho = rho_lo + h * static_cast<double>(k);
        const State s = out[k];
        const State k1 = f(rho, s);
        const State k2 = f(rho + 0.5 * h, {s.u + 0.5 * h * k1.u, s.v + 0.5 * h * k1.v});
        const State k3 = f(rho + 0.5 * h, {s.u + 0.5 * h * k2.u, s.v + 0.5 * h * k2.v});
        const State k4 = f(rho + h, {s.u + h * k3.u, s.v + h * k3.v});
        out[k + 1] = {s.u + h / 6.0 * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u),
                      s.v + h / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v)};
    }
    return out;
}

} // namespace

std::vector<double> radial_shooting(const OperatorSpec& op, double rho_lo, double rho_hi,
                                    double u_lo, double u_hi, std::size_t steps,
                                    std::span<const double> rho_out)
{
    const int tangential = op.n_dim - 1;
    const double h = (rho_hi - rho_lo) / static_cast<double>(steps);
    auto miss = [&](double v0) {
        return integrate(op, tangential, rho_lo, h, steps, u_lo, v0).back().u - u_hi;
    };
    double s0 = (u_hi - u_lo) / (rho_hi - rho_lo);
    double s1 = s0 * 1.1 + 1e-3;
    double f0 = miss(s0);
    double f1 = miss(s1);
    for (int it = 0; it < 200 && std::abs(f1) > 1e-15 && f1 != f0; ++it) {
        const double s2 = s1 - f1 * (s1 - s0) / (f1 - f0);
        s0 = s1;
        f0 = f1;
        s1 = s2;
        f1 = miss(s1);
    }
    const auto path = integrate(op, tangential, rho_lo, h, steps, u_lo, s1);

    std::vector<double> out;
    out.reserve(rho_out.size());
    for (double rho : rho_out) {
        const double pos = std::clamp((rho - rho_lo) / h, 0.0, static_cast<double>(steps));
        auto k = static_cast<std::size_t>(pos);
        if (k >= steps) {
            k = steps - 1;
        }
        const double th = pos - static_cast<double>(k);
        const State a = path[k];
        const State b = path[k + 1];
        // cubic Hermite
        const double h00 = 2 * th * th * th - 3 * th * th + 1;
        const double h10 = th * th * th - 2 * th * th + th;
        const double h01 = -2 * th * th * th + 3 * th * th;
        const double h11 = th * th * th - th * th;
        out.push_back(h00 * a.u + h10 * h * a.v + h01 * b.u + h11 * h * b.v);
    }
    return out;
}

BruteConvolution convolve_bruteforce(const SpaceTimeField& f, double r, bool sup,
                                     const std::vector<std::size_t>& out_levels,
                                     const std::vector<std::size_t>& out_nodes)
{
    const std::size_t N = f.nodes();
    BruteConvolution out;
    out.values.assign(out_levels.size(), std::vector<double>(out_nodes.size()));
    out.dual.assign(out_levels.size(), std::vector<std::size_t>(out_nodes.size()));
    for (std::size_t a = 0; a < out_levels.size(); ++a) {
        const std::size_t j = out_levels[a];
        for (std::size_t b = 0; b < out_nodes.size(); ++b) {
            const std::size_t i = out_nodes[b];
            bool found = false;
            double best = 0.0;
            std::size_t arg = 0;
            for (std::size_t jj = 0; jj < f.levels(); ++jj) {
                for (std::size_t ii = 0; ii < N; ++ii) {
                    if (!closed_body(std::abs(f.x[ii] - f.x[i]), f.times[jj] - f.times[j], r)) {
                        continue;
                    }
                    const double v = f.values[jj][ii];
                    if (!found || (sup ? v > best : v < best)) {
                        found = true;
                        best = v;
                        arg = jj * N + ii;
                    }
                }
            }
            out.values[a][b] = best;
            out.dual[a][b] = arg;
        }
    }
    return out;
}

std::vector<std::vector<bool>> dilate_bruteforce(const SpaceTimeField& f,
                                                 const std::vector<std::vector<bool>>& mask,
                                                 double r)
{
    const std::size_t N = f.nodes();
    std::vector<std::vector<bool>> out(f.levels(), std::vector<bool>(N, false));
    for (std::size_t j = 0; j < f.levels(); ++j) {
        for (std::size_t i = 0; i < N; ++i) {
            for (std::size_t jj = 0; jj < f.levels() && !out[j][i]; ++jj) {
                for (std::size_t ii = 0; ii < N; ++ii) {
                    if (mask[jj][ii] &&
                        closed_body(std::abs(f.x[ii] - f.x[i]), f.times[jj] - f.times[j], r)) {
                        out[j][i] = true;
                        break;
                    }
                }
            }
        }
    }
    return out;
}

} // namespace ellpar::oracle
