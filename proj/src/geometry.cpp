#include "ellpar/geometry.hpp"

#include "ellpar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ellpar::geometry {

namespace {

double radial_excess(double r, double dx_norm) noexcept
{
    const double e = std::max(dx_norm - r, 0.0);
    return e * e * e;
}

} // namespace

XiShape::XiShape(double r) : r_(r)
{
    if (!(r > 0.0) || !std::isfinite(r)) {
        throw DomainError("XiShape: radius must be positive and finite");
    }
}

bool xi_contains(const XiShape& shape, std::span<const double> dx, double dt)
{
    double sq = 0.0;
    for (double c : dx) {
        sq += c * c;
    }
    return xi_contains(shape, std::sqrt(sq), dt);
}

bool xi_contains(const XiShape& shape, double dx_norm, double dt) noexcept
{
    const double r = shape.r();
    return radial_excess(r, dx_norm) + dt * dt < r * r;
}

bool xi_contains_closed(const XiShape& shape, double dx_norm, double dt) noexcept
{
    const double r = shape.r();
    return radial_excess(r, dx_norm) + dt * dt <= r * r;
}

double xi_slice_radius(const XiShape& shape, double t)
{
    const double r = shape.r();
    if (std::abs(t) > r) {
        throw DomainError("xi_slice_radius: |t| exceeds r");
    }
    return r + std::cbrt(r * r - t * t);
}

double xi_lateral_distance(double r, double s, double t)
{
    if (!(r > 0.0) || !(s > 0.0) || s > r) {
        throw DomainError("xi_lateral_distance: requires 0 < s <= r");
    }
    if (!(t > -r) || !(t < 0.0)) {
        throw DomainError("xi_lateral_distance: t must lie in (-r, 0)");
    }
    const double tr = t + r;
    return s + std::cbrt(r * r - tr * tr);
}

HarnackChain harnack_chain(double r, double s)
{
    if (!(r > 0.0) || !(s > 0.0) || s > r) {
        throw DomainError("harnack_chain: requires 0 < s <= r");
    }
    HarnackChain chain;
    chain.r = r;
    chain.s = s;
    chain.a.push_back(std::min(s, r / 16.0));
    chain.h.push_back(0.0);
    if (s >= r / 16.0) {
        chain.k = 0;
        return chain;
    }

    const double target = r / 2.0 + s;
    // a_j grows doubly exponentially towards r, so this terminates after
    // O(log log(r/s)) steps; the cap only guards against NaN input.
    constexpr std::size_t max_len = 4096;
    while (chain.a.back() < target) {
        if (chain.a.size() >= max_len) {
            throw DomainError("harnack_chain: recurrence failed to terminate");
        }
        const double aj = chain.a.back();
        const double d = aj - s;
        chain.h.push_back(chain.h.back() - aj * aj);
        chain.a.push_back(std::cbrt(r * aj * aj + d * d * d) + s);
    }
    chain.k = chain.a.size() - 1;
    return chain;
}

double harnack_radius_lower_bound(double r, double s, std::size_t j)
{
    return r * std::pow(s / r, std::pow(2.0 / 3.0, static_cast<double>(j)));
}

double harnack_length_bound(double r, double s)
{
    if (!(r > 0.0) || !(s > 0.0) || s > r) {
        throw DomainError("harnack_length_bound: requires 0 < s <= r");
    }
    return std::log(std::log(s / r) / std::log(0.5)) / std::log(1.5) + 1.0;
}

double harnack_lower_bound(double alpha, double s, double r, double vmin)
{
    if (!(alpha > 0.0) || !(alpha < 1.0)) {
        throw DomainError("harnack_lower_bound: alpha must lie in (0, 1)");
    }
    if (!(r > 0.0) || !(s > 0.0) || s > r) {
        throw DomainError("harnack_lower_bound: requires 0 < s <= r");
    }
    if (!(vmin > 0.0)) {
        throw DomainError("harnack_lower_bound: vmin must be positive");
    }
    const double base = std::log(s / r) / std::log(0.5);
    if (base == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    const double exponent = std::log(alpha) / std::log(1.5);
    return alpha * std::pow(base, exponent) * vmin;
}

} // namespace ellpar::geometry
