#include "ellpar/grid.hpp"

#include "ellpar/errors.hpp"

#include <cmath>

namespace ellpar {

Geometry Geometry::interval(double lo, double hi)
{
    return Geometry{Kind::Interval, lo, hi, 1};
}

Geometry Geometry::annulus(double r_lo, double r_hi, int n_dim)
{
    return Geometry{Kind::Annulus, r_lo, r_hi, n_dim};
}

Geometry Geometry::punctured_ball(double r_hi, int n_dim)
{
    return Geometry{Kind::PuncturedBall, 0.0, r_hi, n_dim};
}

Grid make_grid(const Geometry& geom, std::size_t nodes)
{
    if (nodes < 3) {
        throw DomainError("grid needs at least 3 nodes");
    }
    if (geom.n_dim < 1) {
        throw DomainError("dimension must be >= 1");
    }
    if (geom.kind == Geometry::Kind::Interval && geom.n_dim != 1) {
        throw DomainError("interval geometry is one-dimensional");
    }
    if (geom.kind == Geometry::Kind::Annulus && !(geom.lo > 0.0)) {
        throw DomainError("annulus inner radius must be positive");
    }
    const double lo = geom.kind == Geometry::Kind::PuncturedBall ? 0.0 : geom.lo;
    if (!(geom.hi > lo) || !std::isfinite(geom.hi) || !std::isfinite(lo)) {
        throw DomainError("empty domain");
    }

    Grid g;
    g.geom = geom;
    g.x.resize(nodes);
    const auto n = static_cast<double>(nodes);
    if (geom.kind == Geometry::Kind::PuncturedBall) {
        // nodes at 2h, 3h, ..., (N+1)h = r_hi
        g.h = geom.hi / (n + 1.0);
        for (std::size_t i = 0; i < nodes; ++i) {
            g.x[i] = g.h * static_cast<double>(i + 2);
        }
        g.geom.lo = g.x.front();
    } else {
        g.h = (geom.hi - geom.lo) / (n - 1.0);
        for (std::size_t i = 0; i < nodes; ++i) {
            g.x[i] = geom.lo + g.h * static_cast<double>(i);
        }
    }
    g.x.back() = geom.hi;
    return g;
}

std::vector<double> zero_crossings(const std::vector<double>& x, const std::vector<double>& u)
{
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < u.size(); ++i) {
        const double a = u[i];
        const double b = u[i + 1];
        if (a == 0.0) {
            out.push_back(x[i]);
        } else if ((a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0)) {
            out.push_back(x[i] + (x[i + 1] - x[i]) * a / (a - b));
        }
    }
    if (!u.empty() && u.back() == 0.0) {
        out.push_back(x.back());
    }
    return out;
}

void require_same_grid(const SpaceTimeField& a, const SpaceTimeField& b)
{
    if (a.x != b.x || a.times != b.times) {
        throw GridMismatch("fields are sampled on different grids");
    }
}

} // namespace ellpar
