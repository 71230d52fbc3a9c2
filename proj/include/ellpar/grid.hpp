// Spatial geometries, uniform 1D grids and sampled space-time fields.
#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace ellpar {

struct Geometry {
    enum class Kind { Interval, Annulus, PuncturedBall };

    Kind kind = Kind::Interval;
    double lo = -1.0; ///< ignored for PuncturedBall (inner radius is 2h)
    double hi = 1.0;
    int n_dim = 1;

    static Geometry interval(double lo, double hi);
    static Geometry annulus(double r_lo, double r_hi, int n_dim);
    static Geometry punctured_ball(double r_hi, int n_dim);

    [[nodiscard]] bool radial() const noexcept { return kind != Kind::Interval; }
};

/// Uniform node set. Node 0 and node N-1 are Dirichlet nodes except for the
/// punctured ball, whose inner node carries a mirror (no-flux) condition.
struct Grid {
    Geometry geom;
    std::vector<double> x;
    double h = 0.0;

    [[nodiscard]] std::size_t size() const noexcept { return x.size(); }
    [[nodiscard]] bool radial() const noexcept { return geom.radial(); }
    /// Multiplicity of the tangential Hessian eigenvalue (n - 1 on radial grids).
    [[nodiscard]] int tangential() const noexcept { return radial() ? geom.n_dim - 1 : 0; }
    [[nodiscard]] bool inner_mirror() const noexcept
    {
        return geom.kind == Geometry::Kind::PuncturedBall;
    }
    /// First node whose value is an unknown.
    [[nodiscard]] std::size_t first_unknown() const noexcept { return inner_mirror() ? 0 : 1; }
};

/// Throws DomainError for fewer than 3 nodes or an empty domain.
[[nodiscard]] Grid make_grid(const Geometry& geom, std::size_t nodes);

/// Solution samples on a tensor grid; values[j][i] is node i at times[j].
struct SpaceTimeField {
    std::vector<double> x;
    std::vector<double> times;
    std::vector<std::vector<double>> values;
    /// Zero crossings per time level (linear interpolation).
    std::vector<std::vector<double>> front;
    std::optional<double> extinction_time;

    [[nodiscard]] std::size_t nodes() const noexcept { return x.size(); }
    [[nodiscard]] std::size_t levels() const noexcept { return times.size(); }
    [[nodiscard]] double at(std::size_t j, std::size_t i) const { return values[j][i]; }
};

/// Linear-interpolated zero crossings of one time level.
[[nodiscard]] std::vector<double> zero_crossings(const std::vector<double>& x,
                                                 const std::vector<double>& u);

/// Throws GridMismatch unless node coordinates and times agree exactly.
void require_same_grid(const SpaceTimeField& a, const SpaceTimeField& b);

} // namespace ellpar
