// Geometry of the regularization body Xi_r = D_r + E_r.
//
//   D_r = { (x, 0) : |x| < r }                 (space disk)
//   E_r = { (x, t) : |x|^3 + |t|^2 < r^2 }     (flattened body)
//
// The Minkowski sum reduces to a radial test: the closest point of D_r to x
// is at distance max(|x| - r, 0), so
//
//   (x, t) in Xi_r  <=>  max(|x| - r, 0)^3 + t^2 < r^2.
//
// Every timeslice |t| < r is a ball of radius r + cbrt(r^2 - t^2).
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ellpar::geometry {

class XiShape {
public:
    /// Throws DomainError unless r > 0.
    explicit XiShape(double r);

    [[nodiscard]] double r() const noexcept { return r_; }

private:
    double r_;
};

/// Open-body membership of (dx, dt) in Xi_r centred at the origin.
[[nodiscard]] bool xi_contains(const XiShape& shape, std::span<const double> dx, double dt);
[[nodiscard]] bool xi_contains(const XiShape& shape, double dx_norm, double dt) noexcept;

/// Closed-body membership (non-strict inequality); used by the convolutions.
[[nodiscard]] bool xi_contains_closed(const XiShape& shape, double dx_norm, double dt) noexcept;

/// Radius of the closed timeslice at relative time t, |t| <= r.
/// Throws DomainError for |t| > r.
[[nodiscard]] double xi_slice_radius(const XiShape& shape, double t);

/// Distance from the observation point to the lateral boundary slice at
/// time t in (-r, 0): s + cbrt(r^2 - (t + r)^2).
[[nodiscard]] double xi_lateral_distance(double r, double s, double t);

struct HarnackChain {
    double r = 0.0;
    double s = 0.0;
    std::vector<double> a; ///< radii a_0..a_k
    std::vector<double> h; ///< time offsets h_0..h_k
    std::size_t k = 0;     ///< chain length
};

/// Iterates a_{j+1} = cbrt(r a_j^2 + (a_j - s)^3) + s from a_0 = min(s, r/16)
/// until a_k >= r/2 + s. For s >= r/16 the chain is trivial (k = 0).
[[nodiscard]] HarnackChain harnack_chain(double r, double s);

/// Closed-form lower bound r (s/r)^{(2/3)^j} on the chain radii (s < r/16).
[[nodiscard]] double harnack_radius_lower_bound(double r, double s, std::size_t j);

/// Upper bound log(log(s/r)/log(1/2))/log(3/2) + 1 on the chain length.
[[nodiscard]] double harnack_length_bound(double r, double s);

/// f(s) = alpha (log(s/r)/log(1/2))^{log(alpha)/log(3/2)} vmin.
///
/// At s = r the base vanishes and the exponent is negative, so the value is
/// +infinity; callers that evaluate at the edge must clamp.
[[nodiscard]] double harnack_lower_bound(double alpha, double s, double r, double vmin);

} // namespace ellpar::geometry
