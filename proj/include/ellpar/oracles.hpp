// Independent reference computations used by the tests and the acceptance
// suite. None of these share code paths with the production routines they
// check.
#pragma once

#include "ellpar/grid.hpp"
#include "ellpar/operators.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace ellpar::oracle {

/// b_n(s) from the unrearranged formula in 256-bit MPFR arithmetic.
[[nodiscard]] double bn_mpfr(int n, double s);

/// Minkowski membership (dx, dt) in D_r + E_r by searching y over `samples`
/// points of the open space disk |y| < r (dimension = dx.size(), 1 or 2).
[[nodiscard]] bool minkowski_contains_sampled(std::span<const double> dx, double dt, double r,
                                              std::size_t samples);

/// Distance from the point (s, 0) at the observation slice to the boundary
/// of the lateral slice at time t, found by scanning radii in the closed
/// body on a fine grid.
[[nodiscard]] double lateral_distance_scan(double r, double s, double t, std::size_t steps);

struct PucciBrute {
    double sup = 0.0;
    double inf = 0.0;
};

/// sup / inf of tr(A M) over about `samples` matrices A with eigenvalues in
/// [lambda, Lambda] (2x2 M only): half on the extreme eigenvalue corners
/// over a rotation grid, half random.
[[nodiscard]] PucciBrute pucci_bruteforce_2x2(const Eigen::Matrix2d& M, double lambda,
                                              double Lambda, std::size_t samples,
                                              std::uint64_t seed);

/// Radial ODE F(psi''; psi', rho, psi) = 0 solved by shooting with RK4.
/// Returns psi on `rho_out` for Dirichlet data psi(rho_lo) = u_lo,
/// psi(rho_hi) = u_hi, with `steps` RK4 steps across the interval.
[[nodiscard]] std::vector<double> radial_shooting(const OperatorSpec& op, double rho_lo,
                                                  double rho_hi, double u_lo, double u_hi,
                                                  std::size_t steps,
                                                  std::span<const double> rho_out);

/// Brute-force sup (or inf) of a field over the closed body Xi_r around
/// every node of a given output set; returns (value, flat index j*N + i of
/// the first attaining sample).
struct BruteConvolution {
    std::vector<std::vector<double>> values;
    std::vector<std::vector<std::size_t>> dual;
};
[[nodiscard]] BruteConvolution convolve_bruteforce(const SpaceTimeField& f, double r, bool sup,
                                                   const std::vector<std::size_t>& out_levels,
                                                   const std::vector<std::size_t>& out_nodes);

/// Morphological dilation of a space-time set S (given as a mask) by the
/// closed body: result(j,i) is true iff some (j',i') in S has
/// (x_i - x_i', t_j - t_j') in the closed Xi_r.
[[nodiscard]] std::vector<std::vector<bool>> dilate_bruteforce(
    const SpaceTimeField& f, const std::vector<std::vector<bool>>& mask, double r);

} // namespace ellpar::oracle
