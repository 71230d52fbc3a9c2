// Elliptic operators F(M, p, z) and their 1D / radial discretizations.
//
// A full multi-dimensional Pucci discretization is not provided: a naive
// Hessian eigendecomposition stencil is not monotone. The space dimension
// enters only through the radial reduction, where the Hessian of
// u(x) = psi(|x|) has eigenvalues psi'/rho (n - 1 times) and psi''.
#pragma once

#include "ellpar/grid.hpp"
#include "ellpar/nonlinearity.hpp"

#include <Eigen/Dense>

#include <atomic>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ellpar {

/// One (A, drift, c) branch of a finite Bellman-Isaacs operator
/// F = min_alpha max_beta [tr(A M) + drift . p + c z].
struct BIEntry {
    int alpha = 0;
    int beta = 0;
    Eigen::MatrixXd A;
    Eigen::VectorXd drift;
    double c = 0.0;
};

struct OperatorSpec {
    enum class Kind { Trace, PucciPlus, PucciMinus, BellmanIsaacs, Divergence };

    Kind kind = Kind::Trace;
    double lambda = 1.0;
    double Lambda = 1.0;
    double delta1 = 0.0;
    double delta0 = 0.0;
    int n_dim = 1;
    std::vector<BIEntry> bi;
    PsiSpec psi;

    /// Throws DomainError when the constants or coefficients violate the
    /// structural assumptions (including c > 0 in a Bellman-Isaacs branch).
    void validate() const;
};

[[nodiscard]] const char* to_string(OperatorSpec::Kind kind);
/// Throws DomainError for unknown names.
[[nodiscard]] OperatorSpec::Kind operator_kind_from_string(const std::string& name);

[[nodiscard]] double pucci_plus(std::span<const double> eigs, double lambda, double Lambda);
[[nodiscard]] double pucci_minus(std::span<const double> eigs, double lambda, double Lambda);

/// Mutation hook for the acceptance suite: when set, pucci_minus returns the
/// negated value.
namespace fault {
inline std::atomic<bool> flip_pucci_minus{false};
}

/// F(M, p, z) for a symmetric n_dim x n_dim matrix M.
[[nodiscard]] double evaluate_operator(const OperatorSpec& op, const Eigen::MatrixXd& M,
                                       const Eigen::VectorXd& p, double z,
                                       const BSpec& b = BSpec::positive_part());

/// F at a radial point with psi' = d1, psi'' = d2, u = z and |x| = rho,
/// taking the frame x = rho e_n. For a one-dimensional (non-radial) point
/// pass tangential = 0; rho is then unused.
[[nodiscard]] double evaluate_radial(const OperatorSpec& op, const BSpec& b, int tangential,
                                     double rho, double d1, double d2, double z);

struct RadialProfile {
    std::vector<double> rho;
    std::vector<double> psi;
    std::vector<double> psi_prime;
    std::vector<double> psi_double_prime;
    int n_dim = 2;
};

/// Throws std::out_of_range for a bad index and DomainError for rho <= 0.
[[nodiscard]] double radial_second_order(const RadialProfile& profile, std::size_t i,
                                         const OperatorSpec& op,
                                         const BSpec& b = BSpec::positive_part());

/// Value of the discrete operator at one node and its partial derivatives
/// with respect to the left, centre and right samples (active-branch
/// linearization for the envelope operators).
struct StencilEval {
    double value = 0.0;
    double d_left = 0.0;
    double d_centre = 0.0;
    double d_right = 0.0;
};

/// Whether node i uses one-sided first differences: central differences are
/// kept while h ((n-1) Lambda / rho + delta1) <= 2 lambda, which keeps the
/// scheme monotone.
[[nodiscard]] bool use_upwind(const OperatorSpec& op, const Grid& grid, std::size_t i);

[[nodiscard]] StencilEval eval_stencil(const OperatorSpec& op, const BSpec& b, const Grid& grid,
                                       std::size_t i, double ul, double uc, double ur);

/// Nodewise discrete F on the grid. Dirichlet nodes get 0; the mirror node of
/// a punctured ball uses the ghost value u[1].
[[nodiscard]] std::vector<double> apply_operator_1d(const OperatorSpec& op, const Grid& grid,
                                                    std::span<const double> u,
                                                    const BSpec& b = BSpec::positive_part());

struct StructuralReport {
    bool pass = false;
    std::int64_t trials = 0;
    double worst_margin = 0.0;
    double tolerance = 0.0;
};

/// Random check of
///   M-(M-N) - d1|p-q| - d0|z-w| <= F(M,p,z) - F(N,q,w) <= M+(M-N) + d1|p-q| + d0|z-w|.
/// Applies to trace, Pucci and Bellman-Isaacs kinds; throws
/// std::invalid_argument for the divergence kind, whose first-order term is
/// quadratic in p.
[[nodiscard]] StructuralReport structural_envelope_check(const OperatorSpec& op,
                                                         std::int64_t trials, std::uint64_t seed,
                                                         double tolerance = 1e-10);

} // namespace ellpar
