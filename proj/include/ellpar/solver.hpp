// Implicit Euler time integration of b_n(u)_t = F(D^2 u, Du, u) on 1D and
// radial grids, the stationary elliptic solver and the singular-limit and
// bracketing studies built on top of them.
#pragma once

#include "ellpar/grid.hpp"
#include "ellpar/nonlinearity.hpp"
#include "ellpar/operators.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace ellpar {

struct ProblemSpec {
    Geometry geometry;
    OperatorSpec op;
    BSpec b;
    std::optional<BnFamily> bn;
    /// Dirichlet data g(x, t) at the boundary nodes; empty means g = -1.
    std::function<double(double, double)> g;
    /// Initial data in closed form; ignored when u0_values is non-empty.
    std::function<double(double)> u0;
    /// Tabulated initial data on the grid nodes.
    std::vector<double> u0_values;
    double T = 1.0;
    std::size_t nodes = 401;
    /// Output time step; 0 means dt = h.
    double dt = 0.0;

    [[nodiscard]] double boundary(double x, double t) const;
    /// Throws ConfigError when the problem description is inconsistent.
    void validate() const;
};

struct NewtonPolicy {
    int max_iters = 30;
    double abs_tol = 1e-10;
    double rel_tol = 0.0;
    double damping = 1.0;
};

struct AdaptiveDtPolicy {
    bool enabled = true;
    double shrink = 0.5;
    double growth = 2.0;
    int target_iters = 6;
    double min_dt = 1e-9;
};

struct SolverPolicy {
    NewtonPolicy newton;
    AdaptiveDtPolicy adaptive_dt;
    /// Slack of the per-step maximum principle check.
    double max_principle_tol = 1e-9;

    /// Throws ConfigError unless abs_tol > 0, damping in (0, 1] and the
    /// adaptive factors are sensible.
    void validate() const;
};

[[nodiscard]] Grid make_problem_grid(const ProblemSpec& spec);
/// Output time step: spec.dt, or h when spec.dt is 0.
[[nodiscard]] double output_dt(const ProblemSpec& spec, const Grid& grid);
/// Initial data on the grid with the boundary nodes set to g(x, 0).
[[nodiscard]] std::vector<double> initial_field(const ProblemSpec& spec, const Grid& grid);

/// Solves F(D^2 u, Du, u) = 0 with u = lo at the inner end and u = hi at the
/// outer end (lo is unused on a punctured ball). Throws NewtonFailure.
[[nodiscard]] std::vector<double> solve_elliptic(const ProblemSpec& spec, double lo, double hi,
                                                 const SolverPolicy& policy = {});

struct StepResult {
    std::vector<double> u;
    int iterations = 0;
    std::vector<double> residual_history;
    /// Smallest slack of min(u_prev, g) <= u <= max(u_prev, g, 0); negative
    /// when the bound is violated.
    double max_principle_margin = 0.0;
};

/// One implicit Euler step B(u) - B(u_prev) = dt F(u) with B = b after b_n,
/// boundary data taken at t_new. Throws DomainError without bn and
/// NewtonFailure when Newton stalls or runs out of iterations.
[[nodiscard]] StepResult step_parabolic(const ProblemSpec& spec, const Grid& grid,
                                        std::span<const double> u_prev, double t_new, double dt,
                                        const SolverPolicy& policy = {});

struct RunStats {
    std::size_t steps = 0;
    std::size_t rejected_steps = 0;
    int max_newton_iters = 0;
    std::size_t total_newton_iters = 0;
    double min_dt = 0.0;
    double max_principle_margin = 0.0;
};

struct RunResult {
    SpaceTimeField field;
    RunStats stats;
};

/// Integrates to spec.T recording every multiple of the output step. The
/// internal step shrinks on Newton failure or a maximum principle
/// violation and grows back while Newton converges quickly. Throws
/// SolverError when the step underflows policy.adaptive_dt.min_dt.
[[nodiscard]] RunResult run(const ProblemSpec& spec, const SolverPolicy& policy = {});

/// Sup-norm distance between two fields at the level closest to t.
[[nodiscard]] double sup_distance_at(const SpaceTimeField& a, const SpaceTimeField& b, double t);

struct SingularLimitReport {
    std::vector<int> n_list;
    std::vector<std::optional<double>> extinction_times;
    std::vector<double> probe_times;
    /// distances[k][p]: sup |u_{n[k+1]} - u_{n[k]}| at probe_times[p].
    std::vector<std::vector<double>> distances;
    /// |T_ext(n[k+1]) - T_ext(n[k])|.
    std::vector<double> extinction_gaps;
    bool distances_decreasing = false;
    bool extinction_cauchy = false;
    std::vector<RunStats> stats;
};

/// Runs one problem per n in parallel. Default probe times are 0.4, 0.6 and
/// 0.8 of the earliest extinction time (or of T without extinction).
/// Throws ConfigError unless n_list is strictly increasing with >= 3 entries.
[[nodiscard]] SingularLimitReport singular_limit_study(const ProblemSpec& spec,
                                                       const std::vector<int>& n_list,
                                                       const SolverPolicy& policy = {},
                                                       std::vector<double> probe_times = {});

/// Outward (+) or inward (-) perturbation of tabulated initial data: a
/// dilation (erosion) by eps plus (minus) eps times a lift that tapers to 0
/// at the boundary nodes, which keep g(x, 0). Throws InfeasibleError when
/// the shifted positive phase reaches a node next to the boundary.
[[nodiscard]] std::vector<double> perturb_initial(const Grid& grid,
                                                  const std::vector<double>& u0, double eps,
                                                  bool outward);

struct BracketLevel {
    double eps = 0.0;
    std::optional<double> extinction_upper;
    std::optional<double> extinction_lower;
    /// sup |u^{+eps} - u^{-eps}| per probe time.
    std::vector<double> gaps;
    /// Worst violation of u^{-eps} <= u <= u^{+eps} over all levels (<= 0 when ordered).
    double sandwich_violation = 0.0;
};

struct BracketReport {
    std::vector<double> probe_times;
    std::optional<double> extinction_base;
    std::vector<BracketLevel> levels;
    /// Worst violation of u^{+eps1} >= u^{+eps2} and u^{-eps1} <= u^{-eps2}
    /// for eps1 > eps2 over all levels.
    double nesting_violation = 0.0;
    bool gaps_shrinking = false;
    /// Linear extrapolation to eps = 0 from the two smallest eps.
    std::optional<double> extinction_upper_limit;
    std::optional<double> extinction_lower_limit;
    double limit_tolerance = 0.0; ///< 2 (dt + h)
    bool limits_agree = false;
    bool sandwich_holds = false;
    bool nested = false;
};

/// Throws ConfigError unless eps_list is strictly decreasing and positive.
[[nodiscard]] BracketReport bracket_maximal_minimal(const ProblemSpec& spec,
                                                    const std::vector<double>& eps_list,
                                                    const SolverPolicy& policy = {},
                                                    std::vector<double> probe_times = {});

/// Tolerance used for the monotone-gap assertion across eps.
inline constexpr double kBracketGapTolerance = 1e-3;

} // namespace ellpar
