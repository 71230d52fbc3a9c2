// Scenario library, class-P checks and the acceptance suite.
#pragma once

#include "ellpar/solver.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace ellpar {

/// A named quantitative check with its tolerance.
struct Expectation {
    std::string name;
    double tolerance = 0.0;
};

struct Scenario {
    std::string name;
    ProblemSpec spec;
    std::vector<Expectation> expectations;
};

/// u0 = 0.5 (1 - x^2 / 0.09) on |x| < 0.3, affine from (0.3, 0) to (1, -1).
[[nodiscard]] double jump_datum(double x);

/// Output step of the jump scenario.
inline constexpr double kJumpDt = 1e-3;

/// Interval (-1, 1), trace operator, b = s+, b_n with the given n, g = -1,
/// u0 = jump_datum, T = 1, dt = kJumpDt. Throws DomainError for fewer than
/// 101 nodes or n < 1.
[[nodiscard]] Scenario make_jump_scenario(std::size_t nodes = 401, int n = 32);

struct ComparisonPair {
    Scenario lower;
    Scenario upper;
};

/// lower = base; upper has its initial front dilated outward by gap, all
/// initial values raised by gap / 2 and boundary data g + gap / 2. Throws
/// DomainError unless gap > 0 and InfeasibleError when the dilated front
/// reaches the boundary.
[[nodiscard]] ComparisonPair make_comparison_pair(const Scenario& base, double gap);

struct ClassPReport {
    double boundary_error = 0.0;    ///< max |u0 + 1| over the Dirichlet nodes
    double negative_residual = 0.0; ///< max |F(u0)| on nodes whose stencil lies in {u0 < 0}
    std::size_t interfaces = 0;     ///< sign changes of u0
    double min_front_slope = 0.0;   ///< smallest |difference quotient| across a sign change
    bool pass = false;
};

/// Checks u0 = -1 on the Dirichlet boundary, F(u0) = 0 on the negative
/// phase (to `tol`), and a nondegenerate single interface per radial line
/// (at most two sign changes on an interval, one on a radial grid).
[[nodiscard]] ClassPReport check_class_p(const ProblemSpec& spec, double tol = 1e-9);

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    double runtime_s = 0.0;
    double runtime_limit_s = 0.0;
    /// Named measured quantities (margins, errors, counts).
    nlohmann::json margins = nlohmann::json::object();
    std::string detail;
};

struct AcceptanceOptions {
    std::vector<int> only; ///< empty runs every criterion
    std::uint64_t seed = 20241;
    /// Number of threads for scenario runs (0 = hardware concurrency).
    unsigned threads = 0;
};

struct AcceptanceReport {
    std::vector<CriterionResult> criteria;
    std::uint64_t seed = 0;
    bool pass = false;
    double runtime_s = 0.0;
};

inline constexpr int kCriterionCount = 11;

[[nodiscard]] const char* criterion_name(int id);

/// Runs the selected criteria in order. Throws ConfigError for ids outside
/// 1..kCriterionCount.
[[nodiscard]] AcceptanceReport run_acceptance(const AcceptanceOptions& options = {});

/// One line per criterion: "criterion <id> <name>: PASS|FAIL (<summary>)".
[[nodiscard]] std::string format_line(const CriterionResult& c);

/// Machine-readable report; timings live under "timing" so every other
/// field is deterministic for a fixed seed.
[[nodiscard]] nlohmann::json to_json(const AcceptanceReport& report);

} // namespace ellpar
