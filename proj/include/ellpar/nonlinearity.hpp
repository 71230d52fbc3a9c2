// Time-derivative nonlinearity b, its smooth family b_n and the divergence
// coefficient Psi.
#pragma once

#include <vector>

namespace ellpar {

/// Increasing Lipschitz b with b = 0 on (-inf, 0].
///
/// For the table kind, breakpoints[0] must be 0 and slopes[i] applies on
/// [breakpoints[i], breakpoints[i+1]); the last slope extends to +inf.
struct BSpec {
    enum class Kind { PositivePart, LipschitzTable };

    Kind kind = Kind::PositivePart;
    std::vector<double> breakpoints;
    std::vector<double> slopes;

    static BSpec positive_part();
    /// Throws DomainError on an invalid table.
    static BSpec table(std::vector<double> breakpoints, std::vector<double> slopes);

    /// Lower bound c on b' over (0, inf).
    [[nodiscard]] double min_slope() const;
    /// Lipschitz constant.
    [[nodiscard]] double max_slope() const;
};

struct BnFamily {
    int n = 1;
};

struct PsiSpec {
    enum class Kind { Constant, Polynomial };

    Kind kind = Kind::Constant;
    /// Constant: coeffs = {value}. Polynomial: coeffs[i] multiplies y^i.
    std::vector<double> coeffs{1.0};

    static PsiSpec constant(double value);
    static PsiSpec polynomial(std::vector<double> coeffs);
};

[[nodiscard]] double b_eval(const BSpec& spec, double s);
/// Right derivative of b; 0 for s < 0.
[[nodiscard]] double b_derivative(const BSpec& spec, double s);

/// b_n(s) = n^-2 log((e^n + e^{n^2 s}) / (e^n + 1)), evaluated without overflow.
[[nodiscard]] double bn_eval(BnFamily fam, double s);
/// b_n'(s) = sigmoid(n^2 s - n), rounded into the open interval (0, 1).
[[nodiscard]] double bn_derivative(BnFamily fam, double s);

/// Regularized time nonlinearity used by the solver: b applied after b_n,
/// with b continued linearly (first slope) to negative arguments. For the
/// positive-part b this is exactly b_n.
[[nodiscard]] double regularized_b_eval(const BSpec& spec, BnFamily fam, double s);
[[nodiscard]] double regularized_b_derivative(const BSpec& spec, BnFamily fam, double s);

/// Throws DomainError if y < 0 or the value is not positive.
[[nodiscard]] double psi_eval(const PsiSpec& spec, double y);
[[nodiscard]] double psi_derivative(const PsiSpec& spec, double y);

} // namespace ellpar
