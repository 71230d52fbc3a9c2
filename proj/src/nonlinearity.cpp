#include "ellpar/nonlinearity.hpp"

#include "ellpar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ellpar {

namespace {

void check_n(BnFamily fam)
{
    if (fam.n < 1) {
        throw DomainError("b_n family requires n >= 1");
    }
}

// Index of the table segment containing s >= 0.
std::size_t segment(const BSpec& spec, double s)
{
    auto it = std::upper_bound(spec.breakpoints.begin(), spec.breakpoints.end(), s);
    return static_cast<std::size_t>(it - spec.breakpoints.begin()) - 1;
}

} // namespace

BSpec BSpec::positive_part()
{
    return BSpec{};
}

BSpec BSpec::table(std::vector<double> breakpoints, std::vector<double> slopes)
{
    if (breakpoints.empty() || breakpoints.size() != slopes.size()) {
        throw DomainError("b table: need one slope per breakpoint");
    }
    if (breakpoints.front() != 0.0) {
        throw DomainError("b table: first breakpoint must be 0");
    }
    for (std::size_t i = 1; i < breakpoints.size(); ++i) {
        if (!(breakpoints[i] > breakpoints[i - 1])) {
            throw DomainError("b table: breakpoints must be strictly increasing");
        }
    }
    for (double m : slopes) {
        if (!(m > 0.0) || !std::isfinite(m)) {
            throw DomainError("b table: slopes must be positive and finite");
        }
    }
    BSpec spec;
    spec.kind = Kind::LipschitzTable;
    spec.breakpoints = std::move(breakpoints);
    spec.slopes = std::move(slopes);
    return spec;
}

double BSpec::min_slope() const
{
    if (kind == Kind::PositivePart) {
        return 1.0;
    }
    return *std::min_element(slopes.begin(), slopes.end());
}

double BSpec::max_slope() const
{
    if (kind == Kind::PositivePart) {
        return 1.0;
    }
    return *std::max_element(slopes.begin(), slopes.end());
}

PsiSpec PsiSpec::constant(double value)
{
    PsiSpec p;
    p.kind = Kind::Constant;
    p.coeffs = {value};
    return p;
}

PsiSpec PsiSpec::polynomial(std::vector<double> coeffs)
{
    if (coeffs.empty()) {
        throw DomainError("Psi polynomial needs at least one coefficient");
    }
    PsiSpec p;
    p.kind = Kind::Polynomial;
    p.coeffs = std::move(coeffs);
    return p;
}

double b_eval(const BSpec& spec, double s)
{
    if (s <= 0.0) {
        return 0.0;
    }
    if (spec.kind == BSpec::Kind::PositivePart) {
        return s;
    }
    const std::size_t k = segment(spec, s);
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        acc += spec.slopes[i] * (spec.breakpoints[i + 1] - spec.breakpoints[i]);
    }
    return acc + spec.slopes[k] * (s - spec.breakpoints[k]);
}

double b_derivative(const BSpec& spec, double s)
{
    if (s < 0.0) {
        return 0.0;
    }
    if (spec.kind == BSpec::Kind::PositivePart) {
        return 1.0;
    }
    return spec.slopes[segment(spec, s)];
}

double bn_eval(BnFamily fam, double s)
{
    check_n(fam);
    const double n = fam.n;
    const double n2 = n * n;
    const double x = n2 * s - n;
    const double en = std::exp(-n);
    if (x <= 0.0) {
        // log((1 + e^x) / (1 + e^-n)) with the difference e^x - e^-n
        // written as e^-n expm1(n^2 s), free of cancellation near s = 0
        return std::log1p(en * std::expm1(n2 * s) / (1.0 + en)) / n2;
    }
    return s - 1.0 / n + (std::log1p(std::exp(-x)) - std::log1p(en)) / n2;
}

double bn_derivative(BnFamily fam, double s)
{
    check_n(fam);
    const double n = fam.n;
    const double x = n * n * s - n;
    double v;
    if (x >= 0.0) {
        v = 1.0 / (1.0 + std::exp(-x));
    } else {
        const double e = std::exp(x);
        v = e / (1.0 + e);
    }
    constexpr double lo = std::numeric_limits<double>::denorm_min();
    const double hi = std::nextafter(1.0, 0.0);
    return std::clamp(v, lo, hi);
}

double regularized_b_eval(const BSpec& spec, BnFamily fam, double s)
{
    const double y = bn_eval(fam, s);
    if (spec.kind == BSpec::Kind::PositivePart) {
        return y;
    }
    if (y < 0.0) {
        return spec.slopes.front() * y;
    }
    return b_eval(spec, y);
}

double regularized_b_derivative(const BSpec& spec, BnFamily fam, double s)
{
    const double d = bn_derivative(fam, s);
    if (spec.kind == BSpec::Kind::PositivePart) {
        return d;
    }
    const double y = bn_eval(fam, s);
    const double slope = y < 0.0 ? spec.slopes.front() : b_derivative(spec, y);
    return slope * d;
}

double psi_eval(const PsiSpec& spec, double y)
{
    if (y < 0.0) {
        throw DomainError("psi_eval: argument must be nonnegative");
    }
    double v = 0.0;
    if (spec.kind == PsiSpec::Kind::Constant) {
        v = spec.coeffs.at(0);
    } else {
        for (auto it = spec.coeffs.rbegin(); it != spec.coeffs.rend(); ++it) {
            v = v * y + *it;
        }
    }
    if (!(v > 0.0)) {
        throw DomainError("psi_eval: Psi must be positive");
    }
    return v;
}

double psi_derivative(const PsiSpec& spec, double y)
{
    if (y < 0.0) {
        throw DomainError("psi_derivative: argument must be nonnegative");
    }
    if (spec.kind == PsiSpec::Kind::Constant) {
        return 0.0;
    }
    double v = 0.0;
    for (std::size_t i = spec.coeffs.size(); i-- > 1;) {
        v = v * y + static_cast<double>(i) * spec.coeffs[i];
    }
    return v;
}

} // namespace ellpar
