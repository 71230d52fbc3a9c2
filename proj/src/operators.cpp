#include "ellpar/operators.hpp"

#include "ellpar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>

namespace ellpar {

namespace {

constexpr double kEigTol = 1e-12;

// Linear functional of (ul, uc, ur).
struct Lin {
    double l = 0.0;
    double c = 0.0;
    double r = 0.0;

    [[nodiscard]] double apply(double ul, double uc, double ur) const
    {
        return l * ul + c * uc + r * ur;
    }
};

Lin second_difference(double h)
{
    const double ih2 = 1.0 / (h * h);
    return {ih2, -2.0 * ih2, ih2};
}

Lin central_difference(double h)
{
    return {-0.5 / h, 0.0, 0.5 / h};
}

Lin forward_difference(double h)
{
    return {0.0, -1.0 / h, 1.0 / h};
}

Lin backward_difference(double h)
{
    return {-1.0 / h, 1.0 / h, 0.0};
}

double tangential_trace(const Eigen::MatrixXd& A)
{
    double s = 0.0;
    for (Eigen::Index k = 0; k + 1 < A.rows(); ++k) {
        s += A(k, k);
    }
    return s;
}

Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& M)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

// min over alpha of max over beta; returns the index of the active entry.
template <class Value>
std::size_t bi_active(const std::vector<BIEntry>& entries, Value&& value, double& out)
{
    std::map<int, std::pair<double, std::size_t>> best_per_alpha;
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const double v = value(k);
        auto [it, inserted] = best_per_alpha.try_emplace(entries[k].alpha, v, k);
        if (!inserted && v > it->second.first) {
            it->second = {v, k};
        }
    }
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (const auto& [alpha, vk] : best_per_alpha) {
        if (vk.first < best) {
            best = vk.first;
            arg = vk.second;
        }
    }
    out = best;
    return arg;
}

double kappa_plus(const OperatorSpec& op, double e)
{
    return e > 0.0 ? op.Lambda : op.lambda;
}

double kappa_minus(const OperatorSpec& op, double e)
{
    return e > 0.0 ? op.lambda : op.Lambda;
}

} // namespace

void OperatorSpec::validate() const
{
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw DomainError("operator: lambda must be positive");
    }
    if (!(Lambda >= lambda) || !std::isfinite(Lambda)) {
        throw DomainError("operator: Lambda must be >= lambda");
    }
    if (!(delta1 >= 0.0) || !(delta0 >= 0.0)) {
        throw DomainError("operator: delta0 and delta1 must be nonnegative");
    }
    if (n_dim < 1) {
        throw DomainError("operator: n_dim must be >= 1");
    }
    switch (kind) {
    case Kind::Trace:
        if (lambda > 1.0 || Lambda < 1.0) {
            throw DomainError("operator: trace requires lambda <= 1 <= Lambda");
        }
        break;
    case Kind::BellmanIsaacs:
        if (bi.empty()) {
            throw DomainError("operator: Bellman-Isaacs needs at least one branch");
        }
        for (const auto& e : bi) {
            if (e.A.rows() != n_dim || e.A.cols() != n_dim || e.drift.size() != n_dim) {
                throw DomainError("operator: Bellman-Isaacs branch has wrong shape");
            }
            if ((e.A - e.A.transpose()).cwiseAbs().maxCoeff() > 0.0) {
                throw DomainError("operator: Bellman-Isaacs matrix must be symmetric");
            }
            const Eigen::VectorXd ev = symmetric_eigenvalues(e.A);
            if (ev.minCoeff() < lambda - kEigTol || ev.maxCoeff() > Lambda + kEigTol) {
                throw DomainError("operator: Bellman-Isaacs matrix outside [lambda I, Lambda I]");
            }
            if (e.drift.norm() > delta1 + kEigTol) {
                throw DomainError("operator: Bellman-Isaacs drift exceeds delta1");
            }
            if (e.c > 0.0) {
                throw DomainError("operator: zeroth-order coefficient must be <= 0");
            }
            if (e.c < -delta0) {
                throw DomainError("operator: zeroth-order coefficient exceeds delta0");
            }
        }
        break;
    case Kind::Divergence:
        (void)psi_eval(psi, 0.0);
        break;
    default:
        break;
    }
}

const char* to_string(OperatorSpec::Kind kind)
{
    switch (kind) {
    case OperatorSpec::Kind::Trace:
        return "trace";
    case OperatorSpec::Kind::PucciPlus:
        return "pucci-plus";
    case OperatorSpec::Kind::PucciMinus:
        return "pucci-minus";
    case OperatorSpec::Kind::BellmanIsaacs:
        return "bellman-isaacs";
    case OperatorSpec::Kind::Divergence:
        return "divergence";
    }
    return "?";
}

OperatorSpec::Kind operator_kind_from_string(const std::string& name)
{
    for (auto k : {OperatorSpec::Kind::Trace, OperatorSpec::Kind::PucciPlus,
                   OperatorSpec::Kind::PucciMinus, OperatorSpec::Kind::BellmanIsaacs,
                   OperatorSpec::Kind::Divergence}) {
        if (name == to_string(k)) {
            return k;
        }
    }
    throw DomainError("unknown operator kind: " + name);
}

namespace {

double eig_sum(std::span<const double> eigs)
{
    double tr = 0.0;
    for (double e : eigs) {
        tr += e;
    }
    return tr;
}

} // namespace

double pucci_plus(std::span<const double> eigs, double lambda, double Lambda)
{
    if (lambda == Lambda) {
        return lambda * eig_sum(eigs);
    }
    double pos = 0.0;
    double neg = 0.0;
    for (double e : eigs) {
        if (e > 0.0) {
            pos += e;
        } else {
            neg += e;
        }
    }
    return Lambda * pos + lambda * neg;
}

double pucci_minus(std::span<const double> eigs, double lambda, double Lambda)
{
    double v = 0.0;
    if (lambda == Lambda) {
        v = lambda * eig_sum(eigs);
    } else {
        double pos = 0.0;
        double neg = 0.0;
        for (double e : eigs) {
            if (e > 0.0) {
                pos += e;
            } else {
                neg += e;
            }
        }
        v = lambda * pos + Lambda * neg;
    }
    return fault::flip_pucci_minus.load(std::memory_order_relaxed) ? -v : v;
}

double evaluate_operator(const OperatorSpec& op, const Eigen::MatrixXd& M, const Eigen::VectorXd& p,
                         double z, const BSpec& b)
{
    switch (op.kind) {
    case OperatorSpec::Kind::Trace:
        return M.trace();
    case OperatorSpec::Kind::PucciPlus:
    case OperatorSpec::Kind::PucciMinus: {
        const Eigen::VectorXd ev = symmetric_eigenvalues(M);
        std::span<const double> s(ev.data(), static_cast<std::size_t>(ev.size()));
        return op.kind == OperatorSpec::Kind::PucciPlus ? pucci_plus(s, op.lambda, op.Lambda)
                                                        : pucci_minus(s, op.lambda, op.Lambda);
    }
    case OperatorSpec::Kind::BellmanIsaacs: {
        double out = 0.0;
        (void)bi_active(op.bi, [&](std::size_t k) {
            const auto& e = op.bi[k];
            return e.A.cwiseProduct(M).sum() + e.drift.dot(p) + e.c * z;
        }, out);
        return out;
    }
    case OperatorSpec::Kind::Divergence: {
        const double bz = b_eval(b, z);
        return psi_eval(op.psi, bz) * M.trace() +
               psi_derivative(op.psi, bz) * b_derivative(b, z) * p.squaredNorm();
    }
    }
    return 0.0;
}

double evaluate_radial(const OperatorSpec& op, const BSpec& b, int tangential, double rho,
                       double d1, double d2, double z)
{
    const double et = tangential > 0 ? d1 / rho : 0.0;
    const double m = tangential;
    switch (op.kind) {
    case OperatorSpec::Kind::Trace:
        return m * et + d2;
    case OperatorSpec::Kind::PucciPlus:
    case OperatorSpec::Kind::PucciMinus: {
        std::vector<double> eigs(static_cast<std::size_t>(tangential), et);
        eigs.push_back(d2);
        return op.kind == OperatorSpec::Kind::PucciPlus ? pucci_plus(eigs, op.lambda, op.Lambda)
                                                        : pucci_minus(eigs, op.lambda, op.Lambda);
    }
    case OperatorSpec::Kind::BellmanIsaacs: {
        double out = 0.0;
        (void)bi_active(op.bi, [&](std::size_t k) {
            const auto& e = op.bi[k];
            const Eigen::Index last = e.A.rows() - 1;
            const double tt = tangential > 0 ? tangential_trace(e.A) * et : 0.0;
            return tt + e.A(last, last) * d2 + e.drift(last) * d1 + e.c * z;
        }, out);
        return out;
    }
    case OperatorSpec::Kind::Divergence: {
        const double bz = b_eval(b, z);
        return psi_eval(op.psi, bz) * (d2 + m * et) +
               psi_derivative(op.psi, bz) * b_derivative(b, z) * d1 * d1;
    }
    }
    return 0.0;
}

double radial_second_order(const RadialProfile& profile, std::size_t i, const OperatorSpec& op,
                           const BSpec& b)
{
    const double rho = profile.rho.at(i);
    if (!(rho > 0.0)) {
        throw DomainError("radial_second_order: rho must be positive");
    }
    return evaluate_radial(op, b, profile.n_dim - 1, rho, profile.psi_prime.at(i),
                           profile.psi_double_prime.at(i), profile.psi.at(i));
}

bool use_upwind(const OperatorSpec& op, const Grid& grid, std::size_t i)
{
    if (grid.inner_mirror() && i == 0) {
        return false;
    }
    const int m = grid.tangential();
    const double first_order = (m > 0 ? m * op.Lambda / grid.x[i] : 0.0) + op.delta1;
    return grid.h * first_order > 2.0 * op.lambda;
}

StencilEval eval_stencil(const OperatorSpec& op, const BSpec& b, const Grid& grid, std::size_t i,
                         double ul, double uc, double ur)
{
    const double h = grid.h;
    const int tangential = grid.tangential();
    const double m = tangential;
    const double rho = grid.x[i];
    const bool upwind = use_upwind(op, grid, i);
    const Lin d2 = second_difference(h);

    StencilEval out;
    auto finish = [&](const Lin& lin, double value) {
        out.value = value;
        out.d_left = lin.l;
        out.d_centre = lin.c;
        out.d_right = lin.r;
        return out;
    };

    switch (op.kind) {
    case OperatorSpec::Kind::Trace:
    case OperatorSpec::Kind::PucciPlus:
    case OperatorSpec::Kind::PucciMinus: {
        // the tangential coefficient is nonnegative, so the one-sided
        // difference is always the forward one
        const Lin d1 = upwind ? forward_difference(h) : central_difference(h);
        const double vt = tangential > 0 ? d1.apply(ul, uc, ur) / rho : 0.0;
        const double vn = d2.apply(ul, uc, ur);
        double kt = 1.0;
        double kn = 1.0;
        double value = m * vt + vn;
        if (op.kind != OperatorSpec::Kind::Trace) {
            const bool plus = op.kind == OperatorSpec::Kind::PucciPlus;
            kt = plus ? kappa_plus(op, vt) : kappa_minus(op, vt);
            kn = plus ? kappa_plus(op, vn) : kappa_minus(op, vn);
            std::vector<double> eigs(static_cast<std::size_t>(tangential), vt);
            eigs.push_back(vn);
            value = plus ? pucci_plus(eigs, op.lambda, op.Lambda)
                         : pucci_minus(eigs, op.lambda, op.Lambda);
        }
        const double wt = tangential > 0 ? kt * m / rho : 0.0;
        Lin lin{wt * d1.l + kn * d2.l, wt * d1.c + kn * d2.c, wt * d1.r + kn * d2.r};
        return finish(lin, value);
    }
    case OperatorSpec::Kind::BellmanIsaacs: {
        std::vector<Lin> lins(op.bi.size());
        for (std::size_t k = 0; k < op.bi.size(); ++k) {
            const auto& e = op.bi[k];
            const Eigen::Index last = e.A.rows() - 1;
            const double tt = tangential > 0 ? tangential_trace(e.A) / rho : 0.0;
            const double q = tt + e.drift(last);
            Lin d1 = central_difference(h);
            if (upwind) {
                d1 = q >= 0.0 ? forward_difference(h) : backward_difference(h);
            }
            const double ann = e.A(last, last);
            lins[k] = {q * d1.l + ann * d2.l, q * d1.c + ann * d2.c + e.c, q * d1.r + ann * d2.r};
        }
        double value = 0.0;
        const std::size_t k = bi_active(op.bi, [&](std::size_t j) {
            return lins[j].apply(ul, uc, ur);
        }, value);
        return finish(lins[k], value);
    }
    case OperatorSpec::Kind::Divergence: {
        auto coeff = [&](double u) { return psi_eval(op.psi, b_eval(b, u)); };
        auto dcoeff = [&](double u) {
            const double bu = b_eval(b, u);
            return psi_derivative(op.psi, bu) * b_derivative(b, u);
        };
        const double wp = tangential > 0 ? std::pow((rho + 0.5 * h) / rho, m) : 1.0;
        const double wm = tangential > 0 ? std::pow((rho - 0.5 * h) / rho, m) : 1.0;
        const double cl = coeff(ul);
        const double cc = coeff(uc);
        const double cr = coeff(ur);
        const double fp = 0.5 * (cc + cr);
        const double fm = 0.5 * (cc + cl);
        const double gp = ur - uc;
        const double gm = uc - ul;
        const double ih2 = 1.0 / (h * h);
        out.value = (wp * fp * gp - wm * fm * gm) * ih2;
        out.d_right = (wp * fp + wp * 0.5 * dcoeff(ur) * gp) * ih2;
        out.d_left = (wm * fm - wm * 0.5 * dcoeff(ul) * gm) * ih2;
        out.d_centre = (-wp * fp - wm * fm + 0.5 * dcoeff(uc) * (wp * gp - wm * gm)) * ih2;
        return out;
    }
    }
    return out;
}

std::vector<double> apply_operator_1d(const OperatorSpec& op, const Grid& grid,
                                      std::span<const double> u, const BSpec& b)
{
    if (u.size() != grid.size()) {
        throw std::invalid_argument("apply_operator_1d: field size does not match grid");
    }
    const std::size_t n = u.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t i = grid.first_unknown(); i + 1 < n; ++i) {
        const double ul = i == 0 ? u[1] : u[i - 1];
        out[i] = eval_stencil(op, b, grid, i, ul, u[i], u[i + 1]).value;
    }
    return out;
}

StructuralReport structural_envelope_check(const OperatorSpec& op, std::int64_t trials,
                                           std::uint64_t seed, double tolerance)
{
    if (trials < 1) {
        throw std::invalid_argument("structural_envelope_check: trials must be >= 1");
    }
    if (op.kind == OperatorSpec::Kind::Divergence) {
        throw std::invalid_argument(
            "structural_envelope_check: divergence form is not covered by the envelope bound");
    }
    op.validate();

    const Eigen::Index n = op.n_dim;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    auto sym = [&](double scale) {
        Eigen::MatrixXd S(n, n);
        for (Eigen::Index a = 0; a < n; ++a) {
            for (Eigen::Index c = a; c < n; ++c) {
                S(a, c) = S(c, a) = scale * unif(rng);
            }
        }
        return S;
    };
    auto vec = [&](double scale) {
        Eigen::VectorXd v(n);
        for (Eigen::Index a = 0; a < n; ++a) {
            v(a) = scale * unif(rng);
        }
        return v;
    };

    StructuralReport rep;
    rep.trials = trials;
    rep.tolerance = tolerance;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    for (std::int64_t t = 0; t < trials; ++t) {
        // mix scales so near-coincident pairs are exercised too
        const double scale = (t % 3 == 0) ? 1e-3 : 1.0;
        const Eigen::MatrixXd M = sym(1.0);
        const Eigen::MatrixXd N = M + sym(scale);
        const Eigen::VectorXd p = vec(1.0);
        const Eigen::VectorXd q = p + vec(scale);
        const double z = unif(rng);
        const double w = z + scale * unif(rng);

        const double diff = evaluate_operator(op, M, p, z) - evaluate_operator(op, N, q, w);
        const Eigen::VectorXd ev = symmetric_eigenvalues(M - N);
        std::span<const double> s(ev.data(), static_cast<std::size_t>(ev.size()));
        const double slack = op.delta1 * (p - q).norm() + op.delta0 * std::abs(z - w);
        const double lower = pucci_minus(s, op.lambda, op.Lambda) - slack;
        const double upper = pucci_plus(s, op.lambda, op.Lambda) + slack;
        rep.worst_margin = std::min({rep.worst_margin, diff - lower, upper - diff});
    }
    rep.pass = rep.worst_margin >= -tolerance;
    return rep;
}

} // namespace ellpar
