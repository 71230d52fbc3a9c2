#include "ellpar/errors.hpp"
#include "ellpar/grid.hpp"
#include "ellpar/operators.hpp"
#include "ellpar/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace ellpar;

namespace {

OperatorSpec make_op(OperatorSpec::Kind kind, double lambda, double Lambda, int n_dim = 1)
{
    OperatorSpec op;
    op.kind = kind;
    op.lambda = lambda;
    op.Lambda = Lambda;
    op.n_dim = n_dim;
    return op;
}

OperatorSpec make_bi(int n_dim)
{
    OperatorSpec op = make_op(OperatorSpec::Kind::BellmanIsaacs, 0.5, 2.0, n_dim);
    op.delta1 = 0.3;
    op.delta0 = 0.2;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ev(0.5, 2.0);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 3; ++b) {
            Eigen::MatrixXd Q = Eigen::MatrixXd::Random(n_dim, n_dim);
            Eigen::HouseholderQR<Eigen::MatrixXd> qr(Q);
            const Eigen::MatrixXd R = qr.householderQ();
            Eigen::VectorXd d(n_dim);
            for (int k = 0; k < n_dim; ++k) {
                d(k) = ev(rng);
            }
            Eigen::MatrixXd A = R * d.asDiagonal() * R.transpose();
            A = 0.5 * (A + A.transpose()).eval();
            Eigen::VectorXd drift(n_dim);
            for (int k = 0; k < n_dim; ++k) {
                drift(k) = u(rng);
            }
            drift *= 0.29 / drift.norm();
            op.bi.push_back({a, b, A, drift, -0.2 * (0.5 + 0.5 * u(rng))});
        }
    }
    return op;
}

} // namespace

TEST(Pucci, Examples)
{
    const std::vector<double> a{1.0, 1.0};
    const std::vector<double> b{1.0, -1.0};
    const std::vector<double> z{0.0, 0.0, 0.0};
    EXPECT_EQ(pucci_plus(a, 1.0, 2.0), 4.0);
    EXPECT_EQ(pucci_plus(b, 1.0, 2.0), 1.0);
    EXPECT_EQ(pucci_plus(z, 0.3, 7.0), 0.0);
    EXPECT_EQ(pucci_minus(b, 1.0, 2.0), -1.0);
    EXPECT_EQ(pucci_minus(z, 0.3, 7.0), 0.0);
    const std::vector<double> e{-2.5};
    EXPECT_EQ(pucci_minus(e, 1.0, 1.0), -2.5);
    EXPECT_EQ(pucci_plus(e, 1.0, 1.0), -2.5);
}

TEST(Pucci, DualityIsExact)
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    std::uniform_real_distribution<double> l(0.1, 3.0);
    for (int k = 0; k < 10000; ++k) {
        std::vector<double> e(1 + k % 5);
        for (auto& v : e) {
            v = u(rng);
        }
        std::vector<double> ne(e.size());
        for (std::size_t i = 0; i < e.size(); ++i) {
            ne[i] = -e[i];
        }
        const double lam = l(rng);
        const double Lam = lam + l(rng);
        EXPECT_EQ(pucci_minus(e, lam, Lam), -pucci_plus(ne, lam, Lam));
    }
    const std::vector<double> p{2.0, -3.0};
    const std::vector<double> q{-2.0, 3.0};
    EXPECT_EQ(pucci_minus(p, 0.7, 1.9), -pucci_plus(q, 0.7, 1.9));
}

TEST(Pucci, DegenerateIsScaledTrace)
{
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    std::uniform_real_distribution<double> l(0.1, 3.0);
    for (int k = 0; k < 1000; ++k) {
        std::vector<double> e{u(rng), u(rng), u(rng)};
        const double tr = e[0] + e[1] + e[2];
        const double lam = l(rng);
        EXPECT_EQ(pucci_plus(e, lam, lam), lam * tr);
        EXPECT_EQ(pucci_minus(e, lam, lam), lam * tr);
    }
}

TEST(Pucci, MatchesBruteForceOverCoefficientMatrices)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double lam = 1.0;
    const double Lam = 2.0;
    for (int k = 0; k < 100; ++k) {
        Eigen::Matrix2d M;
        M(0, 0) = u(rng);
        M(1, 1) = u(rng);
        M(0, 1) = M(1, 0) = u(rng);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(M);
        const std::vector<double> ev{es.eigenvalues()(0), es.eigenvalues()(1)};
        const auto brute = oracle::pucci_bruteforce_2x2(M, lam, Lam, 10000, 100 + k);
        const double plus = pucci_plus(ev, lam, Lam);
        const double minus = pucci_minus(ev, lam, Lam);
        EXPECT_GE(plus - brute.sup, -1e-12);
        EXPECT_LE(plus - brute.sup, 1e-3);
        EXPECT_LE(minus - brute.inf, 1e-12);
        EXPECT_GE(minus - brute.inf, -1e-3);
    }
    const auto b = oracle::pucci_bruteforce_2x2(Eigen::Matrix2d::Identity(), lam, Lam, 10000, 1);
    EXPECT_NEAR(b.sup, 4.0, 1e-3);
}

TEST(OperatorSpec, Validation)
{
    EXPECT_NO_THROW(make_op(OperatorSpec::Kind::PucciPlus, 1.0, 2.0).validate());
    EXPECT_THROW(make_op(OperatorSpec::Kind::PucciPlus, 0.0, 2.0).validate(), DomainError);
    EXPECT_THROW(make_op(OperatorSpec::Kind::PucciPlus, 2.0, 1.0).validate(), DomainError);
    EXPECT_THROW(make_op(OperatorSpec::Kind::Trace, 1.5, 2.0).validate(), DomainError);

    auto bi = make_bi(2);
    EXPECT_NO_THROW(bi.validate());
    bi.bi[0].c = 0.1;
    EXPECT_THROW(bi.validate(), DomainError);
    bi = make_bi(2);
    bi.bi[0].A(0, 0) = 5.0;
    EXPECT_THROW(bi.validate(), DomainError);
    bi = make_bi(2);
    bi.bi[1].drift *= 10.0;
    EXPECT_THROW(bi.validate(), DomainError);

    EXPECT_EQ(operator_kind_from_string("pucci-minus"), OperatorSpec::Kind::PucciMinus);
    EXPECT_THROW((void)operator_kind_from_string("laplace"), DomainError);
}

TEST(OperatorEval, VanishesAtZero)
{
    for (auto kind : {OperatorSpec::Kind::Trace, OperatorSpec::Kind::PucciPlus,
                      OperatorSpec::Kind::PucciMinus, OperatorSpec::Kind::Divergence}) {
        const auto op = make_op(kind, 0.5, 2.0, 2);
        EXPECT_EQ(evaluate_operator(op, Eigen::MatrixXd::Zero(2, 2), Eigen::VectorXd::Zero(2), 0.0), 0.0);
    }
    EXPECT_EQ(evaluate_operator(make_bi(2), Eigen::MatrixXd::Zero(2, 2), Eigen::VectorXd::Zero(2), 0.0), 0.0);
}

TEST(OperatorEval, DegenerateEllipticity)
{
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<OperatorSpec> ops{make_op(OperatorSpec::Kind::Trace, 0.5, 2.0, 3),
                                  make_op(OperatorSpec::Kind::PucciPlus, 0.5, 2.0, 3),
                                  make_op(OperatorSpec::Kind::PucciMinus, 0.5, 2.0, 3), make_bi(3)};
    auto div = make_op(OperatorSpec::Kind::Divergence, 0.5, 2.0, 3);
    div.psi = PsiSpec::polynomial({1.0, 0.5});
    ops.push_back(div);
    for (const auto& op : ops) {
        for (int k = 0; k < 2000; ++k) {
            Eigen::MatrixXd M(3, 3);
            Eigen::MatrixXd P(3, 3);
            for (int a = 0; a < 3; ++a) {
                for (int b = a; b < 3; ++b) {
                    M(a, b) = M(b, a) = u(rng);
                    P(a, b) = P(b, a) = u(rng);
                }
            }
            const Eigen::MatrixXd N = M + P * P.transpose(); // N >= M
            const Eigen::VectorXd p = Eigen::VectorXd::Random(3);
            const double z = u(rng);
            EXPECT_LE(evaluate_operator(op, M, p, z), evaluate_operator(op, N, p, z) + 1e-12)
                << to_string(op.kind);
        }
    }
}

TEST(OperatorEval, BellmanIsaacsInfSup)
{
    OperatorSpec op = make_op(OperatorSpec::Kind::BellmanIsaacs, 1.0, 3.0, 1);
    op.delta1 = 1.0;
    auto entry = [](int a, int b, double A, double d) {
        return BIEntry{a, b, Eigen::MatrixXd::Constant(1, 1, A), Eigen::VectorXd::Constant(1, d), 0.0};
    };
    op.bi = {entry(0, 0, 1.0, 0.0), entry(0, 1, 3.0, 0.0), entry(1, 0, 2.0, 1.0), entry(1, 1, 2.0, -1.0)};
    op.validate();
    const Eigen::MatrixXd M = Eigen::MatrixXd::Constant(1, 1, 1.0);
    const Eigen::VectorXd p = Eigen::VectorXd::Constant(1, 0.5);
    // alpha 0: max(1, 3) = 3; alpha 1: max(2.5, 1.5) = 2.5; min = 2.5
    EXPECT_DOUBLE_EQ(evaluate_operator(op, M, p, 0.0), 2.5);
}

TEST(RadialSecondOrder, Examples)
{
    RadialProfile prof;
    prof.rho = {0.5, 1.0, 2.0};
    prof.psi = {0.0, 0.0, 0.0};
    prof.psi_prime = {0.3, -0.4, 1.0};
    prof.psi_double_prime = {-0.2, 0.7, 2.0};
    prof.n_dim = 2;
    const auto trace = make_op(OperatorSpec::Kind::Trace, 1.0, 1.0, 2);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_DOUBLE_EQ(radial_second_order(prof, i, trace),
                         prof.psi_prime[i] / prof.rho[i] + prof.psi_double_prime[i]);
    }
    // increasing concave profile under M-
    const auto pm = make_op(OperatorSpec::Kind::PucciMinus, 1.0, 2.0, 2);
    EXPECT_DOUBLE_EQ(radial_second_order(prof, 0, pm), 1.0 * 0.3 / 0.5 + 2.0 * -0.2);

    // |x|^2 in three dimensions has Laplacian 6
    RadialProfile sq;
    sq.rho = {0.7};
    sq.psi = {0.49};
    sq.psi_prime = {1.4};
    sq.psi_double_prime = {2.0};
    sq.n_dim = 3;
    EXPECT_DOUBLE_EQ(radial_second_order(sq, 0, make_op(OperatorSpec::Kind::Trace, 1.0, 1.0, 3)), 6.0);

    EXPECT_THROW((void)radial_second_order(prof, 3, trace), std::out_of_range);
    prof.rho[0] = 0.0;
    EXPECT_THROW((void)radial_second_order(prof, 0, trace), DomainError);
}

TEST(RadialSecondOrder, DivergenceExpandedForm)
{
    auto op = make_op(OperatorSpec::Kind::Divergence, 1.0, 1.0, 3);
    op.psi = PsiSpec::polynomial({1.0, 2.0});
    RadialProfile prof;
    prof.rho = {1.5};
    prof.psi = {0.4};
    prof.psi_prime = {-0.3};
    prof.psi_double_prime = {0.8};
    prof.n_dim = 3;
    const double expected = (1.0 + 2.0 * 0.4) * (0.8 + 2.0 * -0.3 / 1.5) + 2.0 * 1.0 * 0.09;
    EXPECT_DOUBLE_EQ(radial_second_order(prof, 0, op), expected);
}

TEST(ApplyOperator1d, ExactOnPolynomials)
{
    const Grid g = make_grid(Geometry::interval(-1.0, 1.0), 21);
    std::vector<double> lin(g.size());
    std::vector<double> quad(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        lin[i] = 0.3 * g.x[i] - 0.1;
        quad[i] = g.x[i] * g.x[i];
    }
    const auto op = make_op(OperatorSpec::Kind::Trace, 1.0, 1.0);
    const auto fl = apply_operator_1d(op, g, lin);
    const auto fq = apply_operator_1d(op, g, quad);
    EXPECT_EQ(fl.front(), 0.0);
    EXPECT_EQ(fl.back(), 0.0);
    for (std::size_t i = 1; i + 1 < g.size(); ++i) {
        EXPECT_NEAR(fl[i], 0.0, 1e-12);
        EXPECT_NEAR(fq[i], 2.0, 1e-11);
    }
    EXPECT_THROW((void)apply_operator_1d(op, g, std::vector<double>(5)), std::invalid_argument);
}

TEST(ApplyOperator1d, DivergenceWithUnitPsiMatchesTrace)
{
    const Grid g = make_grid(Geometry::interval(0.0, 1.0), 41);
    std::vector<double> u(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        u[i] = 0.2 + 0.5 * g.x[i] - 0.3 * g.x[i] * g.x[i];
    }
    auto div = make_op(OperatorSpec::Kind::Divergence, 1.0, 1.0);
    div.psi = PsiSpec::constant(1.0);
    const auto a = apply_operator_1d(div, g, u);
    const auto b = apply_operator_1d(make_op(OperatorSpec::Kind::Trace, 1.0, 1.0), g, u);
    for (std::size_t i = 0; i < g.size(); ++i) {
        EXPECT_NEAR(a[i], b[i], 1e-12);
    }
}

TEST(ApplyOperator1d, RadialSecondOrderConvergence)
{
    // psi = exp(-rho^2) on the annulus (0.5, 1.5), n = 3, several kinds
    auto psi = [](double r) { return std::exp(-r * r); };
    auto d1 = [](double r) { return -2.0 * r * std::exp(-r * r); };
    auto d2 = [](double r) { return (4.0 * r * r - 2.0) * std::exp(-r * r); };
    auto div = make_op(OperatorSpec::Kind::Divergence, 1.0, 1.0, 3);
    div.psi = PsiSpec::polynomial({1.0, 1.0});
    for (const auto& op : {make_op(OperatorSpec::Kind::Trace, 1.0, 1.0, 3),
                           make_op(OperatorSpec::Kind::PucciMinus, 1.0, 1.0, 3), div}) {
        std::vector<double> err;
        for (std::size_t nodes : {41u, 81u, 161u}) {
            const Grid g = make_grid(Geometry::annulus(0.5, 1.5, 3), nodes);
            std::vector<double> u(g.size());
            for (std::size_t i = 0; i < g.size(); ++i) {
                u[i] = psi(g.x[i]);
            }
            const auto F = apply_operator_1d(op, g, u);
            // the node rho = 1 sits at a fixed index fraction
            const std::size_t i = (nodes - 1) / 2;
            RadialProfile prof{{g.x[i]}, {u[i]}, {d1(g.x[i])}, {d2(g.x[i])}, 3};
            err.push_back(std::abs(F[i] - radial_second_order(prof, 0, op)));
        }
        const double p1 = std::log2(err[0] / err[1]);
        const double p2 = std::log2(err[1] / err[2]);
        EXPECT_GE(p1, 1.9) << to_string(op.kind);
        EXPECT_GE(p2, 1.9) << to_string(op.kind);
    }
}

TEST(ApplyOperator1d, MonotoneSchemeCoefficients)
{
    // off-diagonal derivatives must be nonnegative for every kind, including
    // nodes where the first-order term forces one-sided differences
    const Grid g = make_grid(Geometry::annulus(0.05, 1.0, 3), 30);
    std::vector<OperatorSpec> ops{make_op(OperatorSpec::Kind::Trace, 0.5, 2.0, 3),
                                  make_op(OperatorSpec::Kind::PucciPlus, 0.5, 2.0, 3),
                                  make_op(OperatorSpec::Kind::PucciMinus, 0.5, 2.0, 3), make_bi(3)};
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    bool saw_upwind = false;
    for (const auto& op : ops) {
        for (std::size_t i = 1; i + 1 < g.size(); ++i) {
            saw_upwind |= use_upwind(op, g, i);
            for (int k = 0; k < 20; ++k) {
                const auto s = eval_stencil(op, BSpec::positive_part(), g, i, u(rng), u(rng), u(rng));
                EXPECT_GE(s.d_left, 0.0);
                EXPECT_GE(s.d_right, 0.0);
                EXPECT_LE(s.d_centre, 0.0);
            }
        }
    }
    EXPECT_TRUE(saw_upwind);
}

TEST(ApplyOperator1d, StencilDerivativesMatchFiniteDifferences)
{
    const Grid g = make_grid(Geometry::annulus(0.5, 1.5, 2), 21);
    auto div = make_op(OperatorSpec::Kind::Divergence, 1.0, 1.0, 2);
    div.psi = PsiSpec::polynomial({1.0, 0.7, 0.2});
    std::vector<OperatorSpec> ops{make_op(OperatorSpec::Kind::PucciPlus, 0.5, 2.0, 2), make_bi(2), div};
    const double h = 1e-7;
    for (const auto& op : ops) {
        const double ul = 0.31;
        const double uc = 0.47;
        const double ur = 0.52;
        const auto s = eval_stencil(op, BSpec::positive_part(), g, 7, ul, uc, ur);
        auto F = [&](double a, double b, double c) {
            return eval_stencil(op, BSpec::positive_part(), g, 7, a, b, c).value;
        };
        const double scale = 1.0 / (g.h * g.h);
        EXPECT_NEAR(s.d_left, (F(ul + h, uc, ur) - F(ul - h, uc, ur)) / (2 * h), 1e-5 * scale);
        EXPECT_NEAR(s.d_centre, (F(ul, uc + h, ur) - F(ul, uc - h, ur)) / (2 * h), 1e-5 * scale);
        EXPECT_NEAR(s.d_right, (F(ul, uc, ur + h) - F(ul, uc, ur - h)) / (2 * h), 1e-5 * scale);
    }
}

TEST(StructuralEnvelope, TraceEqualityCase)
{
    const auto rep = structural_envelope_check(make_op(OperatorSpec::Kind::Trace, 1.0, 1.0, 2), 1000, 1);
    EXPECT_TRUE(rep.pass);
    EXPECT_NEAR(rep.worst_margin, 0.0, 1e-12);
}

TEST(StructuralEnvelope, AllKindsPass)
{
    for (int n = 1; n <= 3; ++n) {
        for (const auto& op : {make_op(OperatorSpec::Kind::Trace, 0.5, 2.0, n),
                               make_op(OperatorSpec::Kind::PucciPlus, 0.5, 2.0, n),
                               make_op(OperatorSpec::Kind::PucciMinus, 0.5, 2.0, n), make_bi(n)}) {
            const auto rep = structural_envelope_check(op, 10000, 42);
            EXPECT_TRUE(rep.pass) << to_string(op.kind) << " n=" << n << " margin=" << rep.worst_margin;
        }
    }
}

TEST(StructuralEnvelope, DetectsFlippedLowerEnvelope)
{
    const auto op = make_op(OperatorSpec::Kind::PucciPlus, 0.5, 2.0, 2);
    EXPECT_TRUE(structural_envelope_check(op, 2000, 3).pass);
    fault::flip_pucci_minus = true;
    const auto rep = structural_envelope_check(op, 2000, 3);
    fault::flip_pucci_minus = false;
    EXPECT_FALSE(rep.pass);
}

TEST(StructuralEnvelope, DivergenceNotCovered)
{
    EXPECT_THROW((void)structural_envelope_check(make_op(OperatorSpec::Kind::Divergence, 1.0, 1.0), 10, 1),
                 std::invalid_argument);
}
