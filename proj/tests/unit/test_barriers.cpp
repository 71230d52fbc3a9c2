#include "ellpar/barriers.hpp"
#include "ellpar/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace ellpar;

namespace {

OperatorSpec pucci_minus_op(double lambda, double Lambda, int n, double d1 = 0.0, double d0 = 0.0)
{
    OperatorSpec op;
    op.kind = OperatorSpec::Kind::PucciMinus;
    op.lambda = lambda;
    op.Lambda = Lambda;
    op.n_dim = n;
    op.delta1 = d1;
    op.delta0 = d0;
    return op;
}

// Two-player operator in 2D with drift along the radial axis and a zero-order
// term, inside the class (lambda, Lambda, delta1, delta0) = (1, 2, 0.5, 0.25).
OperatorSpec bi_op()
{
    OperatorSpec op;
    op.kind = OperatorSpec::Kind::BellmanIsaacs;
    op.lambda = 1.0;
    op.Lambda = 2.0;
    op.delta1 = 0.5;
    op.delta0 = 0.25;
    op.n_dim = 2;
    Eigen::MatrixXd A1(2, 2);
    A1 << 1.5, 0.3, 0.3, 1.2;
    Eigen::MatrixXd A2(2, 2);
    A2 << 2.0, 0.0, 0.0, 1.0;
    Eigen::VectorXd v1(2);
    v1 << 0.2, -0.4;
    Eigen::VectorXd v2(2);
    v2 << 0.0, 0.5;
    op.bi = {{0, 0, A1, v1, -0.25}, {0, 1, A2, v2, 0.0}, {1, 0, A2, -v2, -0.1}};
    return op;
}

OperatorSpec divergence_op(PsiSpec psi, int n)
{
    OperatorSpec op;
    op.kind = OperatorSpec::Kind::Divergence;
    op.n_dim = n;
    op.psi = std::move(psi);
    return op;
}

double rel_err(double a, double b)
{
    return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

} // namespace

TEST(RadialBarrier, RecipeExample)
{
    const auto op = pucci_minus_op(1.0, 2.0, 2);
    const auto bar = solve_radial_barrier(op, 1.0, 1.0, -0.5, 0.0);
    EXPECT_EQ(bar.gamma, 2.0);
    EXPECT_DOUBLE_EQ(bar.tau2, 6.0);
    EXPECT_EQ(bar.c, 0.0);
    EXPECT_GT(bar.tau1, 0.0);
    // beta from the recipe is 1 here, so alpha = (2 beta - 1) / gamma
    EXPECT_DOUBLE_EQ(bar.beta, 1.0);
    EXPECT_DOUBLE_EQ(bar.alpha, 0.5);
    EXPECT_TRUE(std::isinf(bar.rho_c));
}

TEST(RadialBarrier, InvariantsAcrossInputs)
{
    for (int n : {1, 2, 3}) {
        for (double d1 : {0.0, 0.7}) {
            const auto op = pucci_minus_op(1.0, 3.0, n, d1, 0.2);
            for (double rho0 : {0.2, 0.6}) {
                for (double w : {0.0, 0.5, 3.0}) {
                    const auto bar = solve_radial_barrier(op, rho0, 2.0, -1.5, w);
                    const double g = bar.gamma;
                    EXPECT_GT(bar.tau1, 0.0);
                    EXPECT_GT(bar.tau2, 0.0);
                    EXPECT_GT(bar.alpha, 0.0);
                    EXPECT_DOUBLE_EQ(bar.c, w * 2.0);
                    EXPECT_LT(bar.c, bar.beta * bar.tau2);
                    const double slope = 2.0 * bar.beta * rho0 - bar.alpha * g * std::pow(rho0, -g - 1.0);
                    EXPECT_LE(rel_err(slope, 2.0), 1e-12);
                    const double nslope = 2.0 * bar.negative.beta * rho0 -
                                          bar.negative.alpha * g * std::pow(rho0, -g - 1.0);
                    EXPECT_LE(rel_err(nslope, 1.5), 1e-12);
                    EXPECT_GT(bar.eps, 0.0);
                }
            }
        }
    }
}

TEST(RadialBarrier, InfeasibleBeyondCriticalRadius)
{
    const auto op = pucci_minus_op(1.0, 2.0, 2, 1.0);
    EXPECT_THROW((void)solve_radial_barrier(op, 2.0, 1.0, -0.5, 0.0), InfeasibleError);
    EXPECT_NO_THROW((void)solve_radial_barrier(op, 1.5, 1.0, -0.5, 0.0));
    EXPECT_NO_THROW((void)solve_radial_barrier(op, 1.49, 1.0, -0.5, 0.0));
    EXPECT_THROW((void)solve_radial_barrier(op, 1.5 + 1e-12, 1.0, -0.5, 0.0), InfeasibleError);
}

TEST(RadialBarrier, RejectsBadInputs)
{
    const auto op = pucci_minus_op(1.0, 2.0, 2);
    EXPECT_THROW((void)solve_radial_barrier(op, 1.0, 1.0, 0.5, 0.0), DomainError);
    EXPECT_THROW((void)solve_radial_barrier(op, 1.0, 1.0, -1.5, 0.0), DomainError);
    EXPECT_THROW((void)solve_radial_barrier(op, 1.0, 1.0, -0.5, -1.0), DomainError);
    EXPECT_THROW((void)solve_radial_barrier(op, 0.0, 1.0, -0.5, 0.0), DomainError);
    EXPECT_THROW((void)solve_radial_barrier(divergence_op(PsiSpec::constant(1.0), 2), 1.0, 1.0, -0.5, 0.0),
                 DomainError);
}

TEST(RadialBarrier, EvaluationPinsFront)
{
    const auto op = pucci_minus_op(1.0, 2.0, 2);
    const auto bar = solve_radial_barrier(op, 1.0, 1.0, -0.5, 0.8);
    const auto p = eval_radial_barrier(bar, 1.0, 0.0);
    EXPECT_EQ(p.phi, 0.0);
    EXPECT_LE(rel_err(p.phi_r, 1.0), 1e-12);
    EXPECT_LE(rel_err(p.phi_t, bar.c), 1e-12);
    for (double t : {-0.5 * bar.eps, 0.3 * bar.eps}) {
        const double R = 1.0 - 0.8 * t;
        EXPECT_NEAR(eval_radial_barrier(bar, R, t).phi, 0.0, 1e-14);
    }
    EXPECT_THROW((void)eval_radial_barrier(bar, 1.0 + 1.001 * bar.eps, 0.0), DomainError);
    EXPECT_THROW((void)eval_radial_barrier(bar, 1.0, -bar.eps), DomainError);

    // zero speed: time-independent
    const auto still = solve_radial_barrier(op, 1.0, 1.0, -0.5, 0.0);
    EXPECT_EQ(eval_radial_barrier(still, 1.01, 0.0).phi, eval_radial_barrier(still, 1.01, 0.5 * still.eps).phi);
}

TEST(RadialBarrier, DerivativesMatchFiniteDifferences)
{
    const auto op = pucci_minus_op(1.0, 2.0, 3, 0.3);
    for (auto sign : {BarrierSign::Sub, BarrierSign::Super}) {
        const auto bar = solve_radial_barrier(op, 0.8, 1.0, -0.4, 0.6, sign);
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(-0.9, 0.9);
        int checked = 0;
        while (checked < 100) {
            const double rho = bar.rho0 + bar.eps * u(rng);
            const double t = bar.eps * u(rng);
            const double R = bar.rho0 - bar.omega_hat * t;
            const double h = 1e-6 * bar.eps;
            if (std::abs(rho - R) < 1e-3 * bar.eps) {
                continue; // kink on the front
            }
            ++checked;
            const auto p = eval_radial_barrier(bar, rho, t);
            auto f = [&](double r, double s) { return eval_radial_barrier(bar, r, s); };
            const double fr = (f(rho + h, t).phi - f(rho - h, t).phi) / (2 * h);
            const double ft = (f(rho, t + h).phi - f(rho, t - h).phi) / (2 * h);
            const double frr = (f(rho + h, t).phi_r - f(rho - h, t).phi_r) / (2 * h);
            EXPECT_LE(rel_err(fr, p.phi_r), 1e-6);
            EXPECT_LE(rel_err(ft, p.phi_t), 1e-6);
            EXPECT_LE(rel_err(frr, p.phi_rr), 1e-6);
        }
    }
}

TEST(RadialBarrier, StrictSubsolutionMarginAndFluxGap)
{
    const std::vector<OperatorSpec> ops{pucci_minus_op(1.0, 2.0, 2), pucci_minus_op(0.5, 4.0, 3, 0.5, 0.3),
                                        bi_op()};
    for (const auto& op : ops) {
        for (double w : {0.0, 1.0}) {
            const auto bar = solve_radial_barrier(op, 0.5, 1.0, -0.4, w);
            for (std::optional<BnFamily> bn : {std::optional<BnFamily>{}, std::optional<BnFamily>{BnFamily{16}}}) {
                const auto rep = verify_subsolution_margin(bar, op, BSpec::positive_part(), bn, 1000);
                EXPECT_TRUE(rep.pass) << to_string(op.kind) << " w=" << w;
                EXPECT_GE(rep.samples, 1000u);
                EXPECT_LE(rep.worst_relative, -kMarginRelative);
                EXPECT_LT(rep.worst_residual, 0.0);
                ASSERT_TRUE(rep.flux_gap);
                EXPECT_LE(rel_err(*rep.flux_gap, 0.6), 1e-10);
            }
        }
    }
}

TEST(RadialBarrier, NegationIsStrictSupersolution)
{
    const std::vector<OperatorSpec> ops{pucci_minus_op(1.0, 2.0, 2), bi_op()};
    for (const auto& op : ops) {
        const auto bar = solve_radial_barrier(op, 0.5, 1.0, -0.4, 1.0, BarrierSign::Super);
        const auto rep = verify_subsolution_margin(bar, op, BSpec::positive_part(), std::nullopt, 1000);
        EXPECT_TRUE(rep.pass);
        EXPECT_GE(rep.worst_relative, kMarginRelative);
        ASSERT_TRUE(rep.flux_gap);
        EXPECT_LE(rel_err(*rep.flux_gap, -0.6), 1e-10);
    }
}

TEST(HeatKernelBarrier, BracketNegativeForRecipeK)
{
    for (double d1 : {0.0, 1.0}) {
        for (double d0 : {0.0, 0.5}) {
            const auto op = pucci_minus_op(1.0, 2.0, 2, d1, d0);
            const auto bar = solve_heat_kernel_barrier(op, 0.5, 0.2, 1.0);
            EXPECT_GT(bar.k, 0.0);
            EXPECT_LT(bar.k, std::min(0.25 * 0.25 / 0.2, 1.0));
            EXPECT_LT(heat_kernel_bracket_sup(op, bar.k, 0.5, 0.2), 0.0);
            // brute-force scan of the bracket itself
            double worst = -1e300;
            for (int i = 0; i <= 200; ++i) {
                const double x = 0.5 + 0.5 * i / 200.0;
                for (int j = 1; j <= 400; ++j) {
                    const double t = 0.4 * j / 401.0;
                    const double k = bar.k;
                    const double br = (x * x - 2 * k * t) * (k - 1.0) / (4 * k * k * t * t) +
                                      d1 * x / (2 * k * t) + d0;
                    worst = std::max(worst, br);
                }
            }
            EXPECT_LT(worst, 0.0);
            // Gaussian tail bracket on eps
            const double lo = std::exp(-0.25 / (4 * bar.k * bar.eta)) / std::sqrt(bar.eta);
            const double hi = std::exp(-0.25 / (bar.k * (0.2 + bar.eta))) / std::sqrt(0.2 + bar.eta);
            EXPECT_LT(lo, bar.eps);
            EXPECT_LT(bar.eps, hi);
            EXPECT_LT(bar.eta, 0.2);
        }
    }
}

TEST(HeatKernelBarrier, SubsolutionWithSignConditions)
{
    for (double d1 : {0.0, 1.0}) {
        const auto op = pucci_minus_op(1.0, 2.0, 2, d1);
        const auto bar = solve_heat_kernel_barrier(op, 0.5, 0.2, 1.0);
        const auto rep = verify_subsolution_margin(bar, op, BSpec::positive_part(), std::nullopt, 1000);
        EXPECT_TRUE(rep.pass);
        ASSERT_TRUE(rep.flux_gap);
        EXPECT_GT(*rep.flux_gap, 0.0);
    }
}

TEST(HeatKernelBarrier, DerivativesMatchFiniteDifferences)
{
    const auto bar = solve_heat_kernel_barrier(pucci_minus_op(1.0, 2.0, 1), 0.5, 0.2, 1.0);
    for (int i = 1; i < 10; ++i) {
        for (int j = 1; j < 10; ++j) {
            const double x = 0.5 + 0.05 * i;
            const double t = 0.02 * j;
            const double h = 1e-6;
            const auto p = eval_heat_kernel_barrier(bar, x, t);
            const auto xp = eval_heat_kernel_barrier(bar, x + h, t);
            const auto xm = eval_heat_kernel_barrier(bar, x - h, t);
            if ((xp.phi > 0) != (xm.phi > 0)) {
                continue;
            }
            EXPECT_LE(rel_err((xp.phi - xm.phi) / (2 * h), p.phi_r), 1e-6);
            EXPECT_LE(rel_err((xp.phi_r - xm.phi_r) / (2 * h), p.phi_rr), 1e-6);
            const auto tp = eval_heat_kernel_barrier(bar, x, t + h);
            const auto tm = eval_heat_kernel_barrier(bar, x, t - h);
            EXPECT_LE(rel_err((tp.phi - tm.phi) / (2 * h), p.phi_t), 1e-6);
        }
    }
}

TEST(LogDivBarrier, ConstantPsiExample)
{
    const auto bar = solve_logdiv_barrier(PsiSpec::constant(1.0), BSpec::positive_part(), 0.0, 1.0, 1.0, 2);
    EXPECT_EQ(bar.k2, 0.0);
    EXPECT_DOUBLE_EQ(bar.k1, 2.0);
    EXPECT_DOUBLE_EQ(bar.eta0, 0.5);
    EXPECT_DOUBLE_EQ(bar.eta, 0.25);
    EXPECT_GT(bar.k, 4.0);
    EXPECT_EQ(bar.k, 8.0);
    EXPECT_GT((bar.k - bar.k2) / (bar.k * bar.k1) - 1.0 / bar.k, bar.eta);
    EXPECT_LT(std::log((bar.k - bar.k2) / bar.k1) / bar.k, 2.0);
    const double top = std::log(bar.a * bar.k * bar.eta + 1.0) / bar.k;
    EXPECT_GT(top, 2.0);
    EXPECT_LT(top, 3.0);
    EXPECT_EQ(bar.psi(0.0), 0.0);
    EXPECT_GT(bar.psi(bar.eta), 2.0);
}

TEST(LogDivBarrier, MaximaAgainstDenseScan)
{
    const auto psi = PsiSpec::polynomial({1.0, 0.5, 0.25});
    const auto b = BSpec::table({0.0, 0.4}, {2.0, 0.5});
    const auto bar = solve_logdiv_barrier(psi, b, 1.5, 0.7, 0.5, 3);
    double k1 = 0.0;
    double k2 = 0.0;
    for (int i = 0; i <= 150000; ++i) {
        const double s = 1.5 * i / 150000.0;
        const double y = b_eval(b, s);
        k1 = std::max(k1, 1.5 * b_derivative(b, s) / psi_eval(psi, y));
        k2 = std::max(k2, std::abs(psi_derivative(psi, y)) * b_derivative(b, s) / psi_eval(psi, y));
    }
    k1 += 2.0 * 2 / 0.7;
    EXPECT_GE(bar.k1, k1 * (1 - 1e-12));
    EXPECT_LE(rel_err(bar.k1, k1), 1e-6);
    EXPECT_GE(bar.k2, k2 * (1 - 1e-12));
    EXPECT_LE(rel_err(bar.k2, k2), 1e-6);
}

TEST(LogDivBarrier, StrictSupersolutionOfDivergenceProblem)
{
    struct Case {
        PsiSpec psi;
        BSpec b;
        double omega;
        double rho0;
        double M;
        int n;
    };
    const std::vector<Case> cases{
        {PsiSpec::constant(1.0), BSpec::positive_part(), 0.0, 1.0, 1.0, 2},
        {PsiSpec::polynomial({1.0, 0.5, 0.25}), BSpec::positive_part(), 1.0, 0.5, 0.5, 2},
        {PsiSpec::polynomial({2.0, -0.3}), BSpec::table({0.0, 0.4}, {2.0, 0.5}), 0.7, 1.0, 1.0, 3},
        {PsiSpec::constant(0.5), BSpec::positive_part(), 2.0, 0.3, 0.2, 1},
    };
    for (const auto& c : cases) {
        const auto bar = solve_logdiv_barrier(c.psi, c.b, c.omega, c.rho0, c.M, c.n);
        const auto rep = verify_subsolution_margin(bar, divergence_op(c.psi, c.n), c.b, std::nullopt, 1000);
        EXPECT_TRUE(rep.pass) << "omega=" << c.omega << " worst=" << rep.worst_relative;
        EXPECT_GE(rep.worst_relative, kMarginRelative);
        EXPECT_GT(rep.worst_residual, 0.0);
    }
}

TEST(LogDivBarrier, DerivativesMatchFiniteDifferences)
{
    const auto bar = solve_logdiv_barrier(PsiSpec::constant(1.0), BSpec::positive_part(), 1.0, 1.0, 0.1, 2);
    for (int i = 1; i < 10; ++i) {
        const double t = 0.1;
        const double rho = bar.rho0 + bar.omega * t + bar.eta * i / 10.0;
        const double h = 1e-7 * bar.eta;
        const auto p = eval_logdiv_barrier(bar, rho, t);
        const auto rp = eval_logdiv_barrier(bar, rho + h, t);
        const auto rm = eval_logdiv_barrier(bar, rho - h, t);
        EXPECT_LE(rel_err((rp.phi - rm.phi) / (2 * h), p.phi_r), 1e-6);
        EXPECT_LE(rel_err((rp.phi_r - rm.phi_r) / (2 * h), p.phi_rr), 1e-6);
        const double ht = h / bar.omega;
        const auto tp = eval_logdiv_barrier(bar, rho, t + ht);
        const auto tm = eval_logdiv_barrier(bar, rho, t - ht);
        EXPECT_LE(rel_err((tp.phi - tm.phi) / (2 * ht), p.phi_t), 1e-6);
    }
    EXPECT_THROW((void)eval_logdiv_barrier(bar, bar.rho0 - 0.01, 0.0), DomainError);
    EXPECT_THROW((void)eval_logdiv_barrier(bar, 0.2, -0.6), DomainError);
}

TEST(ParabolaBarrier, DecreasingParabola)
{
    const auto op = pucci_minus_op(1.0, 1.0, 2);
    const auto bar = ParabolaBarrier::decr_parabola(op);
    EXPECT_DOUBLE_EQ(bar.gamma, 1.0 / 32.0);
    const auto rep = verify_subsolution_margin(bar, op, BSpec::positive_part(), std::nullopt, 1000);
    EXPECT_TRUE(rep.pass);
    EXPECT_FALSE(rep.strict);
    EXPECT_LE(rep.worst_residual, 1e-12);
    EXPECT_EQ(eval_parabola_barrier(bar, 0.6, 0.0).phi, 0.0);
    EXPECT_DOUBLE_EQ(eval_parabola_barrier(bar, 0.0, bar.gamma).phi, 0.5);
    EXPECT_EQ(ParabolaBarrier::decr_parabola(pucci_minus_op(0.01, 0.02, 1)).gamma, 1.0);
}

TEST(ParabolaBarrier, EpsEtaSupersolution)
{
    const auto op = pucci_minus_op(1.0, 2.0, 2, 0.5, 0.5);
    const auto bar = ParabolaBarrier::eps_eta(op, 1.0, 0.5, 1e-4, 5e-5);
    const auto rep = verify_subsolution_margin(bar, op, BSpec::positive_part(), std::nullopt, 1000);
    EXPECT_TRUE(rep.pass);
    EXPECT_GE(rep.worst_relative, kMarginRelative);
    // smallness conditions surface as infeasibility
    EXPECT_THROW((void)ParabolaBarrier::eps_eta(op, 1.0, 0.5, 0.5, 0.1), InfeasibleError);
    EXPECT_THROW((void)ParabolaBarrier::eps_eta(pucci_minus_op(1.0, 2.0, 2, 500.0, 500.0), 1.0, 0.5, 1e-4, 5e-5),
                 InfeasibleError);
    EXPECT_THROW((void)ParabolaBarrier::eps_eta(op, 1.0, 0.5, 1e-4, 2e-4), DomainError);
}

TEST(OffsetSets, ZeroOffsetIsPositiveSet)
{
    std::vector<double> x(201);
    std::vector<double> u(201);
    for (int i = 0; i <= 200; ++i) {
        x[i] = -1.0 + 0.01 * i;
        u[i] = 0.09 - x[i] * x[i];
    }
    const auto s = front_offset_sets(x, u, 0.0, BarrierSign::Super);
    for (std::size_t i = 0; i < x.size(); ++i) {
        EXPECT_EQ(s.mask[i], u[i] > 0.0) << x[i];
    }
}

TEST(OffsetSets, IntervalArithmetic)
{
    std::vector<double> x(201);
    std::vector<double> u(201);
    for (int i = 0; i <= 200; ++i) {
        x[i] = -1.0 + 0.01 * i;
        // linear profile: the interpolant vanishes exactly at +-0.3
        u[i] = 0.3 - std::abs(x[i]);
    }
    const auto sup = front_offset_sets(x, u, 1e-4, BarrierSign::Super);
    ASSERT_EQ(sup.intervals.size(), 1u);
    EXPECT_NEAR(sup.intervals[0].first, -0.4, 1e-12);
    EXPECT_NEAR(sup.intervals[0].second, 0.4, 1e-12);
    const auto sub = front_offset_sets(x, u, 1e-4, BarrierSign::Sub);
    ASSERT_EQ(sub.intervals.size(), 1u);
    EXPECT_NEAR(sub.intervals[0].first, -0.2, 1e-12);
    EXPECT_NEAR(sub.intervals[0].second, 0.2, 1e-12);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::abs(std::abs(x[i]) - 0.4) > 1e-9) {
            EXPECT_EQ(sup.mask[i], std::abs(x[i]) < 0.4) << x[i];
        }
        if (std::abs(std::abs(x[i]) - 0.2) > 1e-9) {
            EXPECT_EQ(sub.mask[i], std::abs(x[i]) < 0.2) << x[i];
        }
    }
    EXPECT_THROW((void)front_offset_sets(x, u, -1.0, BarrierSign::Super), DomainError);
}
