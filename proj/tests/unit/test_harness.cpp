#include "ellpar/errors.hpp"
#include "ellpar/harness.hpp"
#include "ellpar/operators.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ellpar;

TEST(JumpDatum, ShapeAndAffineNegativePhase)
{
    EXPECT_EQ(jump_datum(0.0), 0.5);
    EXPECT_EQ(jump_datum(0.3), 0.0);
    EXPECT_EQ(jump_datum(-0.3), 0.0);
    EXPECT_DOUBLE_EQ(jump_datum(1.0), -1.0);
    EXPECT_DOUBLE_EQ(jump_datum(-1.0), -1.0);
    EXPECT_DOUBLE_EQ(jump_datum(0.65), -0.5);
    EXPECT_GT(jump_datum(0.29), 0.0);
    EXPECT_LT(jump_datum(0.31), 0.0);
}

TEST(JumpScenario, DefaultsAndExpectations)
{
    const auto s = make_jump_scenario();
    EXPECT_EQ(s.spec.nodes, 401u);
    ASSERT_TRUE(s.spec.bn);
    EXPECT_EQ(s.spec.bn->n, 32);
    EXPECT_EQ(s.spec.op.kind, OperatorSpec::Kind::Trace);
    EXPECT_EQ(s.spec.T, 1.0);
    EXPECT_EQ(s.spec.dt, kJumpDt);
    EXPECT_EQ(s.spec.boundary(-1.0, 0.3), -1.0);
    ASSERT_EQ(s.expectations.size(), 3u);
    // 2 (dt + h) with h = 2 / 400
    EXPECT_DOUBLE_EQ(s.expectations[1].tolerance, 0.012);
    EXPECT_EQ(s.expectations[2].tolerance, 0.05);
}

TEST(JumpScenario, RejectsBadInput)
{
    EXPECT_THROW((void)make_jump_scenario(100, 32), DomainError);
    EXPECT_THROW((void)make_jump_scenario(401, 0), DomainError);
    EXPECT_NO_THROW((void)make_jump_scenario(101, 1));
}

TEST(JumpScenario, DatumIsInClassP)
{
    for (std::size_t nodes : {101u, 401u, 801u}) {
        const auto rep = check_class_p(make_jump_scenario(nodes, 32).spec);
        EXPECT_TRUE(rep.pass) << nodes;
        EXPECT_EQ(rep.boundary_error, 0.0);
        EXPECT_LE(rep.negative_residual, 1e-12);
        EXPECT_EQ(rep.interfaces, 2u);
        EXPECT_GT(rep.min_front_slope, 0.0);
    }
}

TEST(ClassP, RejectsWrongBoundaryAndCurvedNegativePhase)
{
    auto s = make_jump_scenario(201, 32);
    s.spec.u0 = [](double x) { return std::abs(x) < 0.3 ? jump_datum(x) : 0.9 * jump_datum(x); };
    auto rep = check_class_p(s.spec);
    EXPECT_FALSE(rep.pass);
    EXPECT_NEAR(rep.boundary_error, 0.1, 1e-12);

    s.spec.u0 = [](double x) { return (0.09 - x * x) / 0.91; };
    rep = check_class_p(s.spec);
    EXPECT_EQ(rep.boundary_error, 0.0);
    // u'' = -2 / 0.91 on the negative phase, so h^2 |F| is about 2.2 h^2
    EXPECT_GT(rep.negative_residual, 1e-4);
    EXPECT_FALSE(rep.pass);
}

TEST(ComparisonPair, StrictSeparationAtStartAndOnBoundary)
{
    const auto base = make_jump_scenario(401, 32);
    const auto pair = make_comparison_pair(base, 0.05);
    const Grid grid = make_problem_grid(base.spec);
    const auto lo = initial_field(pair.lower.spec, grid);
    const auto up = initial_field(pair.upper.spec, grid);
    ASSERT_EQ(lo.size(), up.size());
    for (std::size_t i = 0; i < lo.size(); ++i) {
        EXPECT_GE(up[i] - lo[i], 0.025 - 1e-15) << i;
    }
    EXPECT_EQ(pair.upper.spec.boundary(1.0, 0.5), -0.975);
    EXPECT_EQ(pair.lower.spec.boundary(1.0, 0.5), -1.0);
    // the positive phase grows by the gap on each side
    EXPECT_GT(up[grid.size() / 2 + 65], 0.0); // x = 0.325
}

TEST(ComparisonPair, RejectsBadGap)
{
    const auto base = make_jump_scenario(201, 32);
    EXPECT_THROW((void)make_comparison_pair(base, 0.0), DomainError);
    EXPECT_THROW((void)make_comparison_pair(base, -0.1), DomainError);
    EXPECT_THROW((void)make_comparison_pair(base, 0.8), InfeasibleError);
}

TEST(Acceptance, CriterionNames)
{
    EXPECT_STREQ(criterion_name(1), "bn-family");
    EXPECT_STREQ(criterion_name(11), "elliptic-hopf");
    EXPECT_THROW((void)criterion_name(0), ConfigError);
    EXPECT_THROW((void)criterion_name(12), ConfigError);
    EXPECT_THROW((void)run_acceptance({{3, 12}, 1, 1}), ConfigError);
}

TEST(Acceptance, QuickCriteriaPassAndReportIsDeterministic)
{
    const AcceptanceOptions opts{{5, 1, 2}, 11, 1};
    const auto a = run_acceptance(opts);
    ASSERT_EQ(a.criteria.size(), 3u);
    EXPECT_EQ(a.criteria[0].id, 1);
    EXPECT_EQ(a.criteria[2].id, 5);
    EXPECT_TRUE(a.pass);
    for (const auto& c : a.criteria) {
        EXPECT_TRUE(c.pass) << format_line(c);
        EXPECT_LE(c.runtime_s, c.runtime_limit_s);
    }
    auto ja = to_json(a);
    auto jb = to_json(run_acceptance(opts));
    EXPECT_TRUE(ja.contains("timing"));
    EXPECT_FALSE(ja["criteria"][0].contains("runtime_s"));
    ja.erase("timing");
    jb.erase("timing");
    EXPECT_EQ(ja.dump(), jb.dump());
}

TEST(Acceptance, FlippedPucciMinusFailsNamedCriterion)
{
    fault::flip_pucci_minus = true;
    const auto rep = run_acceptance({{2}, 20241, 1});
    fault::flip_pucci_minus = false;
    ASSERT_EQ(rep.criteria.size(), 1u);
    EXPECT_FALSE(rep.pass);
    EXPECT_EQ(format_line(rep.criteria[0]).rfind("criterion 2 pucci: FAIL (", 0), 0u);
    EXPECT_TRUE(run_acceptance({{2}, 20241, 1}).pass);
}
