#include "ellpar/errors.hpp"
#include "ellpar/geometry.hpp"
#include "ellpar/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace ellpar;
using namespace ellpar::geometry;

TEST(XiContains, CentreIsInside)
{
    EXPECT_TRUE(xi_contains(XiShape(1.0), 0.0, 0.0));
}

TEST(XiContains, FlattenedReachBeyondDisk)
{
    const std::vector<double> dx{1.5, 0.0};
    EXPECT_TRUE(xi_contains(XiShape(1.0), dx, 0.0));
    // cross-check with the sampled Minkowski sum
    EXPECT_TRUE(oracle::minkowski_contains_sampled(dx, 0.0, 1.0, 1000));
}

TEST(XiContains, TopPointIsOnBoundary)
{
    EXPECT_FALSE(xi_contains(XiShape(1.0), 0.0, 1.0));
    EXPECT_TRUE(xi_contains_closed(XiShape(1.0), 0.0, 1.0));
}

TEST(XiContains, RejectsNonPositiveRadius)
{
    EXPECT_THROW(XiShape(0.0), DomainError);
    EXPECT_THROW(XiShape(-1.0), DomainError);
}

TEST(XiContains, AgreesWithBruteForceMinkowski)
{
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> ur(0.05, 1.0);
    std::uniform_real_distribution<double> u01(-1.0, 1.0);
    int mismatches = 0;
    int near_boundary = 0;
    for (int k = 0; k < 10000; ++k) {
        const double r = ur(rng);
        const double reach = r + std::cbrt(r * r);
        const std::vector<double> dx{1.2 * reach * u01(rng), 1.2 * reach * u01(rng)};
        const double dt = 1.2 * r * u01(rng);
        const bool fast = xi_contains(XiShape(r), dx, dt);
        const bool brute = oracle::minkowski_contains_sampled(dx, dt, r, 1000);
        if (fast == brute) {
            continue;
        }
        // only tolerated within 1e-3 of the boundary
        const double nrm = std::hypot(dx[0], dx[1]);
        bool flips = false;
        for (double ex : {-1e-3, 1e-3}) {
            for (double et : {-1e-3, 1e-3}) {
                flips |= xi_contains(XiShape(r), std::max(nrm + ex, 0.0), dt + et) != fast;
            }
        }
        if (flips) {
            ++near_boundary;
        } else {
            ++mismatches;
        }
    }
    EXPECT_EQ(mismatches, 0);
    EXPECT_LT(near_boundary, 500);
}

TEST(XiContains, ContainsBallAndContainedInCylinder)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double r = 0.3;
    const XiShape xi(r);
    for (int k = 0; k < 5000; ++k) {
        const double x = 2.0 * u(rng);
        const double t = 2.0 * u(rng);
        if (x * x + t * t < r * r) {
            EXPECT_TRUE(xi_contains(xi, std::abs(x), t));
        }
        if (xi_contains(xi, std::abs(x), t)) {
            EXPECT_LT(std::abs(x), r + std::cbrt(r * r));
            EXPECT_LT(std::abs(t), r);
        }
    }
}

TEST(XiSlice, RadiusAtLeastRAndNonincreasing)
{
    const XiShape xi(0.7);
    double prev = xi_slice_radius(xi, 0.0);
    EXPECT_DOUBLE_EQ(prev, 0.7 + std::cbrt(0.49));
    for (int k = 1; k <= 1000; ++k) {
        const double t = 0.7 * k / 1000.0;
        const double rad = xi_slice_radius(xi, t);
        EXPECT_LE(rad, prev);
        EXPECT_GE(rad, 0.7);
        EXPECT_EQ(rad, xi_slice_radius(xi, -t));
        prev = rad;
    }
    EXPECT_THROW((void)xi_slice_radius(xi, 0.71), DomainError);
}

TEST(LateralDistance, Endpoints)
{
    EXPECT_NEAR(xi_lateral_distance(1.0, 0.1, -1.0 + 1e-12), 1.1, 1e-9);
    EXPECT_NEAR(xi_lateral_distance(1.0, 0.1, -1e-15), 0.1, 1e-4);
}

TEST(LateralDistance, InteriorValueMatchesScan)
{
    // 0.25 + cbrt(0.75) to 25 digits
    const double expected = 1.158560296416069829445606;
    EXPECT_NEAR(xi_lateral_distance(1.0, 0.25, -0.5), expected, 1e-15);
    EXPECT_NEAR(oracle::lateral_distance_scan(1.0, 0.25, -0.5, 3600), expected, 1e-9);
}

TEST(LateralDistance, DomainErrors)
{
    EXPECT_THROW((void)xi_lateral_distance(1.0, 0.1, 0.0), DomainError);
    EXPECT_THROW((void)xi_lateral_distance(1.0, 0.1, -1.0), DomainError);
    EXPECT_THROW((void)xi_lateral_distance(1.0, 0.0, -0.5), DomainError);
    EXPECT_THROW((void)xi_lateral_distance(1.0, 1.5, -0.5), DomainError);
}

TEST(HarnackChain, TrivialForLargeS)
{
    const auto c = harnack_chain(1.0, 1.0);
    EXPECT_EQ(c.k, 0u);
    EXPECT_EQ(c.a.front(), 1.0 / 16.0);
    EXPECT_EQ(c.h.front(), 0.0);

    const auto edge = harnack_chain(1.0, 1.0 / 16.0);
    EXPECT_EQ(edge.k, 0u);
    EXPECT_LE(static_cast<double>(edge.k), 1.0 + std::log(4.0) / std::log(1.5));
}

TEST(HarnackChain, SmallSWithinBound)
{
    const auto c = harnack_chain(1.0, 1.0 / 256.0);
    EXPECT_LE(c.k, 6u);
    EXPECT_LE(static_cast<double>(c.k), harnack_length_bound(1.0, 1.0 / 256.0));
    EXPECT_GE(c.a.back(), 0.5 + 1.0 / 256.0);
}

TEST(HarnackChain, RecurrenceAndTimeOffsets)
{
    const double r = 2.0;
    const double s = 0.01;
    const auto c = harnack_chain(r, s);
    ASSERT_EQ(c.a.size(), c.k + 1);
    ASSERT_EQ(c.h.size(), c.k + 1);
    EXPECT_EQ(c.a[0], s);
    for (std::size_t j = 0; j < c.k; ++j) {
        const double d = c.a[j] - s;
        EXPECT_DOUBLE_EQ(c.a[j + 1], std::cbrt(r * c.a[j] * c.a[j] + d * d * d) + s);
        EXPECT_DOUBLE_EQ(c.h[j + 1], c.h[j] - c.a[j] * c.a[j]);
        EXPECT_LT(c.a[j], r / 2.0 + s);
    }
}

TEST(HarnackChain, LowerBoundOnRadiiAndLength)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ur(0.01, 10.0);
    std::uniform_real_distribution<double> ue(1.3, 12.0);
    for (int k = 0; k < 200; ++k) {
        const double r = ur(rng);
        const double s = r * std::pow(2.0, -4.0 - ue(rng)); // s < r/16
        const auto c = harnack_chain(r, s);
        for (std::size_t j = 0; j <= c.k; ++j) {
            const double bound = harnack_radius_lower_bound(r, s, j);
            EXPECT_GE(c.a[j], bound * (1.0 - 1e-12)) << "r=" << r << " s=" << s << " j=" << j;
        }
        EXPECT_LE(static_cast<double>(c.k), harnack_length_bound(r, s));
    }
}

TEST(HarnackChain, DomainErrors)
{
    EXPECT_THROW((void)harnack_chain(1.0, 0.0), DomainError);
    EXPECT_THROW((void)harnack_chain(1.0, 1.5), DomainError);
    EXPECT_THROW((void)harnack_chain(0.0, 0.5), DomainError);
}

TEST(HarnackLowerBound, Values)
{
    EXPECT_DOUBLE_EQ(harnack_lower_bound(0.5, 0.5, 1.0, 1.0), 0.5);
    EXPECT_TRUE(std::isinf(harnack_lower_bound(0.5, 1.0, 1.0, 1.0)));
    EXPECT_THROW((void)harnack_lower_bound(1.0, 0.5, 1.0, 1.0), DomainError);
    EXPECT_THROW((void)harnack_lower_bound(0.5, 0.0, 1.0, 1.0), DomainError);
    EXPECT_THROW((void)harnack_lower_bound(0.5, 0.5, 1.0, 0.0), DomainError);
}

TEST(HarnackLowerBound, RatioGrowsAsSShrinks)
{
    double prev = 0.0;
    double prev_f = 1.0;
    for (int k = 20; k >= 4; --k) {
        const double s = std::ldexp(1.0, -k);
        const double f = harnack_lower_bound(0.5, s, 1.0, 1.0);
        EXPECT_GT(f, 0.0);
        if (k < 20) {
            // walking towards larger s the ratio f/s must drop
            EXPECT_LT(f / s, prev);
            EXPECT_GT(f, prev_f);
        }
        prev = f / s;
        prev_f = f;
    }
}
