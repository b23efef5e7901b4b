#include "canids/error.hpp"
#include "canids/gaussian.hpp"
#include "canids/mcd.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace canids;

TEST(Mcd, SingleGrossOutlier) {
    const std::vector<double> gaps{1, 1, 1, 1, 1, 1, 100};
    const auto r = mcd_filter(gaps, 0.14);
    EXPECT_EQ(r.inlier_mask, (std::vector<bool>{true, true, true, true, true, true, false}));
    EXPECT_DOUBLE_EQ(r.robust_mu, 1.0);
    EXPECT_EQ(r.outlier_count(), 1u);
}

TEST(Mcd, AllEqualFlagsNothing) {
    const std::vector<double> gaps(10, 0.1);
    const auto r = mcd_filter(gaps, 0.2);
    EXPECT_EQ(r.outlier_count(), 0u);
    EXPECT_EQ(r.robust_sigma, 0.0);
    EXPECT_DOUBLE_EQ(r.robust_mu, 0.1);
}

TEST(Mcd, SupportSize) {
    EXPECT_EQ(mcd_support_size(4), 3u);
    EXPECT_EQ(mcd_support_size(7), 4u);
    EXPECT_EQ(mcd_support_size(15), 8u);
}

TEST(Mcd, RejectsBadInput) {
    EXPECT_THROW(mcd_filter(std::vector<double>{1, 2, 3}), Error);
    EXPECT_THROW(mcd_filter(std::vector<double>{1, 2, 3, 4}, 0.5), Error);
    EXPECT_THROW(mcd_filter(std::vector<double>{1, 2, 3, 4}, -0.1), Error);
}

TEST(Mcd, FlaggedCountIsCeilContaminationN) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t n : {10u, 37u, 200u, 1000u}) {
        std::vector<double> v(n);
        for (auto& x : v) x = normal(rng);
        for (double c : {0.0, 0.0001, 0.01, 0.1, 0.3}) {
            const auto expected = static_cast<std::size_t>(std::ceil(c * static_cast<double>(n) - 1e-9));
            EXPECT_EQ(mcd_filter(v, c).outlier_count(), expected) << n << " " << c;
        }
    }
}

TEST(Mcd, MatchesExhaustiveSearchN15) {
    std::mt19937_64 rng(15);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> v(15);
        for (auto& x : v) x = unit(rng) < 0.2 ? 5.0 + normal(rng) : normal(rng);
        const auto r = mcd_filter(v, 0.1);
        std::vector<double> sorted = v;
        std::sort(sorted.begin(), sorted.end());
        std::vector<double> support;
        for (auto i : canids::testing::exhaustive_mcd_support(v, r.support_size)) support.push_back(v[i]);
        std::sort(support.begin(), support.end());
        EXPECT_TRUE(std::equal(support.begin(), support.end(), sorted.begin() + static_cast<long>(r.window_begin)));
        EXPECT_EQ(r.inlier_mask, canids::testing::exhaustive_mcd_mask(v, 0.1));
    }
}

TEST(Mcd, ScaleEquivariance) {
    std::mt19937_64 rng(21);
    std::lognormal_distribution<double> dist(0.0, 0.5);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> v(60);
        for (auto& x : v) x = dist(rng);
        const auto base = mcd_filter(v, 0.05);
        for (double c : {0.001, 3.0, 1000.0}) {
            std::vector<double> scaled = v;
            for (auto& x : scaled) x *= c;
            const auto r = mcd_filter(scaled, 0.05);
            EXPECT_EQ(r.inlier_mask, base.inlier_mask);
            EXPECT_NEAR(r.robust_mu, c * base.robust_mu, 1e-9 * c * std::abs(base.robust_mu));
            EXPECT_NEAR(r.robust_sigma, c * base.robust_sigma, 1e-9 * c * base.robust_sigma);
        }
    }
}

TEST(Mcd, RemovalNeverWidensDomainOrSpread) {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> normal(0.01, 0.001);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> v(300);
        for (auto& x : v) x = unit(rng) < 0.01 ? 1.0 + 100.0 * unit(rng) : std::abs(normal(rng));
        const auto r = mcd_filter(v, 0.02);
        const auto kept = apply_mask(v, r.inlier_mask);
        const auto all = summarize(v), inl = summarize(kept);
        EXPECT_LE(inl.max, all.max);
        EXPECT_LE(inl.stddev, all.stddev);
        EXPECT_LE(r.raw_sigma, all.stddev);
    }
}

TEST(Mcd, ConsistencyFactorMakesSigmaUnbiasedForGaussians) {
    std::mt19937_64 rng(41);
    std::normal_distribution<double> normal(0.0, 2.0);
    std::vector<double> v(20000);
    for (auto& x : v) x = normal(rng);
    const auto r = mcd_filter(v, 0.0);
    EXPECT_NEAR(r.robust_sigma, 2.0, 0.1);
    EXPECT_LT(r.raw_sigma, r.robust_sigma);
}

TEST(Mcd, ApplyMaskLengthMismatch) {
    EXPECT_THROW(apply_mask(std::vector<double>{1, 2}, std::vector<bool>{true}), Error);
}
