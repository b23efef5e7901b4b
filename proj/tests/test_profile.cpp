#include "canids/error.hpp"
#include "canids/profile.hpp"
#include "canids/simulator.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>

using namespace canids;

namespace {

ProfileSet desk_profiles(std::uint64_t seed) {
    std::vector<std::vector<CanFrame>> logs{strip_labels(generate_ambient(desk_bus(seed, 30.0)))};
    return train_profiles(logs, TrainingConfig{});
}

} // namespace

TEST(Profile, TrainsEveryPeriodicAid) {
    const auto bus = desk_bus(1, 30.0);
    const auto set = desk_profiles(1);
    ASSERT_TRUE(set.with_outliers && set.without_outliers);
    EXPECT_EQ(set.with_outliers->size(), bus.aids.size());
    for (const auto& spec : bus.aids) {
        const auto& p = set.variant(OutlierMode::With).at(spec.aid);
        EXPECT_NEAR(p.mu, spec.period, 0.01 * spec.period);
    }
}

TEST(Profile, Invariants) {
    const auto set = desk_profiles(2);
    for (const auto& [aid, w] : *set.with_outliers) {
        const auto& wo = set.without_outliers->at(aid);
        EXPECT_LE(w.min, w.mu);
        EXPECT_LE(w.mu, w.max);
        EXPECT_LE(wo.min, wo.mu);
        EXPECT_LE(wo.mu, wo.max);
        EXPECT_LE(wo.max, w.max);
        EXPECT_GE(wo.min, w.min);
        EXPECT_FALSE(w.outliers_removed);
        EXPECT_TRUE(wo.outliers_removed);
        EXPECT_GT(w.n_train, 0u);
    }
}

TEST(Profile, FitProfileRemovesOutliers) {
    std::vector<double> gaps(100, 0.01);
    for (std::size_t i = 0; i < gaps.size(); ++i) gaps[i] += 1e-5 * static_cast<double>(i % 7);
    gaps[50] = 0.5;
    TrainingConfig cfg;
    cfg.contamination = 0.01;
    const auto with = fit_profile(0x10, gaps, false, cfg);
    const auto without = fit_profile(0x10, gaps, true, cfg);
    EXPECT_EQ(with.max, 0.5);
    EXPECT_LT(without.max, 0.02);
    EXPECT_EQ(without.outliers_flagged, 1u);
    EXPECT_EQ(without.n_train, 99u);
    EXPECT_THROW(fit_profile(0x10, std::vector<double>{0.1}, false, cfg), Error);
}

TEST(Profile, ConstantGapsHaveNoDistributionModels) {
    const std::vector<double> gaps(20, 0.125);
    const auto p = fit_profile(1, gaps, true, TrainingConfig{});
    EXPECT_EQ(p.sigma, 0.0);
    EXPECT_FALSE(p.gaussian);
    EXPECT_FALSE(p.kde);
}

TEST(Profile, JsonRoundTripIsExact) {
    const auto set = desk_profiles(3);
    EXPECT_EQ(profile_set_from_json(profile_set_to_json(set)), set);
    const auto path = (std::filesystem::temp_directory_path() / "canids_profile_test.json").string();
    save_profile_set(path, set);
    EXPECT_EQ(load_profile_set(path), set);
    std::remove(path.c_str());
}

TEST(Profile, SingleVariantAndMissingVariant) {
    TrainingConfig cfg;
    cfg.mode = OutlierMode::Without;
    std::vector<std::vector<CanFrame>> logs{strip_labels(generate_ambient(desk_bus(4, 10.0)))};
    const auto set = train_profiles(logs, cfg);
    EXPECT_FALSE(set.with_outliers);
    EXPECT_THROW(set.variant(OutlierMode::With), Error);
    EXPECT_NO_THROW(set.variant(OutlierMode::Without));
}

TEST(Profile, RejectsUnknownFormatVersion) {
    auto j = profile_set_to_json(desk_profiles(5));
    j["format_version"] = kProfileFormatVersion + 1;
    try {
        profile_set_from_json(j);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::FormatError);
    }
    EXPECT_THROW(profile_set_from_json(nlohmann::json::parse("{}")), Error);
}

TEST(Profile, OutlierModeStrings) {
    for (auto m : {OutlierMode::With, OutlierMode::Without, OutlierMode::Both})
        EXPECT_EQ(outlier_mode_from_string(to_string(m)), m);
    EXPECT_THROW(outlier_mode_from_string("sometimes"), Error);
}

TEST(Profile, GapsDoNotSpanLogs) {
    // Two logs far apart in time: the join must not create a huge gap.
    auto a = strip_labels(generate_ambient(desk_bus(6, 5.0)));
    auto b = a;
    for (auto& f : b) f.timestamp += 1000.0;
    std::vector<std::vector<CanFrame>> logs{a, b};
    const auto set = train_profiles(logs, TrainingConfig{});
    for (const auto& [aid, p] : *set.with_outliers) EXPECT_LT(p.max, 1.0);
}
