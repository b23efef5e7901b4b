#include "canids/error.hpp"
#include "canids/gaps.hpp"
#include "canids/labels.hpp"
#include "canids/simulator.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace canids;

namespace {

BusSpec one_aid(double period, double jitter, double duration, std::uint64_t seed = 1) {
    BusSpec spec;
    AidSpec a;
    a.aid = 0x100;
    a.period = period;
    a.jitter_sigma = jitter;
    spec.aids.push_back(a);
    spec.duration = duration;
    spec.seed = seed;
    return spec;
}

std::size_t injected_count(const std::vector<LabeledFrame>& frames) {
    return static_cast<std::size_t>(std::count_if(frames.begin(), frames.end(), [](auto& f) { return f.label; }));
}

} // namespace

TEST(Ambient, TenFramesWithoutJitter) {
    const auto frames = generate_ambient(one_aid(0.1, 0.0, 1.0));
    ASSERT_EQ(frames.size(), 10u);
    for (std::size_t k = 0; k < frames.size(); ++k) {
        EXPECT_NEAR(frames[k].frame.timestamp, 0.1 * static_cast<double>(k), 1e-9);
        EXPECT_FALSE(frames[k].label);
        EXPECT_EQ(frames[k].source, FrameSource::Ambient);
    }
}

TEST(Ambient, MeanGapWithinOnePercent) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto frames = generate_ambient(one_aid(0.02, 0.0002, 60.0, seed));
        const auto g = extract_gaps(strip_labels(frames));
        const auto& gaps = g.series.at(0x100).gaps;
        double sum = 0.0;
        for (double x : gaps) sum += x;
        EXPECT_NEAR(sum / static_cast<double>(gaps.size()), 0.02, 0.0002);
    }
}

TEST(Ambient, MergedOutputSortedAndReproducible) {
    const auto a = generate_ambient(desk_bus(3, 20.0));
    EXPECT_TRUE(std::is_sorted(a.begin(), a.end(),
                               [](auto& x, auto& y) { return x.frame.timestamp < y.frame.timestamp; }));
    EXPECT_EQ(strip_labels(a), strip_labels(generate_ambient(desk_bus(3, 20.0))));
    EXPECT_NE(strip_labels(a), strip_labels(generate_ambient(desk_bus(4, 20.0))));
}

TEST(Ambient, JitterStaysWithinThreeSigma) {
    const auto spec = one_aid(0.01, 0.001, 30.0);
    const auto g = extract_gaps(strip_labels(generate_ambient(spec)));
    for (double x : g.series.at(0x100).gaps) {
        EXPECT_GE(x, 0.01 - 6 * 0.001 - 2e-6);
        EXPECT_LE(x, 0.01 + 6 * 0.001 + 2e-6);
    }
}

TEST(Validate, RejectsBadSpecs) {
    auto bad_period = one_aid(0.0, 0.0, 1.0);
    auto bad_jitter = one_aid(0.1, 0.03, 1.0);
    auto dup = one_aid(0.1, 0.0, 1.0);
    dup.aids.push_back(dup.aids.front());
    auto no_duration = one_aid(0.1, 0.0, 0.0);
    for (const auto& spec : {bad_period, bad_jitter, dup, no_duration}) {
        try {
            generate_ambient(spec);
            ADD_FAILURE();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::InvalidSpec);
        }
    }
}

TEST(Inject, FlamOnePerLegitimateFrame) {
    const auto ambient = generate_ambient(one_aid(0.01, 0.0, 2.0));
    AttackSpec attack;
    attack.kind = AttackKind::FlamTargeted;
    attack.target_aid = 0x100;
    attack.start = 0.5;
    attack.end = 0.7;
    const auto out = inject_attack(ambient, attack);
    const auto in_interval = std::count_if(ambient.begin(), ambient.end(), [](auto& f) {
        return f.frame.timestamp >= 0.5 - 1e-12 && f.frame.timestamp <= 0.7 + 1e-12;
    });
    EXPECT_EQ(in_interval, 21);
    EXPECT_EQ(injected_count(out), 21u);
    EXPECT_EQ(out.size(), ambient.size() + 21);
}

TEST(Inject, FlamGapsAreBimodal) {
    auto attack = desk_flam_attack(5);
    const auto out = inject_attack(generate_ambient(desk_bus(5)), attack);
    std::vector<CanFrame> target;
    for (const auto& f : out) {
        if (f.frame.aid == kDeskTargetAid && f.frame.timestamp > attack.start + 0.05 &&
            f.frame.timestamp < attack.end - 0.05)
            target.push_back(f.frame);
    }
    std::size_t short_gaps = 0, long_gaps = 0, other = 0;
    for (std::size_t i = 1; i < target.size(); ++i) {
        const double g = target[i].timestamp - target[i - 1].timestamp;
        if (std::abs(g - 0.001) < 1e-6) ++short_gaps;
        else if (g > 0.002) ++long_gaps;
        else ++other;
    }
    EXPECT_GT(short_gaps, 900u);
    EXPECT_NEAR(static_cast<double>(short_gaps), static_cast<double>(long_gaps), 2.0);
    EXPECT_EQ(other, 0u);
}

TEST(Inject, FloodingRate) {
    const auto ambient = generate_ambient(one_aid(0.1, 0.0, 5.0));
    AttackSpec attack;
    attack.kind = AttackKind::FloodingTargeted;
    attack.target_aid = 0x100;
    attack.start = 1.0;
    attack.end = 2.0;
    attack.rate_multiplier = 10.0;
    EXPECT_EQ(injected_count(inject_attack(ambient, attack)), 100u);
}

TEST(Inject, FuzzingUsesRandomAids) {
    const auto ambient = generate_ambient(desk_bus(6, 10.0));
    AttackSpec attack;
    attack.kind = AttackKind::Fuzzing;
    attack.start = 2.0;
    attack.end = 4.0;
    const auto out = inject_attack(ambient, attack);
    std::set<Aid> aids;
    for (const auto& f : out)
        if (f.label) aids.insert(f.frame.aid);
    EXPECT_GT(aids.size(), 50u);
    EXPECT_EQ(out.size(), ambient.size() + injected_count(out));
}

TEST(Inject, LabelsMatchDerivedMetadata) {
    const auto ambient = generate_ambient(desk_bus(7, 30.0));
    AttackSpec flam = desk_flam_attack(7);
    flam.start = 10.0;
    flam.end = 20.0;
    AttackSpec fuzz;
    fuzz.kind = AttackKind::Fuzzing;
    fuzz.start = 5.0;
    fuzz.end = 8.0;
    for (const auto& attack : {flam, fuzz}) {
        const auto out = inject_attack(ambient, attack);
        const auto meta = attack_metadata_for(attack);
        const auto derived = derive_labels(strip_labels(out), std::span(&meta, 1));
        const auto want = labels_of(out);
        const auto got = labels_of(derived);
        if (attack.kind == AttackKind::FlamTargeted) {
            EXPECT_EQ(got, want);
        } else {
            // An all-wildcard pattern also covers ambient 8-byte frames in the window.
            for (std::size_t i = 0; i < want.size(); ++i)
                if (want[i]) EXPECT_TRUE(got[i]);
        }
        for (const auto& f : out) EXPECT_EQ(f.label, f.source == FrameSource::Injected);
    }
}

TEST(Inject, Errors) {
    const auto ambient = generate_ambient(one_aid(0.1, 0.0, 5.0));
    AttackSpec attack;
    attack.target_aid = 0x555;
    attack.start = 1.0;
    attack.end = 2.0;
    try {
        inject_attack(ambient, attack);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::TargetAidAbsent);
    }
    attack.target_aid = 0x100;
    attack.end = 50.0;
    EXPECT_THROW(inject_attack(ambient, attack), Error);
    attack.end = 2.0;
    attack.flam_offset = 0.2;
    EXPECT_THROW(inject_attack(ambient, attack), Error);
}

TEST(MedianPeriod, Basic) {
    const auto frames = generate_ambient(one_aid(0.05, 0.0, 1.0));
    EXPECT_NEAR(*median_period(frames, 0x100), 0.05, 1e-9);
    EXPECT_FALSE(median_period(frames, 0x101));
}
