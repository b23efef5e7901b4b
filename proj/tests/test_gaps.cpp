#include "canids/gaps.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace canids;

namespace {

CanFrame at(double t, Aid aid) {
    CanFrame f;
    f.timestamp = t;
    f.aid = aid;
    return f;
}

} // namespace

TEST(ExtractGaps, SingleAid) {
    const auto g = extract_gaps(std::vector<CanFrame>{at(0.0, 1), at(0.1, 1), at(0.2, 1)});
    const auto& s = g.series.at(1);
    ASSERT_EQ(s.gaps.size(), 2u);
    EXPECT_NEAR(s.gaps[0], 0.1, 1e-12);
    EXPECT_NEAR(s.gaps[1], 0.1, 1e-12);
    EXPECT_EQ(s.frame_refs, (std::vector<std::size_t>{1, 2}));
}

TEST(ExtractGaps, InterleavedAids) {
    const auto g = extract_gaps(std::vector<CanFrame>{at(0.0, 0xA), at(0.01, 0xB), at(0.1, 0xA), at(0.11, 0xB)});
    ASSERT_EQ(g.series.size(), 2u);
    EXPECT_NEAR(g.series.at(0xA).gaps.at(0), 0.1, 1e-12);
    EXPECT_NEAR(g.series.at(0xB).gaps.at(0), 0.1, 1e-12);
}

TEST(ExtractGaps, EqualTimestampsGiveEpsilon) {
    const auto g = extract_gaps(std::vector<CanFrame>{at(1.0, 5), at(1.0, 5), at(1.5, 5)});
    const auto& s = g.series.at(5);
    EXPECT_EQ(s.gaps[0], kTieGap);
    EXPECT_NEAR(s.gaps[1], 0.5, 1e-12);
    for (double x : s.gaps) EXPECT_GT(x, 0.0);
}

TEST(ExtractGaps, SingletonsListedSeparately) {
    const auto g = extract_gaps(std::vector<CanFrame>{at(0.0, 1), at(0.1, 2), at(0.2, 1), at(0.3, 3)});
    EXPECT_EQ(g.singletons, (std::vector<Aid>{2, 3}));
    EXPECT_EQ(g.series.count(2), 0u);
}

TEST(ExtractGaps, UnsortedInputIsStablySorted) {
    const auto g = extract_gaps(std::vector<CanFrame>{at(0.3, 1), at(0.1, 1), at(0.2, 1)});
    const auto& s = g.series.at(1);
    EXPECT_NEAR(s.gaps[0], 0.1, 1e-12);
    EXPECT_EQ(s.frame_refs, (std::vector<std::size_t>{2, 0}));
}

TEST(ExtractGaps, CountInvariant) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<Aid> aid(0, 20);
    std::uniform_real_distribution<double> t(0.0, 10.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<CanFrame> frames;
        for (int i = 0; i < 200; ++i) frames.push_back(at(std::round(t(rng) * 1e3) / 1e3, aid(rng)));
        std::sort(frames.begin(), frames.end(), [](auto& a, auto& b) { return a.timestamp < b.timestamp; });
        const auto g = extract_gaps(frames);
        std::size_t total = g.singletons.size();
        for (const auto& [id, s] : g.series) {
            total += s.gaps.size() + 1;
            EXPECT_EQ(s.gaps.size(), s.frame_refs.size());
            for (double x : s.gaps) EXPECT_GT(x, 0.0);
        }
        EXPECT_EQ(total, frames.size());
    }
}

TEST(ExtractGaps, PermutationOfOtherAidsDoesNotMatter) {
    // Reordering frames of different AIDs sharing a timestamp leaves each
    // AID's series unchanged.
    std::vector<CanFrame> a{at(0.0, 1), at(0.0, 2), at(0.5, 1), at(0.5, 2), at(0.5, 1)};
    std::vector<CanFrame> b{at(0.0, 2), at(0.0, 1), at(0.5, 2), at(0.5, 1), at(0.5, 1)};
    const auto ga = extract_gaps(a), gb = extract_gaps(b);
    EXPECT_EQ(ga.series.at(1).gaps, gb.series.at(1).gaps);
    EXPECT_EQ(ga.series.at(2).gaps, gb.series.at(2).gaps);
}
