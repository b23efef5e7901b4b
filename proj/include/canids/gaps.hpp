#pragma once

#include "canids/frame.hpp"

#include <cstddef>
#include <map>
#include <span>
#include <vector>

namespace canids {

// Substitute for a zero inter-message time when two same-AID frames share a
// timestamp; log-domain density fitting must never see 0.
inline constexpr double kTieGap = 1e-6;

// Inter-message time between consecutive same-AID arrivals.
inline double inter_message_gap(double previous, double current) noexcept {
    const double gap = current - previous;
    return gap > 0.0 ? gap : kTieGap;
}

struct GapSeries {
    Aid aid = 0;
    std::vector<double> gaps;
    std::vector<std::size_t> frame_refs; // index of the later frame of each gap
};

struct GapExtraction {
    std::map<Aid, GapSeries> series;
    std::vector<Aid> singletons; // AIDs seen exactly once
};

// Frames are stably sorted by timestamp first if they are not ordered.
GapExtraction extract_gaps(std::span<const CanFrame> frames);

} // namespace canids
