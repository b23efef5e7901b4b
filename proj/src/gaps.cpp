#include "canids/gaps.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

namespace canids {

GapExtraction extract_gaps(std::span<const CanFrame> frames) {
    std::vector<std::size_t> order(frames.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const bool sorted = std::is_sorted(frames.begin(), frames.end(),
                                       [](const CanFrame& a, const CanFrame& b) { return a.timestamp < b.timestamp; });
    if (!sorted) {
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return frames[a].timestamp < frames[b].timestamp; });
    }

    std::unordered_map<Aid, std::size_t> last_index;
    GapExtraction out;
    for (const std::size_t i : order) {
        const CanFrame& frame = frames[i];
        const auto it = last_index.find(frame.aid);
        if (it == last_index.end()) {
            last_index.emplace(frame.aid, i);
            continue;
        }
        auto& series = out.series[frame.aid];
        series.aid = frame.aid;
        series.gaps.push_back(inter_message_gap(frames[it->second].timestamp, frame.timestamp));
        series.frame_refs.push_back(i);
        it->second = i;
    }
    for (const auto& [aid, index] : last_index) {
        if (!out.series.contains(aid)) {
            out.singletons.push_back(aid);
        }
    }
    std::sort(out.singletons.begin(), out.singletons.end());
    return out;
}

} // namespace canids
