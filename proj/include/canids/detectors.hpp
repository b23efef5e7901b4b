#pragma once

#include "canids/frame.hpp"
#include "canids/profile.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace canids {

enum class Method { Mean, Binning, Gaussian, Kde };

inline constexpr std::array<Method, 4> kAllMethods = {Method::Mean, Method::Binning,
                                                      Method::Gaussian, Method::Kde};

std::string to_string(Method method);
Method method_from_string(const std::string& text); // throws Error(InvalidArgument)

// The 18-point threshold grid of each method:
//   Mean      i/18                    i = 1..18
//   Binning   (2 + i)/2               i = 1..18  (1.5 .. 10.0)
//   Gaussian  {0.001..0.009} U {0.01..0.09}, same for KDE
std::vector<double> threshold_grid(Method method);

inline constexpr std::size_t kWindowFrames = 6;   // frames per Binning window
inline constexpr std::size_t kWindowGaps = 6;     // gaps in the Mean window
inline constexpr std::size_t kMeanSuspiciousNeeded = 3;
inline constexpr std::size_t kConsecutiveNeeded = 3;

struct DetectorConfig {
    Method method = Method::Binning;
    double alpha = 3.5;
    bool strict_unknown_aid = false; // alert on AIDs absent from the profile
};

struct AlertEvent {
    Method method = Method::Binning;
    double alpha = 0.0;
    Aid aid = 0;
    std::size_t frame_index = 0;
    double timestamp = 0.0;
    double trigger_value = 0.0; // gap (Mean, p-value methods) or window span (Binning)
    std::size_t count = 0;      // suspicious / consecutive / window frame count
    bool unknown_aid = false;

    friend bool operator==(const AlertEvent&, const AlertEvent&) = default;
};

// Fixed-capacity FIFO keeping the newest N entries.
template <typename T, std::size_t N>
class RingWindow {
public:
    void push(const T& value) noexcept {
        items_[(head_ + size_) % N] = value;
        if (size_ < N) {
            ++size_;
        } else {
            head_ = (head_ + 1) % N;
        }
    }
    std::size_t size() const noexcept { return size_; }
    bool full() const noexcept { return size_ == N; }
    const T& oldest() const noexcept { return items_[head_]; }
    const T& operator[](std::size_t i) const noexcept { return items_[(head_ + i) % N]; }
    void clear() noexcept { head_ = size_ = 0; }

private:
    std::array<T, N> items_{};
    std::size_t head_ = 0;
    std::size_t size_ = 0;
};

// Rolling state of one AID; states of distinct AIDs never interact.
struct AidState {
    bool has_previous = false;
    double previous_timestamp = 0.0;
    RingWindow<bool, kWindowGaps> suspicious;        // Mean
    RingWindow<double, kWindowFrames> arrivals;      // Binning
    std::size_t consecutive = 0;                     // p-value methods
};

using PvalueFn = std::function<double(double)>;

// x <= alpha * mu marks the gap suspicious; the frame is malicious when its own
// gap is suspicious and at least three of the last six gaps (current included)
// are. Shorter windows during warm-up still qualify.
std::optional<AlertEvent> mean_step(AidState& state, const AidProfile& profile, const CanFrame& frame,
                                    std::size_t frame_index, double alpha);

// Malicious when the last six arrivals (current included) span less than
// alpha * mu. Silent until six arrivals are held.
std::optional<AlertEvent> binning_step(AidState& state, const AidProfile& profile, const CanFrame& frame,
                                       std::size_t frame_index, double alpha);

// Malicious when the last three gaps all have pv <= alpha.
std::optional<AlertEvent> pvalue_step(AidState& state, const CanFrame& frame, std::size_t frame_index,
                                      double alpha, Method method, const PvalueFn& pv);

enum class FrameStatus { Scored, UnknownAid, Degenerate };

struct StepOutcome {
    FrameStatus status = FrameStatus::Scored;
    std::optional<AlertEvent> alert;
};

struct CoverageStats {
    std::size_t scored = 0;
    std::size_t unknown_aid = 0; // frames whose AID has no profile
    std::size_t degenerate = 0;  // frames whose profile cannot support the method
    std::size_t unscored() const noexcept { return unknown_aid + degenerate; }

    friend bool operator==(const CoverageStats&, const CoverageStats&) = default;
};

// Streaming detector over a whole bus. Frames must arrive in timestamp order.
class Detector {
public:
    Detector(DetectorConfig config, const ProfileMap& profiles);

    StepOutcome process(const CanFrame& frame, std::size_t frame_index);
    StepOutcome process(const CanFrame& frame) { return process(frame, next_index_); }

    const DetectorConfig& config() const noexcept { return config_; }
    const CoverageStats& coverage() const noexcept { return coverage_; }
    std::size_t tracked_aids() const noexcept { return states_.size(); }
    void reset();

private:
    DetectorConfig config_;
    const ProfileMap* profiles_;
    std::unordered_map<Aid, AidState> states_;
    CoverageStats coverage_;
    std::size_t next_index_ = 0;
};

struct DetectionRun {
    std::vector<bool> verdicts;
    std::vector<AlertEvent> alerts;
    CoverageStats coverage;
};

DetectionRun run_detector(const DetectorConfig& config, const ProfileMap& profiles,
                          std::span<const CanFrame> frames);

// Worst-case Binning detection latency under flam delivery, in units of mu,
// excluding computation time: 0 for alpha >= 5, 2 for [4, 5), 3 below 4.
double latency_bound(double alpha) noexcept;

} // namespace canids
