#include "canids/detectors.hpp"

#include "canids/error.hpp"
#include "canids/gaps.hpp"
#include "canids/gaussian.hpp"
#include "canids/kde.hpp"

#include <fmt/format.h>

namespace canids {

std::string to_string(Method method) {
    switch (method) {
    case Method::Mean: return "mean";
    case Method::Binning: return "binning";
    case Method::Gaussian: return "gaussian";
    case Method::Kde: return "kde";
    }
    return "unknown";
}

Method method_from_string(const std::string& text) {
    if (text == "mean") return Method::Mean;
    if (text == "binning") return Method::Binning;
    if (text == "gaussian") return Method::Gaussian;
    if (text == "kde") return Method::Kde;
    throw Error(ErrorCode::InvalidArgument, fmt::format("unknown method '{}'", text));
}

std::vector<double> threshold_grid(Method method) {
    std::vector<double> grid;
    grid.reserve(18);
    switch (method) {
    case Method::Mean:
        for (int i = 1; i <= 18; ++i) grid.push_back(i / 18.0);
        break;
    case Method::Binning:
        for (int i = 1; i <= 18; ++i) grid.push_back((2 + i) / 2.0);
        break;
    case Method::Gaussian:
    case Method::Kde:
        for (int i = 1; i <= 9; ++i) grid.push_back(i / 1000.0);
        for (int i = 1; i <= 9; ++i) grid.push_back(i / 100.0);
        break;
    }
    return grid;
}

namespace {

AlertEvent make_alert(Method method, double alpha, const CanFrame& frame, std::size_t frame_index, double value,
                      std::size_t count) {
    AlertEvent e;
    e.method = method;
    e.alpha = alpha;
    e.aid = frame.aid;
    e.frame_index = frame_index;
    e.timestamp = frame.timestamp;
    e.trigger_value = value;
    e.count = count;
    return e;
}

// Advances the previous-arrival marker; nullopt for the first arrival.
std::optional<double> next_gap(AidState& state, double timestamp) {
    std::optional<double> gap;
    if (state.has_previous) {
        gap = inter_message_gap(state.previous_timestamp, timestamp);
    }
    state.has_previous = true;
    state.previous_timestamp = timestamp;
    return gap;
}

} // namespace

std::optional<AlertEvent> mean_step(AidState& state, const AidProfile& profile, const CanFrame& frame,
                                    std::size_t frame_index, double alpha) {
    const auto gap = next_gap(state, frame.timestamp);
    if (!gap) {
        return std::nullopt;
    }
    const bool suspicious = *gap <= alpha * profile.mu;
    state.suspicious.push(suspicious);
    if (!suspicious) {
        return std::nullopt;
    }
    std::size_t count = 0;
    for (std::size_t i = 0; i < state.suspicious.size(); ++i) {
        count += state.suspicious[i] ? 1 : 0;
    }
    if (count < kMeanSuspiciousNeeded) {
        return std::nullopt;
    }
    return make_alert(Method::Mean, alpha, frame, frame_index, *gap, count);
}

std::optional<AlertEvent> binning_step(AidState& state, const AidProfile& profile, const CanFrame& frame,
                                       std::size_t frame_index, double alpha) {
    next_gap(state, frame.timestamp);
    state.arrivals.push(frame.timestamp);
    if (!state.arrivals.full()) {
        return std::nullopt;
    }
    const double span = frame.timestamp - state.arrivals.oldest();
    if (!(span < alpha * profile.mu)) {
        return std::nullopt;
    }
    return make_alert(Method::Binning, alpha, frame, frame_index, span, state.arrivals.size());
}

std::optional<AlertEvent> pvalue_step(AidState& state, const CanFrame& frame, std::size_t frame_index, double alpha,
                                      Method method, const PvalueFn& pv) {
    const auto gap = next_gap(state, frame.timestamp);
    if (!gap) {
        return std::nullopt;
    }
    if (pv(*gap) <= alpha) {
        ++state.consecutive;
    } else {
        state.consecutive = 0;
    }
    if (state.consecutive < kConsecutiveNeeded) {
        return std::nullopt;
    }
    return make_alert(method, alpha, frame, frame_index, *gap, state.consecutive);
}

Detector::Detector(DetectorConfig config, const ProfileMap& profiles) : config_(config), profiles_(&profiles) {}

void Detector::reset() {
    states_.clear();
    coverage_ = {};
    next_index_ = 0;
}

StepOutcome Detector::process(const CanFrame& frame, std::size_t frame_index) {
    next_index_ = frame_index + 1;
    StepOutcome outcome;
    const auto it = profiles_->find(frame.aid);
    if (it == profiles_->end()) {
        ++coverage_.unknown_aid;
        outcome.status = FrameStatus::UnknownAid;
        if (config_.strict_unknown_aid) {
            auto alert = make_alert(config_.method, config_.alpha, frame, frame_index, 0.0, 0);
            alert.unknown_aid = true;
            outcome.alert = alert;
        }
        return outcome;
    }
    const AidProfile& profile = it->second;
    if ((config_.method == Method::Gaussian && !profile.gaussian) || (config_.method == Method::Kde && !profile.kde)) {
        ++coverage_.degenerate;
        outcome.status = FrameStatus::Degenerate;
        return outcome;
    }

    ++coverage_.scored;
    AidState& state = states_[frame.aid];
    switch (config_.method) {
    case Method::Mean:
        outcome.alert = mean_step(state, profile, frame, frame_index, config_.alpha);
        break;
    case Method::Binning:
        outcome.alert = binning_step(state, profile, frame, frame_index, config_.alpha);
        break;
    case Method::Gaussian: {
        const GaussianFit& fit = *profile.gaussian;
        outcome.alert = pvalue_step(state, frame, frame_index, config_.alpha, Method::Gaussian,
                                    [&fit](double x) { return gaussian_pvalue(fit, x); });
        break;
    }
    case Method::Kde: {
        const KdeModel& kde = *profile.kde;
        outcome.alert = pvalue_step(state, frame, frame_index, config_.alpha, Method::Kde,
                                    [&kde](double x) { return kde_pvalue(kde, x); });
        break;
    }
    }
    return outcome;
}

DetectionRun run_detector(const DetectorConfig& config, const ProfileMap& profiles, std::span<const CanFrame> frames) {
    DetectionRun run;
    run.verdicts.assign(frames.size(), false);
    Detector detector(config, profiles);
    for (std::size_t i = 0; i < frames.size(); ++i) {
        auto outcome = detector.process(frames[i], i);
        if (outcome.alert) {
            run.verdicts[i] = true;
            run.alerts.push_back(*outcome.alert);
        }
    }
    run.coverage = detector.coverage();
    return run;
}

double latency_bound(double alpha) noexcept {
    if (alpha >= 5.0) return 0.0;
    if (alpha >= 4.0) return 2.0;
    return 3.0;
}

} // namespace canids
