#pragma once

#include "canids/detectors.hpp"
#include "canids/frame.hpp"
#include "canids/labels.hpp"
#include "canids/profile.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace canids {

struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;

    std::size_t total() const noexcept { return tp + fp + fn + tn; }
    std::size_t positives() const noexcept { return tp + fn; }
    ConfusionCounts& operator+=(const ConfusionCounts& other) noexcept;

    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

// Per-message counts. Throws Error(LengthMismatch).
ConfusionCounts confusion(const std::vector<bool>& verdicts, const std::vector<bool>& labels);

struct PrMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// 0/0 is reported as 0 for each ratio.
PrMetrics pr_metrics(const ConfusionCounts& counts) noexcept;

struct PrPoint {
    double alpha = 0.0;
    ConfusionCounts counts;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    friend bool operator==(const PrPoint&, const PrPoint&) = default;
};

PrPoint make_pr_point(double alpha, const ConfusionCounts& counts) noexcept;

struct PrCurve {
    Method method = Method::Binning;
    std::vector<PrPoint> points; // sorted by (recall, precision, alpha)
    double auc_pr = 0.0;
    double baseline = 0.0;

    friend bool operator==(const PrCurve&, const PrCurve&) = default;
};

// Trapezoidal area over the points sorted by recall, starting from the
// synthetic point (0, precision of the lowest-recall point) and ending at
// the highest-recall point; no extrapolation to recall 1.
double auc_pr(std::span<const PrPoint> points);

PrCurve pr_curve(Method method, std::vector<PrPoint> points);

struct OptimalThreshold {
    double alpha = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// argmax F1; ties go to the smaller alpha.
OptimalThreshold optimal_threshold(const PrCurve& curve);

struct AttackInterval {
    std::string name;
    double start = 0.0;
    double end = 0.0;
    std::optional<Aid> aid;
};

struct LatencyRecord {
    std::string name;
    bool detected = false;
    double latency = 0.0;               // s, first true-positive alert - interval start
    std::optional<double> latency_mu;   // latency / mu of the target AID, when known
};

// First true-positive alert inside each interval (matching its AID when
// fixed). Attacks without one are recorded as misses.
std::vector<LatencyRecord> latency_report(std::span<const AlertEvent> alerts, const std::vector<bool>& labels,
                                          std::span<const AttackInterval> intervals,
                                          const ProfileMap* profiles = nullptr);

// Interval in the time base of `frames` (LogStart references resolved).
AttackInterval resolve_interval(const AttackMetadata& meta, std::span<const CanFrame> frames);

// A labeled test capture: frames in time order plus the attacks it contains.
struct TestLog {
    std::string name;
    std::vector<LabeledFrame> frames;
    std::vector<AttackInterval> attacks;
};

struct MethodReport {
    Method method = Method::Binning;
    std::optional<OutlierMode> variant;
    PrCurve curve;
    OptimalThreshold optimal;
    CoverageStats coverage;               // per alpha sweep, identical across the grid
    std::vector<LatencyRecord> latencies; // at the optimal alpha
};

struct EvalReport {
    std::size_t total_messages = 0;
    std::size_t positives = 0;
    double baseline = 0.0;
    std::vector<MethodReport> methods;
};

struct SweepOptions {
    std::vector<Method> methods{kAllMethods.begin(), kAllMethods.end()};
    std::optional<std::vector<double>> grid_override; // applied to every method
    bool strict_unknown_aid = false;
};

// Per-log verdicts (state resets between logs) concatenated in log order.
struct PooledRun {
    std::vector<bool> verdicts;
    std::vector<AlertEvent> alerts; // frame_index is the pooled index
    CoverageStats coverage;
};

PooledRun run_pooled(const DetectorConfig& config, const ProfileMap& profiles, std::span<const TestLog> logs);

std::vector<bool> pooled_labels(std::span<const TestLog> logs);

// Full grid sweep for each method on the pooled logs.
EvalReport sweep(const ProfileMap& profiles, std::optional<OutlierMode> variant, std::span<const TestLog> logs,
                 const SweepOptions& options = {});

// Verdict CSV: `frame_index,timestamp,aid_hex,label,verdict,method,alpha`.
void write_verdict_header(std::ostream& out);
void write_verdict_rows(std::ostream& out, std::span<const TestLog> logs, const PooledRun& run,
                        const DetectorConfig& config);
void write_verdict_row(std::ostream& out, std::size_t frame_index, const CanFrame& frame, bool label,
                       bool verdict, Method method, double alpha);

struct VerdictRow {
    std::size_t frame_index = 0;
    double timestamp = 0.0;
    Aid aid = 0;
    bool label = false;
    bool verdict = false;
    Method method = Method::Binning;
    double alpha = 0.0;
};

std::vector<VerdictRow> read_verdict_csv(std::istream& in);

// Rebuilds the PR part of a report from persisted verdicts.
EvalReport report_from_verdicts(std::span<const VerdictRow> rows);

nlohmann::json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);
void write_pr_csv(std::ostream& out, const EvalReport& report);
void write_gnuplot_dat(std::ostream& out, const MethodReport& method);

// Table with one row per method and AUC-PR per variant.
std::string format_summary(const EvalReport& report);

} // namespace canids
