#include "canids/eval.hpp"

#include "canids/candump.hpp"
#include "canids/error.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace canids {

using nlohmann::json;

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& other) noexcept {
    tp += other.tp;
    fp += other.fp;
    fn += other.fn;
    tn += other.tn;
    return *this;
}

ConfusionCounts confusion(const std::vector<bool>& verdicts, const std::vector<bool>& labels) {
    if (verdicts.size() != labels.size()) {
        throw Error(ErrorCode::LengthMismatch,
                    fmt::format("{} verdicts for {} labels", verdicts.size(), labels.size()));
    }
    ConfusionCounts c;
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        if (verdicts[i]) {
            labels[i] ? ++c.tp : ++c.fp;
        } else {
            labels[i] ? ++c.fn : ++c.tn;
        }
    }
    return c;
}

PrMetrics pr_metrics(const ConfusionCounts& c) noexcept {
    PrMetrics m;
    if (c.tp + c.fp > 0) m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    if (c.tp + c.fn > 0) m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    if (m.precision + m.recall > 0.0) m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    return m;
}

PrPoint make_pr_point(double alpha, const ConfusionCounts& counts) noexcept {
    const auto m = pr_metrics(counts);
    return {alpha, counts, m.precision, m.recall, m.f1};
}

namespace {

bool curve_order(const PrPoint& a, const PrPoint& b) {
    if (a.recall != b.recall) return a.recall < b.recall;
    if (a.precision != b.precision) return a.precision < b.precision;
    return a.alpha < b.alpha;
}

} // namespace

double auc_pr(std::span<const PrPoint> points) {
    if (points.empty()) {
        return 0.0;
    }
    std::vector<PrPoint> sorted(points.begin(), points.end());
    std::sort(sorted.begin(), sorted.end(), curve_order);
    double area = 0.0;
    double prev_recall = 0.0;
    double prev_precision = sorted.front().precision;
    for (const auto& p : sorted) {
        area += (p.recall - prev_recall) * (p.precision + prev_precision) / 2.0;
        prev_recall = p.recall;
        prev_precision = p.precision;
    }
    return std::clamp(area, 0.0, 1.0);
}

PrCurve pr_curve(Method method, std::vector<PrPoint> points) {
    PrCurve curve;
    curve.method = method;
    std::sort(points.begin(), points.end(), curve_order);
    curve.auc_pr = auc_pr(points);
    if (!points.empty() && points.front().counts.total() > 0) {
        const auto& c = points.front().counts;
        curve.baseline = static_cast<double>(c.positives()) / static_cast<double>(c.total());
    }
    curve.points = std::move(points);
    return curve;
}

OptimalThreshold optimal_threshold(const PrCurve& curve) {
    OptimalThreshold best;
    bool first = true;
    for (const auto& p : curve.points) {
        if (first || p.f1 > best.f1 || (p.f1 == best.f1 && p.alpha < best.alpha)) {
            best = {p.alpha, p.precision, p.recall, p.f1};
            first = false;
        }
    }
    return best;
}

std::vector<LatencyRecord> latency_report(std::span<const AlertEvent> alerts, const std::vector<bool>& labels,
                                          std::span<const AttackInterval> intervals, const ProfileMap* profiles) {
    std::vector<LatencyRecord> out;
    for (const auto& interval : intervals) {
        LatencyRecord rec;
        rec.name = interval.name;
        for (const auto& a : alerts) {
            if (a.frame_index >= labels.size() || !labels[a.frame_index]) continue;
            if (a.timestamp < interval.start || a.timestamp > interval.end) continue;
            if (interval.aid && *interval.aid != a.aid) continue;
            rec.detected = true;
            rec.latency = a.timestamp - interval.start;
            if (profiles && interval.aid) {
                if (const auto it = profiles->find(*interval.aid); it != profiles->end() && it->second.mu > 0.0) {
                    rec.latency_mu = rec.latency / it->second.mu;
                }
            }
            break;
        }
        out.push_back(std::move(rec));
    }
    return out;
}

AttackInterval resolve_interval(const AttackMetadata& meta, std::span<const CanFrame> frames) {
    const auto window = resolve_window(meta, frames);
    return {meta.name, window.start, window.end, meta.injection_id};
}

PooledRun run_pooled(const DetectorConfig& config, const ProfileMap& profiles, std::span<const TestLog> logs) {
    PooledRun pooled;
    std::size_t offset = 0;
    for (const auto& log : logs) {
        const auto frames = strip_labels(log.frames);
        auto run = run_detector(config, profiles, frames);
        pooled.verdicts.insert(pooled.verdicts.end(), run.verdicts.begin(), run.verdicts.end());
        for (auto a : run.alerts) {
            a.frame_index += offset;
            pooled.alerts.push_back(a);
        }
        pooled.coverage.scored += run.coverage.scored;
        pooled.coverage.unknown_aid += run.coverage.unknown_aid;
        pooled.coverage.degenerate += run.coverage.degenerate;
        offset += frames.size();
    }
    return pooled;
}

std::vector<bool> pooled_labels(std::span<const TestLog> logs) {
    std::vector<bool> labels;
    for (const auto& log : logs) {
        for (const auto& f : log.frames) labels.push_back(f.label);
    }
    return labels;
}

EvalReport sweep(const ProfileMap& profiles, std::optional<OutlierMode> variant, std::span<const TestLog> logs,
                 const SweepOptions& options) {
    EvalReport report;
    const auto labels = pooled_labels(logs);
    report.total_messages = labels.size();
    report.positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));
    report.baseline = labels.empty() ? 0.0 : static_cast<double>(report.positives) / static_cast<double>(labels.size());

    for (const Method method : options.methods) {
        MethodReport mr;
        mr.method = method;
        mr.variant = variant;
        const auto grid = options.grid_override ? *options.grid_override : threshold_grid(method);
        std::vector<PrPoint> points;
        for (const double alpha : grid) {
            const DetectorConfig config{method, alpha, options.strict_unknown_aid};
            const auto run = run_pooled(config, profiles, logs);
            points.push_back(make_pr_point(alpha, confusion(run.verdicts, labels)));
            mr.coverage = run.coverage;
        }
        mr.curve = pr_curve(method, std::move(points));
        mr.optimal = optimal_threshold(mr.curve);

        const DetectorConfig best{method, mr.optimal.alpha, options.strict_unknown_aid};
        for (const auto& log : logs) {
            const auto run = run_detector(best, profiles, strip_labels(log.frames));
            auto records = latency_report(run.alerts, labels_of(log.frames), log.attacks, &profiles);
            for (auto& r : records) {
                if (r.name.empty()) r.name = log.name;
                mr.latencies.push_back(std::move(r));
            }
        }
        report.methods.push_back(std::move(mr));
    }
    return report;
}

void write_verdict_header(std::ostream& out) { out << "frame_index,timestamp,aid_hex,label,verdict,method,alpha\n"; }

void write_verdict_row(std::ostream& out, std::size_t frame_index, const CanFrame& frame, bool label, bool verdict,
                       Method method, double alpha) {
    out << fmt::format("{},{:.6f},{},{},{},{},{}\n", frame_index, frame.timestamp, aid_to_hex(frame.aid, frame.extended),
                       label ? 1 : 0, verdict ? 1 : 0, to_string(method), alpha);
}

void write_verdict_rows(std::ostream& out, std::span<const TestLog> logs, const PooledRun& run,
                        const DetectorConfig& config) {
    std::size_t index = 0;
    for (const auto& log : logs) {
        for (const auto& f : log.frames) {
            write_verdict_row(out, index, f.frame, f.label, run.verdicts.at(index), config.method, config.alpha);
            ++index;
        }
    }
}

std::vector<VerdictRow> read_verdict_csv(std::istream& in) {
    std::vector<VerdictRow> rows;
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& why) {
        throw Error(ErrorCode::MalformedLine, fmt::format("verdict line {}: {}", line_no, why));
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.starts_with("frame_index")) continue;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string col;
        while (std::getline(ss, col, ',')) cols.push_back(col);
        if (cols.size() != 7) fail(fmt::format("expected 7 columns, found {}", cols.size()));
        VerdictRow r;
        auto parse_num = [&](const std::string& s, auto& value) {
            const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
            if (ec != std::errc{} || ptr != s.data() + s.size()) fail(fmt::format("bad number '{}'", s));
        };
        parse_num(cols[0], r.frame_index);
        parse_num(cols[1], r.timestamp);
        const auto aid = parse_aid_hex(cols[2]);
        if (!aid) fail(fmt::format("bad aid '{}'", cols[2]));
        r.aid = *aid;
        if ((cols[3] != "0" && cols[3] != "1") || (cols[4] != "0" && cols[4] != "1")) fail("label/verdict must be 0 or 1");
        r.label = cols[3] == "1";
        r.verdict = cols[4] == "1";
        r.method = method_from_string(cols[5]);
        parse_num(cols[6], r.alpha);
        rows.push_back(r);
    }
    return rows;
}

EvalReport report_from_verdicts(std::span<const VerdictRow> rows) {
    std::vector<Method> method_order;
    std::map<Method, std::vector<double>> alpha_order;
    std::map<std::pair<Method, double>, ConfusionCounts> counts;
    for (const auto& r : rows) {
        if (std::find(method_order.begin(), method_order.end(), r.method) == method_order.end()) {
            method_order.push_back(r.method);
        }
        auto& alphas = alpha_order[r.method];
        if (std::find(alphas.begin(), alphas.end(), r.alpha) == alphas.end()) alphas.push_back(r.alpha);
        auto& c = counts[{r.method, r.alpha}];
        if (r.verdict) {
            r.label ? ++c.tp : ++c.fp;
        } else {
            r.label ? ++c.fn : ++c.tn;
        }
    }
    EvalReport report;
    if (!counts.empty()) {
        const auto& c = counts.begin()->second;
        report.total_messages = c.total();
        report.positives = c.positives();
        report.baseline = c.total() ? static_cast<double>(c.positives()) / static_cast<double>(c.total()) : 0.0;
    }
    for (const Method m : method_order) {
        MethodReport mr;
        mr.method = m;
        std::vector<PrPoint> points;
        for (const double alpha : alpha_order[m]) {
            points.push_back(make_pr_point(alpha, counts[{m, alpha}]));
        }
        mr.curve = pr_curve(m, std::move(points));
        mr.optimal = optimal_threshold(mr.curve);
        report.methods.push_back(std::move(mr));
    }
    return report;
}

namespace {

json point_to_json(const PrPoint& p) {
    return json{{"alpha", p.alpha}, {"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1},
                {"tp", p.counts.tp},  {"fp", p.counts.fp},          {"fn", p.counts.fn},   {"tn", p.counts.tn}};
}

PrPoint point_from_json(const json& j) {
    PrPoint p;
    p.alpha = j.at("alpha").get<double>();
    p.precision = j.at("precision").get<double>();
    p.recall = j.at("recall").get<double>();
    p.f1 = j.at("f1").get<double>();
    p.counts = {j.at("tp").get<std::size_t>(), j.at("fp").get<std::size_t>(), j.at("fn").get<std::size_t>(),
                j.at("tn").get<std::size_t>()};
    return p;
}

} // namespace

json report_to_json(const EvalReport& report) {
    json j;
    j["total_messages"] = report.total_messages;
    j["positives"] = report.positives;
    j["baseline"] = report.baseline;
    j["conventions"] = json{{"zero_division", 0.0},
                            {"auc_rule", "trapezoid over recall-sorted points from (0, precision at lowest recall) "
                                         "to the highest-recall point"},
                            {"pooling", "micro"},
                            {"unscored_frames", "negative"}};
    json methods = json::array();
    for (const auto& m : report.methods) {
        json jm;
        jm["method"] = to_string(m.method);
        jm["variant"] = m.variant ? json(to_string(*m.variant)) : json(nullptr);
        jm["auc_pr"] = m.curve.auc_pr;
        jm["baseline"] = m.curve.baseline;
        jm["optimal"] = json{{"alpha", m.optimal.alpha},
                             {"f1", m.optimal.f1},
                             {"precision", m.optimal.precision},
                             {"recall", m.optimal.recall}};
        jm["coverage"] = json{{"scored", m.coverage.scored},
                              {"unknown_aid", m.coverage.unknown_aid},
                              {"degenerate", m.coverage.degenerate}};
        json points = json::array();
        for (const auto& p : m.curve.points) points.push_back(point_to_json(p));
        jm["points"] = std::move(points);
        json lat = json::array();
        for (const auto& l : m.latencies) {
            json jl{{"name", l.name}, {"detected", l.detected}};
            jl["latency_s"] = l.detected ? json(l.latency) : json(nullptr);
            jl["latency_mu"] = l.latency_mu ? json(*l.latency_mu) : json(nullptr);
            lat.push_back(std::move(jl));
        }
        jm["latencies"] = std::move(lat);
        methods.push_back(std::move(jm));
    }
    j["methods"] = std::move(methods);
    return j;
}

EvalReport report_from_json(const json& j) {
    try {
        EvalReport report;
        report.total_messages = j.at("total_messages").get<std::size_t>();
        report.positives = j.at("positives").get<std::size_t>();
        report.baseline = j.at("baseline").get<double>();
        for (const auto& jm : j.at("methods")) {
            MethodReport m;
            m.method = method_from_string(jm.at("method").get<std::string>());
            if (!jm.at("variant").is_null()) m.variant = outlier_mode_from_string(jm["variant"].get<std::string>());
            std::vector<PrPoint> points;
            for (const auto& jp : jm.at("points")) points.push_back(point_from_json(jp));
            m.curve = pr_curve(m.method, std::move(points));
            m.optimal = optimal_threshold(m.curve);
            const auto& cov = jm.at("coverage");
            m.coverage = {cov.at("scored").get<std::size_t>(), cov.at("unknown_aid").get<std::size_t>(),
                          cov.at("degenerate").get<std::size_t>()};
            for (const auto& jl : jm.at("latencies")) {
                LatencyRecord l;
                l.name = jl.at("name").get<std::string>();
                l.detected = jl.at("detected").get<bool>();
                if (l.detected) l.latency = jl.at("latency_s").get<double>();
                if (!jl.at("latency_mu").is_null()) l.latency_mu = jl["latency_mu"].get<double>();
                m.latencies.push_back(std::move(l));
            }
            report.methods.push_back(std::move(m));
        }
        return report;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::FormatError, fmt::format("malformed report: {}", e.what()));
    }
}

void write_pr_csv(std::ostream& out, const EvalReport& report) {
    out << "method,variant,alpha,precision,recall,f1,tp,fp,fn,tn\n";
    for (const auto& m : report.methods) {
        const std::string variant = m.variant ? to_string(*m.variant) : "";
        for (const auto& p : m.curve.points) {
            out << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", to_string(m.method), variant, p.alpha, p.precision,
                               p.recall, p.f1, p.counts.tp, p.counts.fp, p.counts.fn, p.counts.tn);
        }
    }
}

void write_gnuplot_dat(std::ostream& out, const MethodReport& m) {
    out << fmt::format("# {} {} auc_pr={:.6f}\n", to_string(m.method), m.variant ? to_string(*m.variant) : "",
                       m.curve.auc_pr);
    out << "# recall precision alpha f1\n";
    for (const auto& p : m.curve.points) {
        out << fmt::format("{:.6f} {:.6f} {} {:.6f}\n", p.recall, p.precision, p.alpha, p.f1);
    }
}

std::string format_summary(const EvalReport& report) {
    std::string out = fmt::format("messages: {}  positives: {}  baseline: {:.2f}%\n", report.total_messages,
                                  report.positives, 100.0 * report.baseline);
    out += fmt::format("{:<10} {:<8} {:>9} {:>9} {:>8} {:>9} {:>9} {:>10}\n", "method", "variant", "AUC-PR", "alpha*",
                       "F1", "prec", "recall", "unscored");
    for (const auto& m : report.methods) {
        out += fmt::format("{:<10} {:<8} {:>8.2f}% {:>9.4g} {:>8.4f} {:>9.4f} {:>9.4f} {:>10}\n", to_string(m.method),
                           m.variant ? to_string(*m.variant) : "-", 100.0 * m.curve.auc_pr, m.optimal.alpha,
                           m.optimal.f1, m.optimal.precision, m.optimal.recall, m.coverage.unscored());
    }
    return out;
}

} // namespace canids
