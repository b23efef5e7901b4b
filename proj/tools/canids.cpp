// canids: train timing profiles, run the detectors, simulate attacks and
// evaluate detectors from the command line.

#include "canids/candump.hpp"
#include "canids/detectors.hpp"
#include "canids/error.hpp"
#include "canids/eval.hpp"
#include "canids/labels.hpp"
#include "canids/profile.hpp"
#include "canids/simulator.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <cerrno>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unistd.h>

namespace fs = std::filesystem;
using namespace canids;
using nlohmann::json;

namespace {

volatile std::sig_atomic_t g_interrupted = 0;

void on_sigint(int) { g_interrupted = 1; }

void report_error(std::string_view code, std::string_view message) {
    std::cerr << json{{"error", code}, {"message", message}}.dump() << std::endl;
}

void report_warning(std::string_view code, std::string_view message, std::size_t line) {
    std::cerr << json{{"warning", code}, {"line", line}, {"message", message}}.dump() << '\n';
}

std::string default_profile_path() {
    if (const char* dir = std::getenv("CANIDS_PROFILE_DIR"); dir != nullptr && *dir != '\0') {
        return (fs::path(dir) / "profile.json").string();
    }
    return "profile.json";
}

// Writes to --out when given, stdout otherwise.
class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty() && path != "-") {
            file_.open(path);
            if (!file_) throw Error(ErrorCode::IoError, fmt::format("cannot write '{}'", path));
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

void require_file(const std::string& path) {
    if (!fs::is_regular_file(path)) throw Error(ErrorCode::IoError, fmt::format("no such file '{}'", path));
}

std::vector<CanFrame> read_candump(const std::string& path) {
    require_file(path);
    auto parsed = parse_log_file(path);
    for (const auto& issue : parsed.rejected) report_warning("MalformedLine", issue.message, issue.line);
    return std::move(parsed.frames);
}

bool is_csv(const std::string& path, const std::string& format) {
    if (format == "csv") return true;
    if (format == "candump") return false;
    return fs::path(path).extension() == ".csv";
}

// A test capture is a labeled CSV, or a candump log labeled from metadata.
TestLog load_test_log(const std::string& path, const std::string& format,
                      const std::vector<AttackMetadata>& metadata) {
    require_file(path);
    TestLog log;
    log.name = fs::path(path).stem().string();
    std::vector<AttackMetadata> mine;
    for (const auto& m : metadata) {
        if (m.name == log.name || metadata.size() == 1) mine.push_back(m);
    }
    if (is_csv(path, format)) {
        log.frames = read_labeled_csv_file(path);
    } else {
        if (mine.empty()) {
            throw Error(ErrorCode::MissingMetadata, fmt::format("'{}' has no labels and no metadata entry", path));
        }
        log.frames = derive_labels(read_candump(path), mine);
    }
    const auto frames = strip_labels(log.frames);
    for (const auto& m : mine) log.attacks.push_back(resolve_interval(m, frames));
    return log;
}

std::vector<TestLog> load_test_logs(const std::vector<std::string>& paths, const std::string& format,
                                    const std::string& metadata_path) {
    std::vector<AttackMetadata> metadata;
    if (!metadata_path.empty()) {
        require_file(metadata_path);
        metadata = load_attack_metadata_file(metadata_path);
    }
    std::vector<TestLog> logs;
    for (const auto& p : paths) logs.push_back(load_test_log(p, format, metadata));
    return logs;
}

const ProfileMap& pick_variant(const ProfileSet& set, const std::string& outliers) {
    if (outliers == "both") {
        throw Error(ErrorCode::InvalidArgument, "detection needs one profile variant: --outliers with|without");
    }
    return set.variant(outlier_mode_from_string(outliers));
}

std::vector<OutlierMode> variants_of(const ProfileSet& set, const std::string& outliers) {
    std::vector<OutlierMode> out;
    const auto mode = outlier_mode_from_string(outliers);
    if (mode != OutlierMode::Without && set.with_outliers) out.push_back(OutlierMode::With);
    if (mode != OutlierMode::With && set.without_outliers) out.push_back(OutlierMode::Without);
    if (out.empty()) {
        throw Error(ErrorCode::InvalidArgument, fmt::format("profile has no '{}' variant", outliers));
    }
    return out;
}

// train -----------------------------------------------------------------

struct TrainArgs {
    std::vector<std::string> logs;
    std::string out;
    std::string outliers = "both";
    double contamination = kDefaultContamination;
    std::size_t kde_cap = kDefaultKdeCap;
    std::size_t kde_grid = kDefaultKdeGridSize;
};

int cmd_train(const TrainArgs& args) {
    std::vector<std::vector<CanFrame>> logs;
    std::size_t total = 0;
    for (const auto& path : args.logs) {
        logs.push_back(read_candump(path));
        total += logs.back().size();
    }
    if (total == 0) throw Error(ErrorCode::TooFewSamples, "no parsable frames in the training logs");

    TrainingConfig config;
    config.contamination = args.contamination;
    config.kde_cap = args.kde_cap;
    config.kde_grid_size = args.kde_grid;
    config.mode = outlier_mode_from_string(args.outliers);
    const auto set = train_profiles(logs, config);
    const std::string path = args.out.empty() ? default_profile_path() : args.out;
    save_profile_set(path, set);

    auto print = [](const char* title, const ProfileMap& map) {
        fmt::print("{} outliers\n{:>8} {:>9} {:>12} {:>12} {:>12} {:>12}\n", title, "AID", "n", "mu", "sigma", "min",
                   "max");
        for (const auto& [aid, p] : map) {
            fmt::print("{:>8} {:>9} {:>12.6f} {:>12.6f} {:>12.6f} {:>12.6f}\n", aid_to_hex(aid, aid > kMaxStandardAid),
                       p.n_train, p.mu, p.sigma, p.min, p.max);
        }
    };
    if (set.with_outliers) print("with", *set.with_outliers);
    if (set.without_outliers) print("without", *set.without_outliers);
    fmt::print("profile written to {}\n", path);
    return 0;
}

// detect ----------------------------------------------------------------

struct DetectArgs {
    std::string profile;
    std::string method = "binning";
    double alpha = 3.5;
    std::string outliers = "with";
    std::string input;
    std::string format = "auto";
    std::string metadata;
    std::string out;
    bool stream = false;
    bool alerts_only = false;
    bool strict_unknown_aid = false;
};

void write_raw(const std::string& text) {
    std::fwrite(text.data(), 1, text.size(), stdout);
    std::fflush(stdout);
}

int detect_stream(const DetectArgs& args, const ProfileMap& profiles, const DetectorConfig& config) {
    struct sigaction sa {};
    sa.sa_handler = on_sigint;
    sigemptyset(&sa.sa_mask);
    sa.sa_flags = 0; // no SA_RESTART: a blocked read returns EINTR
    sigaction(SIGINT, &sa, nullptr);
    sigaction(SIGTERM, &sa, nullptr);

    Detector detector(config, profiles);
    std::size_t frame_index = 0;
    std::size_t line_no = 0;
    std::string pending;
    std::ostringstream header;
    write_verdict_header(header);
    write_raw(header.str());

    auto handle_line = [&](std::string_view line) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) return;
        CanFrame frame;
        try {
            frame = parse_candump_line(line);
        } catch (const Error& e) {
            report_warning(to_string(e.code()), e.what(), line_no);
            return;
        }
        const auto outcome = detector.process(frame, frame_index);
        if (outcome.alert || !args.alerts_only) {
            std::ostringstream row;
            write_verdict_row(row, frame_index, frame, false, outcome.alert.has_value(), config.method, config.alpha);
            write_raw(row.str());
        }
        ++frame_index;
    };

    char buffer[1 << 16];
    while (!g_interrupted) {
        const ssize_t n = ::read(STDIN_FILENO, buffer, sizeof buffer);
        if (n == 0) break;
        if (n < 0) {
            if (errno == EINTR) continue;
            throw Error(ErrorCode::IoError, "read from standard input failed");
        }
        pending.append(buffer, static_cast<std::size_t>(n));
        std::size_t begin = 0;
        for (std::size_t nl; (nl = pending.find('\n', begin)) != std::string::npos; begin = nl + 1) {
            handle_line(std::string_view(pending).substr(begin, nl - begin));
        }
        pending.erase(0, begin);
    }
    if (!g_interrupted && !pending.empty()) handle_line(pending);
    std::fflush(stdout);
    const auto cov = detector.coverage();
    std::cerr << json{{"frames", frame_index},
                      {"scored", cov.scored},
                      {"unknown_aid", cov.unknown_aid},
                      {"degenerate", cov.degenerate},
                      {"interrupted", g_interrupted != 0}}
                     .dump()
              << std::endl;
    return 0;
}

int cmd_detect(const DetectArgs& args) {
    const std::string path = args.profile.empty() ? default_profile_path() : args.profile;
    require_file(path);
    const auto set = load_profile_set(path);
    const auto& profiles = pick_variant(set, args.outliers);
    const DetectorConfig config{method_from_string(args.method), args.alpha, args.strict_unknown_aid};
    if (args.stream) return detect_stream(args, profiles, config);

    if (args.input.empty()) throw Error(ErrorCode::InvalidArgument, "batch detection needs an input log (or --stream)");
    std::vector<LabeledFrame> frames;
    if (is_csv(args.input, args.format) || !args.metadata.empty()) {
        frames = load_test_logs({args.input}, args.format, args.metadata).front().frames;
    } else {
        for (auto& f : read_candump(args.input)) frames.push_back({std::move(f), false, FrameSource::Ambient});
    }
    const auto run = run_detector(config, profiles, strip_labels(frames));
    Output out(args.out);
    write_verdict_header(out.stream());
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (args.alerts_only && !run.verdicts[i]) continue;
        write_verdict_row(out.stream(), i, frames[i].frame, frames[i].label, run.verdicts[i], config.method, config.alpha);
    }
    std::cerr << json{{"frames", frames.size()},
                      {"alerts", run.alerts.size()},
                      {"scored", run.coverage.scored},
                      {"unknown_aid", run.coverage.unknown_aid},
                      {"degenerate", run.coverage.degenerate}}
                     .dump()
              << std::endl;
    return 0;
}

// simulate --------------------------------------------------------------

struct SimulateArgs {
    std::uint64_t seed = 1;
    double duration = 60.0;
    std::string attack = "flam";
    std::string target = "0D0";
    double start = 25.0;
    double end = 35.0;
    double rate = 10.0;
    double offset = 0.001;
    std::string format = "csv";
    std::string out;
    std::string metadata;
    std::string name;
};

int cmd_simulate(const SimulateArgs& args) {
    const auto bus = desk_bus(args.seed, args.duration);
    auto frames = generate_ambient(bus);
    std::optional<AttackMetadata> meta;
    if (args.attack != "none") {
        AttackSpec spec = desk_flam_attack(args.seed);
        if (args.attack == "flooding") spec.kind = AttackKind::FloodingTargeted;
        if (args.attack == "fuzzing") spec.kind = AttackKind::Fuzzing;
        const auto target = parse_aid_hex(args.target);
        if (!target) throw Error(ErrorCode::InvalidArgument, fmt::format("bad target AID '{}'", args.target));
        spec.target_aid = spec.kind == AttackKind::Fuzzing ? std::nullopt : target;
        spec.start = args.start;
        spec.end = args.end;
        spec.rate_multiplier = args.rate;
        spec.flam_offset = args.offset;
        spec.seed = args.seed;
        frames = inject_attack(frames, spec);
        std::string name = args.name;
        if (name.empty()) name = args.out.empty() ? "synthetic_attack" : fs::path(args.out).stem().string();
        meta = attack_metadata_for(spec, name);
    }

    Output out(args.out);
    if (args.format == "csv") {
        write_labeled_csv(out.stream(), frames);
    } else {
        write_log(out.stream(), strip_labels(frames));
    }
    if (!args.metadata.empty()) {
        if (!meta) throw Error(ErrorCode::InvalidArgument, "--metadata needs an attack");
        save_attack_metadata_file(args.metadata, std::span<const AttackMetadata>(&*meta, 1));
    }
    return 0;
}

// sweep / eval / report -------------------------------------------------

struct SweepArgs {
    std::string profile;
    std::vector<std::string> logs;
    std::vector<std::string> methods{"mean", "binning", "gaussian", "kde"};
    std::vector<double> grid;
    std::string outliers = "both";
    std::string format = "auto";
    std::string metadata;
    std::string out;
    std::string pr_csv;
    std::string verdicts;
    std::string dat_dir;
    bool strict_unknown_aid = false;
};

EvalReport merge_reports(std::vector<EvalReport> reports) {
    EvalReport merged = reports.front();
    for (std::size_t i = 1; i < reports.size(); ++i) {
        for (auto& m : reports[i].methods) merged.methods.push_back(std::move(m));
    }
    return merged;
}

int cmd_sweep(const SweepArgs& args) {
    const std::string path = args.profile.empty() ? default_profile_path() : args.profile;
    require_file(path);
    const auto set = load_profile_set(path);
    const auto logs = load_test_logs(args.logs, args.format, args.metadata);

    SweepOptions options;
    options.methods.clear();
    for (const auto& m : args.methods) options.methods.push_back(method_from_string(m));
    if (!args.grid.empty()) options.grid_override = args.grid;
    options.strict_unknown_aid = args.strict_unknown_aid;

    std::vector<EvalReport> reports;
    for (const auto variant : variants_of(set, args.outliers)) {
        reports.push_back(sweep(set.variant(variant), variant, logs, options));
    }
    const auto report = merge_reports(std::move(reports));

    if (!args.verdicts.empty()) {
        std::ofstream v(args.verdicts);
        if (!v) throw Error(ErrorCode::IoError, fmt::format("cannot write '{}'", args.verdicts));
        const auto variant = variants_of(set, args.outliers).front();
        write_verdict_header(v);
        for (const Method method : options.methods) {
            const auto grid = options.grid_override ? *options.grid_override : threshold_grid(method);
            for (const double alpha : grid) {
                const DetectorConfig config{method, alpha, options.strict_unknown_aid};
                write_verdict_rows(v, logs, run_pooled(config, set.variant(variant), logs), config);
            }
        }
    }
    if (!args.pr_csv.empty()) {
        std::ofstream pr(args.pr_csv);
        if (!pr) throw Error(ErrorCode::IoError, fmt::format("cannot write '{}'", args.pr_csv));
        write_pr_csv(pr, report);
    }
    if (!args.dat_dir.empty()) {
        fs::create_directories(args.dat_dir);
        for (const auto& m : report.methods) {
            const auto name = fmt::format("{}_{}.dat", to_string(m.method), m.variant ? to_string(*m.variant) : "all");
            std::ofstream dat(fs::path(args.dat_dir) / name);
            write_gnuplot_dat(dat, m);
        }
    }
    if (!args.out.empty()) {
        Output out(args.out);
        out.stream() << report_to_json(report).dump(2) << '\n';
    }
    std::cout << format_summary(report);
    return 0;
}

struct EvalArgs {
    std::string profile;
    std::vector<std::string> logs;
    std::string method = "binning";
    double alpha = 3.5;
    std::string outliers = "with";
    std::string format = "auto";
    std::string metadata;
    bool strict_unknown_aid = false;
};

int cmd_eval(const EvalArgs& args) {
    const std::string path = args.profile.empty() ? default_profile_path() : args.profile;
    require_file(path);
    const auto set = load_profile_set(path);
    const auto& profiles = pick_variant(set, args.outliers);
    const auto logs = load_test_logs(args.logs, args.format, args.metadata);
    const DetectorConfig config{method_from_string(args.method), args.alpha, args.strict_unknown_aid};
    const auto run = run_pooled(config, profiles, logs);
    const auto counts = confusion(run.verdicts, pooled_labels(logs));
    const auto m = pr_metrics(counts);

    json latencies = json::array();
    for (const auto& log : logs) {
        const auto single = run_detector(config, profiles, strip_labels(log.frames));
        for (const auto& r : latency_report(single.alerts, labels_of(log.frames), log.attacks, &profiles)) {
            latencies.push_back(json{{"name", r.name},
                                     {"detected", r.detected},
                                     {"latency_s", r.detected ? json(r.latency) : json(nullptr)},
                                     {"latency_mu", r.latency_mu ? json(*r.latency_mu) : json(nullptr)}});
        }
    }
    const json out{{"method", to_string(config.method)},
                   {"alpha", config.alpha},
                   {"variant", args.outliers},
                   {"tp", counts.tp},
                   {"fp", counts.fp},
                   {"fn", counts.fn},
                   {"tn", counts.tn},
                   {"precision", m.precision},
                   {"recall", m.recall},
                   {"f1", m.f1},
                   {"unscored", run.coverage.unscored()},
                   {"latencies", latencies}};
    std::cout << out.dump(2) << '\n';
    return 0;
}

struct ReportArgs {
    std::string verdicts;
    std::string report;
    std::string out;
    std::string pr_csv;
};

int cmd_report(const ReportArgs& args) {
    EvalReport report;
    if (!args.verdicts.empty()) {
        require_file(args.verdicts);
        std::ifstream in(args.verdicts);
        const auto rows = read_verdict_csv(in);
        report = report_from_verdicts(rows);
    } else if (!args.report.empty()) {
        require_file(args.report);
        std::ifstream in(args.report);
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw Error(ErrorCode::FormatError, fmt::format("{}: {}", args.report, e.what()));
        }
        report = report_from_json(j);
    } else {
        throw Error(ErrorCode::InvalidArgument, "report needs --verdicts or --report");
    }
    if (!args.out.empty()) {
        Output out(args.out);
        out.stream() << report_to_json(report).dump(2) << '\n';
    }
    if (!args.pr_csv.empty()) {
        std::ofstream pr(args.pr_csv);
        write_pr_csv(pr, report);
    }
    std::cout << format_summary(report);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Time-based intrusion detection for CAN logs"};
    app.require_subcommand(1);
    const auto methods = CLI::IsMember({"mean", "binning", "gaussian", "kde"});
    const auto outlier_modes = CLI::IsMember({"with", "without", "both"});
    const auto formats = CLI::IsMember({"auto", "candump", "csv"});

    TrainArgs train;
    auto* t = app.add_subcommand("train", "Fit per-AID timing profiles from ambient candump logs");
    t->add_option("logs", train.logs, "Ambient candump logs")->required()->check(CLI::ExistingFile);
    t->add_option("--out,--profile", train.out, "Profile file (default $CANIDS_PROFILE_DIR/profile.json)");
    t->add_option("--outliers", train.outliers, "Profile variants to fit")->check(outlier_modes);
    t->add_option("--contamination", train.contamination, "MCD outlier fraction")->check(CLI::Range(0.0, 0.4999));
    t->add_option("--kde-cap", train.kde_cap, "KDE subsample size")->check(CLI::PositiveNumber);
    t->add_option("--kde-grid", train.kde_grid, "KDE evaluation grid size")->check(CLI::Range(2, 1 << 20));

    DetectArgs detect;
    auto* d = app.add_subcommand("detect", "Run one detector over a log or a live candump stream");
    d->add_option("input", detect.input, "Log to score (candump or labeled CSV)");
    d->add_option("--profile", detect.profile, "Profile file");
    d->add_option("--method", detect.method)->check(methods);
    d->add_option("--alpha", detect.alpha, "Detection threshold")->check(CLI::PositiveNumber);
    d->add_option("--outliers", detect.outliers, "Profile variant")->check(CLI::IsMember({"with", "without"}));
    d->add_option("--format", detect.format)->check(formats);
    d->add_option("--metadata", detect.metadata, "Attack metadata used to label a candump input");
    d->add_option("--out", detect.out, "Verdict CSV (default stdout)");
    auto* stream_flag = d->add_flag("--stream", detect.stream, "Read candump lines from stdin, one frame at a time");
    d->add_flag("--alerts-only", detect.alerts_only, "Only write rows for alerting frames");
    d->add_flag("--strict-unknown-aid", detect.strict_unknown_aid, "Alert on AIDs absent from the profile");
    stream_flag->excludes(d->get_option("input"))->excludes("--out")->excludes("--metadata");

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "Generate the desk-scale bus with an optional attack");
    s->add_option("--seed", sim.seed);
    s->add_option("--duration", sim.duration)->check(CLI::PositiveNumber);
    s->add_option("--attack", sim.attack)->check(CLI::IsMember({"none", "flam", "flooding", "fuzzing"}));
    s->add_option("--target", sim.target, "Target AID (hex)");
    s->add_option("--start", sim.start);
    s->add_option("--end", sim.end);
    s->add_option("--rate", sim.rate, "Flooding/fuzzing rate multiplier")->check(CLI::PositiveNumber);
    s->add_option("--offset", sim.offset, "Flam delay after the legitimate frame (s)")->check(CLI::PositiveNumber);
    s->add_option("--format", sim.format)->check(CLI::IsMember({"candump", "csv"}));
    s->add_option("--out", sim.out);
    s->add_option("--metadata", sim.metadata, "Write attack metadata JSON here");
    s->add_option("--name", sim.name, "Attack name in the metadata (default: output stem)");

    SweepArgs sw;
    auto* w = app.add_subcommand("sweep", "Sweep each method over its threshold grid on labeled logs");
    w->add_option("logs", sw.logs, "Test logs")->required();
    w->add_option("--profile", sw.profile);
    w->add_option("--method,--methods", sw.methods)->check(methods)->delimiter(',');
    w->add_option("--grid", sw.grid, "Threshold grid override")->delimiter(',');
    w->add_option("--outliers", sw.outliers)->check(outlier_modes);
    w->add_option("--format", sw.format)->check(formats);
    w->add_option("--metadata", sw.metadata);
    w->add_option("--out", sw.out, "Report JSON");
    w->add_option("--pr-csv", sw.pr_csv, "PR points CSV");
    w->add_option("--verdicts", sw.verdicts, "Verdict CSV for every method and alpha (first variant)");
    w->add_option("--dat-dir", sw.dat_dir, "Directory for gnuplot .dat files");
    w->add_flag("--strict-unknown-aid", sw.strict_unknown_aid);

    EvalArgs ev;
    auto* e = app.add_subcommand("eval", "Confusion counts, P/R/F1 and latency at one threshold");
    e->add_option("logs", ev.logs, "Test logs")->required();
    e->add_option("--profile", ev.profile);
    e->add_option("--method", ev.method)->check(methods);
    e->add_option("--alpha", ev.alpha)->check(CLI::PositiveNumber);
    e->add_option("--outliers", ev.outliers)->check(CLI::IsMember({"with", "without"}));
    e->add_option("--format", ev.format)->check(formats);
    e->add_option("--metadata", ev.metadata);
    e->add_flag("--strict-unknown-aid", ev.strict_unknown_aid);

    ReportArgs rep;
    auto* r = app.add_subcommand("report", "Rebuild a report from a verdict CSV or a report JSON");
    auto* rv = r->add_option("--verdicts", rep.verdicts);
    auto* rr = r->add_option("--report", rep.report);
    rv->excludes(rr);
    r->add_option("--out", rep.out);
    r->add_option("--pr-csv", rep.pr_csv);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::CallForAllHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::ParseError& ex) {
        report_error("Usage", ex.what());
        return 2;
    }

    try {
        if (t->parsed()) return cmd_train(train);
        if (d->parsed()) return cmd_detect(detect);
        if (s->parsed()) return cmd_simulate(sim);
        if (w->parsed()) return cmd_sweep(sw);
        if (e->parsed()) return cmd_eval(ev);
        if (r->parsed()) return cmd_report(rep);
    } catch (const Error& ex) {
        report_error(to_string(ex.code()), ex.what());
        return 1;
    } catch (const std::exception& ex) {
        report_error("Internal", ex.what());
        return 1;
    }
    return 0;
}
