#include "canids/road.hpp"

#include "canids/candump.hpp"
#include "canids/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cstdlib>

namespace canids::road {

namespace fs = std::filesystem;

namespace {

std::vector<fs::path> sorted_logs(const fs::path& dir, auto&& keep) {
    std::vector<fs::path> out;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        if (entry.is_regular_file() && entry.path().extension() == ".log" && keep(entry.path().stem().string())) {
            out.push_back(entry.path());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

bool is_fabrication_log(const std::string& stem) {
    return stem.find("masquerade") == std::string::npos && stem.find("accelerator") == std::string::npos;
}

std::optional<Layout> discover(const fs::path& root) {
    const auto ambient = root / "ambient";
    const auto attacks = root / "attacks";
    if (!fs::is_directory(ambient) || !fs::is_directory(attacks)) {
        return std::nullopt;
    }
    Layout layout;
    layout.root = root;
    layout.training_logs =
        sorted_logs(ambient, [](const std::string& stem) { return stem.starts_with("ambient_dyno_"); });
    layout.fabrication_logs = sorted_logs(attacks, is_fabrication_log);
    layout.attack_metadata = attacks / "capture_metadata.json";
    if (layout.training_logs.empty() || layout.fabrication_logs.empty() || !fs::exists(layout.attack_metadata)) {
        return std::nullopt;
    }
    return layout;
}

std::optional<Layout> discover_from_env() {
    const char* dir = std::getenv("ROAD_DATASET_DIR");
    if (dir == nullptr || *dir == '\0') {
        return std::nullopt;
    }
    return discover(dir);
}

TestLog load_test_log(const fs::path& log, const std::vector<AttackMetadata>& metadata) {
    TestLog test;
    test.name = log.stem().string();
    std::vector<AttackMetadata> mine;
    for (const auto& m : metadata) {
        if (m.name == test.name) mine.push_back(m);
    }
    if (mine.empty()) {
        throw Error(ErrorCode::MissingMetadata, fmt::format("no metadata entry for '{}'", test.name));
    }
    auto parsed = parse_log_file(log.string());
    test.frames = derive_labels(parsed.frames, mine);
    for (const auto& m : mine) {
        test.attacks.push_back(resolve_interval(m, parsed.frames));
    }
    return test;
}

} // namespace canids::road
