#pragma once

#include "canids/eval.hpp"
#include "canids/frame.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace canids::road {

// Layout of the public ROAD release:
//   <root>/ambient/ambient_dyno_*.log        training captures
//   <root>/attacks/<name>.log                attack captures
//   <root>/attacks/capture_metadata.json     per-log injection metadata
struct Layout {
    std::filesystem::path root;
    std::vector<std::filesystem::path> training_logs;   // dynamometer ambient
    std::vector<std::filesystem::path> fabrication_logs; // masquerade and accelerator excluded
    std::filesystem::path attack_metadata;
};

// nullopt when the directory does not look like a ROAD release.
std::optional<Layout> discover(const std::filesystem::path& root);

// Reads the root from ROAD_DATASET_DIR.
std::optional<Layout> discover_from_env();

bool is_fabrication_log(const std::string& stem);

// Parses one attack capture and labels it from the shared metadata file.
TestLog load_test_log(const std::filesystem::path& log, const std::vector<AttackMetadata>& metadata);

} // namespace canids::road
