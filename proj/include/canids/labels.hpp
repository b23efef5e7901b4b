#pragma once

#include "canids/frame.hpp"

#include <nlohmann/json_fwd.hpp>

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace canids {

// Hex payload pattern; 'X'/'x' nibbles match anything. An empty pattern
// matches every payload.
class PayloadPattern {
public:
    PayloadPattern() = default;
    explicit PayloadPattern(std::string_view text);

    bool matches(const Payload& payload) const noexcept;
    const std::string& text() const noexcept { return text_; }

private:
    std::string text_; // upper-cased
};

// Auto treats an interval that ends before the first frame as an offset from
// the log start, and as absolute otherwise.
enum class TimeReference { Absolute, LogStart, Auto };

struct AttackMetadata {
    std::string name;
    std::optional<Aid> injection_id; // absent = fuzzing (any AID)
    PayloadPattern injection_data;
    double interval_start = 0.0;
    double interval_end = 0.0;
    // LogStart intervals are offsets from the first frame of the log.
    TimeReference time_reference = TimeReference::Absolute;
};

struct TimeWindow {
    double start = 0.0;
    double end = 0.0;
    bool contains(double t) const noexcept { return t >= start && t <= end; }
};

// Interval in the time base of `frames`.
TimeWindow resolve_window(const AttackMetadata& meta, std::span<const CanFrame> frames);

// Accepts either the flat form (`injection_interval_start`/`_end`) or the
// array form `injection_interval: [start, end]` (time reference Auto unless
// `time_reference` says otherwise). `injection_id` may be a hex
// string ("0x0D0", "0D0"), an integer, or all-X for fuzzing.
// Throws Error(MissingMetadata) when a required field is absent.
AttackMetadata attack_metadata_from_json(const nlohmann::json& j, std::string name = {});
nlohmann::json attack_metadata_to_json(const AttackMetadata& meta);

// A metadata file holds one attack object, or a map of log name -> object.
std::vector<AttackMetadata> load_attack_metadata_file(const std::string& path);
void save_attack_metadata_file(const std::string& path, std::span<const AttackMetadata> metas);

// Label = inside [start, end] AND AID matches (if fixed) AND payload matches.
// Multiple metadata entries are OR-ed. Throws Error(MissingMetadata) when
// `metadata` is empty.
std::vector<LabeledFrame> derive_labels(std::span<const CanFrame> frames,
                                        std::span<const AttackMetadata> metadata);

} // namespace canids
