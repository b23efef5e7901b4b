#include "canids/labels.hpp"

#include "canids/candump.hpp"
#include "canids/error.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>

namespace canids {

namespace {

int nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

bool all_wildcards(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c == 'X' || c == 'x'; });
}

[[noreturn]] void missing(const std::string& field) {
    throw Error(ErrorCode::MissingMetadata, fmt::format("attack metadata lacks '{}'", field));
}

std::optional<Aid> parse_injection_id(const nlohmann::json& v) {
    if (v.is_number_unsigned() || v.is_number_integer()) {
        return v.get<Aid>();
    }
    if (!v.is_string()) {
        throw Error(ErrorCode::MissingMetadata, "injection_id must be a string or integer");
    }
    const auto text = v.get<std::string>();
    if (all_wildcards(text)) {
        return std::nullopt;
    }
    const auto aid = parse_aid_hex(text);
    if (!aid) {
        throw Error(ErrorCode::MissingMetadata, fmt::format("bad injection_id '{}'", text));
    }
    return aid;
}

} // namespace

PayloadPattern::PayloadPattern(std::string_view text) {
    text_.reserve(text.size());
    for (char c : text) {
        const char u = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        if (u != 'X' && nibble(u) < 0) {
            throw Error(ErrorCode::InvalidArgument, fmt::format("bad payload pattern '{}'", text));
        }
        text_.push_back(u);
    }
}

bool PayloadPattern::matches(const Payload& payload) const noexcept {
    if (text_.empty()) {
        return true;
    }
    if (text_.size() != 2 * payload.size()) {
        return false;
    }
    for (std::size_t i = 0; i < text_.size(); ++i) {
        if (text_[i] == 'X') continue;
        const std::uint8_t byte = payload[i / 2];
        const int actual = (i % 2 == 0) ? (byte >> 4) : (byte & 0x0F);
        if (nibble(text_[i]) != actual) return false;
    }
    return true;
}

TimeWindow resolve_window(const AttackMetadata& meta, std::span<const CanFrame> frames) {
    TimeWindow window{meta.interval_start, meta.interval_end};
    if (meta.time_reference == TimeReference::Absolute || frames.empty()) {
        return window;
    }
    double first = frames.front().timestamp;
    for (const auto& f : frames) {
        first = std::min(first, f.timestamp);
    }
    const bool offset = meta.time_reference == TimeReference::LogStart || meta.interval_end < first;
    if (offset) {
        window.start += first;
        window.end += first;
    }
    return window;
}

AttackMetadata attack_metadata_from_json(const nlohmann::json& j, std::string name) {
    if (!j.is_object()) {
        throw Error(ErrorCode::MissingMetadata, "attack metadata must be an object");
    }
    AttackMetadata meta;
    meta.name = j.contains("name") && j["name"].is_string() ? j["name"].get<std::string>() : std::move(name);

    if (!j.contains("injection_id")) missing("injection_id");
    meta.injection_id = parse_injection_id(j["injection_id"]);

    if (!j.contains("injection_data_str") || !j["injection_data_str"].is_string()) missing("injection_data_str");
    meta.injection_data = PayloadPattern(j["injection_data_str"].get<std::string>());

    if (j.contains("injection_interval_start") && j.contains("injection_interval_end")) {
        meta.interval_start = j["injection_interval_start"].get<double>();
        meta.interval_end = j["injection_interval_end"].get<double>();
        meta.time_reference = TimeReference::Absolute;
    } else if (j.contains("injection_interval") && j["injection_interval"].is_array() &&
               j["injection_interval"].size() == 2) {
        meta.interval_start = j["injection_interval"][0].get<double>();
        meta.interval_end = j["injection_interval"][1].get<double>();
        meta.time_reference = TimeReference::Auto;
    } else {
        missing("injection_interval_start/injection_interval_end");
    }
    if (meta.interval_end < meta.interval_start) {
        throw Error(ErrorCode::MissingMetadata, "injection interval ends before it starts");
    }

    if (j.contains("time_reference")) {
        const auto ref = j["time_reference"].get<std::string>();
        if (ref == "absolute") {
            meta.time_reference = TimeReference::Absolute;
        } else if (ref == "log_start") {
            meta.time_reference = TimeReference::LogStart;
        } else if (ref == "auto") {
            meta.time_reference = TimeReference::Auto;
        } else {
            throw Error(ErrorCode::MissingMetadata, fmt::format("unknown time_reference '{}'", ref));
        }
    }
    return meta;
}

nlohmann::json attack_metadata_to_json(const AttackMetadata& meta) {
    nlohmann::json j;
    if (!meta.name.empty()) j["name"] = meta.name;
    j["injection_id"] = meta.injection_id ? fmt::format("0x{:X}", *meta.injection_id) : std::string("XXX");
    j["injection_data_str"] = meta.injection_data.text();
    j["injection_interval_start"] = meta.interval_start;
    j["injection_interval_end"] = meta.interval_end;
    switch (meta.time_reference) {
    case TimeReference::Absolute: j["time_reference"] = "absolute"; break;
    case TimeReference::LogStart: j["time_reference"] = "log_start"; break;
    case TimeReference::Auto: j["time_reference"] = "auto"; break;
    }
    return j;
}

std::vector<AttackMetadata> load_attack_metadata_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, fmt::format("cannot open '{}'", path));
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::FormatError, fmt::format("{}: {}", path, e.what()));
    }
    std::vector<AttackMetadata> out;
    if (j.is_object() && j.contains("injection_id")) {
        out.push_back(attack_metadata_from_json(j));
    } else if (j.is_object()) {
        for (const auto& [name, entry] : j.items()) {
            if (entry.is_object() && entry.contains("injection_id")) {
                out.push_back(attack_metadata_from_json(entry, name));
            }
        }
    } else if (j.is_array()) {
        for (const auto& entry : j) {
            out.push_back(attack_metadata_from_json(entry));
        }
    }
    if (out.empty()) {
        throw Error(ErrorCode::MissingMetadata, fmt::format("no attack entries in '{}'", path));
    }
    return out;
}

void save_attack_metadata_file(const std::string& path, std::span<const AttackMetadata> metas) {
    nlohmann::json j;
    if (metas.size() == 1) {
        j = attack_metadata_to_json(metas.front());
    } else {
        j = nlohmann::json::object();
        for (const auto& m : metas) {
            j[m.name] = attack_metadata_to_json(m);
        }
    }
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorCode::IoError, fmt::format("cannot write '{}'", path));
    }
    out << j.dump(2) << '\n';
}

std::vector<LabeledFrame> derive_labels(std::span<const CanFrame> frames, std::span<const AttackMetadata> metadata) {
    if (metadata.empty()) {
        throw Error(ErrorCode::MissingMetadata, "no attack metadata supplied");
    }
    std::vector<TimeWindow> windows;
    windows.reserve(metadata.size());
    for (const auto& m : metadata) {
        windows.push_back(resolve_window(m, frames));
    }

    std::vector<LabeledFrame> out;
    out.reserve(frames.size());
    for (const auto& frame : frames) {
        bool attack = false;
        for (std::size_t k = 0; k < metadata.size() && !attack; ++k) {
            const auto& m = metadata[k];
            attack = windows[k].contains(frame.timestamp) && (!m.injection_id || *m.injection_id == frame.aid) &&
                     m.injection_data.matches(frame.payload);
        }
        out.push_back({frame, attack, FrameSource::DerivedFromMetadata});
    }
    return out;
}

} // namespace canids
