#pragma once

#include "canids/frame.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace canids {

struct LineIssue {
    std::size_t line = 0; // 1-based
    std::string message;
};

struct ParseResult {
    std::vector<CanFrame> frames;
    std::vector<LineIssue> rejected;       // MalformedLine
    std::vector<LineIssue> non_monotone;   // warnings only
    std::size_t line_count = 0;            // non-blank lines seen
};

// Parses one candump line `(TIMESTAMP) CHANNEL AID#PAYLOADHEX`.
// Throws Error(MalformedLine) on any defect.
CanFrame parse_candump_line(std::string_view line);

// Blank lines are ignored; every other line is either a frame or a rejection,
// so frames.size() + rejected.size() == line_count.
ParseResult parse_log(std::istream& in);
ParseResult parse_log_text(std::string_view text);
ParseResult parse_log_file(const std::string& path);

// Canonical candump line without trailing newline.
std::string format_candump_line(const CanFrame& frame);

void write_log(std::ostream& out, std::span<const CanFrame> frames);
std::string write_log(std::span<const CanFrame> frames);

// Labeled-frame CSV: header `timestamp,aid_hex,payload_hex,label`.
void write_labeled_csv(std::ostream& out, std::span<const LabeledFrame> frames);
std::vector<LabeledFrame> read_labeled_csv(std::istream& in);
std::vector<LabeledFrame> read_labeled_csv_file(const std::string& path);

std::string to_hex(std::span<const std::uint8_t> bytes);
std::string aid_to_hex(Aid aid, bool extended);
std::optional<Aid> parse_aid_hex(std::string_view text);

} // namespace canids
