#include "canids/candump.hpp"

#include "canids/error.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace canids {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

[[noreturn]] void malformed(const std::string& why) {
    throw Error(ErrorCode::MalformedLine, why);
}

double parse_timestamp(std::string_view text) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        malformed(fmt::format("bad timestamp '{}'", text));
    }
    if (!std::isfinite(value) || value < 0.0) {
        malformed(fmt::format("timestamp out of range '{}'", text));
    }
    return value;
}

Payload parse_payload_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) {
        malformed("odd number of payload hex digits");
    }
    if (hex.size() > 2 * kMaxPayload) {
        malformed("payload longer than 8 bytes");
    }
    Payload payload;
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        const int hi = hex_value(hex[i]);
        const int lo = hex_value(hex[i + 1]);
        if (hi < 0 || lo < 0) {
            malformed(fmt::format("bad payload hex '{}'", hex));
        }
        payload.push_back(static_cast<std::uint8_t>(hi * 16 + lo));
    }
    return payload;
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        const std::size_t start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
        if (i > start) out.push_back(s.substr(start, i - start));
    }
    return out;
}

} // namespace

std::optional<Aid> parse_aid_hex(std::string_view text) {
    if (text.starts_with("0x") || text.starts_with("0X")) {
        text.remove_prefix(2);
    }
    if (text.empty() || text.size() > 8) {
        return std::nullopt;
    }
    Aid value = 0;
    for (char c : text) {
        const int v = hex_value(c);
        if (v < 0) return std::nullopt;
        value = value * 16 + static_cast<Aid>(v);
    }
    return value;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
    static constexpr char kDigits[] = "0123456789ABCDEF";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (auto b : bytes) {
        out.push_back(kDigits[b >> 4]);
        out.push_back(kDigits[b & 0x0F]);
    }
    return out;
}

std::string aid_to_hex(Aid aid, bool extended) {
    return extended ? fmt::format("{:08X}", aid) : fmt::format("{:03X}", aid);
}

CanFrame parse_candump_line(std::string_view line) {
    line = trim(line);
    const auto fields = split_ws(line);
    if (fields.size() != 3) {
        malformed(fmt::format("expected 3 fields, found {}", fields.size()));
    }
    const auto ts = fields[0];
    if (ts.size() < 3 || ts.front() != '(' || ts.back() != ')') {
        malformed("timestamp must be parenthesized");
    }

    CanFrame frame;
    frame.timestamp = parse_timestamp(ts.substr(1, ts.size() - 2));
    frame.channel = std::string(fields[1]);

    const auto body = fields[2];
    const auto hash = body.find('#');
    if (hash == std::string_view::npos) {
        malformed("missing '#' separator");
    }
    const auto id_text = body.substr(0, hash);
    const auto data_text = body.substr(hash + 1);
    if (data_text.starts_with("#")) {
        malformed("CAN FD frames are not supported");
    }
    if (data_text.starts_with("R") || data_text.starts_with("r")) {
        malformed("remote frames are not supported");
    }
    if (id_text.empty() || id_text.size() > 8 || id_text.starts_with("0x")) {
        malformed(fmt::format("bad arbitration id '{}'", id_text));
    }
    const auto aid = parse_aid_hex(id_text);
    if (!aid) {
        malformed(fmt::format("bad arbitration id '{}'", id_text));
    }
    frame.aid = *aid;
    frame.extended = id_text.size() > 3;
    if (!frame.extended && frame.aid > kMaxStandardAid) {
        malformed(fmt::format("standard arbitration id out of range '{}'", id_text));
    }
    if (frame.extended && frame.aid >= kAidLimit) {
        malformed(fmt::format("extended arbitration id out of range '{}'", id_text));
    }
    frame.payload = parse_payload_hex(data_text);
    return frame;
}

ParseResult parse_log(std::istream& in) {
    ParseResult result;
    std::string line;
    std::size_t line_no = 0;
    bool have_last = false;
    double last = 0.0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        ++result.line_count;
        try {
            CanFrame frame = parse_candump_line(line);
            if (have_last && frame.timestamp < last) {
                result.non_monotone.push_back(
                    {line_no, fmt::format("timestamp {:.6f} precedes {:.6f}", frame.timestamp, last)});
            }
            have_last = true;
            last = frame.timestamp;
            result.frames.push_back(std::move(frame));
        } catch (const Error& e) {
            result.rejected.push_back({line_no, e.what()});
        }
    }
    return result;
}

ParseResult parse_log_text(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_log(in);
}

ParseResult parse_log_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, fmt::format("cannot open '{}'", path));
    }
    return parse_log(in);
}

std::string format_candump_line(const CanFrame& frame) {
    return fmt::format("({:.6f}) {} {}#{}", frame.timestamp, frame.channel, aid_to_hex(frame.aid, frame.extended),
                       to_hex(frame.payload.bytes()));
}

void write_log(std::ostream& out, std::span<const CanFrame> frames) {
    for (const auto& f : frames) {
        out << format_candump_line(f) << '\n';
    }
}

std::string write_log(std::span<const CanFrame> frames) {
    std::ostringstream out;
    write_log(out, frames);
    return out.str();
}

void write_labeled_csv(std::ostream& out, std::span<const LabeledFrame> frames) {
    out << "timestamp,aid_hex,payload_hex,label\n";
    for (const auto& lf : frames) {
        out << fmt::format("{:.6f},{},{},{}\n", lf.frame.timestamp, aid_to_hex(lf.frame.aid, lf.frame.extended),
                           to_hex(lf.frame.payload.bytes()), lf.label ? 1 : 0);
    }
}

std::vector<LabeledFrame> read_labeled_csv(std::istream& in) {
    std::vector<LabeledFrame> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = trim(line);
        if (text.empty() || (line_no == 1 && text.starts_with("timestamp"))) {
            continue;
        }
        std::vector<std::string_view> cols;
        std::size_t start = 0;
        while (true) {
            const auto comma = text.find(',', start);
            cols.push_back(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        try {
            if (cols.size() != 4) {
                malformed(fmt::format("expected 4 columns, found {}", cols.size()));
            }
            LabeledFrame lf;
            lf.frame.timestamp = parse_timestamp(trim(cols[0]));
            const auto id_text = trim(cols[1]);
            const auto aid = parse_aid_hex(id_text);
            if (!aid || *aid >= kAidLimit) {
                malformed(fmt::format("bad arbitration id '{}'", id_text));
            }
            lf.frame.aid = *aid;
            lf.frame.extended = id_text.size() > 3 || *aid > kMaxStandardAid;
            lf.frame.payload = parse_payload_hex(trim(cols[2]));
            const auto label = trim(cols[3]);
            if (label == "1" || label == "true") {
                lf.label = true;
            } else if (label == "0" || label == "false") {
                lf.label = false;
            } else {
                malformed(fmt::format("bad label '{}'", label));
            }
            lf.source = FrameSource::DerivedFromMetadata;
            out.push_back(std::move(lf));
        } catch (const Error& e) {
            throw Error(ErrorCode::MalformedLine, fmt::format("line {}: {}", line_no, e.what()));
        }
    }
    return out;
}

std::vector<LabeledFrame> read_labeled_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, fmt::format("cannot open '{}'", path));
    }
    return read_labeled_csv(in);
}

} // namespace canids
