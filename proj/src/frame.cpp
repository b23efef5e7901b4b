#include "canids/frame.hpp"

#include "canids/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace canids {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::MissingMetadata: return "MissingMetadata";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::DegenerateSigma: return "DegenerateSigma";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::TargetAidAbsent: return "TargetAidAbsent";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

Payload::Payload(std::initializer_list<std::uint8_t> bytes) {
    if (bytes.size() > kMaxPayload) {
        throw Error(ErrorCode::InvalidArgument, "payload longer than 8 bytes");
    }
    std::copy(bytes.begin(), bytes.end(), bytes_.begin());
    size_ = static_cast<std::uint8_t>(bytes.size());
}

Payload::Payload(std::span<const std::uint8_t> bytes) {
    if (bytes.size() > kMaxPayload) {
        throw Error(ErrorCode::InvalidArgument, "payload longer than 8 bytes");
    }
    std::copy(bytes.begin(), bytes.end(), bytes_.begin());
    size_ = static_cast<std::uint8_t>(bytes.size());
}

void Payload::push_back(std::uint8_t b) {
    if (size_ == kMaxPayload) {
        throw Error(ErrorCode::InvalidArgument, "payload longer than 8 bytes");
    }
    bytes_[size_++] = b;
}

bool operator==(const Payload& a, const Payload& b) noexcept {
    return a.size_ == b.size_ && std::equal(a.bytes_.begin(), a.bytes_.begin() + a.size_, b.bytes_.begin());
}

void validate(const CanFrame& frame) {
    if (!std::isfinite(frame.timestamp) || frame.timestamp < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "timestamp must be finite and non-negative");
    }
    if (frame.aid >= kAidLimit) {
        throw Error(ErrorCode::InvalidArgument, "arbitration id exceeds 29 bits");
    }
    if (!frame.extended && frame.aid > kMaxStandardAid) {
        throw Error(ErrorCode::InvalidArgument, "standard arbitration id exceeds 11 bits");
    }
    if (frame.channel.empty()) {
        throw Error(ErrorCode::InvalidArgument, "empty channel name");
    }
}

std::vector<CanFrame> strip_labels(std::span<const LabeledFrame> frames) {
    std::vector<CanFrame> out;
    out.reserve(frames.size());
    for (const auto& f : frames) {
        out.push_back(f.frame);
    }
    return out;
}

std::vector<bool> labels_of(std::span<const LabeledFrame> frames) {
    std::vector<bool> out;
    out.reserve(frames.size());
    for (const auto& f : frames) {
        out.push_back(f.label);
    }
    return out;
}

} // namespace canids
