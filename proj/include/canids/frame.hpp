#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace canids {

using Aid = std::uint32_t;

inline constexpr Aid kMaxStandardAid = 0x7FF;
inline constexpr Aid kAidLimit = 1u << 29;
inline constexpr std::size_t kMaxPayload = 8;

// Classic CAN data field, 0-8 bytes.
class Payload {
public:
    Payload() = default;
    Payload(std::initializer_list<std::uint8_t> bytes);
    explicit Payload(std::span<const std::uint8_t> bytes);

    std::size_t size() const noexcept { return size_; }
    bool empty() const noexcept { return size_ == 0; }
    std::uint8_t operator[](std::size_t i) const noexcept { return bytes_[i]; }
    std::span<const std::uint8_t> bytes() const noexcept { return {bytes_.data(), size_}; }

    void push_back(std::uint8_t b);

    friend bool operator==(const Payload& a, const Payload& b) noexcept;

private:
    std::array<std::uint8_t, kMaxPayload> bytes_{};
    std::uint8_t size_ = 0;
};

struct CanFrame {
    double timestamp = 0.0; // seconds since capture epoch
    Aid aid = 0;
    Payload payload;
    std::string channel = "can0";
    bool extended = false; // 29-bit identifier (8 hex digits in candump)

    friend bool operator==(const CanFrame&, const CanFrame&) = default;
};

// Throws Error(InvalidArgument) when a field violates the frame invariants.
void validate(const CanFrame& frame);

enum class FrameSource { Ambient, Injected, DerivedFromMetadata };

struct LabeledFrame {
    CanFrame frame;
    bool label = false; // true = attack
    FrameSource source = FrameSource::Ambient;

    friend bool operator==(const LabeledFrame&, const LabeledFrame&) = default;
};

std::vector<CanFrame> strip_labels(std::span<const LabeledFrame> frames);
std::vector<bool> labels_of(std::span<const LabeledFrame> frames);

} // namespace canids
