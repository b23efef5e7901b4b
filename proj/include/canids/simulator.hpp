#pragma once

#include "canids/frame.hpp"
#include "canids/labels.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace canids {

enum class PayloadKind { Constant, Counter, Random };

struct AidSpec {
    Aid aid = 0;
    double period = 0.1;       // s
    double jitter_sigma = 0.0; // s, truncated at +-3 sigma
    double phase = 0.0;        // s, offset of the first nominal arrival
    PayloadKind payload_kind = PayloadKind::Counter;
    Payload constant_payload{0, 0, 0, 0, 0, 0, 0, 0};
};

struct BusSpec {
    std::vector<AidSpec> aids;
    double duration = 60.0; // s
    std::uint64_t seed = 1;
    std::string channel = "can0";
};

enum class AttackKind { FloodingTargeted, FlamTargeted, Fuzzing };

struct AttackSpec {
    AttackKind kind = AttackKind::FlamTargeted;
    std::optional<Aid> target_aid; // absent for fuzzing
    double start = 0.0;
    double end = 0.0;
    double rate_multiplier = 10.0; // flooding / fuzzing
    double flam_offset = 0.001;    // s after each legitimate frame
    Payload payload{0xFF, 0xFF, 0xFF, 0xFF, 0xFF, 0xFF, 0xFF, 0xFF};
    std::uint64_t seed = 7; // fuzzing AID / payload draws
};

// Throws Error(InvalidSpec) on a violated invariant.
void validate(const BusSpec& spec);

// Arrivals at phase + k * period + jitter, quantized to microseconds, merged
// and stably time-sorted. Deterministic for a given seed.
std::vector<LabeledFrame> generate_ambient(const BusSpec& spec);

// Adds labeled attack frames and re-sorts; ambient frames keep their labels
// and win timestamp ties. The target period is taken from the median ambient
// gap of the target AID; the fuzzing rate is rate_multiplier times the median
// per-AID rate. Throws Error(TargetAidAbsent) or Error(InvalidSpec).
std::vector<LabeledFrame> inject_attack(std::span<const LabeledFrame> ambient, const AttackSpec& attack);

// Metadata that makes derive_labels reproduce the injected labels.
AttackMetadata attack_metadata_for(const AttackSpec& attack, std::string name = "synthetic_attack");

// Median same-AID gap in the given frames; nullopt if fewer than two frames.
std::optional<double> median_period(std::span<const LabeledFrame> frames, Aid aid);

// Desk-scale fixture: 10 AIDs with periods 10-500 ms and jitter of 10 % of
// the period, 60 s of capture.
BusSpec desk_bus(std::uint64_t seed, double duration = 60.0);

// One 10 s flam attack on the fixture's 10 ms AID with 1 ms offset.
AttackSpec desk_flam_attack(std::uint64_t seed);

inline constexpr Aid kDeskTargetAid = 0x0D0;

} // namespace canids
