#include "canids/simulator.hpp"

#include "canids/candump.hpp"
#include "canids/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace canids {

namespace {

double quantize_us(double t) { return std::round(t * 1e6) / 1e6; }

[[noreturn]] void invalid(const std::string& why) { throw Error(ErrorCode::InvalidSpec, why); }

Payload random_payload(std::mt19937_64& rng) {
    Payload p;
    std::uniform_int_distribution<int> byte(0, 255);
    for (std::size_t i = 0; i < kMaxPayload; ++i) {
        p.push_back(static_cast<std::uint8_t>(byte(rng)));
    }
    return p;
}

void stable_time_sort(std::vector<LabeledFrame>& frames) {
    std::stable_sort(frames.begin(), frames.end(),
                     [](const LabeledFrame& a, const LabeledFrame& b) { return a.frame.timestamp < b.frame.timestamp; });
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

void validate(const BusSpec& spec) {
    if (!(spec.duration > 0.0)) invalid("capture duration must be positive");
    if (spec.aids.empty()) invalid("bus has no AIDs");
    std::set<Aid> seen;
    for (const auto& a : spec.aids) {
        if (!(a.period > 0.0)) invalid(fmt::format("AID {:03X}: period must be positive", a.aid));
        if (!(a.jitter_sigma >= 0.0 && a.jitter_sigma < a.period / 4.0)) {
            invalid(fmt::format("AID {:03X}: jitter_sigma must lie in [0, period/4)", a.aid));
        }
        if (!(a.phase >= 0.0)) invalid(fmt::format("AID {:03X}: phase must be non-negative", a.aid));
        if (a.aid > kMaxStandardAid) invalid(fmt::format("AID {:X} is not an 11-bit identifier", a.aid));
        if (!seen.insert(a.aid).second) invalid(fmt::format("AID {:03X} listed twice", a.aid));
    }
}

std::vector<LabeledFrame> generate_ambient(const BusSpec& spec) {
    validate(spec);
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<LabeledFrame> out;
    for (const auto& a : spec.aids) {
        for (std::size_t k = 0;; ++k) {
            const double nominal = a.phase + static_cast<double>(k) * a.period;
            if (nominal >= spec.duration - 1e-9) break;
            double jitter = 0.0;
            if (a.jitter_sigma > 0.0) {
                jitter = std::clamp(normal(rng), -3.0, 3.0) * a.jitter_sigma;
            }
            LabeledFrame lf;
            lf.frame.timestamp = quantize_us(std::max(0.0, nominal + jitter));
            lf.frame.aid = a.aid;
            lf.frame.channel = spec.channel;
            switch (a.payload_kind) {
            case PayloadKind::Constant: lf.frame.payload = a.constant_payload; break;
            case PayloadKind::Counter: {
                Payload p = a.constant_payload;
                std::vector<std::uint8_t> bytes(p.bytes().begin(), p.bytes().end());
                if (bytes.empty()) bytes.push_back(0);
                bytes[0] = static_cast<std::uint8_t>(k & 0xFF);
                lf.frame.payload = Payload(bytes);
                break;
            }
            case PayloadKind::Random: lf.frame.payload = random_payload(rng); break;
            }
            lf.label = false;
            lf.source = FrameSource::Ambient;
            out.push_back(std::move(lf));
        }
    }
    stable_time_sort(out);
    return out;
}

std::optional<double> median_period(std::span<const LabeledFrame> frames, Aid aid) {
    std::vector<double> times;
    for (const auto& f : frames) {
        if (f.frame.aid == aid) times.push_back(f.frame.timestamp);
    }
    if (times.size() < 2) return std::nullopt;
    std::sort(times.begin(), times.end());
    std::vector<double> gaps;
    for (std::size_t i = 1; i < times.size(); ++i) gaps.push_back(times[i] - times[i - 1]);
    return median(std::move(gaps));
}

std::vector<LabeledFrame> inject_attack(std::span<const LabeledFrame> ambient, const AttackSpec& attack) {
    if (ambient.empty()) invalid("ambient capture is empty");
    if (!(attack.end >= attack.start)) invalid("attack interval ends before it starts");
    double first = ambient.front().frame.timestamp;
    double last = first;
    for (const auto& f : ambient) {
        first = std::min(first, f.frame.timestamp);
        last = std::max(last, f.frame.timestamp);
    }
    if (attack.start < first || attack.end > last) invalid("attack interval must lie inside the capture");

    std::vector<LabeledFrame> injected;
    auto inject = [&](double t, Aid aid, Payload payload, bool extended, const std::string& channel) {
        LabeledFrame lf;
        lf.frame.timestamp = quantize_us(t);
        lf.frame.aid = aid;
        lf.frame.payload = payload;
        lf.frame.extended = extended;
        lf.frame.channel = channel;
        lf.label = true;
        lf.source = FrameSource::Injected;
        injected.push_back(std::move(lf));
    };
    const std::string channel = ambient.front().frame.channel;

    switch (attack.kind) {
    case AttackKind::FlamTargeted:
    case AttackKind::FloodingTargeted: {
        if (!attack.target_aid) invalid("targeted attack without a target AID");
        const Aid target = *attack.target_aid;
        const auto period = median_period(ambient, target);
        if (!period) {
            throw Error(ErrorCode::TargetAidAbsent, fmt::format("target AID {:03X} absent from ambient traffic", target));
        }
        if (attack.kind == AttackKind::FlamTargeted) {
            if (!(attack.flam_offset > 0.0 && attack.flam_offset < *period)) {
                invalid("flam offset must lie in (0, target period)");
            }
            for (const auto& f : ambient) {
                if (f.frame.aid == target && !f.label && f.frame.timestamp >= attack.start &&
                    f.frame.timestamp <= attack.end) {
                    inject(f.frame.timestamp + attack.flam_offset, target, attack.payload, f.frame.extended,
                           f.frame.channel);
                }
            }
        } else {
            if (!(attack.rate_multiplier > 0.0)) invalid("rate multiplier must be positive");
            const double spacing = *period / attack.rate_multiplier;
            for (std::size_t k = 0;; ++k) {
                const double t = attack.start + static_cast<double>(k) * spacing;
                if (t >= attack.end - 1e-9) break;
                inject(t, target, attack.payload, false, channel);
            }
        }
        break;
    }
    case AttackKind::Fuzzing: {
        if (!(attack.rate_multiplier > 0.0)) invalid("rate multiplier must be positive");
        std::set<Aid> aids;
        for (const auto& f : ambient) aids.insert(f.frame.aid);
        std::vector<double> rates;
        for (Aid aid : aids) {
            if (const auto p = median_period(ambient, aid); p && *p > 0.0) rates.push_back(1.0 / *p);
        }
        if (rates.empty()) invalid("no periodic AID to derive the fuzzing rate from");
        const double spacing = 1.0 / (attack.rate_multiplier * median(std::move(rates)));
        std::mt19937_64 rng(attack.seed);
        std::uniform_int_distribution<Aid> any_aid(0, kMaxStandardAid);
        for (std::size_t k = 0;; ++k) {
            const double t = attack.start + static_cast<double>(k) * spacing;
            if (t >= attack.end - 1e-9) break;
            const Aid aid = any_aid(rng);
            inject(t, aid, random_payload(rng), false, channel);
        }
        break;
    }
    }

    std::vector<LabeledFrame> out(ambient.begin(), ambient.end());
    out.insert(out.end(), injected.begin(), injected.end());
    stable_time_sort(out);
    return out;
}

AttackMetadata attack_metadata_for(const AttackSpec& attack, std::string name) {
    AttackMetadata meta;
    meta.name = std::move(name);
    meta.interval_start = attack.start;
    meta.interval_end = attack.end;
    meta.time_reference = TimeReference::Absolute;
    if (attack.kind == AttackKind::Fuzzing) {
        meta.injection_data = PayloadPattern(std::string(2 * kMaxPayload, 'X'));
    } else {
        meta.injection_id = attack.target_aid;
        meta.injection_data = PayloadPattern(to_hex(attack.payload.bytes()));
    }
    if (attack.kind == AttackKind::FlamTargeted) {
        // Injections trail their legitimate frame by the offset.
        meta.interval_end = quantize_us(attack.end + attack.flam_offset);
    }
    return meta;
}

BusSpec desk_bus(std::uint64_t seed, double duration) {
    struct Row {
        Aid aid;
        double period;
        PayloadKind kind;
    };
    static constexpr Row kRows[] = {
        {kDeskTargetAid, 0.010, PayloadKind::Counter}, {0x0C0, 0.020, PayloadKind::Counter},
        {0x1A0, 0.025, PayloadKind::Random},           {0x0F1, 0.040, PayloadKind::Counter},
        {0x130, 0.050, PayloadKind::Constant},         {0x200, 0.100, PayloadKind::Counter},
        {0x215, 0.100, PayloadKind::Random},           {0x2A0, 0.200, PayloadKind::Constant},
        {0x350, 0.250, PayloadKind::Counter},          {0x4F0, 0.500, PayloadKind::Counter},
    };
    BusSpec spec;
    spec.duration = duration;
    spec.seed = seed;
    std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ull);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (const auto& row : kRows) {
        AidSpec a;
        a.aid = row.aid;
        a.period = row.period;
        a.jitter_sigma = 0.1 * row.period;
        a.phase = quantize_us(unit(rng) * row.period);
        a.payload_kind = row.kind;
        a.constant_payload = Payload{static_cast<std::uint8_t>(row.aid & 0xFF), 0x10, 0x20, 0x30, 0, 0, 0, 0};
        spec.aids.push_back(a);
    }
    return spec;
}

AttackSpec desk_flam_attack(std::uint64_t seed) {
    AttackSpec attack;
    attack.kind = AttackKind::FlamTargeted;
    attack.target_aid = kDeskTargetAid;
    attack.start = 25.0;
    attack.end = 35.0;
    attack.flam_offset = 0.001;
    attack.seed = seed;
    return attack;
}

} // namespace canids
