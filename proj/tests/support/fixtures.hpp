#pragma once

#include "canids/eval.hpp"
#include "canids/profile.hpp"
#include "canids/simulator.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace canids::testing {

// Desk-scale fixture: profiles trained on a clean capture from an unrelated
// seed, tested on a capture with the 10 s flam attack on 0x0D0.
struct DeskFixture {
    ProfileSet profiles;
    TestLog test;
    double target_mu = 0.0;
};

inline DeskFixture make_desk_fixture(std::uint64_t seed, double flam_offset = 0.001) {
    DeskFixture fx;
    const auto training = strip_labels(generate_ambient(desk_bus(seed + 1000)));
    std::vector<std::vector<CanFrame>> logs{training};
    fx.profiles = train_profiles(logs, TrainingConfig{});

    auto attack = desk_flam_attack(seed);
    attack.flam_offset = flam_offset;
    const auto frames = inject_attack(generate_ambient(desk_bus(seed)), attack);
    const auto meta = attack_metadata_for(attack, "desk_flam");
    fx.test.name = "desk_flam";
    fx.test.frames = frames;
    fx.test.attacks.push_back(resolve_interval(meta, strip_labels(frames)));
    fx.target_mu = fx.profiles.variant(OutlierMode::With).at(kDeskTargetAid).mu;
    return fx;
}

} // namespace canids::testing
