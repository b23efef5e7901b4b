#pragma once

#include "canids/frame.hpp"
#include "canids/gaussian.hpp"
#include "canids/kde.hpp"
#include "canids/mcd.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace canids {

inline constexpr int kProfileFormatVersion = 1;

// Timing model of one arbitration ID.
struct AidProfile {
    Aid aid = 0;
    std::size_t n_train = 0;
    double mu = 0.0;
    double sigma = 0.0;
    double min = 0.0;
    double max = 0.0;
    bool outliers_removed = false;
    std::size_t outliers_flagged = 0;
    std::optional<GaussianFit> gaussian; // absent when sigma == 0
    std::optional<KdeModel> kde;         // absent when the spread is zero

    friend bool operator==(const AidProfile&, const AidProfile&) = default;
};

using ProfileMap = std::map<Aid, AidProfile>;

enum class OutlierMode { With, Without, Both };

struct TrainingConfig {
    double contamination = kDefaultContamination;
    std::size_t kde_cap = kDefaultKdeCap;
    std::size_t kde_grid_size = kDefaultKdeGridSize;
    OutlierMode mode = OutlierMode::Both;

    friend bool operator==(const TrainingConfig&, const TrainingConfig&) = default;
};

// One document per vehicle: the training config and up to two profile maps.
struct ProfileSet {
    TrainingConfig config;
    std::optional<ProfileMap> with_outliers;
    std::optional<ProfileMap> without_outliers;

    // Throws Error(InvalidArgument) if the requested variant was not trained.
    const ProfileMap& variant(OutlierMode mode) const;

    friend bool operator==(const ProfileSet&, const ProfileSet&) = default;
};

// Builds a profile from the pooled training gaps of one AID. With
// `remove_outliers`, MCD-flagged gaps are dropped first (skipped when fewer
// than four gaps exist). Requires at least two gaps.
AidProfile fit_profile(Aid aid, std::span<const double> gaps, bool remove_outliers,
                       const TrainingConfig& config);

// Gaps are extracted per log and pooled per AID, so no gap spans two logs.
// AIDs with fewer than two pooled gaps get no profile.
ProfileSet train_profiles(std::span<const std::vector<CanFrame>> logs, const TrainingConfig& config);

std::string to_string(OutlierMode mode);
OutlierMode outlier_mode_from_string(const std::string& text);

nlohmann::json profile_to_json(const AidProfile& profile);
AidProfile profile_from_json(const nlohmann::json& j);
nlohmann::json profile_set_to_json(const ProfileSet& set);
ProfileSet profile_set_from_json(const nlohmann::json& j);

void save_profile_set(const std::string& path, const ProfileSet& set);
ProfileSet load_profile_set(const std::string& path);

} // namespace canids
