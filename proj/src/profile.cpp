#include "canids/profile.hpp"

#include "canids/error.hpp"
#include "canids/gaps.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <fstream>

namespace canids {

namespace {

using nlohmann::json;

std::string aid_key(Aid aid) { return aid > kMaxStandardAid ? fmt::format("{:08X}", aid) : fmt::format("{:03X}", aid); }

json kde_to_json(const KdeModel& kde) {
    return json{{"bandwidth", kde.bandwidth()},
                {"grid_lo", kde.grid_lo()},
                {"grid_hi", kde.grid_hi()},
                {"support_points", kde.support_points()},
                {"density", kde.density()}};
}

KdeModel kde_from_json(const json& j) {
    return KdeModel(j.at("support_points").get<std::vector<double>>(), j.at("bandwidth").get<double>(),
                    j.at("grid_lo").get<double>(), j.at("grid_hi").get<double>(),
                    j.at("density").get<std::vector<double>>());
}

json map_to_json(const ProfileMap& map) {
    json out = json::object();
    for (const auto& [aid, profile] : map) {
        out[aid_key(aid)] = profile_to_json(profile);
    }
    return out;
}

ProfileMap map_from_json(const json& j) {
    ProfileMap out;
    for (const auto& [key, value] : j.items()) {
        auto profile = profile_from_json(value);
        out.emplace(profile.aid, std::move(profile));
    }
    return out;
}

} // namespace

const ProfileMap& ProfileSet::variant(OutlierMode mode) const {
    if (mode == OutlierMode::With && with_outliers) return *with_outliers;
    if (mode == OutlierMode::Without && without_outliers) return *without_outliers;
    throw Error(ErrorCode::InvalidArgument, fmt::format("profile variant '{}' was not trained", to_string(mode)));
}

AidProfile fit_profile(Aid aid, std::span<const double> gaps, bool remove_outliers, const TrainingConfig& config) {
    if (gaps.size() < 2) {
        throw Error(ErrorCode::TooFewSamples, fmt::format("AID {} has fewer than 2 gaps", aid_key(aid)));
    }
    AidProfile profile;
    profile.aid = aid;

    std::vector<double> retained(gaps.begin(), gaps.end());
    if (remove_outliers && gaps.size() >= 4) {
        const auto mcd = mcd_filter(gaps, config.contamination);
        retained = apply_mask(gaps, mcd.inlier_mask);
        profile.outliers_removed = true;
        profile.outliers_flagged = mcd.outlier_count();
    }

    const auto s = summarize(retained);
    profile.n_train = s.n;
    profile.mu = s.mean;
    profile.sigma = s.stddev;
    profile.min = s.min;
    profile.max = s.max;
    if (s.stddev > 0.0) {
        profile.gaussian = GaussianFit{s.mean, s.stddev};
        try {
            profile.kde = fit_kde(retained, config.kde_cap, config.kde_grid_size);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::DegenerateSigma) throw;
        }
    }
    return profile;
}

ProfileSet train_profiles(std::span<const std::vector<CanFrame>> logs, const TrainingConfig& config) {
    std::map<Aid, std::vector<double>> pooled;
    for (const auto& log : logs) {
        for (auto& [aid, series] : extract_gaps(log).series) {
            auto& dst = pooled[aid];
            dst.insert(dst.end(), series.gaps.begin(), series.gaps.end());
        }
    }
    ProfileSet set;
    set.config = config;
    const bool with = config.mode != OutlierMode::Without;
    const bool without = config.mode != OutlierMode::With;
    if (with) set.with_outliers.emplace();
    if (without) set.without_outliers.emplace();
    for (const auto& [aid, gaps] : pooled) {
        if (gaps.size() < 2) continue;
        if (with) set.with_outliers->emplace(aid, fit_profile(aid, gaps, false, config));
        if (without) set.without_outliers->emplace(aid, fit_profile(aid, gaps, true, config));
    }
    return set;
}

std::string to_string(OutlierMode mode) {
    switch (mode) {
    case OutlierMode::With: return "with";
    case OutlierMode::Without: return "without";
    case OutlierMode::Both: return "both";
    }
    return "both";
}

OutlierMode outlier_mode_from_string(const std::string& text) {
    if (text == "with") return OutlierMode::With;
    if (text == "without") return OutlierMode::Without;
    if (text == "both") return OutlierMode::Both;
    throw Error(ErrorCode::InvalidArgument, fmt::format("unknown outlier mode '{}'", text));
}

json profile_to_json(const AidProfile& p) {
    json j{{"aid", p.aid},
           {"n_train", p.n_train},
           {"mu", p.mu},
           {"sigma", p.sigma},
           {"min", p.min},
           {"max", p.max},
           {"outliers_removed", p.outliers_removed},
           {"outliers_flagged", p.outliers_flagged}};
    j["gaussian"] = p.gaussian ? json{{"mu", p.gaussian->mu}, {"sigma", p.gaussian->sigma}} : json(nullptr);
    j["kde"] = p.kde ? kde_to_json(*p.kde) : json(nullptr);
    return j;
}

AidProfile profile_from_json(const json& j) {
    AidProfile p;
    p.aid = j.at("aid").get<Aid>();
    p.n_train = j.at("n_train").get<std::size_t>();
    p.mu = j.at("mu").get<double>();
    p.sigma = j.at("sigma").get<double>();
    p.min = j.at("min").get<double>();
    p.max = j.at("max").get<double>();
    p.outliers_removed = j.at("outliers_removed").get<bool>();
    p.outliers_flagged = j.value("outliers_flagged", std::size_t{0});
    if (j.contains("gaussian") && !j["gaussian"].is_null()) {
        p.gaussian = GaussianFit{j["gaussian"].at("mu").get<double>(), j["gaussian"].at("sigma").get<double>()};
    }
    if (j.contains("kde") && !j["kde"].is_null()) {
        p.kde = kde_from_json(j["kde"]);
    }
    return p;
}

json profile_set_to_json(const ProfileSet& set) {
    json j;
    j["format_version"] = kProfileFormatVersion;
    j["config"] = json{{"contamination", set.config.contamination},
                       {"kde_cap", set.config.kde_cap},
                       {"kde_grid_size", set.config.kde_grid_size},
                       {"bandwidth_rule", "silverman"},
                       {"outliers", to_string(set.config.mode)}};
    json profiles = json::object();
    if (set.with_outliers) profiles["with"] = map_to_json(*set.with_outliers);
    if (set.without_outliers) profiles["without"] = map_to_json(*set.without_outliers);
    j["profiles"] = std::move(profiles);
    return j;
}

ProfileSet profile_set_from_json(const json& j) {
    try {
        const int version = j.at("format_version").get<int>();
        if (version != kProfileFormatVersion) {
            throw Error(ErrorCode::FormatError, fmt::format("unsupported profile format version {}", version));
        }
        ProfileSet set;
        const auto& cfg = j.at("config");
        set.config.contamination = cfg.at("contamination").get<double>();
        set.config.kde_cap = cfg.at("kde_cap").get<std::size_t>();
        set.config.kde_grid_size = cfg.at("kde_grid_size").get<std::size_t>();
        set.config.mode = outlier_mode_from_string(cfg.at("outliers").get<std::string>());
        if (cfg.value("bandwidth_rule", std::string("silverman")) != "silverman") {
            throw Error(ErrorCode::FormatError, "only the silverman bandwidth rule is supported");
        }
        const auto& profiles = j.at("profiles");
        if (profiles.contains("with")) set.with_outliers = map_from_json(profiles["with"]);
        if (profiles.contains("without")) set.without_outliers = map_from_json(profiles["without"]);
        return set;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::FormatError, fmt::format("malformed profile document: {}", e.what()));
    }
}

void save_profile_set(const std::string& path, const ProfileSet& set) {
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorCode::IoError, fmt::format("cannot write '{}'", path));
    }
    out << profile_set_to_json(set).dump(1) << '\n';
}

ProfileSet load_profile_set(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, fmt::format("cannot open '{}'", path));
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::FormatError, fmt::format("{}: {}", path, e.what()));
    }
    return profile_set_from_json(j);
}

} // namespace canids
