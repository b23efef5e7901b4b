#include "canids/kde.hpp"

#include "canids/error.hpp"
#include "canids/gaussian.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace canids {

namespace {

// Kernel contributions beyond this many bandwidths are below 1e-13.
constexpr double kKernelReach = 8.0;

double gauss_norm(double bandwidth, std::size_t m) {
    return 1.0 / (static_cast<double>(m) * bandwidth * std::sqrt(2.0 * std::numbers::pi));
}

} // namespace

KdeModel::KdeModel(std::vector<double> support, double bandwidth, double grid_lo, double grid_hi,
                   std::vector<double> density)
    : support_(std::move(support)), bandwidth_(bandwidth), grid_lo_(grid_lo), grid_hi_(grid_hi),
      density_(std::move(density)) {
    if (density_.size() < 2 || !(grid_hi_ > grid_lo_) || !(bandwidth_ > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "KDE grid needs >= 2 points, a positive span and bandwidth");
    }
    levels_ = density_;
    std::sort(levels_.begin(), levels_.end());
    levels_.erase(std::unique(levels_.begin(), levels_.end()), levels_.end());
    auto level_index = [&](double f) {
        return static_cast<std::size_t>(std::lower_bound(levels_.begin(), levels_.end(), f) - levels_.begin());
    };

    // On a segment rising from lo to hi the mass where f <= L is
    // step * (L^2 - lo^2) / (2 (hi - lo)) for L in [lo, hi]: quadratic in L
    // with weight step / (2 (hi - lo)). Nearly flat segments become jumps.
    const double step = grid_step();
    const std::size_t k = levels_.size();
    std::vector<long double> weight_delta(k + 1, 0.0L);
    std::vector<long double> jump(k, 0.0L);
    for (std::size_t i = 0; i + 1 < density_.size(); ++i) {
        const double lo = std::min(density_[i], density_[i + 1]);
        const double hi = std::max(density_[i], density_[i + 1]);
        if (hi - lo <= 1e-9 * hi) {
            jump[level_index(hi)] += static_cast<long double>(step) * (lo + hi) / 2.0L;
            continue;
        }
        const long double w = static_cast<long double>(step) / (2.0L * (hi - lo));
        weight_delta[level_index(lo)] += w;
        weight_delta[level_index(hi)] -= w;
    }
    pv_table_.resize(k);
    slope_.resize(k);
    long double weight = 0.0L;
    long double mass = 0.0L;
    for (std::size_t b = 0; b < k; ++b) {
        if (b > 0) {
            const long double l0 = levels_[b - 1], l1 = levels_[b];
            mass += weight * (l1 - l0) * (l1 + l0);
        }
        mass += jump[b];
        weight += weight_delta[b];
        if (weight < 0.0L) weight = 0.0L;
        pv_table_[b] = static_cast<double>(mass);
        slope_[b] = static_cast<double>(weight);
    }
}

double KdeModel::mass_below(double level) const noexcept {
    if (levels_.empty() || level < levels_.front()) {
        return 0.0;
    }
    const auto b = static_cast<std::size_t>(std::upper_bound(levels_.begin(), levels_.end(), level) - levels_.begin()) - 1;
    const double extra = b + 1 < levels_.size() ? slope_[b] * (level - levels_[b]) * (level + levels_[b]) : 0.0;
    return std::clamp(pv_table_[b] + extra, 0.0, 1.0);
}

double KdeModel::grid_step() const noexcept {
    return density_.size() < 2 ? 0.0 : (grid_hi_ - grid_lo_) / static_cast<double>(density_.size() - 1);
}

double KdeModel::grid_point(std::size_t i) const noexcept {
    return i + 1 == density_.size() ? grid_hi_ : grid_lo_ + static_cast<double>(i) * grid_step();
}

double KdeModel::density_at(double x) const noexcept {
    if (density_.empty() || !(x >= grid_lo_ && x <= grid_hi_)) {
        return 0.0;
    }
    const double pos = (x - grid_lo_) / grid_step();
    auto i = static_cast<std::size_t>(pos);
    if (i >= density_.size() - 1) {
        i = density_.size() - 2;
    }
    const double frac = std::clamp(pos - static_cast<double>(i), 0.0, 1.0);
    return density_[i] + frac * (density_[i + 1] - density_[i]);
}

double KdeModel::kernel_sum(double x) const noexcept {
    if (support_.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (double s : support_) {
        const double u = (x - s) / bandwidth_;
        sum += std::exp(-0.5 * u * u);
    }
    return sum * gauss_norm(bandwidth_, support_.size());
}

double KdeModel::total_mass() const noexcept {
    if (density_.size() < 2) return 0.0;
    double sum = 0.0;
    for (double f : density_) sum += f;
    sum -= 0.5 * (density_.front() + density_.back());
    return sum * grid_step();
}

double silverman_bandwidth(double sigma, std::size_t m) {
    const double h = 1.06 * sigma * std::pow(static_cast<double>(m), -0.2);
    return std::max(h, kMinBandwidth);
}

std::vector<double> stride_subsample(std::span<const double> values, std::size_t cap) {
    if (values.size() <= cap) {
        return {values.begin(), values.end()};
    }
    std::vector<double> out;
    out.reserve(cap);
    const std::size_t n = values.size();
    for (std::size_t i = 0; i < cap; ++i) {
        out.push_back(values[i * n / cap]);
    }
    return out;
}

KdeModel fit_kde(std::span<const double> values, std::size_t cap, std::size_t grid_size) {
    if (values.size() < 2) {
        throw Error(ErrorCode::TooFewSamples, "KDE needs at least 2 samples");
    }
    if (cap < 2 || grid_size < 2) {
        throw Error(ErrorCode::InvalidArgument, "KDE cap and grid size must be >= 2");
    }
    std::vector<double> support = stride_subsample(values, cap);
    std::sort(support.begin(), support.end());
    const auto summary = summarize(support);
    if (!(summary.stddev > 0.0)) {
        throw Error(ErrorCode::DegenerateSigma, "KDE support has zero spread");
    }
    const std::size_t m = support.size();
    const double h = silverman_bandwidth(summary.stddev, m);
    const double lo = summary.min - 3.0 * h;
    const double hi = summary.max + 3.0 * h;
    const double step = (hi - lo) / static_cast<double>(grid_size - 1);
    const double reach = kKernelReach * h;

    std::vector<double> density(grid_size, 0.0);
    auto first = support.begin();
    for (std::size_t i = 0; i < grid_size; ++i) {
        const double t = i + 1 == grid_size ? hi : lo + static_cast<double>(i) * step;
        while (first != support.end() && *first < t - reach) ++first;
        double sum = 0.0;
        for (auto it = first; it != support.end() && *it <= t + reach; ++it) {
            const double u = (t - *it) / h;
            sum += std::exp(-0.5 * u * u);
        }
        density[i] = sum * gauss_norm(h, m);
    }
    double mass = -0.5 * (density.front() + density.back()) * step;
    for (double f : density) mass += f * step;
    for (double& f : density) f /= mass;

    return KdeModel(std::move(support), h, lo, hi, std::move(density));
}

double kde_pvalue(const KdeModel& model, double x) {
    if (model.grid_size() < 2 || !(x >= model.grid_lo() && x <= model.grid_hi())) {
        return 0.0;
    }
    return model.mass_below(model.density_at(x));
}

} // namespace canids
