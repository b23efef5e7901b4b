#include "canids/mcd.hpp"

#include "canids/error.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace canids {

std::size_t McdResult::outlier_count() const noexcept {
    return static_cast<std::size_t>(std::count(inlier_mask.begin(), inlier_mask.end(), false));
}

std::size_t mcd_support_size(std::size_t n) noexcept { return (n + 2) / 2; }

double mcd_consistency_factor(std::size_t h, std::size_t n) {
    if (n == 0 || h == 0 || h > n) {
        throw Error(ErrorCode::InvalidArgument, "support size must lie in [1, n]");
    }
    const double fraction = static_cast<double>(h) / static_cast<double>(n);
    if (fraction >= 1.0) {
        return 1.0;
    }
    // q = chi2_1 quantile at the support fraction; F3 = chi2_3 cdf at q.
    const double z = std::numbers::sqrt2 * boost::math::erf_inv(fraction);
    const double q = z * z;
    const double f3 = std::erf(z / std::numbers::sqrt2) - std::sqrt(2.0 * q / std::numbers::pi) * std::exp(-q / 2.0);
    return std::sqrt(fraction / f3);
}

McdResult mcd_filter(std::span<const double> values, double contamination) {
    const std::size_t n = values.size();
    if (n < 4) {
        throw Error(ErrorCode::TooFewSamples, fmt::format("MCD needs at least 4 samples, got {}", n));
    }
    if (!(contamination >= 0.0 && contamination < 0.5)) {
        throw Error(ErrorCode::InvalidArgument, "contamination must lie in [0, 0.5)");
    }

    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t h = mcd_support_size(n);

    // Prefix sums about the median keep cancellation small.
    const long double center = sorted[n / 2];
    std::vector<long double> s1(n + 1, 0.0L);
    std::vector<long double> s2(n + 1, 0.0L);
    for (std::size_t i = 0; i < n; ++i) {
        const long double d = sorted[i] - center;
        s1[i + 1] = s1[i] + d;
        s2[i + 1] = s2[i] + d * d;
    }
    std::size_t best = 0;
    long double best_ss = 0.0L;
    for (std::size_t start = 0; start + h <= n; ++start) {
        const long double sum = s1[start + h] - s1[start];
        const long double ss = (s2[start + h] - s2[start]) - sum * sum / static_cast<long double>(h);
        if (start == 0 || ss < best_ss) {
            best_ss = ss;
            best = start;
        }
    }

    McdResult result;
    result.contamination = contamination;
    result.support_size = h;
    result.window_begin = best;

    const auto window = std::span<const double>(sorted).subspan(best, h);
    const double mu = window.front() == window.back()
                          ? window.front()
                          : std::accumulate(window.begin(), window.end(), 0.0) / static_cast<double>(h);
    double ss = 0.0;
    for (double x : window) {
        ss += (x - mu) * (x - mu);
    }
    result.robust_mu = mu;
    result.raw_sigma = std::sqrt(ss / static_cast<double>(h));
    result.robust_sigma = result.raw_sigma * mcd_consistency_factor(h, n);

    result.inlier_mask.assign(n, true);
    const auto k = static_cast<std::size_t>(std::ceil(contamination * static_cast<double>(n) - 1e-9));
    if (k == 0) {
        return result;
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        dist[i] = std::abs(values[i] - mu);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] > dist[b]; });
    // Points tied with the first retained distance are not flagged.
    std::size_t flagged = std::min(k, n);
    while (flagged > 0 && flagged < n && dist[order[flagged]] == dist[order[flagged - 1]]) {
        --flagged;
    }
    for (std::size_t i = 0; i < flagged; ++i) {
        result.inlier_mask[order[i]] = false;
    }
    return result;
}

std::vector<double> apply_mask(std::span<const double> values, const std::vector<bool>& mask) {
    if (mask.size() != values.size()) {
        throw Error(ErrorCode::LengthMismatch, "mask length differs from sample length");
    }
    std::vector<double> out;
    out.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (mask[i]) out.push_back(values[i]);
    }
    return out;
}

} // namespace canids
