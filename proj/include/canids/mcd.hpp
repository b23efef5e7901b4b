#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace canids {

inline constexpr double kDefaultContamination = 0.0001; // 0.01 %

struct McdResult {
    std::vector<bool> inlier_mask; // aligned with the input order
    double robust_mu = 0.0;
    double raw_sigma = 0.0;    // standard deviation of the minimal-variance h-subset
    double robust_sigma = 0.0; // raw_sigma with the Gaussian consistency factor
    double contamination = 0.0;
    std::size_t support_size = 0; // h
    std::size_t window_begin = 0; // offset of the h-subset in sorted order

    std::size_t outlier_count() const noexcept;
};

// h = floor((n + 2) / 2) used by the estimator.
std::size_t mcd_support_size(std::size_t n) noexcept;

// Multiplier turning the raw h-subset standard deviation into a consistent
// estimate of sigma for Gaussian data (support fraction h/n).
double mcd_consistency_factor(std::size_t h, std::size_t n);

// Exact univariate MCD. In one dimension the minimal-variance h-subset is a
// run of consecutive order statistics, so a sliding window over the sorted
// sample finds it. The ceil(contamination * n) points farthest from
// robust_mu are flagged; points tied with the first unflagged distance stay
// inliers. Throws Error(TooFewSamples) for n < 4 and Error(InvalidArgument)
// for contamination outside [0, 0.5).
McdResult mcd_filter(std::span<const double> values, double contamination = kDefaultContamination);

std::vector<double> apply_mask(std::span<const double> values, const std::vector<bool>& mask);

} // namespace canids
