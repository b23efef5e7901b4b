#include "canids/gaussian.hpp"

#include "canids/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace canids {

SampleSummary summarize(std::span<const double> values) {
    if (values.empty()) {
        throw Error(ErrorCode::TooFewSamples, "cannot summarize an empty sample");
    }
    SampleSummary s;
    s.n = values.size();
    double sum = 0.0;
    for (double x : values) sum += x;
    s.mean = sum / static_cast<double>(s.n);
    double ss = 0.0;
    for (double x : values) ss += (x - s.mean) * (x - s.mean);
    s.stddev = s.n > 1 ? std::sqrt(ss / static_cast<double>(s.n - 1)) : 0.0;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    s.min = *lo;
    s.max = *hi;
    // Rounding in the mean must not break min <= mean <= max.
    s.mean = std::clamp(s.mean, s.min, s.max);
    if (s.min == s.max) {
        s.mean = s.min;
        s.stddev = 0.0;
    }
    return s;
}

GaussianFit fit_gaussian(std::span<const double> values) {
    if (values.size() < 2) {
        throw Error(ErrorCode::TooFewSamples, "Gaussian fit needs at least 2 samples");
    }
    const auto s = summarize(values);
    if (!(s.stddev > 0.0)) {
        throw Error(ErrorCode::DegenerateSigma, "all samples are equal");
    }
    return {s.mean, s.stddev};
}

double gaussian_pvalue(const GaussianFit& fit, double x) {
    if (!(fit.sigma > 0.0)) {
        throw Error(ErrorCode::DegenerateSigma, "Gaussian p-value needs sigma > 0");
    }
    const double z = std::abs(x - fit.mu) / fit.sigma;
    return std::erfc(z / std::numbers::sqrt2);
}

} // namespace canids
