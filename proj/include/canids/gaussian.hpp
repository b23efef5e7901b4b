#pragma once

#include <cstddef>
#include <span>

namespace canids {

struct SampleSummary {
    std::size_t n = 0;
    double mean = 0.0;
    double stddev = 0.0; // n - 1 denominator
    double min = 0.0;
    double max = 0.0;
};

// Requires n >= 1; stddev is 0 for n == 1.
SampleSummary summarize(std::span<const double> values);

struct GaussianFit {
    double mu = 0.0;
    double sigma = 0.0;

    friend bool operator==(const GaussianFit&, const GaussianFit&) = default;
};

// Sample mean and standard deviation. Throws Error(TooFewSamples) for n < 2
// and Error(DegenerateSigma) when every value is equal.
GaussianFit fit_gaussian(std::span<const double> values);

// Probability mass of {t : f(t) <= f(x)} under N(mu, sigma^2), which for the
// normal density is the two-sided tail 2 * (1 - Phi(|x - mu| / sigma)).
// Throws Error(DegenerateSigma) when sigma <= 0.
double gaussian_pvalue(const GaussianFit& fit, double x);

} // namespace canids
