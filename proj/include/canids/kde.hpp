#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace canids {

inline constexpr std::size_t kDefaultKdeCap = 10'000;
inline constexpr std::size_t kDefaultKdeGridSize = 2'048;
inline constexpr double kMinBandwidth = 1e-6;

// Gaussian-kernel density estimate tabulated on a uniform grid, with the
// lookup table needed for two-sided p-values:
//   pv(x) = mass of { t : f(t) <= f(x) }
// where f is the piecewise-linear interpolant of the grid.
class KdeModel {
public:
    KdeModel() = default;

    // Rebuilds the p-value table from tabulated density. Used by fit_kde and
    // by deserialization; the grid must have at least two points.
    KdeModel(std::vector<double> support, double bandwidth, double grid_lo, double grid_hi,
             std::vector<double> density);

    const std::vector<double>& support_points() const noexcept { return support_; }
    double bandwidth() const noexcept { return bandwidth_; }
    double grid_lo() const noexcept { return grid_lo_; }
    double grid_hi() const noexcept { return grid_hi_; }
    double grid_step() const noexcept;
    std::size_t grid_size() const noexcept { return density_.size(); }
    const std::vector<double>& density() const noexcept { return density_; }

    // Distinct grid densities in ascending order, and the interpolant's mass
    // where f <= each of them.
    const std::vector<double>& sorted_density() const noexcept { return levels_; }
    const std::vector<double>& pv_table() const noexcept { return pv_table_; }

    // Mass where f <= level, exact for the piecewise-linear interpolant.
    double mass_below(double level) const noexcept;

    double grid_point(std::size_t i) const noexcept;

    // Linear interpolation on the grid; 0 outside it.
    double density_at(double x) const noexcept;

    // Direct kernel sum over the support points (not renormalized).
    double kernel_sum(double x) const noexcept;

    // Trapezoidal mass of the grid density.
    double total_mass() const noexcept;

    friend bool operator==(const KdeModel&, const KdeModel&) = default;

private:
    std::vector<double> support_;
    double bandwidth_ = 0.0;
    double grid_lo_ = 0.0;
    double grid_hi_ = 0.0;
    std::vector<double> density_;
    std::vector<double> levels_;
    std::vector<double> pv_table_;
    std::vector<double> slope_; // d mass / d(level^2) between consecutive levels
};

// Silverman's rule 1.06 * sigma * m^(-1/5), floored at kMinBandwidth.
double silverman_bandwidth(double sigma, std::size_t m);

// Deterministic stride subsample keeping at most `cap` values.
std::vector<double> stride_subsample(std::span<const double> values, std::size_t cap);

// Fits on up to `cap` points; density spans [min - 3h, max + 3h] with
// `grid_size` points and is normalized to unit trapezoidal mass.
// Throws Error(TooFewSamples) for n < 2 and Error(DegenerateSigma) when the
// subsample has zero spread.
KdeModel fit_kde(std::span<const double> values, std::size_t cap = kDefaultKdeCap,
                 std::size_t grid_size = kDefaultKdeGridSize);

// mass_below(f(x)); 0 outside the grid.
double kde_pvalue(const KdeModel& model, double x);

} // namespace canids
