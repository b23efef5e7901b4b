#pragma once

// Deliberately naive reference implementations used as test oracles. They
// share no code with the library beyond the data types.

#include "canids/detectors.hpp"
#include "canids/frame.hpp"
#include "canids/kde.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <vector>

namespace canids::testing {

// Recomputes every verdict from the full per-AID history up to the frame.
inline std::vector<bool> batch_oracle(Method method, double alpha, const ProfileMap& profiles,
                                      const std::vector<CanFrame>& frames) {
    std::vector<bool> out(frames.size(), false);
    std::map<Aid, std::vector<double>> arrivals;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const auto& f = frames[i];
        const auto it = profiles.find(f.aid);
        if (it == profiles.end()) continue;
        const AidProfile& p = it->second;
        if (method == Method::Gaussian && !p.gaussian) continue;
        if (method == Method::Kde && !p.kde) continue;
        auto& times = arrivals[f.aid];
        times.push_back(f.timestamp);

        std::vector<double> gaps;
        for (std::size_t k = 1; k < times.size(); ++k) {
            const double g = times[k] - times[k - 1];
            gaps.push_back(g > 0.0 ? g : 1e-6);
        }
        switch (method) {
        case Method::Mean: {
            if (gaps.empty() || gaps.back() > alpha * p.mu) break;
            const std::size_t from = gaps.size() > 6 ? gaps.size() - 6 : 0;
            int count = 0;
            for (std::size_t k = from; k < gaps.size(); ++k) count += gaps[k] <= alpha * p.mu;
            out[i] = count >= 3;
            break;
        }
        case Method::Binning:
            if (times.size() >= 6) out[i] = times.back() - times[times.size() - 6] < alpha * p.mu;
            break;
        case Method::Gaussian:
        case Method::Kde: {
            if (gaps.size() < 3) break;
            bool all = true;
            for (std::size_t k = gaps.size() - 3; k < gaps.size(); ++k) {
                double pv;
                if (method == Method::Gaussian) {
                    const double z = std::abs(gaps[k] - p.gaussian->mu) / p.gaussian->sigma;
                    pv = 1.0 - std::erf(z / std::numbers::sqrt2);
                } else {
                    pv = kde_pvalue(*p.kde, gaps[k]);
                }
                all = all && pv <= alpha;
            }
            out[i] = all;
            break;
        }
        }
    }
    return out;
}

// Exhaustive minimal-variance h-subset (indices into `values`).
inline std::vector<std::size_t> exhaustive_mcd_support(const std::vector<double>& values, std::size_t h) {
    const std::size_t n = values.size();
    std::vector<std::size_t> pick, best;
    double best_var = INFINITY;
    std::function<void(std::size_t)> rec = [&](std::size_t start) {
        if (pick.size() == h) {
            double mean = 0.0;
            for (auto i : pick) mean += values[i];
            mean /= static_cast<double>(h);
            double var = 0.0;
            for (auto i : pick) var += (values[i] - mean) * (values[i] - mean);
            if (var < best_var) {
                best_var = var;
                best = pick;
            }
            return;
        }
        for (std::size_t i = start; i + (h - pick.size()) <= n; ++i) {
            pick.push_back(i);
            rec(i + 1);
            pick.pop_back();
        }
    };
    rec(0);
    return best;
}

// Inlier mask from the exhaustive support: the ceil(c * n) points farthest
// from the support mean are outliers, ties at the cutoff kept.
inline std::vector<bool> exhaustive_mcd_mask(const std::vector<double>& values, double contamination) {
    const std::size_t n = values.size();
    const std::size_t h = (n + 2) / 2;
    const auto support = exhaustive_mcd_support(values, h);
    double mu = 0.0;
    for (auto i : support) mu += values[i];
    mu /= static_cast<double>(h);
    const auto k = static_cast<std::size_t>(std::ceil(contamination * static_cast<double>(n) - 1e-9));
    std::vector<double> dist(n);
    for (std::size_t i = 0; i < n; ++i) dist[i] = std::abs(values[i] - mu);
    std::vector<bool> mask(n, true);
    if (k == 0) return mask;
    std::vector<double> sorted = dist;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const double kth = sorted[k - 1];
    const double next = k < n ? sorted[k] : -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (dist[i] > next && dist[i] >= kth) mask[i] = false;
    }
    return mask;
}

// Adaptive Simpson quadrature.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double eps,
                               int depth = 50) {
    std::function<double(double, double, double, double, double, double, int)> step =
        [&](double lo, double hi, double flo, double fmid, double fhi, double eps_, int d) {
            const double mid = 0.5 * (lo + hi);
            const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
            const double flm = f(lm), frm = f(rm);
            const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
            const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
            const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
            if (d <= 0 || std::abs(left + right - whole) <= 15.0 * eps_) {
                return left + right + (left + right - whole) / 15.0;
            }
            return step(lo, mid, flo, flm, fmid, eps_ / 2.0, d - 1) + step(mid, hi, fmid, frm, fhi, eps_ / 2.0, d - 1);
        };
    return step(a, b, f(a), f(0.5 * (a + b)), f(b), eps, depth);
}

// p-value of x under N(mu, sigma^2) as the mass where the density does not
// exceed the density at x: the level set is found by bisection on the
// density, the complement mass by quadrature.
inline double numeric_gaussian_pvalue(double mu, double sigma, double x) {
    auto pdf = [&](double t) {
        const double z = (t - mu) / sigma;
        return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
    };
    const double level = pdf(x);
    double lo = mu, hi = mu + 40.0 * sigma;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (pdf(mid) > level ? lo : hi) = mid;
    }
    const double r = 0.5 * (lo + hi) - mu;
    if (r <= 0.0) return 1.0;
    const double inner = adaptive_simpson(pdf, mu - r, mu + r, 1e-13);
    return std::clamp(1.0 - inner, 0.0, 1.0);
}

// KDE p-value on a grid `refine` times finer than the model's, from exact
// kernel sums and a fresh normalization.
struct RefinedKde {
    std::vector<double> density;
    double step = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

inline RefinedKde refine_kde(const KdeModel& model, std::size_t refine) {
    RefinedKde r;
    r.lo = model.grid_lo();
    r.hi = model.grid_hi();
    const std::size_t g = (model.grid_size() - 1) * refine + 1;
    r.step = (r.hi - r.lo) / static_cast<double>(g - 1);
    double mass = 0.0;
    for (std::size_t i = 0; i < g; ++i) {
        r.density.push_back(model.kernel_sum(r.lo + static_cast<double>(i) * r.step));
        mass += r.density.back() * r.step;
    }
    for (double& d : r.density) d /= mass;
    return r;
}

inline double refined_kde_pvalue(const RefinedKde& r, const KdeModel& model, double x) {
    if (x < r.lo || x > r.hi) return 0.0;
    double mass = 0.0;
    for (double d : r.density) mass += d * r.step;
    const double fx = model.kernel_sum(x) / mass;
    double pv = 0.0;
    for (double d : r.density) {
        if (d <= fx) pv += d * r.step;
    }
    return std::min(pv, 1.0);
}

// Random multi-AID stream: mostly on-period gaps, with bursts of short
// gaps and some frames from AIDs absent from the profiles.
inline std::vector<CanFrame> random_stream(const ProfileMap& profiles, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::pair<Aid, double>> aids;
    for (const auto& [aid, p] : profiles) aids.emplace_back(aid, p.mu);
    aids.emplace_back(0x7AB, 0.05);
    aids.emplace_back(0x001, 0.2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<CanFrame> frames;
    std::map<Aid, double> clock;
    while (frames.size() < count) {
        const auto& [aid, mu] = aids[static_cast<std::size_t>(u(rng) * static_cast<double>(aids.size()))];
        double gap;
        const double r = u(rng);
        if (r < 0.6) {
            gap = mu * (1.0 + 0.1 * n(rng));
        } else if (r < 0.95) {
            gap = mu * u(rng) * 0.6;
        } else {
            gap = 0.0; // same-timestamp collision
        }
        clock[aid] += std::max(gap, 0.0);
        CanFrame f;
        f.timestamp = std::round(clock[aid] * 1e6) / 1e6;
        f.aid = aid;
        frames.push_back(f);
    }
    std::stable_sort(frames.begin(), frames.end(),
                     [](const CanFrame& a, const CanFrame& b) { return a.timestamp < b.timestamp; });
    return frames;
}

} // namespace canids::testing
