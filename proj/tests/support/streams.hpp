#pragma once

// Deterministic synthetic input streams shared by the unit and acceptance
// suites.

#include <array>
#include <cstddef>
#include <random>
#include <vector>

#include "citygwr/gwr.hpp"

namespace citygwr::testing {

using Point = std::array<double, 2>;

struct Blob {
    Point center;
    double sigma;
};

/// Draws `n` points from an equally weighted isotropic Gaussian mixture.
inline std::vector<Point> sample_mixture(const std::vector<Blob>& blobs, std::size_t n,
                                         std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, blobs.size() - 1);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Point> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Blob& b = blobs[pick(rng)];
        out.push_back({b.center[0] + b.sigma * gauss(rng), b.center[1] + b.sigma * gauss(rng)});
    }
    return out;
}

inline std::vector<Point> sample_uniform_square(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Point> out(n);
    for (auto& p : out) p = {u(rng), u(rng)};
    return out;
}

/// Trains on every point and returns the per-step activities.
inline std::vector<double> train_all(Network& net, const std::vector<Point>& points) {
    std::vector<double> activities;
    activities.reserve(points.size());
    for (const auto& p : points) activities.push_back(net.train_step(p).activity);
    return activities;
}

inline double mean(const std::vector<double>& v, std::size_t begin, std::size_t end) {
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += v[i];
    return s / static_cast<double>(end - begin);
}

/// Two disjoint four-component mixtures on a km scale.
inline std::vector<Blob> mixture_a() {
    return {{{0.0, 0.0}, 0.4}, {{6.0, 0.0}, 0.4}, {{0.0, 6.0}, 0.4}, {{6.0, 6.0}, 0.4}};
}
inline std::vector<Blob> mixture_b() {
    return {{{30.0, 0.0}, 0.4}, {{36.0, 0.0}, 0.4}, {{30.0, 6.0}, 0.4}, {{36.0, 6.0}, 0.4}};
}

struct DriftResult {
    double plateau_mean;      // last 200 steps before the drift
    double return_mean;       // first 50 steps after returning to A
    double control_mean;      // a fresh network on the same 50 steps
};

/// A -> B -> A drift experiment with the region-level defaults.
inline DriftResult run_drift_experiment(std::uint64_t seed, std::size_t phase_a = 6000,
                                        std::size_t phase_b = 3000) {
    std::mt19937_64 rng(seed);
    const auto a1 = sample_mixture(mixture_a(), phase_a, rng);
    const auto b = sample_mixture(mixture_b(), phase_b, rng);
    const auto a2 = sample_mixture(mixture_a(), 50, rng);

    Network net(Hyperparameters::region_level(), 2);
    const auto pre = train_all(net, a1);
    train_all(net, b);
    const auto post = train_all(net, a2);

    Network control(Hyperparameters::region_level(), 2);
    const auto fresh = train_all(control, a2);

    return {mean(pre, pre.size() - 200, pre.size()), mean(post, 0, 50), mean(fresh, 0, 50)};
}

}  // namespace citygwr::testing
