#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace driftsim {

// splitmix64 step; used only to derive well-mixed engine seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Counter-based seed split: trial i gets a stream derived from base_seed + i,
// so adding trials never perturbs earlier trials.
inline std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t counter) {
    return splitmix64(base_seed + counter);
}

// Uniform double in [0, 1) with 53 random bits. The standard pins the
// mt19937_64 output sequence but not std::uniform_real_distribution, so all
// sampling in this library goes through this conversion to keep sequences
// byte-identical across platforms.
inline double uniform01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Normalized cumulative distribution over nonnegative weights.
inline std::vector<double> cumulative_distribution(const std::vector<double>& weights) {
    if (weights.empty()) throw std::invalid_argument("cumulative_distribution: empty weight vector");
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw std::invalid_argument("cumulative_distribution: negative weight");
        total += w;
    }
    if (total <= 0.0) throw std::invalid_argument("cumulative_distribution: all weights zero");
    std::vector<double> cdf(weights.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i] / total;
        cdf[i] = acc;
    }
    cdf.back() = 1.0;  // guard against rounding shortfall
    return cdf;
}

// Inverse-CDF draw: first index with cdf[i] > u.
inline std::size_t sample_cumulative(const std::vector<double>& cdf, double u) {
    std::size_t lo = 0, hi = cdf.size() - 1;
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (cdf[mid] > u) hi = mid;
        else lo = mid + 1;
    }
    return lo;
}

}  // namespace driftsim
