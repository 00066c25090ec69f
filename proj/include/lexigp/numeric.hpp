#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace lexigp {

/// Random stream used everywhere. Each caller owns its own instance.
using Rng = std::mt19937_64;

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline double uniform_unit(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

/// Median; even lengths use the mean of the two central order statistics.
inline double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median of empty sequence");
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

inline double median(std::span<const double> v) { return median(std::vector<double>(v.begin(), v.end())); }

/// splitmix64 finalizer; stable across platforms, unlike std::hash.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) { return mix64(seed ^ mix64(value)); }

inline std::uint64_t hash_combine(std::uint64_t seed, std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL; // FNV-1a
    for (const char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return hash_combine(seed, h);
}

} // namespace lexigp
