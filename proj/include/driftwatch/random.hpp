#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace driftwatch {

using Engine = std::mt19937_64;

// Counter-based seed fan-out. Every random quantity in the toolkit is drawn
// from an engine seeded with derive_seed(master, purpose, index), so any one
// repetition / null stream can be regenerated in isolation.
std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t purpose, std::uint64_t index) noexcept;

namespace seed_purpose {
inline constexpr std::uint64_t calibration = 1;
inline constexpr std::uint64_t synthesis = 2;
inline constexpr std::uint64_t moments = 3;
inline constexpr std::uint64_t peeking = 4;
inline constexpr std::uint64_t repetition = 5;
}  // namespace seed_purpose

inline Engine make_engine(std::uint64_t seed) { return Engine(seed); }

// Distributions come from Boost.Random so draws are identical across
// standard library implementations.
double draw_uniform(Engine& engine);
double draw_normal(Engine& engine);
double draw_beta(Engine& engine, double a, double b);
std::size_t draw_index(Engine& engine, std::size_t n);

template <class T>
void shuffle_in_place(std::span<T> items, Engine& engine) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::size_t j = draw_index(engine, i);
        std::swap(items[i - 1], items[j]);
    }
}

}  // namespace driftwatch
