#include "driftwatch/random.hpp"

#include <boost/random/beta_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>

namespace driftwatch {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t purpose, std::uint64_t index) noexcept {
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ purpose);
    return splitmix64(h ^ index);
}

double draw_uniform(Engine& engine) {
    boost::random::uniform_01<double> dist;
    return dist(engine);
}

double draw_normal(Engine& engine) {
    boost::random::normal_distribution<double> dist(0.0, 1.0);
    return dist(engine);
}

double draw_beta(Engine& engine, double a, double b) {
    boost::random::beta_distribution<double> dist(a, b);
    return dist(engine);
}

std::size_t draw_index(Engine& engine, std::size_t n) {
    boost::random::uniform_int_distribution<std::size_t> dist(0, n - 1);
    return dist(engine);
}

}  // namespace driftwatch
