#pragma once

// Slow reference implementations written straight from the definitions.
// Used only to cross-check the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "driftwatch/two_sample.hpp"

namespace oracle {

// Empirical CDF evaluated by counting.
inline double ecdf(std::span<const double> sample, double x) {
    std::size_t c = 0;
    for (double v : sample) c += v <= x ? 1 : 0;
    return static_cast<double>(c) / static_cast<double>(sample.size());
}

// nm/N^2 * sum over pooled x of (F_n(x) - G_m(x))^2, in floating point.
inline double cvm_ecdf(std::span<const double> a, std::span<const double> b) {
    const double n = static_cast<double>(a.size());
    const double m = static_cast<double>(b.size());
    double sum = 0.0;
    for (auto sample : {a, b}) {
        for (double x : sample) {
            double diff = ecdf(a, x) - ecdf(b, x);
            sum += diff * diff;
        }
    }
    return n * m / ((n + m) * (n + m)) * sum;
}

// Same quantity with an exact integer numerator: sum_x (c_a(x) m - c_b(x) n)^2.
inline double cvm_exact(std::span<const double> a, std::span<const double> b) {
    const auto n = static_cast<__int128>(a.size());
    const auto m = static_cast<__int128>(b.size());
    __int128 numerator = 0;
    for (auto sample : {a, b}) {
        for (double x : sample) {
            __int128 ca = 0, cb = 0;
            for (double v : a) ca += v <= x ? 1 : 0;
            for (double v : b) cb += v <= x ? 1 : 0;
            __int128 diff = ca * m - cb * n;
            numerator += diff * diff;
        }
    }
    const double total = static_cast<double>(a.size() + b.size());
    return static_cast<double>(numerator) /
           (total * total * static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

// |t| of the pooled two-sample t test from two-pass sums.
inline double student_t(std::span<const double> a, std::span<const double> b) {
    auto mean = [](std::span<const double> x) {
        double s = 0.0;
        for (double v : x) s += v;
        return s / static_cast<double>(x.size());
    };
    auto ss = [](std::span<const double> x, double mu) {
        double s = 0.0;
        for (double v : x) s += (v - mu) * (v - mu);
        return s;
    };
    const double n = static_cast<double>(a.size()), m = static_cast<double>(b.size());
    const double ma = mean(a), mb = mean(b);
    const double pooled = (ss(a, ma) + ss(b, mb)) / (n + m - 2.0);
    return std::abs(ma - mb) / std::sqrt(pooled * (1.0 / n + 1.0 / m));
}

struct Split {
    std::int64_t tau = 0;
    double w_max = -std::numeric_limits<double>::infinity();
};

// Every admissible split evaluated from scratch; first maximum wins.
inline Split scan(driftwatch::StatisticKind kind, std::span<const double> z, std::int64_t stride,
                  const driftwatch::MomentSource& moments, int min_seg = driftwatch::kDefaultMinimumSegment) {
    const auto t = static_cast<std::int64_t>(z.size());
    Split best;
    for (std::int64_t k = min_seg; k <= t - min_seg; ++k) {
        if (k % stride != 0) continue;
        auto a = z.subspan(0, static_cast<std::size_t>(k));
        auto b = z.subspan(static_cast<std::size_t>(k));
        double raw = kind == driftwatch::StatisticKind::CramerVonMises ? cvm_exact(a, b) : student_t(a, b);
        auto mm = moments.moments(kind, k, t - k);
        double w = (raw - mm.mean) / mm.sd;
        if (w > best.w_max) best = {k, w};
    }
    return best;
}

// Hochberg by definition: H_i is rejected at level a iff some p_j >= p_i has
// p_j <= a / (n - r_j + 1), with r_j the largest rank among ties of p_j. The
// adjusted p is the smallest such a.
inline std::vector<double> hochberg(std::span<const double> p) {
    const std::size_t n = p.size();
    std::vector<double> out(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        double best = 1.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (p[j] < p[i]) continue;
            std::size_t rank = 0;
            for (double q : p) rank += q <= p[j] ? 1 : 0;
            best = std::min(best, std::min(1.0, static_cast<double>(n - rank + 1) * p[j]));
        }
        out[i] = best;
    }
    return out;
}

// Type-7 quantile by direct interpolation on a sorted copy.
inline double quantile(std::vector<double> x, double prob) {
    std::sort(x.begin(), x.end());
    double h = (static_cast<double>(x.size()) - 1.0) * prob;
    auto lo = static_cast<std::size_t>(std::floor(h));
    auto hi = std::min(lo + 1, x.size() - 1);
    return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

}  // namespace oracle
