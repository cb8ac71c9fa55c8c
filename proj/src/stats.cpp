#include "driftwatch/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "driftwatch/error.hpp"

namespace driftwatch {

double sample_quantile(std::vector<double> values, double probability) {
    if (values.empty()) throw InvalidArgument("quantile of empty sample");
    std::sort(values.begin(), values.end());
    double position = probability * static_cast<double>(values.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(position));
    std::size_t hi = std::min(lo + 1, values.size() - 1);
    double frac = position - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

double sample_mean(std::span<const double> x) {
    if (x.empty()) throw InvalidArgument("mean of empty sample");
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_sd(std::span<const double> x) {
    if (x.size() < 2) throw InvalidArgument("sd needs at least two values");
    double mean = sample_mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

void RunningMoments::push(double x) {
    ++count;
    double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
}

RunningMoments RunningMoments::merge(const RunningMoments& a, const RunningMoments& b) {
    if (a.count == 0) return b;
    if (b.count == 0) return a;
    RunningMoments out;
    out.count = a.count + b.count;
    double delta = b.mean - a.mean;
    double total = static_cast<double>(out.count);
    out.mean = a.mean + delta * static_cast<double>(b.count) / total;
    out.m2 = a.m2 + b.m2 + delta * delta * static_cast<double>(a.count) * static_cast<double>(b.count) / total;
    return out;
}

double student_t_p_value(const RunningMoments& a, const RunningMoments& b) {
    if (a.count < 1 || b.count < 1 || a.count + b.count < 3) {
        throw InvalidArgument("student t: samples too small");
    }
    double dof = static_cast<double>(a.count + b.count - 2);
    double pooled = (a.m2 + b.m2) / dof;
    // Degenerate comparisons count as "no evidence".
    if (!(pooled > 0.0)) return 1.0;
    double se = std::sqrt(pooled * (1.0 / static_cast<double>(a.count) + 1.0 / static_cast<double>(b.count)));
    double t = std::abs(a.mean - b.mean) / se;
    boost::math::students_t dist(dof);
    return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, t)));
}

double student_t_p_value(std::span<const double> sample0, std::span<const double> sample1) {
    RunningMoments a, b;
    for (double v : sample0) a.push(v);
    for (double v : sample1) b.push(v);
    return student_t_p_value(a, b);
}

double chi_square1_upper_tail(double x) {
    if (x <= 0.0) return 1.0;
    return std::erfc(std::sqrt(x / 2.0));
}

}  // namespace driftwatch
