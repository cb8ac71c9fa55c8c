#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace driftwatch {

// Type-7 (linear interpolation) sample quantile.
double sample_quantile(std::vector<double> values, double probability);

double sample_mean(std::span<const double> x);
double sample_sd(std::span<const double> x);  // n - 1 denominator

// Two-sided p-value of the pooled-variance two-sample Student t test.
// Returns 1 when the pooled variance is zero.
double student_t_p_value(std::span<const double> sample0, std::span<const double> sample1);

// Same test from summary moments (count, mean, sum of squared deviations).
struct RunningMoments {
    std::int64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void push(double x);
    static RunningMoments merge(const RunningMoments& a, const RunningMoments& b);
};
double student_t_p_value(const RunningMoments& a, const RunningMoments& b);

// Upper tail of the chi-square distribution with one degree of freedom.
double chi_square1_upper_tail(double x);

}  // namespace driftwatch
