#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace driftwatch {

enum class StatisticKind { StudentT, CramerVonMises };

std::string_view to_string(StatisticKind kind);
StatisticKind parse_statistic_kind(std::string_view name);

inline constexpr int kDefaultMinimumSegment = 2;

struct TwoSampleStatistic {
    StatisticKind kind = StatisticKind::CramerVonMises;
    int minimum_segment = kDefaultMinimumSegment;
};

/// Raw (unnormalized) two-sample statistic.
///
/// StudentT: |t| of the pooled-variance two-sample t test; throws
/// DegenerateSample when the pooled variance is zero.
/// CramerVonMises: T = nm/(n+m)^2 * sum over the n+m pooled points x of
/// (F_n(x) - G_m(x))^2 using right-continuous empirical CDFs, so tied values
/// share the ECDF level at the end of their tie group.
double two_sample_statistic(StatisticKind kind, std::span<const double> sample0, std::span<const double> sample1,
                            int minimum_segment = kDefaultMinimumSegment);

struct NullMoments {
    double mean = 0.0;
    double sd = 1.0;
};

// Null mean and standard deviation of the raw statistic at sample sizes
// (n0, n1). Implementations must be safe for concurrent calls.
class MomentSource {
public:
    virtual ~MomentSource() = default;
    virtual NullMoments moments(StatisticKind kind, std::int64_t n0, std::int64_t n1) const = 0;
    virtual std::string_view name() const = 0;
};

// Exact finite-sample moments for continuous data.
//   CvM (Anderson 1962): E[T] = (N+1)/(6N),
//     Var[T] = (N+1)/(45 N^2) * (4nmN - 3(n^2+m^2) - 2nm)/(4nm).
//   |T| with nu = N-2 degrees of freedom (normal data):
//     E|T| = sqrt(nu/pi) Gamma((nu-1)/2)/Gamma(nu/2), E[T^2] = nu/(nu-2).
class ClosedFormMoments final : public MomentSource {
public:
    NullMoments moments(StatisticKind kind, std::int64_t n0, std::int64_t n1) const override;
    std::string_view name() const override { return "closed_form"; }
};

// Empirical moments from simulated null samples (uniform for CvM, standard
// normal for StudentT), cached per (kind, n0, n1). Each key draws from its own
// derived seed, so results do not depend on query order.
class MonteCarloMoments final : public MomentSource {
public:
    MonteCarloMoments(std::int64_t draws, std::uint64_t seed);
    NullMoments moments(StatisticKind kind, std::int64_t n0, std::int64_t n1) const override;
    std::string_view name() const override { return "monte_carlo"; }

private:
    std::int64_t draws_;
    std::uint64_t seed_;
    mutable std::mutex mutex_;
    mutable std::map<std::tuple<int, std::int64_t, std::int64_t>, NullMoments> cache_;
};

// Holds precomputed moments only; lookups for anything else throw
// MissingMoments.
class TabulatedMoments final : public MomentSource {
public:
    void set(StatisticKind kind, std::int64_t n0, std::int64_t n1, NullMoments m);
    NullMoments moments(StatisticKind kind, std::int64_t n0, std::int64_t n1) const override;
    std::string_view name() const override { return "tabulated"; }

private:
    std::map<std::tuple<int, std::int64_t, std::int64_t>, NullMoments> table_;
};

std::shared_ptr<const MomentSource> make_moment_source(std::string_view name, std::uint64_t seed = 0,
                                                       std::int64_t draws = 20000);

inline double normalize_statistic(double raw, NullMoments m) { return (raw - m.mean) / m.sd; }
double normalize_statistic(StatisticKind kind, double raw, std::int64_t n0, std::int64_t n1,
                           const MomentSource& moments);

struct SplitScan {
    std::int64_t tau = 0;  // size of the "before" sample
    double w_max = 0.0;    // normalized statistic at tau
};

/// Maximizes the normalized statistic over splits z[0,k) | z[k,t) for
/// minimum_segment <= k <= t - minimum_segment, k a multiple of
/// candidate_stride. Ties go to the smallest k. Throws InvalidArgument when
/// no candidate exists.
SplitScan scan_splits(StatisticKind kind, std::span<const double> z, std::int64_t candidate_stride,
                      const MomentSource& moments, int minimum_segment = kDefaultMinimumSegment);

/// Times t at which a CPM evaluates: t0 <= t <= horizon, t a multiple of
/// evaluation_stride, and at least one split candidate exists at t.
std::vector<std::int64_t> evaluation_points(std::int64_t t0, std::int64_t horizon, std::int64_t evaluation_stride,
                                            std::int64_t candidate_stride,
                                            int minimum_segment = kDefaultMinimumSegment);

}  // namespace driftwatch
