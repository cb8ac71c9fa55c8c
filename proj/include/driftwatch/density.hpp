#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "driftwatch/stream.hpp"

namespace driftwatch {

// Bandwidth selector: sample -> bandwidth.
using BandwidthSelector = std::function<double(std::span<const double>)>;

/// h = 0.9 * min(sd, IQR/1.34) * n^(-1/5). Falls back to sd when the IQR is
/// zero; throws DegenerateSample when both are zero.
double silverman_bandwidth(std::span<const double> sample);

// Gaussian kernel density estimate.
struct KdeModel {
    std::vector<double> sample;
    double bandwidth = 0.0;

    double density(double x) const;
    std::vector<double> density(std::span<const double> xs) const;
};

inline constexpr std::size_t kMinimumKdeSample = 5;

/// Throws InvalidArgument for fewer than five points, DegenerateSample for a
/// constant sample.
KdeModel kde_fit(std::span<const double> sample, const BandwidthSelector& selector = silverman_bandwidth);

inline constexpr std::size_t kDefaultGridPoints = 401;
inline constexpr double kVarianceFloor = 1e-12;

struct LocalTestResult {
    std::vector<double> grid;        // delta_1 = 0 .. delta_n = 1
    std::vector<double> deltas;      // f1 - f0
    std::vector<double> chi_sq;
    std::vector<double> p_raw;       // upper tail of chi^2_1
    std::vector<double> p_adjusted;  // Hochberg
    double alpha_star = 0.05;
};

/// Hochberg step-up adjusted p-values, returned in input order:
/// pi_(i) = min_{j >= i} min(1, (n - j + 1) p_(j)) over ascending p.
std::vector<double> hochberg_adjust(std::span<const double> p);

/// Pointwise test of f1(delta) = f0(delta) on an n_grid-point grid over
/// [0,1]. Var(f1 - f0) uses the asymptotic KDE variance f R / (n h) with
/// Gaussian roughness R = 1/(2 sqrt(pi)), summed over the two samples; points
/// below the variance floor get p = 1.
LocalTestResult local_density_test(const KdeModel& model0, const KdeModel& model1,
                                   std::size_t n_grid = kDefaultGridPoints, double alpha_star = 0.05);

struct SignificantRegion {
    double lo = 0.0;
    double hi = 0.0;
    double p_value = 1.0;      // smallest adjusted p inside the region
    std::size_t n_points = 0;  // grid points covered
};

struct SignificantRegionSet {
    std::vector<SignificantRegion> regions;  // disjoint, sorted by position
};

/// Maximal runs of grid points with pi_i < alpha* and f1 > f0.
SignificantRegionSet extract_regions(const LocalTestResult& result);

struct IndexedValue {
    std::int64_t t = 0;
    double z = 0.0;
};

inline constexpr std::size_t kDefaultMaxOutliers = 10;

struct OutlierSelection {
    std::vector<std::int64_t> theta_indices;
    std::size_t max_outliers = kDefaultMaxOutliers;
};

/// Walks regions from most to least significant and collects post-change
/// indices whose z lies inside, earliest first within a region, until
/// max_outliers are chosen.
OutlierSelection select_outliers(const SignificantRegionSet& regions, std::span<const IndexedValue> post_change,
                                 std::size_t max_outliers = kDefaultMaxOutliers);

/// Fraction of the given indices that are drift observations. Harness-only:
/// reads ground truth. Throws InvalidArgument on an empty set.
double drift_fraction(std::span<const std::int64_t> indices, const ConfidenceStream& stream);

struct OutlierSearch {
    SignificantRegionSet regions;
    OutlierSelection selection;
};

/// Full local-test pipeline on a z sequence split after k_hat, using the
/// post-change window k_hat+1..d (1-based). Returns an empty selection when
/// either side is too small or degenerate to estimate a density.
OutlierSearch find_outliers(std::span<const double> z, std::int64_t k_hat, std::int64_t d, double alpha_star,
                            std::size_t max_outliers = kDefaultMaxOutliers,
                            std::size_t n_grid = kDefaultGridPoints);

// JSON reports: regions as [{lo, hi, p_value, n_points}], outliers as
// [{t, z, label}] (no ground truth).
void write_regions_json(std::ostream& out, const SignificantRegionSet& regions);
void write_outliers_json(std::ostream& out, const OutlierSelection& selection, const ConfidenceStream& stream);

}  // namespace driftwatch
