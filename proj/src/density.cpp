#include "driftwatch/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "driftwatch/error.hpp"
#include "driftwatch/stats.hpp"

namespace driftwatch {

namespace {

// Roughness of the Gaussian kernel, integral of K^2.
constexpr double kGaussianRoughness = 0.28209479177387814;  // 1 / (2 sqrt(pi))

}  // namespace

double silverman_bandwidth(std::span<const double> sample) {
    if (sample.size() < 2) throw InvalidArgument("bandwidth: need at least two points");
    double sd = sample_sd(sample);
    std::vector<double> copy(sample.begin(), sample.end());
    double iqr = sample_quantile(copy, 0.75) - sample_quantile(copy, 0.25);
    double spread = std::min(sd, iqr / 1.34);
    if (!(spread > 0.0)) spread = sd;
    if (!(spread > 0.0)) throw DegenerateSample("bandwidth: constant sample has no density");
    return 0.9 * spread * std::pow(static_cast<double>(sample.size()), -0.2);
}

double KdeModel::density(double x) const {
    double sum = 0.0;
    for (double xi : sample) {
        double u = (x - xi) / bandwidth;
        sum += std::exp(-0.5 * u * u);
    }
    return sum * std::numbers::inv_sqrtpi / (std::numbers::sqrt2 * static_cast<double>(sample.size()) * bandwidth);
}

std::vector<double> KdeModel::density(std::span<const double> xs) const {
    std::vector<double> out;
    out.reserve(xs.size());
    for (double x : xs) out.push_back(density(x));
    return out;
}

KdeModel kde_fit(std::span<const double> sample, const BandwidthSelector& selector) {
    if (sample.size() < kMinimumKdeSample) {
        throw InvalidArgument("kde: need at least " + std::to_string(kMinimumKdeSample) + " points, got " +
                              std::to_string(sample.size()));
    }
    for (double v : sample) {
        if (!std::isfinite(v)) throw InvalidArgument("kde: non-finite value");
    }
    double h = selector(sample);
    if (!(h > 0.0) || !std::isfinite(h)) throw DegenerateSample("kde: bandwidth must be positive");
    return KdeModel{std::vector<double>(sample.begin(), sample.end()), h};
}

std::vector<double> hochberg_adjust(std::span<const double> p) {
    const std::size_t n = p.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
    std::vector<double> adjusted(n);
    double running = 1.0;
    for (std::size_t rank = n; rank-- > 0;) {
        double scaled = std::min(1.0, static_cast<double>(n - rank) * p[order[rank]]);
        running = std::min(running, scaled);
        adjusted[order[rank]] = running;
    }
    return adjusted;
}

LocalTestResult local_density_test(const KdeModel& model0, const KdeModel& model1, std::size_t n_grid,
                                   double alpha_star) {
    if (n_grid < 51) throw InvalidArgument("local test: need at least 51 grid points");
    if (!(alpha_star > 0.0 && alpha_star < 1.0)) throw InvalidArgument("local test: alpha* must be in (0,1)");
    LocalTestResult r;
    r.alpha_star = alpha_star;
    r.grid.resize(n_grid);
    for (std::size_t i = 0; i < n_grid; ++i) r.grid[i] = static_cast<double>(i) / static_cast<double>(n_grid - 1);
    const double scale0 = kGaussianRoughness / (static_cast<double>(model0.sample.size()) * model0.bandwidth);
    const double scale1 = kGaussianRoughness / (static_cast<double>(model1.sample.size()) * model1.bandwidth);
    r.deltas.resize(n_grid);
    r.chi_sq.resize(n_grid);
    r.p_raw.resize(n_grid);
    for (std::size_t i = 0; i < n_grid; ++i) {
        double f0 = model0.density(r.grid[i]);
        double f1 = model1.density(r.grid[i]);
        r.deltas[i] = f1 - f0;
        double var = f0 * scale0 + f1 * scale1;
        if (var < kVarianceFloor) {
            r.chi_sq[i] = 0.0;
            r.p_raw[i] = 1.0;
        } else {
            r.chi_sq[i] = r.deltas[i] * r.deltas[i] / var;
            r.p_raw[i] = chi_square1_upper_tail(r.chi_sq[i]);
        }
    }
    r.p_adjusted = hochberg_adjust(r.p_raw);
    return r;
}

SignificantRegionSet extract_regions(const LocalTestResult& result) {
    SignificantRegionSet set;
    const std::size_t n = result.grid.size();
    std::size_t i = 0;
    while (i < n) {
        auto significant = [&](std::size_t k) {
            return result.p_adjusted[k] < result.alpha_star && result.deltas[k] > 0.0;
        };
        if (!significant(i)) {
            ++i;
            continue;
        }
        SignificantRegion region;
        region.lo = result.grid[i];
        region.p_value = result.p_adjusted[i];
        std::size_t j = i;
        while (j < n && significant(j)) {
            region.p_value = std::min(region.p_value, result.p_adjusted[j]);
            ++j;
        }
        region.hi = result.grid[j - 1];
        region.n_points = j - i;
        set.regions.push_back(region);
        i = j;
    }
    return set;
}

OutlierSelection select_outliers(const SignificantRegionSet& regions, std::span<const IndexedValue> post_change,
                                 std::size_t max_outliers) {
    OutlierSelection selection;
    selection.max_outliers = max_outliers;
    std::vector<const SignificantRegion*> ordered;
    for (const auto& region : regions.regions) ordered.push_back(&region);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const auto* a, const auto* b) { return a->p_value < b->p_value; });

    std::vector<IndexedValue> by_time(post_change.begin(), post_change.end());
    std::stable_sort(by_time.begin(), by_time.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
    for (const auto* region : ordered) {
        for (const auto& obs : by_time) {
            if (selection.theta_indices.size() >= max_outliers) return selection;
            if (obs.z >= region->lo && obs.z <= region->hi) selection.theta_indices.push_back(obs.t);
        }
    }
    return selection;
}

double drift_fraction(std::span<const std::int64_t> indices, const ConfidenceStream& stream) {
    if (indices.empty()) throw InvalidArgument("drift fraction of an empty index set is undefined");
    std::size_t drift = 0;
    for (auto t : indices) drift += stream.at(t).is_drift ? 1 : 0;
    return static_cast<double>(drift) / static_cast<double>(indices.size());
}

OutlierSearch find_outliers(std::span<const double> z, std::int64_t k_hat, std::int64_t d, double alpha_star,
                            std::size_t max_outliers, std::size_t n_grid) {
    if (k_hat < 0 || d <= k_hat || d > static_cast<std::int64_t>(z.size())) {
        throw InvalidArgument("find_outliers: need 0 <= k_hat < d <= n");
    }
    auto before = z.subspan(0, static_cast<std::size_t>(k_hat));
    auto after = z.subspan(static_cast<std::size_t>(k_hat), static_cast<std::size_t>(d - k_hat));
    OutlierSearch search;
    search.selection.max_outliers = max_outliers;
    KdeModel f0, f1;
    try {
        f0 = kde_fit(before);
        f1 = kde_fit(after);
    } catch (const InvalidArgument&) {
        return search;
    } catch (const DegenerateSample&) {
        return search;
    }
    search.regions = extract_regions(local_density_test(f0, f1, n_grid, alpha_star));
    std::vector<IndexedValue> post;
    post.reserve(after.size());
    for (std::size_t i = 0; i < after.size(); ++i) {
        post.push_back({k_hat + 1 + static_cast<std::int64_t>(i), after[i]});
    }
    search.selection = select_outliers(search.regions, post, max_outliers);
    return search;
}

void write_regions_json(std::ostream& out, const SignificantRegionSet& regions) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : regions.regions) {
        arr.push_back({{"lo", r.lo}, {"hi", r.hi}, {"p_value", r.p_value}, {"n_points", r.n_points}});
    }
    out << arr.dump(1) << '\n';
}

void write_outliers_json(std::ostream& out, const OutlierSelection& selection, const ConfidenceStream& stream) {
    auto arr = nlohmann::ordered_json::array();
    for (auto t : selection.theta_indices) {
        const auto& obs = stream.at(t);
        arr.push_back({{"t", obs.t}, {"z", obs.z}, {"label", obs.label}});
    }
    out << arr.dump(1) << '\n';
}

}  // namespace driftwatch
