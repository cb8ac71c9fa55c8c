#include "driftwatch/two_sample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "driftwatch/error.hpp"
#include "driftwatch/random.hpp"

namespace driftwatch {

namespace {

using Wide = __int128;

// T = sum_g w_g (c_g N - e_g n)^2 / (N^2 n m); both the direct statistic and
// the split scan produce the same integer numerator, so they agree bit for bit.
double cvm_from_numerator(Wide numerator, std::int64_t n, std::int64_t m) {
    double total = static_cast<double>(n + m);
    return static_cast<double>(numerator) / (total * total * static_cast<double>(n) * static_cast<double>(m));
}

void require_finite(std::span<const double> values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) throw InvalidArgument(std::string(what) + ": non-finite value");
    }
}

double student_t_from_moments(double mean0, double m2_0, std::int64_t n0, double mean1, double m2_1,
                              std::int64_t n1) {
    double dof = static_cast<double>(n0 + n1 - 2);
    double pooled = (m2_0 + m2_1) / dof;
    if (!(pooled > 0.0)) throw DegenerateSample("student t: zero pooled variance");
    double se = std::sqrt(pooled * (1.0 / static_cast<double>(n0) + 1.0 / static_cast<double>(n1)));
    return std::abs(mean0 - mean1) / se;
}

void mean_and_m2(std::span<const double> x, double& mean, double& m2) {
    mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    m2 = 0.0;
    for (double v : x) m2 += (v - mean) * (v - mean);
}

class Fenwick {
public:
    explicit Fenwick(std::size_t n) : tree_(n + 1, 0) {}
    void add(std::size_t i, std::int64_t delta) {
        for (++i; i < tree_.size(); i += i & (~i + 1)) tree_[i] += delta;
    }
    // Sum over [0, i].
    std::int64_t prefix(std::size_t i) const {
        std::int64_t s = 0;
        for (++i; i > 0; i -= i & (~i + 1)) s += tree_[i];
        return s;
    }

private:
    std::vector<std::int64_t> tree_;
};

template <class Visit>
void for_each_candidate(std::int64_t t, std::int64_t stride, int minimum_segment, Visit&& visit) {
    std::int64_t first = ((minimum_segment + stride - 1) / stride) * stride;
    for (std::int64_t k = first; k <= t - minimum_segment; k += stride) visit(k);
}

SplitScan scan_cvm(std::span<const double> z, std::int64_t stride, const MomentSource& moments,
                   int minimum_segment) {
    const auto t = static_cast<std::int64_t>(z.size());
    std::vector<std::int64_t> order(z.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) { return z[a] < z[b]; });

    // Tie groups in ascending value order: size w_g, cumulative count e_g.
    std::vector<std::int64_t> group_of(z.size());
    std::vector<std::int64_t> weight;
    std::vector<std::int64_t> cumulative;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        if (pos == 0 || z[order[pos]] != z[order[pos - 1]]) {
            weight.push_back(0);
            cumulative.push_back(0);
        }
        weight.back() += 1;
        cumulative.back() = static_cast<std::int64_t>(pos) + 1;
        group_of[order[pos]] = static_cast<std::int64_t>(weight.size()) - 1;
    }
    const std::size_t groups = weight.size();
    std::vector<std::int64_t> suffix_w(groups + 1, 0);
    std::vector<std::int64_t> suffix_we(groups + 1, 0);
    std::int64_t s0 = 0;
    for (std::size_t g = groups; g-- > 0;) {
        suffix_w[g] = suffix_w[g + 1] + weight[g];
        suffix_we[g] = suffix_we[g + 1] + weight[g] * cumulative[g];
        s0 += weight[g] * cumulative[g] * cumulative[g];
    }

    // Adding "before" points one at a time raises c_g by one for every group
    // at or above the point's group; S1 = sum w c^2 and S2 = sum w e c are
    // updated from two Fenwick trees in O(log G).
    Fenwick added_count(groups);
    Fenwick added_weight(groups);
    std::int64_t added_weight_total = 0;
    std::int64_t s1 = 0;
    std::int64_t s2 = 0;

    SplitScan best{0, -std::numeric_limits<double>::infinity()};
    bool found = false;
    std::int64_t next_candidate = ((minimum_segment + stride - 1) / stride) * stride;
    for (std::int64_t k = 1; k <= t - minimum_segment; ++k) {
        auto r = static_cast<std::size_t>(group_of[static_cast<std::size_t>(k - 1)]);
        std::int64_t at_or_below = added_count.prefix(r);
        std::int64_t above = added_weight_total - added_weight.prefix(r);
        std::int64_t sum_wc = at_or_below * suffix_w[r] + above;
        s1 += 2 * sum_wc + suffix_w[r];
        s2 += suffix_we[r];
        added_count.add(r, 1);
        added_weight.add(r, suffix_w[r]);
        added_weight_total += suffix_w[r];

        if (k != next_candidate) continue;
        next_candidate += stride;
        std::int64_t m = t - k;
        Wide numerator = Wide(t) * t * s1 - Wide(2) * t * k * s2 + Wide(k) * k * s0;
        double raw = cvm_from_numerator(numerator, k, m);
        double w = normalize_statistic(raw, moments.moments(StatisticKind::CramerVonMises, k, m));
        if (!found || w > best.w_max) {
            best = {k, w};
            found = true;
        }
    }
    if (!found) throw InvalidArgument("scan_splits: no valid split candidate");
    return best;
}

SplitScan scan_student_t(std::span<const double> z, std::int64_t stride, const MomentSource& moments,
                         int minimum_segment) {
    const auto t = static_cast<std::int64_t>(z.size());
    const auto n = z.size();
    // Welford running moments from the front and from the back; exact zeros
    // for constant runs.
    std::vector<double> pre_mean(n + 1, 0.0), pre_m2(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double count = static_cast<double>(i + 1);
        double delta = z[i] - pre_mean[i];
        pre_mean[i + 1] = pre_mean[i] + delta / count;
        pre_m2[i + 1] = pre_m2[i] + delta * (z[i] - pre_mean[i + 1]);
    }
    std::vector<double> suf_mean(n + 1, 0.0), suf_m2(n + 1, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double count = static_cast<double>(n - i);
        double delta = z[i] - suf_mean[i + 1];
        suf_mean[i] = suf_mean[i + 1] + delta / count;
        suf_m2[i] = suf_m2[i + 1] + delta * (z[i] - suf_mean[i]);
    }

    SplitScan best{0, -std::numeric_limits<double>::infinity()};
    bool found = false;
    for_each_candidate(t, stride, minimum_segment, [&](std::int64_t k) {
        auto ku = static_cast<std::size_t>(k);
        double raw = student_t_from_moments(pre_mean[ku], pre_m2[ku], k, suf_mean[ku], suf_m2[ku], t - k);
        double w = normalize_statistic(raw, moments.moments(StatisticKind::StudentT, k, t - k));
        if (!found || w > best.w_max) {
            best = {k, w};
            found = true;
        }
    });
    if (!found) throw InvalidArgument("scan_splits: no valid split candidate");
    return best;
}

}  // namespace

std::string_view to_string(StatisticKind kind) {
    switch (kind) {
        case StatisticKind::StudentT: return "student_t";
        case StatisticKind::CramerVonMises: return "cvm";
    }
    return "unknown";
}

StatisticKind parse_statistic_kind(std::string_view name) {
    if (name == "student_t" || name == "StudentT" || name == "t") return StatisticKind::StudentT;
    if (name == "cvm" || name == "CramerVonMises" || name == "cramer_von_mises") {
        return StatisticKind::CramerVonMises;
    }
    throw InvalidArgument("unknown statistic kind '" + std::string(name) + "'");
}

double two_sample_statistic(StatisticKind kind, std::span<const double> sample0, std::span<const double> sample1,
                            int minimum_segment) {
    if (minimum_segment < 1) throw InvalidArgument("two_sample_statistic: minimum segment must be >= 1");
    if (static_cast<std::int64_t>(sample0.size()) < minimum_segment ||
        static_cast<std::int64_t>(sample1.size()) < minimum_segment) {
        throw InvalidArgument("two_sample_statistic: sample shorter than minimum segment");
    }
    require_finite(sample0, "two_sample_statistic");
    require_finite(sample1, "two_sample_statistic");
    const auto n = static_cast<std::int64_t>(sample0.size());
    const auto m = static_cast<std::int64_t>(sample1.size());

    if (kind == StatisticKind::StudentT) {
        if (n + m < 3) throw InvalidArgument("student t: need at least three observations");
        double mean0, m2_0, mean1, m2_1;
        mean_and_m2(sample0, mean0, m2_0);
        mean_and_m2(sample1, mean1, m2_1);
        return student_t_from_moments(mean0, m2_0, n, mean1, m2_1, m);
    }

    std::vector<std::pair<double, bool>> pooled;
    pooled.reserve(static_cast<std::size_t>(n + m));
    for (double v : sample0) pooled.emplace_back(v, true);
    for (double v : sample1) pooled.emplace_back(v, false);
    std::sort(pooled.begin(), pooled.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    const std::int64_t total = n + m;
    Wide numerator = 0;
    std::int64_t c = 0;
    std::size_t i = 0;
    while (i < pooled.size()) {
        std::size_t j = i;
        while (j < pooled.size() && pooled[j].first == pooled[i].first) {
            if (pooled[j].second) ++c;
            ++j;
        }
        auto e = static_cast<std::int64_t>(j);
        Wide diff = Wide(c) * total - Wide(e) * n;
        numerator += Wide(static_cast<std::int64_t>(j - i)) * diff * diff;
        i = j;
    }
    return cvm_from_numerator(numerator, n, m);
}

NullMoments ClosedFormMoments::moments(StatisticKind kind, std::int64_t n0, std::int64_t n1) const {
    if (n0 < 1 || n1 < 1) throw MissingMoments("closed-form moments need positive sample sizes");
    const double n = static_cast<double>(n0);
    const double m = static_cast<double>(n1);
    const double total = n + m;
    if (kind == StatisticKind::CramerVonMises) {
        double mean = (total + 1.0) / (6.0 * total);
        double var = (total + 1.0) / (45.0 * total * total) * (4.0 * n * m * total - 3.0 * (n * n + m * m) - 2.0 * n * m) /
                     (4.0 * n * m);
        if (!(var > 0.0)) {
            throw MissingMoments("closed-form CvM variance is zero at n0=" + std::to_string(n0) +
                                 ", n1=" + std::to_string(n1));
        }
        return {mean, std::sqrt(var)};
    }
    const double nu = total - 2.0;
    if (nu <= 2.0) {
        throw MissingMoments("closed-form |T| moments need n0 + n1 >= 5; got " + std::to_string(n0 + n1));
    }
    double mean_abs = std::sqrt(nu / std::numbers::pi) * std::exp(std::lgamma((nu - 1.0) / 2.0) - std::lgamma(nu / 2.0));
    double second = nu / (nu - 2.0);
    return {mean_abs, std::sqrt(second - mean_abs * mean_abs)};
}

MonteCarloMoments::MonteCarloMoments(std::int64_t draws, std::uint64_t seed) : draws_(draws), seed_(seed) {
    if (draws_ < 2) throw InvalidArgument("monte-carlo moments need at least two draws");
}

NullMoments MonteCarloMoments::moments(StatisticKind kind, std::int64_t n0, std::int64_t n1) const {
    if (n0 < 1 || n1 < 1) throw MissingMoments("monte-carlo moments need positive sample sizes");
    auto key = std::make_tuple(static_cast<int>(kind), n0, n1);
    {
        std::lock_guard lock(mutex_);
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    std::uint64_t index = (static_cast<std::uint64_t>(kind) << 62) ^ (static_cast<std::uint64_t>(n0) << 31) ^
                          static_cast<std::uint64_t>(n1);
    Engine engine(derive_seed(seed_, seed_purpose::moments, index));
    std::vector<double> a(static_cast<std::size_t>(n0)), b(static_cast<std::size_t>(n1));
    double mean = 0.0, m2 = 0.0;
    for (std::int64_t draw = 0; draw < draws_; ++draw) {
        for (auto& v : a) v = kind == StatisticKind::CramerVonMises ? draw_uniform(engine) : draw_normal(engine);
        for (auto& v : b) v = kind == StatisticKind::CramerVonMises ? draw_uniform(engine) : draw_normal(engine);
        double x = two_sample_statistic(kind, a, b, 1);
        double delta = x - mean;
        mean += delta / static_cast<double>(draw + 1);
        m2 += delta * (x - mean);
    }
    NullMoments result{mean, std::sqrt(m2 / static_cast<double>(draws_ - 1))};
    if (!(result.sd > 0.0)) throw MissingMoments("monte-carlo moments: zero null variance");
    std::lock_guard lock(mutex_);
    cache_.emplace(key, result);
    return result;
}

void TabulatedMoments::set(StatisticKind kind, std::int64_t n0, std::int64_t n1, NullMoments m) {
    table_[std::make_tuple(static_cast<int>(kind), n0, n1)] = m;
}

NullMoments TabulatedMoments::moments(StatisticKind kind, std::int64_t n0, std::int64_t n1) const {
    auto it = table_.find(std::make_tuple(static_cast<int>(kind), n0, n1));
    if (it == table_.end()) {
        throw MissingMoments("no null moments for " + std::string(to_string(kind)) + " at n0=" + std::to_string(n0) +
                             ", n1=" + std::to_string(n1) + "; run calibration or use a closed-form source");
    }
    return it->second;
}

std::shared_ptr<const MomentSource> make_moment_source(std::string_view name, std::uint64_t seed,
                                                       std::int64_t draws) {
    if (name == "closed_form") return std::make_shared<ClosedFormMoments>();
    if (name == "monte_carlo") return std::make_shared<MonteCarloMoments>(draws, seed);
    throw InvalidArgument("unknown moment source '" + std::string(name) + "'");
}

double normalize_statistic(StatisticKind kind, double raw, std::int64_t n0, std::int64_t n1,
                           const MomentSource& moments) {
    NullMoments m = moments.moments(kind, n0, n1);
    if (!(m.sd > 0.0)) throw MissingMoments("null standard deviation must be positive");
    return normalize_statistic(raw, m);
}

SplitScan scan_splits(StatisticKind kind, std::span<const double> z, std::int64_t candidate_stride,
                      const MomentSource& moments, int minimum_segment) {
    if (candidate_stride < 1) throw InvalidArgument("scan_splits: candidate stride must be >= 1");
    if (minimum_segment < 1) throw InvalidArgument("scan_splits: minimum segment must be >= 1");
    if (static_cast<std::int64_t>(z.size()) < 2 * minimum_segment) {
        throw InvalidArgument("scan_splits: sequence shorter than two minimum segments");
    }
    require_finite(z, "scan_splits");
    return kind == StatisticKind::CramerVonMises ? scan_cvm(z, candidate_stride, moments, minimum_segment)
                                                 : scan_student_t(z, candidate_stride, moments, minimum_segment);
}

std::vector<std::int64_t> evaluation_points(std::int64_t t0, std::int64_t horizon, std::int64_t evaluation_stride,
                                            std::int64_t candidate_stride, int minimum_segment) {
    if (evaluation_stride < 1 || candidate_stride < 1) throw InvalidArgument("strides must be >= 1");
    if (t0 < 1) throw InvalidArgument("t0 must be >= 1");
    std::int64_t first_candidate = ((minimum_segment + candidate_stride - 1) / candidate_stride) * candidate_stride;
    std::int64_t start = std::max<std::int64_t>({t0, 2 * minimum_segment, first_candidate + minimum_segment});
    std::vector<std::int64_t> points;
    std::int64_t t = ((start + evaluation_stride - 1) / evaluation_stride) * evaluation_stride;
    for (; t <= horizon; t += evaluation_stride) points.push_back(t);
    return points;
}

}  // namespace driftwatch
