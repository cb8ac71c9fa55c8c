#include <doctest.h>

#include <sstream>

#include "driftwatch/density.hpp"
#include "driftwatch/error.hpp"
#include "driftwatch/random.hpp"
#include "oracles.hpp"

using namespace driftwatch;

namespace {

std::vector<double> betas(Engine& e, std::size_t n, double a, double b) {
    std::vector<double> x(n);
    for (auto& v : x) v = draw_beta(e, a, b);
    return x;
}

}  // namespace

TEST_CASE("silverman bandwidth") {
    std::vector<double> x{1, 2, 3, 4, 5};
    // sd = 1.5811, IQR / 1.34 = 1.4925 -> 0.9 * 1.4925 * 5^-0.2
    CHECK(silverman_bandwidth(x) == doctest::Approx(0.9 * (2.0 / 1.34) * std::pow(5.0, -0.2)));
    std::vector<double> spiky{0, 0, 0, 0, 0, 0, 1};
    CHECK(silverman_bandwidth(spiky) > 0.0);
    std::vector<double> flat{3, 3, 3, 3, 3};
    CHECK_THROWS_AS(silverman_bandwidth(flat), DegenerateSample);
}

TEST_CASE("kde integrates to one") {
    Engine e(4);
    auto model = kde_fit(betas(e, 200, 2, 5));
    double sum = 0.0;
    for (int i = -2000; i <= 3000; ++i) sum += model.density(i / 1000.0) * 0.001;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-3));
    std::vector<double> few{0.1, 0.2};
    CHECK_THROWS_AS(kde_fit(few), InvalidArgument);
}

TEST_CASE("hochberg matches the step-up definition") {
    Engine e(12);
    for (int rep = 0; rep < 300; ++rep) {
        std::vector<double> p(1 + draw_index(e, 10));
        for (auto& v : p) v = rep % 2 ? draw_uniform(e) : static_cast<double>(draw_index(e, 5)) / 20.0;
        CHECK(hochberg_adjust(p) == oracle::hochberg(p));
    }
    std::vector<double> p{0.01, 0.04, 0.03};
    auto adj = hochberg_adjust(p);
    CHECK(adj[0] == doctest::Approx(0.03));
    CHECK(adj[1] == doctest::Approx(0.04));
    CHECK(adj[2] == doctest::Approx(0.04));
}

TEST_CASE("regions sit where the post-change density is higher") {
    Engine e(5);
    auto f0 = kde_fit(betas(e, 400, 8, 2));
    auto f1 = kde_fit(betas(e, 400, 2, 2));
    auto result = local_density_test(f0, f1);
    auto regions = extract_regions(result);
    REQUIRE(!regions.regions.empty());
    for (const auto& r : regions.regions) {
        CHECK(r.lo <= r.hi);
        CHECK(r.hi < 0.8);
        CHECK(r.p_value < 0.05);
    }
    std::ostringstream json;
    write_regions_json(json, regions);
    CHECK(json.str().find("\"n_points\"") != std::string::npos);
    CHECK_THROWS_AS(local_density_test(f0, f1, 10), InvalidArgument);
}

TEST_CASE("outlier selection order and cap") {
    SignificantRegionSet set;
    set.regions.push_back({0.0, 0.2, 0.01, 5});
    set.regions.push_back({0.5, 0.6, 0.001, 5});
    std::vector<IndexedValue> post{{11, 0.1}, {12, 0.55}, {13, 0.9}, {14, 0.15}, {15, 0.52}};
    auto sel = select_outliers(set, post, 3);
    CHECK(sel.theta_indices == std::vector<std::int64_t>{12, 15, 11});
    auto none = select_outliers(SignificantRegionSet{}, post);
    CHECK(none.theta_indices.empty());
}

TEST_CASE("drift fraction") {
    std::vector<Observation> obs;
    for (std::int64_t t = 1; t <= 6; ++t) obs.push_back({t, 0.5, t > 4, ""});
    ConfidenceStream s(obs, 2, 4);
    std::vector<std::int64_t> idx{3, 5, 6};
    CHECK(drift_fraction(idx, s) == doctest::Approx(2.0 / 3.0));
    CHECK_THROWS_AS(drift_fraction({}, s), InvalidArgument);
}

TEST_CASE("find_outliers tolerates tiny windows") {
    std::vector<double> z{0.9, 0.8, 0.85, 0.95, 0.9, 0.1, 0.2};
    auto s = find_outliers(z, 5, 7, 0.05);
    CHECK(s.selection.theta_indices.empty());
    CHECK_THROWS_AS(find_outliers(z, 5, 9, 0.05), InvalidArgument);
}
