#include <doctest.h>

#include <cmath>

#include "driftwatch/error.hpp"
#include "driftwatch/random.hpp"
#include "driftwatch/two_sample.hpp"
#include "oracles.hpp"

using namespace driftwatch;

namespace {

std::vector<double> uniforms(Engine& e, std::size_t n) {
    std::vector<double> x(n);
    for (auto& v : x) v = draw_uniform(e);
    return x;
}

}  // namespace

TEST_CASE("cvm small cases") {
    std::vector<double> a{1, 2}, b{3, 4};
    CHECK(two_sample_statistic(StatisticKind::CramerVonMises, a, b) == doctest::Approx(0.375).epsilon(1e-15));
    CHECK(two_sample_statistic(StatisticKind::CramerVonMises, a, a) == 0.0);
    std::vector<double> ties0{0.5, 0.5, 0.2}, ties1{0.5, 0.9};
    CHECK(two_sample_statistic(StatisticKind::CramerVonMises, ties0, ties1) ==
          doctest::Approx(oracle::cvm_ecdf(ties0, ties1)).epsilon(1e-12));
}

TEST_CASE("cvm matches ECDF definition with ties") {
    Engine e(7);
    for (int rep = 0; rep < 200; ++rep) {
        auto n = 2 + draw_index(e, 15), m = 2 + draw_index(e, 15);
        std::vector<double> a(n), b(m);
        for (auto& v : a) v = static_cast<double>(draw_index(e, 6));
        for (auto& v : b) v = static_cast<double>(draw_index(e, 6));
        CHECK(two_sample_statistic(StatisticKind::CramerVonMises, a, b) == oracle::cvm_exact(a, b));
        CHECK(std::abs(two_sample_statistic(StatisticKind::CramerVonMises, a, b) - oracle::cvm_ecdf(a, b)) < 1e-12);
    }
}

TEST_CASE("student t statistic") {
    std::vector<double> a{1, 2, 3}, b{4, 5, 6, 7};
    CHECK(two_sample_statistic(StatisticKind::StudentT, a, b) == doctest::Approx(oracle::student_t(a, b)));
    std::vector<double> flat{2, 2, 2};
    CHECK_THROWS_AS(two_sample_statistic(StatisticKind::StudentT, flat, flat), DegenerateSample);
    std::vector<double> one{1};
    CHECK_THROWS_AS(two_sample_statistic(StatisticKind::StudentT, one, b), InvalidArgument);
}

TEST_CASE("closed-form moments agree with simulation") {
    ClosedFormMoments exact;
    MonteCarloMoments simulated(40000, 3);
    for (auto [n0, n1] : {std::pair<std::int64_t, std::int64_t>{10, 10}, {5, 30}, {40, 8}}) {
        for (auto kind : {StatisticKind::CramerVonMises, StatisticKind::StudentT}) {
            auto a = exact.moments(kind, n0, n1);
            auto b = simulated.moments(kind, n0, n1);
            CHECK(b.mean == doctest::Approx(a.mean).epsilon(0.03));
            CHECK(b.sd == doctest::Approx(a.sd).epsilon(0.06));
        }
    }
    // Anderson's mean for N = 4.
    CHECK(exact.moments(StatisticKind::CramerVonMises, 2, 2).mean == doctest::Approx(5.0 / 24.0));
    CHECK_THROWS(exact.moments(StatisticKind::StudentT, 2, 2));
}

TEST_CASE("monte carlo moments are order independent") {
    MonteCarloMoments a(500, 11), b(500, 11);
    auto first = a.moments(StatisticKind::CramerVonMises, 6, 9);
    b.moments(StatisticKind::CramerVonMises, 12, 3);
    auto second = b.moments(StatisticKind::CramerVonMises, 6, 9);
    CHECK(first.mean == second.mean);
    CHECK(first.sd == second.sd);
}

TEST_CASE("tabulated moments") {
    TabulatedMoments t;
    t.set(StatisticKind::CramerVonMises, 3, 4, {1.0, 2.0});
    CHECK(t.moments(StatisticKind::CramerVonMises, 3, 4).sd == 2.0);
    CHECK_THROWS_AS(t.moments(StatisticKind::CramerVonMises, 4, 3), MissingMoments);
}

TEST_CASE("scan_splits equals brute force") {
    ClosedFormMoments moments;
    Engine e(21);
    for (int rep = 0; rep < 40; ++rep) {
        auto z = uniforms(e, 5 + draw_index(e, 60));
        if (rep % 3 == 0) {
            for (auto& v : z) v = std::round(v * 4.0) / 4.0;
        }
        for (std::int64_t stride : {1, 3}) {
            if (static_cast<std::int64_t>(z.size()) < 2 * stride + 2) continue;
            auto fast = scan_splits(StatisticKind::CramerVonMises, z, stride, moments);
            auto slow = oracle::scan(StatisticKind::CramerVonMises, z, stride, moments);
            CHECK(fast.tau == slow.tau);
            CHECK(fast.w_max == slow.w_max);
        }
        auto fast = scan_splits(StatisticKind::StudentT, z, 1, moments, 3);
        auto slow = oracle::scan(StatisticKind::StudentT, z, 1, moments, 3);
        CHECK(fast.tau == slow.tau);
        CHECK(fast.w_max == doctest::Approx(slow.w_max).epsilon(1e-9));
    }
}

TEST_CASE("scan_splits without candidates throws") {
    ClosedFormMoments moments;
    std::vector<double> z{0.1, 0.2, 0.3};
    CHECK_THROWS_AS(scan_splits(StatisticKind::CramerVonMises, z, 1, moments), InvalidArgument);
}

TEST_CASE("evaluation points") {
    auto pts = evaluation_points(25, 200, 20, 20);
    REQUIRE(!pts.empty());
    CHECK(pts.front() == 40);
    CHECK(pts.back() == 200);
    for (auto t : pts) CHECK(t % 20 == 0);
    auto faithful = evaluation_points(5, 10, 1, 1);
    CHECK(faithful == std::vector<std::int64_t>{5, 6, 7, 8, 9, 10});
}
