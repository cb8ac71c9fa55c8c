#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "driftwatch/cpm.hpp"
#include "driftwatch/error.hpp"
#include "driftwatch/random.hpp"
#include "driftwatch/stats.hpp"
#include "driftwatch/thresholds.hpp"
#include "oracles.hpp"

using namespace driftwatch;

namespace {

CalibrationSpec small_spec(double alpha = 0.05, AlphaMode mode = AlphaMode::HorizonTotal) {
    CalibrationSpec s;
    s.alpha = alpha;
    s.alpha_mode = mode;
    s.t0 = 20;
    s.horizon = 120;
    s.evaluation_stride = 10;
    s.candidate_stride = 5;
    s.num_streams = 400;
    s.seed = 5;
    return s;
}

}  // namespace

TEST_CASE("type-7 quantile") {
    Engine e(1);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> x(1 + draw_index(e, 30));
        for (auto& v : x) v = draw_normal(e);
        for (double p : {0.0, 0.1, 0.5, 0.95, 1.0}) CHECK(sample_quantile(x, p) == doctest::Approx(oracle::quantile(x, p)));
    }
}

TEST_CASE("per point alpha") {
    CHECK(per_point_alpha(AlphaMode::PerEvaluationHazard, 0.05, 10) == 0.05);
    double a = per_point_alpha(AlphaMode::HorizonTotal, 0.05, 10);
    CHECK(1.0 - std::pow(1.0 - a, 10.0) == doctest::Approx(0.05));
}

TEST_CASE("calibration is deterministic across job counts") {
    auto spec = small_spec();
    auto a = calibrate_thresholds(spec, 1);
    auto b = calibrate_thresholds(spec, 3);
    CHECK(a.values() == b.values());
    std::ostringstream ja, jb;
    write_threshold_json(ja, a);
    write_threshold_json(jb, b);
    CHECK(ja.str() == jb.str());
}

TEST_CASE("thresholds are nondecreasing and antitone in alpha") {
    for (auto kind : {StatisticKind::CramerVonMises, StatisticKind::StudentT}) {
        auto loose = small_spec(0.10);
        auto tight = small_spec(0.01);
        loose.kind = tight.kind = kind;
        auto hl = calibrate_thresholds(loose).values();
        auto ht = calibrate_thresholds(tight).values();
        REQUIRE(hl.size() == ht.size());
        for (std::size_t i = 0; i < hl.size(); ++i) {
            if (i > 0) CHECK(hl[i].second >= hl[i - 1].second);
            CHECK(ht[i].second >= hl[i].second);
        }
    }
}

TEST_CASE("threshold json round trip and validation") {
    auto table = calibrate_thresholds(small_spec());
    std::stringstream buf;
    write_threshold_json(buf, table);
    auto back = read_threshold_json(buf);
    CHECK(back.values() == table.values());
    CHECK(back.spec().seed == table.spec().seed);
    CHECK(threshold_cache_name(back.spec()) == threshold_cache_name(table.spec()));

    CHECK_THROWS_AS(ThresholdTable(small_spec(), {{40, 2.0}, {50, 1.0}}), InvalidArgument);
    std::istringstream junk("{\"values\": 3}");
    CHECK_THROWS_AS(read_threshold_json(junk), FormatError);
    CHECK_THROWS_AS(load_threshold_table(std::filesystem::temp_directory_path() / "dw-no-such-table.json"),
                    MissingThresholds);
}

TEST_CASE("too few streams exhausts calibration") {
    auto spec = small_spec(0.5, AlphaMode::PerEvaluationHazard);
    spec.num_streams = 40;
    CHECK_THROWS_AS(calibrate_thresholds(spec), CalibrationError);
}

TEST_CASE("cpm detector lifecycle") {
    auto table = std::make_shared<const ThresholdTable>(calibrate_thresholds(small_spec()));
    CpmDetector det(table);
    for (int i = 0; i < 19; ++i) CHECK(det.step(0.8) == CpmStatus::Warming);

    // An obvious shift is caught at the next evaluation point after it lands.
    CpmDetector shift(table);
    Engine e(3);
    std::vector<double> z;
    for (int i = 0; i < 60; ++i) z.push_back(0.8 + 0.1 * draw_uniform(e));
    for (int i = 0; i < 60; ++i) z.push_back(0.1 * draw_uniform(e));
    auto out = shift.run(z);
    REQUIRE(out.detected());
    CHECK(*out.d == 70);
    CHECK(*out.k_hat == 60);
    CHECK_THROWS_AS(shift.step(0.5), InvalidArgument);

    CpmDetector bad(table);
    CHECK_THROWS_AS(bad.step(1.5), InvalidArgument);
    CHECK_THROWS_AS(bad.step(std::nan("")), InvalidArgument);
}

TEST_CASE("cpm gate withholds detection") {
    auto table = std::make_shared<const ThresholdTable>(calibrate_thresholds(small_spec()));
    std::vector<double> z;
    for (int i = 0; i < 60; ++i) z.push_back(0.9);
    for (int i = 0; i < 60; ++i) z.push_back(0.1 + 0.001 * i);
    for (int i = 0; i < 60; ++i) z[static_cast<std::size_t>(i)] -= 0.001 * i;
    int calls = 0;
    CpmDetector det(table);
    auto out = det.run(z, [&](std::span<const double> seen, std::int64_t) {
        ++calls;
        return seen.size() >= 90;
    });
    REQUIRE(out.detected());
    CHECK(*out.d == 90);
    CHECK(calls >= 2);
}

TEST_CASE("cpm refuses to run past the calibrated horizon") {
    auto table = std::make_shared<const ThresholdTable>(calibrate_thresholds(small_spec()));
    CpmDetector det(table);
    Engine e(8);
    for (int i = 0; i < 120 && det.status() != CpmStatus::Detected; ++i) det.step(draw_uniform(e));
    if (det.status() != CpmStatus::Detected) CHECK_THROWS_AS(det.step(0.5), InvalidArgument);
}
