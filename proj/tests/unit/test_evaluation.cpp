#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "driftwatch/error.hpp"
#include "driftwatch/evaluation.hpp"

using namespace driftwatch;

namespace {

double loss_at(ScenarioName name, std::int64_t batch, const LossParams& params = {}) {
    auto s = make_scenario(name);
    return loss(1000, batch * 20, s.schedule, 20, params);
}

}  // namespace

TEST_CASE("loss identities") {
    auto s = make_scenario(ScenarioName::SuddenFull);
    CHECK(loss(1000, 1, s.schedule, 20) == -1000.0);
    CHECK(loss(1000, 1000, s.schedule, 20) == -1000.0);
    CHECK(loss(1000, 1001, s.schedule, 20) == 0.0);
    CHECK(loss(1000, 1020, s.schedule, 20) == 0.0);
    CHECK(loss(1000, std::nullopt, s.schedule, 20) == -250.0);
    CHECK(loss_at(ScenarioName::SuddenFull, 53) == doctest::Approx(-125.0).epsilon(1e-12));
    CHECK(loss_at(ScenarioName::SuddenQuarter, 52) == doctest::Approx(-250.0 + 250.0 / std::pow(1.25, 0.5)));
    CHECK_THROWS_AS(loss(std::nullopt, 5, s.schedule, 20), InvalidArgument);
    CHECK_THROWS_AS(loss(1000, 1001, s.schedule, 20, {-100, -250}), InvalidArgument);
}

TEST_CASE("loss decreases with delay and scales linearly") {
    for (auto name : builtin_scenarios()) {
        double previous = 0.0;
        for (std::int64_t b = 52; b <= 100; ++b) {
            double l = loss_at(name, b);
            CHECK(l < previous);
            CHECK(l >= -250.0);
            previous = l;
        }
        for (std::int64_t b : {10, 51, 57, 80}) {
            CHECK(loss_at(name, b, {-2000, -500}) == doctest::Approx(2.0 * loss_at(name, b)));
        }
    }
}

TEST_CASE("naive detectors") {
    std::vector<double> z;
    for (int j = 0; j < 6; ++j) {
        for (int i = 0; i < 10; ++i) z.push_back(j < 4 ? 0.8 + 0.01 * (i % 3) : 0.2 + 0.01 * (i % 3));
    }
    CHECK(naive_pairwise(z, 10, 0.05) == 4);
    CHECK(naive_splits(z, 10, 0.05) == 4);
    std::vector<double> flat(40, 0.5);
    CHECK(naive_pairwise(flat, 10, 0.05) == std::nullopt);
    CHECK(naive_splits(flat, 10, 0.05) == std::nullopt);
    CHECK_THROWS_AS(naive_pairwise(std::vector<double>(15, 0.5), 10, 0.05), InvalidArgument);
}

TEST_CASE("peeking simulation bounds and determinism") {
    auto a = peeking_simulation(0.5, 100, 20, 200, 1);
    auto b = peeking_simulation(0.5, 100, 20, 200, 1);
    CHECK(a.pr_v_ge_1 == b.pr_v_ge_1);
    CHECK(a.e_v == b.e_v);
    CHECK(a.pr_v_ge_1 >= 0.0);
    CHECK(a.pr_v_ge_1 <= 1.0);
    CHECK(a.e_v <= 81.0);
    CHECK_THROWS_AS(peeking_simulation(0.05, 10, 10), InvalidArgument);
}

TEST_CASE("aggregation is order independent") {
    std::vector<RunRecord> records(50);
    for (std::size_t i = 0; i < records.size(); ++i) {
        auto& r = records[i];
        r.scenario = "s";
        r.detector = "d";
        r.false_alarm = i % 17 == 0;
        r.missed = i % 23 == 0;
        if (!r.false_alarm && !r.missed) r.delay = static_cast<std::int64_t>(i % 5);
        r.loss = -static_cast<double>(i);
        if (i % 2) r.theta_all = 0.01 * static_cast<double>(i);
    }
    auto a = aggregate(records);
    std::mt19937 g(4);
    std::shuffle(records.begin(), records.end(), g);
    auto b = aggregate(records);
    CHECK(a.false_alarm_prob == b.false_alarm_prob);
    CHECK(a.false_alarm_prob == doctest::Approx(3.0 / 50.0));
    CHECK(a.delays == b.delays);
    CHECK(a.losses == b.losses);
    CHECK(a.theta_all == b.theta_all);
    std::ostringstream ja, jb;
    write_report_json(ja, a);
    write_report_json(jb, b);
    CHECK(ja.str() == jb.str());
}

TEST_CASE("experiment reports are identical across worker counts") {
    DetectorSpec det;
    det.id = "pairwise";
    det.type = DetectorType::NaivePairwise;
    ExperimentSetup setup;
    setup.scenario = make_scenario(ScenarioName::SuddenHalf);
    setup.repetitions = 12;
    setup.master_seed = 77;
    setup.batch_size = 10;
    setup.jobs = 1;
    auto one = run_experiment(det, setup);
    setup.jobs = 4;
    auto four = run_experiment(det, setup);
    std::ostringstream a, b;
    write_report_json(a, one.report);
    write_report_json(b, four.report);
    CHECK(a.str() == b.str());
}

TEST_CASE("cpm experiments need a matching table") {
    DetectorSpec det;
    det.id = "cpm";
    ExperimentSetup setup;
    setup.scenario = make_scenario(ScenarioName::SuddenFull);
    setup.repetitions = 2;
    try {
        run_experiment(det, setup);
        FAIL("ran without thresholds");
    } catch (const MissingThresholds& e) {
        CHECK(std::string(e.what()).find("driftwatch calibrate") != std::string::npos);
    }
}

TEST_CASE("gated detections never precede ungated ones") {
    ExperimentSetup setup;
    setup.scenario = make_scenario(ScenarioName::SuddenHalf, 20, 40);
    setup.batch_size = 10;
    setup.repetitions = 15;
    setup.master_seed = 3;
    DetectorSpec plain;
    plain.id = "cvm";
    DetectorSpec gated = plain;
    gated.id = "cvm_gated";
    gated.outlier_gated = true;
    auto table = std::make_shared<const ThresholdTable>(calibrate_thresholds(calibration_for(plain, 10, 400, 600, 1)));
    auto a = run_experiment(plain, setup, table);
    auto b = run_experiment(gated, setup, table);
    for (std::size_t r = 0; r < a.records.size(); ++r) {
        const auto& da = a.records[r].outcome.d;
        const auto& db = b.records[r].outcome.d;
        if (db) {
            REQUIRE(da);
            CHECK(*db >= *da);
        }
        if (a.records[r].delay && b.records[r].delay) CHECK(*b.records[r].delay >= *a.records[r].delay);
    }
    CHECK(b.report.missed_prob >= a.report.missed_prob);
}
