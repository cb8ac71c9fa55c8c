#include <doctest.h>

#include <sstream>

#include "driftwatch/error.hpp"
#include "driftwatch/scenarios.hpp"

using namespace driftwatch;

TEST_CASE("schedule spot checks") {
    CHECK(schedule(ScenarioName::SuddenQuarter, 51) == 0.25);
    CHECK(schedule(ScenarioName::SuddenHalf, 100) == 0.5);
    CHECK(schedule(ScenarioName::SuddenFull, 51) == 1.0);
    CHECK(schedule(ScenarioName::SuddenHalfReturn, 65) == 0.5);
    CHECK(schedule(ScenarioName::SuddenHalfReturn, 66) == 0.0);
    CHECK(schedule(ScenarioName::SuddenFullReturn, 65) == 1.0);
    CHECK(schedule(ScenarioName::SuddenFullReturn, 66) == 0.0);
    CHECK(schedule(ScenarioName::GradualToHalf, 51) == 0.05);
    CHECK(schedule(ScenarioName::GradualToHalf, 55) == 0.25);
    CHECK(schedule(ScenarioName::GradualToHalf, 60) == 0.5);
    CHECK(schedule(ScenarioName::GradualToHalf, 61) == 0.5);
    CHECK(schedule(ScenarioName::GradualToFull, 60) == 0.5);
    CHECK(schedule(ScenarioName::GradualToFull, 70) == 1.0);
    CHECK(schedule(ScenarioName::GradualToFull, 71) == 1.0);
    CHECK(schedule(ScenarioName::GradualLongDelay, 51) == 0.05);
    CHECK(schedule(ScenarioName::GradualLongDelay, 52) == 0.05);
    CHECK(schedule(ScenarioName::GradualLongDelay, 53) == 0.05);
    CHECK(schedule(ScenarioName::GradualLongDelay, 54) == 0.1);
    CHECK(schedule(ScenarioName::GradualLongDelay, 56) == 0.1);
    CHECK(schedule(ScenarioName::GradualLongDelay, 57) == 0.15);
    CHECK(schedule(ScenarioName::GradualLongDelay, 100) == 0.85);
    for (auto name : builtin_scenarios()) {
        for (std::int64_t j = 1; j <= 50; ++j) CHECK(schedule(name, j) == 0.0);
    }
    CHECK_THROWS_AS(schedule(ScenarioName::SuddenFull, 0), InvalidArgument);
    CHECK_THROWS_AS(schedule(ScenarioName::SuddenFull, 101), InvalidArgument);
}

TEST_CASE("scenario names") {
    for (auto name : builtin_scenarios()) CHECK(parse_scenario_name(to_string(name)) == name);
    CHECK(parse_scenario_name("gradual_half_return") == ScenarioName::SuddenHalfReturn);
    CHECK_THROWS_AS(parse_scenario_name("sideways"), InvalidArgument);
}

TEST_CASE("custom scenarios") {
    std::istringstream ok(R"({"change_batch": 2, "total_batches": 4, "schedule": [0, 0, 0.5, 1]})");
    auto s = read_scenario_json(ok, "mine");
    CHECK(s.display_name() == "mine");
    CHECK(s.p(4) == 1.0);
    std::istringstream early(R"({"change_batch": 2, "schedule": [0, 0.1, 0.5, 1]})");
    CHECK_THROWS_AS(read_scenario_json(early), InvalidArgument);
    std::istringstream big(R"({"change_batch": 1, "schedule": [0, 1.5]})");
    CHECK_THROWS_AS(read_scenario_json(big), InvalidArgument);
    std::istringstream broken("{");
    CHECK_THROWS_AS(read_scenario_json(broken), FormatError);
}

TEST_CASE("drift counts round half up") {
    CHECK(drift_count(20, 0.25) == 5);
    CHECK(drift_count(10, 0.25) == 3);
    CHECK(drift_count(20, 0.35) == 7);
    CHECK(drift_count(20, 0.0) == 0);
    CHECK(drift_count(20, 1.0) == 20);
}

TEST_CASE("synthesized streams follow the schedule exactly") {
    auto scenario = make_scenario(ScenarioName::GradualToFull);
    auto stream = synthesize_stream(scenario, BetaSource{}, 20, 99);
    CHECK(stream.size() == 2000);
    CHECK(stream.changepoint() == 1000);
    for (std::int64_t j = 1; j <= 100; ++j) {
        std::int64_t drift = 0;
        for (const auto& obs : batch_slice(stream, {j})) drift += obs.is_drift ? 1 : 0;
        CHECK(drift == drift_count(20, scenario.p(j)));
    }
    auto again = synthesize_stream(scenario, BetaSource{}, 20, 99);
    CHECK(again.values() == stream.values());
    auto other = synthesize_stream(scenario, BetaSource{}, 20, 100);
    CHECK(other.values() != stream.values());
}

TEST_CASE("pool sources") {
    std::istringstream csv("z,label,pool\n0.9,1,base\n0.95,2,base\n0.3,7,drift\n");
    auto pool = read_pool_csv(csv);
    CHECK(pool.base.size() == 2);
    CHECK(pool.drift.size() == 1);
    auto stream = synthesize_stream(make_scenario(ScenarioName::SuddenFull, 2, 4), pool, 3, 1);
    for (const auto& obs : stream.observations()) {
        if (obs.is_drift) {
            CHECK(obs.z == 0.3);
            CHECK(obs.label == "7");
        } else {
            CHECK(obs.z >= 0.9);
        }
    }
    PoolSource no_drift{pool.base, {}};
    CHECK_THROWS_AS(synthesize_stream(make_scenario(ScenarioName::SuddenFull, 2, 4), no_drift, 3, 1),
                    InvalidArgument);
    std::istringstream bad("z,label,pool\n0.9,1,elsewhere\n");
    CHECK_THROWS_AS(read_pool_csv(bad), FormatError);
}

TEST_CASE("presets") {
    CHECK(beta_preset("overconfident").drift.a == 20.0);
    CHECK_THROWS_AS(beta_preset("nope"), InvalidArgument);
}
