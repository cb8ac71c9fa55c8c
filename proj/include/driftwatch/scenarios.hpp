#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "driftwatch/stream.hpp"

namespace driftwatch {

enum class ScenarioName {
    SuddenQuarter,
    SuddenHalf,
    SuddenFull,
    SuddenHalfReturn,
    SuddenFullReturn,
    GradualToHalf,
    GradualToFull,
    GradualLongDelay,
    Custom,
};

std::string_view to_string(ScenarioName name);
ScenarioName parse_scenario_name(std::string_view name);

// The eight built-in schedules, in the order used for reports.
const std::vector<ScenarioName>& builtin_scenarios();

inline constexpr std::int64_t kDefaultChangeBatch = 50;
inline constexpr std::int64_t kDefaultTotalBatches = 100;

/// Contamination p_j for a built-in scenario. Offsets are relative to the
/// change batch B (B = 50 gives the standard table, e.g. sudden_half_return
/// drifts on batches 51..65). Throws for j outside [1, total_batches] or for
/// Custom.
double schedule(ScenarioName name, std::int64_t j, std::int64_t change_batch = kDefaultChangeBatch,
                std::int64_t total_batches = kDefaultTotalBatches);

struct DriftScenario {
    ScenarioName name = ScenarioName::SuddenFull;
    std::vector<double> schedule;  // p_1 .. p_J
    std::int64_t change_batch = kDefaultChangeBatch;
    std::int64_t total_batches = kDefaultTotalBatches;

    double p(std::int64_t j) const;
    std::string display_name() const;
    std::string custom_name;  // set for Custom scenarios
};

DriftScenario make_scenario(ScenarioName name, std::int64_t change_batch = kDefaultChangeBatch,
                            std::int64_t total_batches = kDefaultTotalBatches);

// Validates p_j = 0 for j <= B and p_j in [0,1].
DriftScenario make_custom_scenario(std::vector<double> schedule, std::int64_t change_batch,
                                   std::string name = "custom");

// Scenario file: {"change_batch": B, "total_batches": J, "schedule": [p_1..p_J]}.
DriftScenario read_scenario_json(std::istream& in, std::string name = "custom");

struct BetaShape {
    double a = 1.0;
    double b = 1.0;
};

struct BetaSource {
    BetaShape base{8.0, 2.0};
    BetaShape drift{2.0, 2.0};
};

struct PoolEntry {
    double z = 0.0;
    std::string label;
};

struct PoolSource {
    std::vector<PoolEntry> base;
    std::vector<PoolEntry> drift;
};

using ConfidenceSource = std::variant<BetaSource, PoolSource>;

// Named presets: "default" Beta(8,2) base vs Beta(2,2) drift, "overconfident"
// Beta(8,2) base vs Beta(20,1) drift.
BetaSource beta_preset(std::string_view name);

// Pool CSV with header `z,label,pool`, pool in {base, drift}.
PoolSource read_pool_csv(std::istream& in);
void validate_source(const ConfidenceSource& source);

// round(batch_size * p) with ties rounded up.
std::int64_t drift_count(std::int64_t batch_size, double p);

/// Builds a J*batch_size stream: every batch j holds exactly
/// drift_count(batch_size, p_j) drift draws, placed at shuffled positions.
/// The changepoint is B*batch_size. Identical inputs give identical streams.
ConfidenceStream synthesize_stream(const DriftScenario& scenario, const ConfidenceSource& source,
                                   std::int64_t batch_size, std::uint64_t seed);

}  // namespace driftwatch
