#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "driftwatch/two_sample.hpp"

namespace driftwatch {

// per_evaluation_hazard: alpha is the conditional false-alarm probability at
// every evaluation point (ARL0-style). horizon_total: alpha is the total null
// exceedance probability over all evaluation points up to the horizon.
enum class AlphaMode { PerEvaluationHazard, HorizonTotal };

std::string_view to_string(AlphaMode mode);
AlphaMode parse_alpha_mode(std::string_view name);

struct CalibrationSpec {
    StatisticKind kind = StatisticKind::CramerVonMises;
    AlphaMode alpha_mode = AlphaMode::HorizonTotal;
    double alpha = 0.05;
    std::int64_t t0 = 25;
    std::int64_t horizon = 2000;
    std::int64_t evaluation_stride = 20;
    std::int64_t candidate_stride = 20;
    std::int64_t num_streams = 2000;
    std::uint64_t seed = 0;
    int minimum_segment = kDefaultMinimumSegment;
    std::string moments = "closed_form";  // or "monte_carlo"
};

/// Calibrated critical values h_t for one CalibrationSpec.
class ThresholdTable {
public:
    ThresholdTable(CalibrationSpec spec, std::vector<std::pair<std::int64_t, double>> values);

    const CalibrationSpec& spec() const { return spec_; }
    const std::vector<std::pair<std::int64_t, double>>& values() const { return values_; }

    // h_t at an evaluation point, nullopt elsewhere.
    std::optional<double> at(std::int64_t t) const;

    // Conditional per-point level implied by the spec.
    double alpha_eval() const;

private:
    CalibrationSpec spec_;
    std::vector<std::pair<std::int64_t, double>> values_;
};

// alpha for per_evaluation_hazard; 1 - (1 - alpha)^(1/E) for horizon_total.
double per_point_alpha(AlphaMode mode, double alpha, std::size_t evaluation_count);

/// Simulates num_streams iid null streams and, walking the evaluation points
/// in order, sets h_t to the (1 - alpha_eval) quantile of the surviving
/// streams' max statistic, then drops the streams that exceed it. Values are
/// carried forward as a running maximum so the table is nondecreasing.
/// Bit-identical for any `jobs`.
ThresholdTable calibrate_thresholds(const CalibrationSpec& spec, unsigned jobs = 1);

// JSON cache file. Loading validates monotonicity and positivity.
void write_threshold_json(std::ostream& out, const ThresholdTable& table);
ThresholdTable read_threshold_json(std::istream& in);
void save_threshold_table(const std::filesystem::path& path, const ThresholdTable& table);
ThresholdTable load_threshold_table(const std::filesystem::path& path);

// Deterministic cache file name keyed by every calibration input.
std::string threshold_cache_name(const CalibrationSpec& spec);

}  // namespace driftwatch
