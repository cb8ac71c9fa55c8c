#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "driftwatch/cpm.hpp"
#include "driftwatch/density.hpp"
#include "driftwatch/scenarios.hpp"
#include "driftwatch/thresholds.hpp"

namespace driftwatch {

struct LossParams {
    double l0 = -1000.0;  // false alarm
    double l1 = -250.0;   // missed alarm

    void validate() const;
};

/// Compounding loss of a detection at d against true changepoint K:
///   l0                                         if d <= K
///   l1                                         if d is missed (nullopt)
///   l1 - l1 / prod_{j=b(K)+1}^{b(d)} (1+p_j)^((b(d)-j)/(b(d)-b(K)))   otherwise
/// `schedule` holds p_1..p_J. Throws when K is unknown.
double loss(std::optional<std::int64_t> changepoint, std::optional<std::int64_t> d, std::span<const double> schedule,
            std::int64_t batch_size, const LossParams& params = {});

/// Batch 1 vs batch j Student t tests for j = 2..J; returns j* - 1 for the
/// first j with p <= alpha, or nullopt. Degenerate comparisons have p = 1.
std::optional<std::int64_t> naive_pairwise(std::span<const double> z, std::int64_t batch_size, double alpha);

/// At each batch j >= 2, tests every boundary split k < j (batches 1..k vs
/// k+1..j); returns j - 1 for the first j whose smallest p is <= alpha.
std::optional<std::int64_t> naive_splits(std::span<const double> z, std::int64_t batch_size, double alpha);

struct PeekingResult {
    double pr_v_ge_1 = 0.0;  // Pr(V >= 1)
    double e_v = 0.0;        // E(V)
};

/// Repeated two-sided z tests of H0: mu = 0 on the growing prefixes
/// x_1..x_t, t = start..n, of iid N(0,1) data; V counts rejections.
PeekingResult peeking_simulation(double alpha, std::int64_t n = 100, std::int64_t start = 20,
                                 std::int64_t sims = 10000, std::uint64_t seed = 0);

enum class DetectorType { Cpm, NaivePairwise, NaiveSplits };

struct DetectorSpec {
    std::string id;
    DetectorType type = DetectorType::Cpm;
    double alpha = 0.05;
    // CPM only.
    StatisticKind kind = StatisticKind::CramerVonMises;
    AlphaMode alpha_mode = AlphaMode::HorizonTotal;
    std::int64_t t0 = 25;
    std::int64_t evaluation_stride = 0;  // 0 = batch size
    std::int64_t candidate_stride = 0;   // 0 = batch size
    bool outlier_gated = false;
    double alpha_star = 0.05;
    std::size_t max_outliers = kDefaultMaxOutliers;
    std::size_t n_grid = kDefaultGridPoints;
};

// Calibration inputs a CPM detector needs for a given stream geometry.
CalibrationSpec calibration_for(const DetectorSpec& detector, std::int64_t batch_size, std::int64_t horizon,
                                std::int64_t num_streams, std::uint64_t seed);

struct RunRecord {
    std::string scenario;
    std::string detector;
    std::int64_t repetition = 0;
    std::uint64_t seed = 0;
    DetectionOutcome outcome;
    double loss = 0.0;
    bool false_alarm = false;
    bool missed = false;
    std::optional<std::int64_t> delay;  // b(d) - b(K) - 1, true detections only
    std::optional<double> theta_all;
    std::optional<double> theta_gated;
    std::optional<double> theta_outliers;
    std::size_t outlier_count = 0;
};

struct AggregateReport {
    std::string scenario;
    std::string detector;
    std::int64_t repetitions = 0;
    double false_alarm_prob = 0.0;
    double missed_prob = 0.0;
    std::vector<std::int64_t> delays;
    std::vector<double> losses;
    std::vector<double> theta_all;
    std::vector<double> theta_gated;
    std::vector<double> theta_outliers;

    double mean_delay() const;
};

// Order-independent summary of repetition records (lists come back sorted).
AggregateReport aggregate(std::span<const RunRecord> records);

struct ExperimentSetup {
    DriftScenario scenario;
    ConfidenceSource source = BetaSource{};
    std::int64_t batch_size = kDefaultBatchSize;
    std::int64_t repetitions = 50;
    std::uint64_t master_seed = 0;
    LossParams loss_params;
    unsigned jobs = 1;
};

// Stream for one repetition; depends only on (master seed, repetition), so
// every scenario and detector sees paired randomness.
std::uint64_t repetition_seed(std::uint64_t master_seed, std::int64_t repetition);

/// Scores one detector on one synthesized stream.
RunRecord run_once(const DetectorSpec& detector, const ConfidenceStream& stream, const DriftScenario& scenario,
                   std::shared_ptr<const ThresholdTable> table, const LossParams& params);

/// Runs R repetitions. CPM detectors need a table whose horizon covers the
/// stream; otherwise MissingThresholds names the calibrate command.
struct ExperimentResult {
    AggregateReport report;
    std::vector<RunRecord> records;
};
ExperimentResult run_experiment(const DetectorSpec& detector, const ExperimentSetup& setup,
                                std::shared_ptr<const ThresholdTable> table = nullptr);

// Report JSON: {scenario, detector, R, false_alarm_prob, missed_prob, delays,
// losses, theta: {all, gated, outliers}}.
void write_report_json(std::ostream& out, const AggregateReport& report);
void write_reports_json(std::ostream& out, std::span<const AggregateReport> reports);

}  // namespace driftwatch
