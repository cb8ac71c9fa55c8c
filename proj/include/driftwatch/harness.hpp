#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "driftwatch/evaluation.hpp"

namespace driftwatch {

/// Everything one `driftwatch run` needs. Parsed from a single JSON file;
/// command-line flags may override output, seed, jobs and strides.
struct RunConfig {
    std::int64_t batch_size = 20;
    std::int64_t change_batch = kDefaultChangeBatch;
    std::int64_t total_batches = kDefaultTotalBatches;
    std::int64_t repetitions = 50;
    std::uint64_t seed = 0;
    std::filesystem::path output_dir = "runs";
    std::filesystem::path cache_dir = "thresholds";
    std::int64_t calibration_streams = 2000;
    ConfidenceSource source = BetaSource{};
    std::vector<DriftScenario> scenarios;
    std::vector<DetectorSpec> detectors;
    LossParams loss_params;
    unsigned jobs = 1;

    std::int64_t horizon() const { return batch_size * total_batches; }
};

// Relative paths inside the config (pool CSVs, scenario files) resolve
// against `base_dir`. Errors are InvalidArgument or FormatError.
RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

struct ConfigOverrides {
    std::optional<std::filesystem::path> output_dir;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> jobs;
    bool faithful = false;  // both strides = 1
};
void apply_overrides(RunConfig& config, const ConfigOverrides& overrides);

// FNV-1a over the canonical config serialization, as 16 hex digits.
std::string config_hash(const RunConfig& config);

// DRIFTWATCH_CACHE wins over the configured cache directory.
std::filesystem::path cache_directory(const RunConfig& config);

// Calibration inputs for every CPM detector, deduplicated.
std::vector<CalibrationSpec> required_calibrations(const RunConfig& config);

/// Writes one cache file per distinct calibration. Existing files with the
/// same inputs are reused. Returns the cache paths.
std::vector<std::filesystem::path> cmd_calibrate(const RunConfig& config, std::ostream& log);

/// Runs every (scenario, detector) pair and writes reports and plot data to
/// a fresh directory under output_dir. Returns that directory.
std::filesystem::path cmd_run(const RunConfig& config, std::ostream& log);

// CSV `alpha,pr_v_ge_1,e_v`, one row per alpha.
void cmd_peek(std::span<const double> alphas, std::int64_t sims, std::uint64_t seed, std::ostream& csv);

// CSV `b_d,loss` for b(d) = 1..J and a final `inf` row.
void cmd_losscurve(const DriftScenario& scenario, std::int64_t batch_size, const LossParams& params,
                   std::ostream& csv);

// Validates a pool CSV and prints per-pool counts. Throws FormatError.
PoolSource cmd_ingest_check(std::istream& in, std::ostream& log);

// 2 config/input error, 3 missing thresholds, 4 numerical failure, 1 other.
int exit_code_for(const std::exception& error);

}  // namespace driftwatch
