#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "driftwatch/thresholds.hpp"
#include "driftwatch/two_sample.hpp"

namespace driftwatch {

/// Result of a sequential detector. d == nullopt encodes "no detection" (d =
/// infinity), in which case k_hat is nullopt as well.
struct DetectionOutcome {
    std::optional<std::int64_t> d;
    std::optional<std::int64_t> k_hat;
    double w_max = 0.0;

    bool detected() const { return d.has_value(); }
};

enum class CpmStatus { Warming, Monitoring, Detected };

// Optional confirmation hook consulted when the statistic exceeds h_t; the
// detection is withheld (and monitoring continues) when it returns false. It
// sees only the observed z values and the candidate changepoint.
using DetectionGate = std::function<bool(std::span<const double> observed, std::int64_t tau)>;

/// Online change point model over a stream of z values.
///
/// Each step appends one value. At calibrated evaluation points t >= t0 the
/// best split is found with scan_splits and compared against h_t; the first
/// exceedance fixes d = t and k_hat = tau. Stepping after a detection, or past
/// the calibrated horizon, throws.
class CpmDetector {
public:
    explicit CpmDetector(std::shared_ptr<const ThresholdTable> table,
                         std::shared_ptr<const MomentSource> moments = nullptr, bool confidence_stream = true);

    CpmStatus step(double z, const DetectionGate& gate = {});

    // Feeds values until detection or exhaustion.
    DetectionOutcome run(std::span<const double> z, const DetectionGate& gate = {});

    CpmStatus status() const { return status_; }
    const DetectionOutcome& detection() const { return detection_; }
    std::int64_t t() const { return static_cast<std::int64_t>(observed_.size()); }
    std::span<const double> observed() const { return observed_; }
    const ThresholdTable& table() const { return *table_; }

private:
    std::shared_ptr<const ThresholdTable> table_;
    std::shared_ptr<const MomentSource> moments_;
    bool confidence_stream_;
    std::vector<double> observed_;
    CpmStatus status_ = CpmStatus::Warming;
    DetectionOutcome detection_;
};

}  // namespace driftwatch
