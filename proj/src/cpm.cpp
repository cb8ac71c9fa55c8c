#include "driftwatch/cpm.hpp"

#include <cmath>
#include <string>

#include "driftwatch/error.hpp"

namespace driftwatch {

CpmDetector::CpmDetector(std::shared_ptr<const ThresholdTable> table, std::shared_ptr<const MomentSource> moments,
                         bool confidence_stream)
    : table_(std::move(table)), moments_(std::move(moments)), confidence_stream_(confidence_stream) {
    if (!table_) throw MissingThresholds("cpm: no threshold table supplied; run calibration first");
    if (!moments_) moments_ = make_moment_source(table_->spec().moments, table_->spec().seed);
    observed_.reserve(static_cast<std::size_t>(table_->spec().horizon));
}

CpmStatus CpmDetector::step(double z, const DetectionGate& gate) {
    if (status_ == CpmStatus::Detected) throw InvalidArgument("cpm: change already detected; start a new detector");
    if (!std::isfinite(z)) throw InvalidArgument("cpm: non-finite observation");
    if (confidence_stream_ && (z < 0.0 || z > 1.0)) throw InvalidArgument("cpm: confidence outside [0,1]");
    const auto& spec = table_->spec();
    if (t() >= spec.horizon) {
        throw InvalidArgument("cpm: stream exceeds the calibrated horizon " + std::to_string(spec.horizon));
    }
    observed_.push_back(z);
    const std::int64_t now = t();
    if (now < spec.t0) return status_ = CpmStatus::Warming;
    status_ = CpmStatus::Monitoring;

    auto h = table_->at(now);
    if (!h) return status_;
    SplitScan best = scan_splits(spec.kind, observed_, spec.candidate_stride, *moments_, spec.minimum_segment);
    if (best.w_max > *h && (!gate || gate(observed_, best.tau))) {
        detection_ = DetectionOutcome{now, best.tau, best.w_max};
        status_ = CpmStatus::Detected;
    }
    return status_;
}

DetectionOutcome CpmDetector::run(std::span<const double> z, const DetectionGate& gate) {
    for (double v : z) {
        if (step(v, gate) == CpmStatus::Detected) break;
    }
    return detection_;
}

}  // namespace driftwatch
