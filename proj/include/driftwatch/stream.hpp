#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace driftwatch {

inline constexpr std::int64_t kDefaultBatchSize = 20;

// One model output. `is_drift` is ground truth known to the harness only;
// detectors never see an Observation, just the z values.
struct Observation {
    std::int64_t t = 0;
    double z = 0.0;
    bool is_drift = false;
    std::string label;
};

struct BatchIndex {
    std::int64_t j = 0;
    auto operator<=>(const BatchIndex&) const = default;
};

/// b(t) = ceil(t / batch_size). Throws InvalidArgument for t or batch_size < 1.
BatchIndex batch_of(std::int64_t t, std::int64_t batch_size);

/// Immutable ordered sequence of observations with indices 1..n.
///
/// The optional changepoint K is the last index before drift may appear; the
/// constructor rejects streams flagging drift at or before K.
class ConfidenceStream {
public:
    explicit ConfidenceStream(std::vector<Observation> observations,
                              std::int64_t batch_size = kDefaultBatchSize,
                              std::optional<std::int64_t> changepoint = std::nullopt);

    std::int64_t size() const { return static_cast<std::int64_t>(observations_.size()); }
    std::int64_t batch_size() const { return batch_size_; }
    std::optional<std::int64_t> changepoint() const { return changepoint_; }
    std::int64_t complete_batches() const { return size() / batch_size_; }

    std::span<const Observation> observations() const { return observations_; }
    const Observation& at(std::int64_t t) const;

    // The detector-facing view.
    std::vector<double> values() const;

private:
    std::vector<Observation> observations_;
    std::int64_t batch_size_;
    std::optional<std::int64_t> changepoint_;
};

/// Observations batch_size*(j-1)+1 .. batch_size*j. Throws InvalidArgument
/// naming the first missing index when the batch is absent or partial.
std::span<const Observation> batch_slice(const ConfidenceStream& stream, BatchIndex j);

// CSV with header `t,z,is_drift,label`.
ConfidenceStream read_stream_csv(std::istream& in, std::int64_t batch_size = kDefaultBatchSize,
                                 std::optional<std::int64_t> changepoint = std::nullopt);
void write_stream_csv(std::ostream& out, const ConfidenceStream& stream);

}  // namespace driftwatch
