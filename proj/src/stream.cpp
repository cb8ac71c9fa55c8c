#include "driftwatch/stream.hpp"

#include <cmath>
#include <ostream>

#include "driftwatch/csv.hpp"
#include "driftwatch/error.hpp"

namespace driftwatch {

BatchIndex batch_of(std::int64_t t, std::int64_t batch_size) {
    if (t < 1) throw InvalidArgument("batch_of: observation index must be >= 1");
    if (batch_size < 1) throw InvalidArgument("batch_of: batch size must be >= 1");
    return BatchIndex{(t + batch_size - 1) / batch_size};
}

ConfidenceStream::ConfidenceStream(std::vector<Observation> observations, std::int64_t batch_size,
                                   std::optional<std::int64_t> changepoint)
    : observations_(std::move(observations)), batch_size_(batch_size), changepoint_(changepoint) {
    if (batch_size_ < 1) throw InvalidArgument("stream: batch size must be >= 1");
    if (changepoint_ && *changepoint_ < 1) throw InvalidArgument("stream: changepoint must be >= 1");
    for (std::size_t i = 0; i < observations_.size(); ++i) {
        const auto& obs = observations_[i];
        if (obs.t != static_cast<std::int64_t>(i) + 1) {
            throw InvalidArgument("stream: indices must be 1..n contiguous, found t=" + std::to_string(obs.t) +
                                  " at position " + std::to_string(i + 1));
        }
        if (!(obs.z >= 0.0 && obs.z <= 1.0)) {
            throw InvalidArgument("stream: z out of [0,1] at t=" + std::to_string(obs.t));
        }
        if (changepoint_ && obs.t <= *changepoint_ && obs.is_drift) {
            throw InvalidArgument("stream: drift observation at t=" + std::to_string(obs.t) +
                                  " precedes changepoint " + std::to_string(*changepoint_));
        }
    }
}

const Observation& ConfidenceStream::at(std::int64_t t) const {
    if (t < 1 || t > size()) throw InvalidArgument("stream: index " + std::to_string(t) + " out of range");
    return observations_[static_cast<std::size_t>(t - 1)];
}

std::vector<double> ConfidenceStream::values() const {
    std::vector<double> z;
    z.reserve(observations_.size());
    for (const auto& obs : observations_) z.push_back(obs.z);
    return z;
}

std::span<const Observation> batch_slice(const ConfidenceStream& stream, BatchIndex j) {
    if (j.j < 1) throw InvalidArgument("batch_slice: batch index must be >= 1");
    std::int64_t first = stream.batch_size() * (j.j - 1) + 1;
    std::int64_t last = stream.batch_size() * j.j;
    if (last > stream.size()) {
        std::int64_t missing = std::max(first, stream.size() + 1);
        throw InvalidArgument("batch_slice: batch " + std::to_string(j.j) + " incomplete, first missing index " +
                              std::to_string(missing));
    }
    return stream.observations().subspan(static_cast<std::size_t>(first - 1),
                                         static_cast<std::size_t>(stream.batch_size()));
}

ConfidenceStream read_stream_csv(std::istream& in, std::int64_t batch_size, std::optional<std::int64_t> changepoint) {
    auto records = csv::read_all(in);
    if (records.empty()) throw FormatError("stream csv: missing header");
    const std::vector<std::string> expected{"t", "z", "is_drift", "label"};
    if (records.front() != expected) throw FormatError("stream csv: header must be t,z,is_drift,label");
    std::vector<Observation> observations;
    observations.reserve(records.size() - 1);
    for (std::size_t row = 1; row < records.size(); ++row) {
        const auto& r = records[row];
        if (r.size() != 4) {
            throw FormatError("stream csv: row " + std::to_string(row + 1) + " has " + std::to_string(r.size()) +
                              " fields, expected 4");
        }
        Observation obs;
        obs.t = csv::parse_integer(r[0]);
        obs.z = csv::parse_double(r[1]);
        if (r[2] == "0") {
            obs.is_drift = false;
        } else if (r[2] == "1") {
            obs.is_drift = true;
        } else {
            throw FormatError("stream csv: is_drift must be 0 or 1 on row " + std::to_string(row + 1));
        }
        obs.label = r[3];
        observations.push_back(std::move(obs));
    }
    return ConfidenceStream(std::move(observations), batch_size, changepoint);
}

void write_stream_csv(std::ostream& out, const ConfidenceStream& stream) {
    out << "t,z,is_drift,label\n";
    for (const auto& obs : stream.observations()) {
        out << obs.t << ',' << csv::format_double(obs.z) << ',' << (obs.is_drift ? 1 : 0) << ','
            << csv::escape(obs.label) << '\n';
    }
}

}  // namespace driftwatch
