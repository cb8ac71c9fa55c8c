#include "driftwatch/thresholds.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "driftwatch/csv.hpp"
#include "driftwatch/error.hpp"
#include "driftwatch/parallel.hpp"
#include "driftwatch/random.hpp"
#include "driftwatch/stats.hpp"

namespace driftwatch {

namespace {

constexpr std::size_t kMinimumSurvivors = 10;

void validate(const CalibrationSpec& spec) {
    if (!(spec.alpha > 0.0 && spec.alpha < 1.0)) throw InvalidArgument("calibration: alpha must be in (0,1)");
    if (spec.t0 < 1) throw InvalidArgument("calibration: t0 must be >= 1");
    if (spec.t0 >= spec.horizon) throw InvalidArgument("calibration: t0 must be smaller than the horizon");
    if (spec.evaluation_stride < 1 || spec.candidate_stride < 1) {
        throw InvalidArgument("calibration: strides must be >= 1");
    }
    if (spec.num_streams < static_cast<std::int64_t>(kMinimumSurvivors)) {
        throw InvalidArgument("calibration: need at least " + std::to_string(kMinimumSurvivors) + " null streams");
    }
    if (spec.minimum_segment < 1) throw InvalidArgument("calibration: minimum segment must be >= 1");
}

void fill_null_prefix(std::vector<double>& buffer, StatisticKind kind, std::uint64_t seed, std::int64_t stream,
                      std::int64_t length) {
    Engine engine(derive_seed(seed, seed_purpose::calibration, static_cast<std::uint64_t>(stream)));
    buffer.resize(static_cast<std::size_t>(length));
    for (auto& v : buffer) v = kind == StatisticKind::CramerVonMises ? draw_uniform(engine) : draw_normal(engine);
}

}  // namespace

std::string_view to_string(AlphaMode mode) {
    return mode == AlphaMode::PerEvaluationHazard ? "per_evaluation_hazard" : "horizon_total";
}

AlphaMode parse_alpha_mode(std::string_view name) {
    if (name == "per_evaluation_hazard") return AlphaMode::PerEvaluationHazard;
    if (name == "horizon_total") return AlphaMode::HorizonTotal;
    throw InvalidArgument("unknown alpha mode '" + std::string(name) + "'");
}

double per_point_alpha(AlphaMode mode, double alpha, std::size_t evaluation_count) {
    if (mode == AlphaMode::PerEvaluationHazard) return alpha;
    if (evaluation_count == 0) throw InvalidArgument("no evaluation points");
    return -std::expm1(std::log1p(-alpha) / static_cast<double>(evaluation_count));
}

ThresholdTable::ThresholdTable(CalibrationSpec spec, std::vector<std::pair<std::int64_t, double>> values)
    : spec_(std::move(spec)), values_(std::move(values)) {
    for (std::size_t i = 0; i < values_.size(); ++i) {
        const auto& [t, h] = values_[i];
        if (!std::isfinite(h) || !(h > 0.0)) {
            throw InvalidArgument("threshold table: h_" + std::to_string(t) + " must be finite and positive");
        }
        if (i > 0) {
            if (t <= values_[i - 1].first) throw InvalidArgument("threshold table: times must increase");
            if (h < values_[i - 1].second) {
                throw InvalidArgument("threshold table: h_t decreases at t=" + std::to_string(t));
            }
        }
    }
}

std::optional<double> ThresholdTable::at(std::int64_t t) const {
    auto it = std::lower_bound(values_.begin(), values_.end(), t,
                               [](const auto& entry, std::int64_t key) { return entry.first < key; });
    if (it == values_.end() || it->first != t) return std::nullopt;
    return it->second;
}

double ThresholdTable::alpha_eval() const {
    return per_point_alpha(spec_.alpha_mode, spec_.alpha, values_.size());
}

ThresholdTable calibrate_thresholds(const CalibrationSpec& spec, unsigned jobs) {
    validate(spec);
    auto points = evaluation_points(spec.t0, spec.horizon, spec.evaluation_stride, spec.candidate_stride,
                                    spec.minimum_segment);
    if (points.empty()) throw InvalidArgument("calibration: no evaluation points between t0 and the horizon");
    const double alpha_eval = per_point_alpha(spec.alpha_mode, spec.alpha, points.size());
    auto moments = make_moment_source(spec.moments, spec.seed);

    std::vector<std::int64_t> survivors(static_cast<std::size_t>(spec.num_streams));
    for (std::size_t i = 0; i < survivors.size(); ++i) survivors[i] = static_cast<std::int64_t>(i);

    std::vector<std::pair<std::int64_t, double>> values;
    values.reserve(points.size());
    double previous = 0.0;
    for (std::int64_t t : points) {
        if (survivors.size() < kMinimumSurvivors) {
            throw CalibrationError("calibration: only " + std::to_string(survivors.size()) +
                                   " null streams survive at t=" + std::to_string(t) +
                                   "; increase num_streams or lower alpha");
        }
        std::vector<double> stats(survivors.size());
        parallel_for(survivors.size(), jobs, [&](std::size_t i) {
            thread_local std::vector<double> buffer;
            fill_null_prefix(buffer, spec.kind, spec.seed, survivors[i], t);
            stats[i] = scan_splits(spec.kind, buffer, spec.candidate_stride, *moments, spec.minimum_segment).w_max;
        });
        double h = std::max(previous, sample_quantile(stats, 1.0 - alpha_eval));
        if (!(h > 0.0)) {
            throw CalibrationError("calibration: non-positive critical value at t=" + std::to_string(t));
        }
        values.emplace_back(t, h);
        previous = h;
        std::vector<std::int64_t> next;
        next.reserve(survivors.size());
        for (std::size_t i = 0; i < survivors.size(); ++i) {
            if (!(stats[i] > h)) next.push_back(survivors[i]);
        }
        survivors.swap(next);
    }
    return ThresholdTable(spec, std::move(values));
}

void write_threshold_json(std::ostream& out, const ThresholdTable& table) {
    const auto& s = table.spec();
    nlohmann::ordered_json j;
    j["statistic_kind"] = to_string(s.kind);
    j["alpha_mode"] = to_string(s.alpha_mode);
    j["alpha"] = s.alpha;
    j["t0"] = s.t0;
    j["horizon"] = s.horizon;
    j["evaluation_stride"] = s.evaluation_stride;
    j["candidate_stride"] = s.candidate_stride;
    j["num_streams"] = s.num_streams;
    j["seed"] = s.seed;
    j["minimum_segment"] = s.minimum_segment;
    j["moments"] = s.moments;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& [t, h] : table.values()) arr.push_back({t, h});
    j["values"] = std::move(arr);
    out << j.dump(1) << '\n';
}

ThresholdTable read_threshold_json(std::istream& in) {
    nlohmann::json j;
    try {
        in >> j;
        CalibrationSpec s;
        s.kind = parse_statistic_kind(j.at("statistic_kind").get<std::string>());
        s.alpha_mode = parse_alpha_mode(j.at("alpha_mode").get<std::string>());
        s.alpha = j.at("alpha").get<double>();
        s.t0 = j.at("t0").get<std::int64_t>();
        s.horizon = j.at("horizon").get<std::int64_t>();
        s.evaluation_stride = j.at("evaluation_stride").get<std::int64_t>();
        s.candidate_stride = j.at("candidate_stride").get<std::int64_t>();
        s.num_streams = j.at("num_streams").get<std::int64_t>();
        s.seed = j.at("seed").get<std::uint64_t>();
        s.minimum_segment = j.value("minimum_segment", kDefaultMinimumSegment);
        s.moments = j.value("moments", std::string("closed_form"));
        std::vector<std::pair<std::int64_t, double>> values;
        for (const auto& entry : j.at("values")) {
            values.emplace_back(entry.at(0).get<std::int64_t>(), entry.at(1).get<double>());
        }
        return ThresholdTable(s, std::move(values));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("threshold json: ") + e.what());
    }
}

void save_threshold_table(const std::filesystem::path& path, const ThresholdTable& table) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write " + path.string());
    write_threshold_json(out, table);
}

ThresholdTable load_threshold_table(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingThresholds("threshold table not found: " + path.string());
    return read_threshold_json(in);
}

std::string threshold_cache_name(const CalibrationSpec& s) {
    std::ostringstream name;
    name << "thresholds_" << to_string(s.kind) << '_' << to_string(s.alpha_mode) << "_a" << csv::format_double(s.alpha)
         << "_t0-" << s.t0 << "_h" << s.horizon << "_e" << s.evaluation_stride << "_c" << s.candidate_stride << "_n"
         << s.num_streams << "_s" << s.seed << "_m" << s.minimum_segment << '_' << s.moments << ".json";
    return name.str();
}

}  // namespace driftwatch
