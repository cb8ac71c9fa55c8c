#include "driftwatch/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "driftwatch/error.hpp"
#include "driftwatch/parallel.hpp"
#include "driftwatch/random.hpp"
#include "driftwatch/stats.hpp"

namespace driftwatch {

namespace {

std::vector<RunningMoments> batch_moments(std::span<const double> z, std::int64_t batch_size) {
    if (batch_size < 1) throw InvalidArgument("naive test: batch size must be >= 1");
    const auto batches = static_cast<std::int64_t>(z.size()) / batch_size;
    if (batches < 2) throw InvalidArgument("naive test: need at least two complete batches");
    std::vector<RunningMoments> out(static_cast<std::size_t>(batches));
    for (std::int64_t j = 0; j < batches; ++j) {
        for (std::int64_t i = 0; i < batch_size; ++i) out[static_cast<std::size_t>(j)].push(z[static_cast<std::size_t>(j * batch_size + i)]);
    }
    return out;
}

bool table_matches(const ThresholdTable& table, const DetectorSpec& detector, std::int64_t batch_size,
                   std::int64_t length) {
    const auto& s = table.spec();
    auto eval = detector.evaluation_stride > 0 ? detector.evaluation_stride : batch_size;
    auto cand = detector.candidate_stride > 0 ? detector.candidate_stride : batch_size;
    return s.kind == detector.kind && s.alpha_mode == detector.alpha_mode && s.alpha == detector.alpha &&
           s.t0 == detector.t0 && s.evaluation_stride == eval && s.candidate_stride == cand && s.horizon >= length;
}

nlohmann::ordered_json report_to_json(const AggregateReport& r) {
    nlohmann::ordered_json j;
    j["scenario"] = r.scenario;
    j["detector"] = r.detector;
    j["R"] = r.repetitions;
    j["false_alarm_prob"] = r.false_alarm_prob;
    j["missed_prob"] = r.missed_prob;
    j["delays"] = r.delays;
    j["losses"] = r.losses;
    j["theta"] = {{"all", r.theta_all}, {"gated", r.theta_gated}, {"outliers", r.theta_outliers}};
    return j;
}

}  // namespace

void LossParams::validate() const {
    if (!(l0 < l1 && l1 < 0.0)) throw InvalidArgument("loss: need l0 < l1 < 0");
}

double loss(std::optional<std::int64_t> changepoint, std::optional<std::int64_t> d, std::span<const double> schedule,
            std::int64_t batch_size, const LossParams& params) {
    params.validate();
    if (!changepoint) throw InvalidArgument("loss: no changepoint, nothing to score");
    if (!d) return params.l1;
    if (*d < 1) throw InvalidArgument("loss: detection time must be >= 1");
    if (*d <= *changepoint) return params.l0;
    const std::int64_t bd = batch_of(*d, batch_size).j;
    const std::int64_t bk = batch_of(*changepoint, batch_size).j;
    if (bd > static_cast<std::int64_t>(schedule.size())) {
        throw InvalidArgument("loss: schedule does not cover detection batch " + std::to_string(bd));
    }
    if (bd == bk) return 0.0;
    double log_product = 0.0;
    const double span = static_cast<double>(bd - bk);
    for (std::int64_t j = bk + 1; j <= bd; ++j) {
        log_product += static_cast<double>(bd - j) / span * std::log1p(schedule[static_cast<std::size_t>(j - 1)]);
    }
    return params.l1 - params.l1 / std::exp(log_product);
}

std::optional<std::int64_t> naive_pairwise(std::span<const double> z, std::int64_t batch_size, double alpha) {
    auto batches = batch_moments(z, batch_size);
    for (std::size_t j = 1; j < batches.size(); ++j) {
        if (student_t_p_value(batches[0], batches[j]) <= alpha) return static_cast<std::int64_t>(j);
    }
    return std::nullopt;
}

std::optional<std::int64_t> naive_splits(std::span<const double> z, std::int64_t batch_size, double alpha) {
    auto batches = batch_moments(z, batch_size);
    std::vector<RunningMoments> prefix(batches.size());
    prefix[0] = batches[0];
    for (std::size_t k = 1; k < batches.size(); ++k) prefix[k] = RunningMoments::merge(prefix[k - 1], batches[k]);
    // 0-based: "before" = batches 0..k, "after" = k+1..j.
    for (std::size_t j = 1; j < batches.size(); ++j) {
        double smallest = 1.0;
        RunningMoments after;
        for (std::size_t k = j; k-- > 0;) {
            after = RunningMoments::merge(batches[k + 1], after);
            smallest = std::min(smallest, student_t_p_value(prefix[k], after));
        }
        if (smallest <= alpha) return static_cast<std::int64_t>(j);
    }
    return std::nullopt;
}

PeekingResult peeking_simulation(double alpha, std::int64_t n, std::int64_t start, std::int64_t sims,
                                 std::uint64_t seed) {
    if (start < 1 || start >= n) throw InvalidArgument("peeking: need 1 <= start < n");
    if (sims < 1) throw InvalidArgument("peeking: need at least one simulation");
    std::int64_t any = 0;
    std::int64_t total = 0;
    for (std::int64_t sim = 0; sim < sims; ++sim) {
        Engine engine(derive_seed(seed, seed_purpose::peeking, static_cast<std::uint64_t>(sim)));
        double sum = 0.0;
        std::int64_t rejections = 0;
        for (std::int64_t t = 1; t <= n; ++t) {
            sum += draw_normal(engine);
            if (t < start) continue;
            double statistic = sum / std::sqrt(static_cast<double>(t));
            double p = std::erfc(std::abs(statistic) / std::sqrt(2.0));
            if (p < alpha) ++rejections;
        }
        any += rejections > 0 ? 1 : 0;
        total += rejections;
    }
    return {static_cast<double>(any) / static_cast<double>(sims),
            static_cast<double>(total) / static_cast<double>(sims)};
}

CalibrationSpec calibration_for(const DetectorSpec& detector, std::int64_t batch_size, std::int64_t horizon,
                                std::int64_t num_streams, std::uint64_t seed) {
    CalibrationSpec spec;
    spec.kind = detector.kind;
    spec.alpha_mode = detector.alpha_mode;
    spec.alpha = detector.alpha;
    spec.t0 = detector.t0;
    spec.horizon = horizon;
    spec.evaluation_stride = detector.evaluation_stride > 0 ? detector.evaluation_stride : batch_size;
    spec.candidate_stride = detector.candidate_stride > 0 ? detector.candidate_stride : batch_size;
    spec.num_streams = num_streams;
    spec.seed = seed;
    return spec;
}

double AggregateReport::mean_delay() const {
    if (delays.empty()) return std::nan("");
    return static_cast<double>(std::accumulate(delays.begin(), delays.end(), std::int64_t{0})) /
           static_cast<double>(delays.size());
}

AggregateReport aggregate(std::span<const RunRecord> records) {
    AggregateReport r;
    if (records.empty()) return r;
    r.scenario = records.front().scenario;
    r.detector = records.front().detector;
    r.repetitions = static_cast<std::int64_t>(records.size());
    std::int64_t false_alarms = 0, misses = 0;
    for (const auto& rec : records) {
        false_alarms += rec.false_alarm ? 1 : 0;
        misses += rec.missed ? 1 : 0;
        if (rec.delay) r.delays.push_back(*rec.delay);
        r.losses.push_back(rec.loss);
        if (rec.theta_all) r.theta_all.push_back(*rec.theta_all);
        if (rec.theta_gated) r.theta_gated.push_back(*rec.theta_gated);
        if (rec.theta_outliers) r.theta_outliers.push_back(*rec.theta_outliers);
    }
    r.false_alarm_prob = static_cast<double>(false_alarms) / static_cast<double>(r.repetitions);
    r.missed_prob = static_cast<double>(misses) / static_cast<double>(r.repetitions);
    std::sort(r.delays.begin(), r.delays.end());
    std::sort(r.losses.begin(), r.losses.end());
    std::sort(r.theta_all.begin(), r.theta_all.end());
    std::sort(r.theta_gated.begin(), r.theta_gated.end());
    std::sort(r.theta_outliers.begin(), r.theta_outliers.end());
    return r;
}

std::uint64_t repetition_seed(std::uint64_t master_seed, std::int64_t repetition) {
    return derive_seed(master_seed, seed_purpose::repetition, static_cast<std::uint64_t>(repetition));
}

RunRecord run_once(const DetectorSpec& detector, const ConfidenceStream& stream, const DriftScenario& scenario,
                   std::shared_ptr<const ThresholdTable> table, const LossParams& params) {
    RunRecord rec;
    rec.scenario = scenario.display_name();
    rec.detector = detector.id;
    const auto z = stream.values();
    const std::int64_t batch_size = stream.batch_size();

    if (detector.type == DetectorType::Cpm) {
        if (!table || !table_matches(*table, detector, batch_size, stream.size())) {
            throw MissingThresholds("no threshold table for detector '" + detector.id +
                                    "' covering this stream; run `driftwatch calibrate` first");
        }
        DetectionGate gate;
        if (detector.outlier_gated) {
            gate = [&](std::span<const double> observed, std::int64_t tau) {
                auto search = find_outliers(observed, tau, static_cast<std::int64_t>(observed.size()),
                                            detector.alpha_star, detector.max_outliers, detector.n_grid);
                return !search.selection.theta_indices.empty();
            };
        }
        CpmDetector cpm(table);
        rec.outcome = cpm.run(z, gate);
    } else {
        auto b_hat = detector.type == DetectorType::NaivePairwise ? naive_pairwise(z, batch_size, detector.alpha)
                                                                  : naive_splits(z, batch_size, detector.alpha);
        if (b_hat) rec.outcome = DetectionOutcome{(*b_hat + 1) * batch_size, *b_hat * batch_size, 0.0};
    }

    const auto& d = rec.outcome.d;
    const auto k = stream.changepoint();
    rec.missed = !d.has_value();
    rec.false_alarm = d && k && *d <= *k;
    rec.loss = loss(k, d, scenario.schedule, batch_size, params);

    if (d && k && *d > *k) {
        rec.delay = batch_of(*d, batch_size).j - batch_of(*k, batch_size).j - 1;
        const std::int64_t k_hat = *rec.outcome.k_hat;
        std::vector<std::int64_t> window;
        for (std::int64_t t = k_hat + 1; t <= *d; ++t) window.push_back(t);
        double theta = drift_fraction(window, stream);
        if (detector.type == DetectorType::Cpm && detector.outlier_gated) {
            rec.theta_gated = theta;
        } else {
            rec.theta_all = theta;
        }
        if (detector.type == DetectorType::Cpm) {
            auto search = find_outliers(z, k_hat, *d, detector.alpha_star, detector.max_outliers, detector.n_grid);
            rec.outlier_count = search.selection.theta_indices.size();
            if (rec.outlier_count > 0) rec.theta_outliers = drift_fraction(search.selection.theta_indices, stream);
        }
    }
    return rec;
}

ExperimentResult run_experiment(const DetectorSpec& detector, const ExperimentSetup& setup,
                                std::shared_ptr<const ThresholdTable> table) {
    if (setup.repetitions < 1) throw InvalidArgument("experiment: need at least one repetition");
    setup.loss_params.validate();
    std::vector<RunRecord> records(static_cast<std::size_t>(setup.repetitions));
    parallel_for(records.size(), setup.jobs, [&](std::size_t r) {
        auto seed = repetition_seed(setup.master_seed, static_cast<std::int64_t>(r));
        auto stream = synthesize_stream(setup.scenario, setup.source, setup.batch_size, seed);
        records[r] = run_once(detector, stream, setup.scenario, table, setup.loss_params);
        records[r].repetition = static_cast<std::int64_t>(r);
        records[r].seed = seed;
    });
    ExperimentResult result;
    result.report = aggregate(records);
    result.records = std::move(records);
    return result;
}

void write_report_json(std::ostream& out, const AggregateReport& report) {
    out << report_to_json(report).dump(1) << '\n';
}

void write_reports_json(std::ostream& out, std::span<const AggregateReport> reports) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : reports) arr.push_back(report_to_json(r));
    out << arr.dump(1) << '\n';
}

}  // namespace driftwatch
