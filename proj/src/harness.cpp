#include "driftwatch/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "driftwatch/csv.hpp"
#include "driftwatch/error.hpp"
#include "driftwatch/parallel.hpp"
#include "driftwatch/stats.hpp"

namespace driftwatch {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void reject_unknown_keys(const json& object, std::initializer_list<std::string_view> known, std::string_view where) {
    for (const auto& [key, value] : object.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw InvalidArgument(std::string(where) + ": unknown key '" + key + "'");
        }
    }
}

template <class T>
T get_or(const json& object, const char* key, T fallback) {
    auto it = object.find(key);
    return it == object.end() ? fallback : it->get<T>();
}

BetaShape parse_shape(const json& j) {
    auto v = j.get<std::vector<double>>();
    if (v.size() != 2) throw InvalidArgument("config: beta shape must be [a, b]");
    return {v[0], v[1]};
}

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

ConfidenceSource parse_source(const json& j, const fs::path& base) {
    if (j.is_string()) return beta_preset(j.get<std::string>());
    reject_unknown_keys(j, {"preset", "base", "drift", "pool_csv"}, "config.source");
    if (j.contains("pool_csv")) {
        auto path = resolve(base, j.at("pool_csv").get<std::string>());
        std::ifstream in(path);
        if (!in) throw InvalidArgument("config: cannot open pool csv " + path.string());
        return read_pool_csv(in);
    }
    BetaSource source = beta_preset(get_or<std::string>(j, "preset", "default"));
    if (j.contains("base")) source.base = parse_shape(j.at("base"));
    if (j.contains("drift")) source.drift = parse_shape(j.at("drift"));
    return source;
}

DetectorType parse_detector_type(const std::string& name) {
    if (name == "cpm") return DetectorType::Cpm;
    if (name == "naive_pairwise") return DetectorType::NaivePairwise;
    if (name == "naive_splits") return DetectorType::NaiveSplits;
    throw InvalidArgument("config: unknown detector type '" + name + "'");
}

std::string_view to_string(DetectorType type) {
    switch (type) {
        case DetectorType::Cpm: return "cpm";
        case DetectorType::NaivePairwise: return "naive_pairwise";
        case DetectorType::NaiveSplits: return "naive_splits";
    }
    return "unknown";
}

DetectorSpec parse_detector(const json& j) {
    reject_unknown_keys(j,
                        {"id", "type", "alpha", "kind", "alpha_mode", "t0", "evaluation_stride", "candidate_stride",
                         "outlier_gated", "alpha_star", "max_outliers", "n_grid"},
                        "config.detectors");
    DetectorSpec d;
    d.type = parse_detector_type(get_or<std::string>(j, "type", "cpm"));
    d.alpha = get_or(j, "alpha", d.alpha);
    d.kind = parse_statistic_kind(get_or<std::string>(j, "kind", std::string(to_string(d.kind))));
    d.alpha_mode = parse_alpha_mode(get_or<std::string>(j, "alpha_mode", std::string(to_string(d.alpha_mode))));
    d.t0 = get_or(j, "t0", d.t0);
    d.evaluation_stride = get_or(j, "evaluation_stride", d.evaluation_stride);
    d.candidate_stride = get_or(j, "candidate_stride", d.candidate_stride);
    d.outlier_gated = get_or(j, "outlier_gated", d.outlier_gated);
    d.alpha_star = get_or(j, "alpha_star", d.alpha_star);
    d.max_outliers = get_or(j, "max_outliers", d.max_outliers);
    d.n_grid = get_or(j, "n_grid", d.n_grid);
    if (j.contains("id")) {
        d.id = j.at("id").get<std::string>();
    } else if (d.type == DetectorType::Cpm) {
        d.id = "cpm_" + std::string(to_string(d.kind)) + (d.outlier_gated ? "_gated" : "");
    } else {
        d.id = std::string(to_string(d.type));
    }
    if (!(d.alpha > 0.0 && d.alpha < 1.0)) throw InvalidArgument("config: detector alpha must be in (0,1)");
    if (d.evaluation_stride < 0 || d.candidate_stride < 0) throw InvalidArgument("config: strides must be >= 0");
    if (d.outlier_gated && d.type != DetectorType::Cpm) {
        throw InvalidArgument("config: outlier gating applies to cpm detectors only");
    }
    return d;
}

void validate_config(const RunConfig& c) {
    if (c.batch_size < 1) throw InvalidArgument("config: batch_size must be >= 1");
    if (c.repetitions < 1) throw InvalidArgument("config: repetitions must be >= 1");
    if (c.calibration_streams < 10) throw InvalidArgument("config: calibration num_streams must be >= 10");
    if (c.detectors.empty()) throw InvalidArgument("config: no detectors");
    if (c.scenarios.empty()) throw InvalidArgument("config: no scenarios");
    c.loss_params.validate();
    validate_source(c.source);
    std::set<std::string> ids;
    for (const auto& d : c.detectors) {
        if (!ids.insert(d.id).second) throw InvalidArgument("config: duplicate detector id '" + d.id + "'");
        if (d.type == DetectorType::Cpm && d.t0 >= c.horizon()) {
            throw InvalidArgument("config: t0 must be below the horizon (" + std::to_string(c.horizon()) + ")");
        }
    }
    for (const auto& s : c.scenarios) {
        if (s.total_batches != c.total_batches) {
            throw InvalidArgument("config: scenario '" + s.display_name() + "' does not have total_batches batches");
        }
    }
}

ordered_json canonical(const RunConfig& c) {
    ordered_json j;
    j["batch_size"] = c.batch_size;
    j["change_batch"] = c.change_batch;
    j["total_batches"] = c.total_batches;
    j["repetitions"] = c.repetitions;
    j["seed"] = c.seed;
    j["calibration_streams"] = c.calibration_streams;
    j["loss"] = {{"l0", c.loss_params.l0}, {"l1", c.loss_params.l1}};
    if (const auto* beta = std::get_if<BetaSource>(&c.source)) {
        j["source"] = {{"base", {beta->base.a, beta->base.b}}, {"drift", {beta->drift.a, beta->drift.b}}};
    } else {
        const auto& pool = std::get<PoolSource>(c.source);
        ordered_json p;
        for (const auto& [name, entries] : {std::pair{"base", &pool.base}, std::pair{"drift", &pool.drift}}) {
            auto arr = ordered_json::array();
            for (const auto& e : *entries) arr.push_back({e.z, e.label});
            p[name] = std::move(arr);
        }
        j["source"] = std::move(p);
    }
    auto scenarios = ordered_json::array();
    for (const auto& s : c.scenarios) {
        scenarios.push_back({{"name", s.display_name()}, {"change_batch", s.change_batch}, {"schedule", s.schedule}});
    }
    j["scenarios"] = std::move(scenarios);
    auto detectors = ordered_json::array();
    for (const auto& d : c.detectors) {
        detectors.push_back({{"id", d.id},
                             {"type", to_string(d.type)},
                             {"alpha", d.alpha},
                             {"kind", to_string(d.kind)},
                             {"alpha_mode", to_string(d.alpha_mode)},
                             {"t0", d.t0},
                             {"evaluation_stride", d.evaluation_stride},
                             {"candidate_stride", d.candidate_stride},
                             {"outlier_gated", d.outlier_gated},
                             {"alpha_star", d.alpha_star},
                             {"max_outliers", d.max_outliers},
                             {"n_grid", d.n_grid}});
    }
    j["detectors"] = std::move(detectors);
    return j;
}

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

fs::path fresh_directory(const fs::path& root, const std::string& stem, std::ostream& log) {
    fs::path dir = root / stem;
    for (int version = 2; fs::exists(dir); ++version) {
        log << "note: " << dir.string() << " exists, writing a new version\n";
        dir = root / (stem + "-v" + std::to_string(version));
    }
    fs::create_directories(dir);
    return dir;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw InvalidArgument("cannot write " + path.string());
    return out;
}

std::vector<double> as_doubles(const std::vector<std::int64_t>& v) { return {v.begin(), v.end()}; }

void write_quartile_row(std::ostream& out, const std::string& prefix, const std::vector<double>& values) {
    out << prefix << ',' << values.size();
    if (values.empty()) {
        out << ",,,,,\n";
        return;
    }
    for (double q : {0.0, 0.25, 0.5, 0.75, 1.0}) out << ',' << csv::format_double(sample_quantile(values, q));
    out << '\n';
}

std::string optional_cell(const std::optional<std::int64_t>& v) { return v ? std::to_string(*v) : ""; }
std::string optional_cell(const std::optional<double>& v) { return v ? csv::format_double(*v) : ""; }

}  // namespace

RunConfig parse_run_config(std::istream& in, const fs::path& base_dir) {
    try {
        json j;
        in >> j;
        reject_unknown_keys(j,
                            {"batch_size", "change_batch", "total_batches", "repetitions", "seed", "output_dir",
                             "cache_dir", "calibration", "source", "loss", "scenarios", "detectors", "jobs"},
                            "config");
        if (!j.contains("seed")) throw InvalidArgument("config: seed is required");
        RunConfig c;
        c.seed = j.at("seed").get<std::uint64_t>();
        c.batch_size = get_or(j, "batch_size", c.batch_size);
        c.change_batch = get_or(j, "change_batch", c.change_batch);
        c.total_batches = get_or(j, "total_batches", c.total_batches);
        c.repetitions = get_or(j, "repetitions", c.repetitions);
        c.jobs = get_or(j, "jobs", c.jobs);
        if (j.contains("output_dir")) c.output_dir = resolve(base_dir, j.at("output_dir").get<std::string>());
        else c.output_dir = resolve(base_dir, c.output_dir.string());
        if (j.contains("cache_dir")) c.cache_dir = resolve(base_dir, j.at("cache_dir").get<std::string>());
        else c.cache_dir = resolve(base_dir, c.cache_dir.string());
        if (j.contains("calibration")) {
            const auto& cal = j.at("calibration");
            reject_unknown_keys(cal, {"num_streams"}, "config.calibration");
            c.calibration_streams = get_or(cal, "num_streams", c.calibration_streams);
        }
        if (j.contains("source")) c.source = parse_source(j.at("source"), base_dir);
        if (j.contains("loss")) {
            const auto& l = j.at("loss");
            reject_unknown_keys(l, {"l0", "l1"}, "config.loss");
            c.loss_params.l0 = get_or(l, "l0", c.loss_params.l0);
            c.loss_params.l1 = get_or(l, "l1", c.loss_params.l1);
        }
        const json scenarios = j.value("scenarios", json("all"));
        if (scenarios.is_string() && scenarios.get<std::string>() == "all") {
            for (auto name : builtin_scenarios()) c.scenarios.push_back(make_scenario(name, c.change_batch, c.total_batches));
        } else {
            for (const auto& s : scenarios) {
                if (s.is_string()) {
                    c.scenarios.push_back(make_scenario(parse_scenario_name(s.get<std::string>()), c.change_batch,
                                                        c.total_batches));
                    continue;
                }
                reject_unknown_keys(s, {"file", "name"}, "config.scenarios");
                auto path = resolve(base_dir, s.at("file").get<std::string>());
                std::ifstream file(path);
                if (!file) throw InvalidArgument("config: cannot open scenario file " + path.string());
                c.scenarios.push_back(read_scenario_json(file, get_or<std::string>(s, "name", path.stem().string())));
            }
        }
        if (!j.contains("detectors")) throw InvalidArgument("config: detectors are required");
        for (const auto& d : j.at("detectors")) c.detectors.push_back(parse_detector(d));
        validate_config(c);
        return c;
    } catch (const json::exception& e) {
        throw FormatError(std::string("config: ") + e.what());
    }
}

RunConfig load_run_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open config " + path.string());
    return parse_run_config(in, path.parent_path());
}

void apply_overrides(RunConfig& config, const ConfigOverrides& overrides) {
    if (overrides.output_dir) config.output_dir = *overrides.output_dir;
    if (overrides.seed) config.seed = *overrides.seed;
    if (overrides.jobs) config.jobs = *overrides.jobs;
    if (overrides.faithful) {
        for (auto& d : config.detectors) {
            d.evaluation_stride = 1;
            d.candidate_stride = 1;
        }
    }
}

std::string config_hash(const RunConfig& config) {
    char buffer[17];
    std::snprintf(buffer, sizeof buffer, "%016llx",
                  static_cast<unsigned long long>(fnv1a(canonical(config).dump())));
    return buffer;
}

fs::path cache_directory(const RunConfig& config) {
    if (const char* env = std::getenv("DRIFTWATCH_CACHE"); env && *env) return fs::path(env);
    return config.cache_dir;
}

std::vector<CalibrationSpec> required_calibrations(const RunConfig& config) {
    std::vector<CalibrationSpec> specs;
    std::set<std::string> seen;
    for (const auto& d : config.detectors) {
        if (d.type != DetectorType::Cpm) continue;
        auto spec = calibration_for(d, config.batch_size, config.horizon(), config.calibration_streams, config.seed);
        if (seen.insert(threshold_cache_name(spec)).second) specs.push_back(spec);
    }
    return specs;
}

std::vector<fs::path> cmd_calibrate(const RunConfig& config, std::ostream& log) {
    const fs::path dir = cache_directory(config);
    fs::create_directories(dir);
    std::vector<fs::path> paths;
    for (const auto& spec : required_calibrations(config)) {
        fs::path path = dir / threshold_cache_name(spec);
        if (fs::exists(path)) {
            load_threshold_table(path);
            log << "cached     " << path.string() << '\n';
        } else {
            auto table = calibrate_thresholds(spec, config.jobs);
            save_threshold_table(path, table);
            log << "calibrated " << path.string() << " (" << table.values().size() << " points)\n";
        }
        paths.push_back(path);
    }
    return paths;
}

fs::path cmd_run(const RunConfig& config, std::ostream& log) {
    const fs::path cache = cache_directory(config);
    std::map<std::string, std::shared_ptr<const ThresholdTable>> tables;
    for (const auto& d : config.detectors) {
        if (d.type != DetectorType::Cpm) continue;
        auto spec = calibration_for(d, config.batch_size, config.horizon(), config.calibration_streams, config.seed);
        fs::path path = cache / threshold_cache_name(spec);
        if (!fs::exists(path)) {
            throw MissingThresholds("missing threshold table " + path.string() +
                                    "; run `driftwatch calibrate --config <file>` first");
        }
        tables[d.id] = std::make_shared<const ThresholdTable>(load_threshold_table(path));
    }

    const fs::path dir = fresh_directory(config.output_dir, "run-" + config_hash(config), log);
    {
        auto out = open_output(dir / "config.json");
        out << canonical(config).dump(1) << '\n';
    }

    std::vector<AggregateReport> reports;
    auto records_csv = open_output(dir / "records.csv");
    records_csv << "scenario,detector,repetition,seed,d,k_hat,w_max,loss,false_alarm,missed,delay,theta_all,"
                   "theta_gated,theta_outliers,outlier_count\n";
    for (const auto& scenario : config.scenarios) {
        for (const auto& detector : config.detectors) {
            ExperimentSetup setup;
            setup.scenario = scenario;
            setup.source = config.source;
            setup.batch_size = config.batch_size;
            setup.repetitions = config.repetitions;
            setup.master_seed = config.seed;
            setup.loss_params = config.loss_params;
            setup.jobs = config.jobs;
            auto it = tables.find(detector.id);
            auto result = run_experiment(detector, setup, it == tables.end() ? nullptr : it->second);
            log << scenario.display_name() << " / " << detector.id << ": false alarm "
                << csv::format_double(result.report.false_alarm_prob) << ", missed "
                << csv::format_double(result.report.missed_prob) << '\n';
            for (const auto& r : result.records) {
                records_csv << csv::escape(r.scenario) << ',' << csv::escape(r.detector) << ',' << r.repetition << ','
                            << r.seed << ',' << optional_cell(r.outcome.d) << ',' << optional_cell(r.outcome.k_hat)
                            << ',' << csv::format_double(r.outcome.w_max) << ',' << csv::format_double(r.loss) << ','
                            << r.false_alarm << ',' << r.missed << ',' << optional_cell(r.delay) << ','
                            << optional_cell(r.theta_all) << ',' << optional_cell(r.theta_gated) << ','
                            << optional_cell(r.theta_outliers) << ',' << r.outlier_count << '\n';
            }
            reports.push_back(std::move(result.report));
        }
    }

    {
        auto out = open_output(dir / "report.json");
        write_reports_json(out, reports);
    }
    auto rates = open_output(dir / "rates.csv");
    rates << "scenario,detector,false_alarm_prob,missed_prob\n";
    auto delays = open_output(dir / "delays.csv");
    delays << "scenario,detector,n,min,q1,median,q3,max\n";
    auto losses = open_output(dir / "losses.csv");
    losses << "scenario,detector,n,min,q1,median,q3,max\n";
    auto theta = open_output(dir / "theta.csv");
    theta << "scenario,detector,variant,n,min,q1,median,q3,max\n";
    for (const auto& r : reports) {
        const std::string key = csv::escape(r.scenario) + ',' + csv::escape(r.detector);
        rates << key << ',' << csv::format_double(r.false_alarm_prob) << ',' << csv::format_double(r.missed_prob)
              << '\n';
        write_quartile_row(delays, key, as_doubles(r.delays));
        write_quartile_row(losses, key, r.losses);
        write_quartile_row(theta, key + ",all", r.theta_all);
        write_quartile_row(theta, key + ",gated", r.theta_gated);
        write_quartile_row(theta, key + ",outliers", r.theta_outliers);
    }
    auto curve = open_output(dir / "loss_curve.csv");
    curve << "scenario,b_d,loss\n";
    for (const auto& scenario : config.scenarios) {
        std::ostringstream rows;
        cmd_losscurve(scenario, config.batch_size, config.loss_params, rows);
        std::istringstream lines(rows.str());
        std::string line;
        std::getline(lines, line);  // header
        while (std::getline(lines, line)) curve << csv::escape(scenario.display_name()) << ',' << line << '\n';
    }
    log << "wrote " << dir.string() << '\n';
    return dir;
}

void cmd_peek(std::span<const double> alphas, std::int64_t sims, std::uint64_t seed, std::ostream& csv_out) {
    csv_out << "alpha,pr_v_ge_1,e_v\n";
    for (double alpha : alphas) {
        auto r = peeking_simulation(alpha, 100, 20, sims, seed);
        csv_out << csv::format_double(alpha) << ',' << csv::format_double(r.pr_v_ge_1) << ','
                << csv::format_double(r.e_v) << '\n';
    }
}

void cmd_losscurve(const DriftScenario& scenario, std::int64_t batch_size, const LossParams& params,
                   std::ostream& csv_out) {
    const std::int64_t k = scenario.change_batch * batch_size;
    csv_out << "b_d,loss\n";
    for (std::int64_t b = 1; b <= scenario.total_batches; ++b) {
        csv_out << b << ',' << csv::format_double(loss(k, b * batch_size, scenario.schedule, batch_size, params))
                << '\n';
    }
    csv_out << "inf," << csv::format_double(loss(k, std::nullopt, scenario.schedule, batch_size, params)) << '\n';
}

PoolSource cmd_ingest_check(std::istream& in, std::ostream& log) {
    auto pool = read_pool_csv(in);
    validate_source(pool);
    log << "base pool:  " << pool.base.size() << " rows\n"
        << "drift pool: " << pool.drift.size() << " rows\n";
    if (pool.drift.empty()) log << "warning: drift pool is empty; only all-zero schedules can be synthesized\n";
    return pool;
}

int exit_code_for(const std::exception& error) {
    if (dynamic_cast<const MissingThresholds*>(&error)) return 3;
    if (dynamic_cast<const InvalidArgument*>(&error) || dynamic_cast<const FormatError*>(&error)) return 2;
    if (dynamic_cast<const DegenerateSample*>(&error) || dynamic_cast<const CalibrationError*>(&error) ||
        dynamic_cast<const MissingMoments*>(&error)) {
        return 4;
    }
    return 1;
}

}  // namespace driftwatch
