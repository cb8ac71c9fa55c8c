#include "driftwatch/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <istream>

#include <json.hpp>

#include "driftwatch/csv.hpp"
#include "driftwatch/error.hpp"
#include "driftwatch/random.hpp"

namespace driftwatch {

namespace {

struct NamedScenario {
    ScenarioName name;
    std::string_view text;
};

constexpr NamedScenario kNames[] = {
    {ScenarioName::SuddenQuarter, "sudden_quarter"},
    {ScenarioName::SuddenHalf, "sudden_half"},
    {ScenarioName::SuddenFull, "sudden_full"},
    {ScenarioName::SuddenHalfReturn, "sudden_half_return"},
    {ScenarioName::SuddenFullReturn, "sudden_full_return"},
    {ScenarioName::GradualToHalf, "gradual_to_half"},
    {ScenarioName::GradualToFull, "gradual_to_full"},
    {ScenarioName::GradualLongDelay, "gradual_long_delay"},
    {ScenarioName::Custom, "custom"},
};

// Ramps step by 5 percentage points; dividing by 20 keeps 0.05 * k exact
// where the decimal is representable.
double ramp(std::int64_t steps) { return static_cast<double>(steps) / 20.0; }

constexpr std::int64_t kReturnBatches = 15;

}  // namespace

std::string_view to_string(ScenarioName name) {
    for (const auto& n : kNames) {
        if (n.name == name) return n.text;
    }
    return "unknown";
}

ScenarioName parse_scenario_name(std::string_view name) {
    for (const auto& n : kNames) {
        if (n.text == name) return n.name;
    }
    // The same scenario is sometimes called gradual_half_return.
    if (name == "gradual_half_return") return ScenarioName::SuddenHalfReturn;
    throw InvalidArgument("unknown scenario '" + std::string(name) + "'");
}

const std::vector<ScenarioName>& builtin_scenarios() {
    static const std::vector<ScenarioName> all{
        ScenarioName::SuddenQuarter,   ScenarioName::SuddenHalf,       ScenarioName::SuddenFull,
        ScenarioName::SuddenHalfReturn, ScenarioName::SuddenFullReturn, ScenarioName::GradualToHalf,
        ScenarioName::GradualToFull,   ScenarioName::GradualLongDelay,
    };
    return all;
}

double schedule(ScenarioName name, std::int64_t j, std::int64_t change_batch, std::int64_t total_batches) {
    if (change_batch < 0 || total_batches < 1) throw InvalidArgument("schedule: invalid batch counts");
    if (j < 1 || j > total_batches) {
        throw InvalidArgument("schedule: batch " + std::to_string(j) + " outside 1.." + std::to_string(total_batches));
    }
    const std::int64_t after = j - change_batch;
    if (after <= 0) return 0.0;
    switch (name) {
        case ScenarioName::SuddenQuarter: return 0.25;
        case ScenarioName::SuddenHalf: return 0.5;
        case ScenarioName::SuddenFull: return 1.0;
        case ScenarioName::SuddenHalfReturn: return after <= kReturnBatches ? 0.5 : 0.0;
        case ScenarioName::SuddenFullReturn: return after <= kReturnBatches ? 1.0 : 0.0;
        case ScenarioName::GradualToHalf: return after <= 10 ? ramp(after) : 0.5;
        case ScenarioName::GradualToFull: return after <= 20 ? ramp(after) : 1.0;
        case ScenarioName::GradualLongDelay: return std::min(1.0, ramp((after + 2) / 3));
        case ScenarioName::Custom: break;
    }
    throw InvalidArgument("schedule: custom scenarios carry their own schedule");
}

double DriftScenario::p(std::int64_t j) const {
    if (j < 1 || j > static_cast<std::int64_t>(schedule.size())) {
        throw InvalidArgument("scenario: batch " + std::to_string(j) + " out of range");
    }
    return schedule[static_cast<std::size_t>(j - 1)];
}

std::string DriftScenario::display_name() const {
    return name == ScenarioName::Custom && !custom_name.empty() ? custom_name : std::string(to_string(name));
}

DriftScenario make_scenario(ScenarioName name, std::int64_t change_batch, std::int64_t total_batches) {
    if (change_batch >= total_batches) throw InvalidArgument("scenario: change batch must precede the last batch");
    DriftScenario s;
    s.name = name;
    s.change_batch = change_batch;
    s.total_batches = total_batches;
    s.schedule.reserve(static_cast<std::size_t>(total_batches));
    for (std::int64_t j = 1; j <= total_batches; ++j) s.schedule.push_back(schedule(name, j, change_batch, total_batches));
    return s;
}

DriftScenario make_custom_scenario(std::vector<double> values, std::int64_t change_batch, std::string name) {
    const auto total = static_cast<std::int64_t>(values.size());
    if (total < 1 || change_batch < 0 || change_batch >= total) {
        throw InvalidArgument("custom scenario: need 0 <= change_batch < total_batches");
    }
    for (std::int64_t j = 1; j <= total; ++j) {
        double p = values[static_cast<std::size_t>(j - 1)];
        if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("custom scenario: p_" + std::to_string(j) + " outside [0,1]");
        if (j <= change_batch && p != 0.0) {
            throw InvalidArgument("custom scenario: p_" + std::to_string(j) + " must be 0 before the change batch");
        }
    }
    DriftScenario s;
    s.name = ScenarioName::Custom;
    s.custom_name = std::move(name);
    s.change_batch = change_batch;
    s.total_batches = total;
    s.schedule = std::move(values);
    return s;
}

DriftScenario read_scenario_json(std::istream& in, std::string name) {
    try {
        nlohmann::json j;
        in >> j;
        auto values = j.at("schedule").get<std::vector<double>>();
        auto total = j.value("total_batches", static_cast<std::int64_t>(values.size()));
        if (total != static_cast<std::int64_t>(values.size())) {
            throw InvalidArgument("scenario file: total_batches does not match schedule length");
        }
        return make_custom_scenario(std::move(values), j.at("change_batch").get<std::int64_t>(), std::move(name));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("scenario file: ") + e.what());
    }
}

BetaSource beta_preset(std::string_view name) {
    if (name == "default") return BetaSource{{8.0, 2.0}, {2.0, 2.0}};
    if (name == "overconfident") return BetaSource{{8.0, 2.0}, {20.0, 1.0}};
    throw InvalidArgument("unknown source preset '" + std::string(name) + "'");
}

PoolSource read_pool_csv(std::istream& in) {
    auto records = csv::read_all(in);
    if (records.empty() || records.front() != std::vector<std::string>{"z", "label", "pool"}) {
        throw FormatError("pool csv: header must be z,label,pool");
    }
    PoolSource pools;
    for (std::size_t row = 1; row < records.size(); ++row) {
        const auto& r = records[row];
        if (r.size() != 3) throw FormatError("pool csv: row " + std::to_string(row + 1) + " needs 3 fields");
        PoolEntry entry{csv::parse_double(r[0]), r[1]};
        if (!(entry.z >= 0.0 && entry.z <= 1.0)) {
            throw FormatError("pool csv: z outside [0,1] on row " + std::to_string(row + 1));
        }
        if (r[2] == "base") {
            pools.base.push_back(std::move(entry));
        } else if (r[2] == "drift") {
            pools.drift.push_back(std::move(entry));
        } else {
            throw FormatError("pool csv: pool must be base or drift on row " + std::to_string(row + 1));
        }
    }
    return pools;
}

void validate_source(const ConfidenceSource& source) {
    if (const auto* beta = std::get_if<BetaSource>(&source)) {
        for (const auto& shape : {beta->base, beta->drift}) {
            if (!(shape.a > 0.0 && shape.b > 0.0)) throw InvalidArgument("beta source: shapes must be positive");
        }
        return;
    }
    const auto& pool = std::get<PoolSource>(source);
    if (pool.base.empty()) throw InvalidArgument("pool source: base pool is empty");
    for (const auto* entries : {&pool.base, &pool.drift}) {
        for (const auto& e : *entries) {
            if (!(e.z >= 0.0 && e.z <= 1.0)) throw InvalidArgument("pool source: z outside [0,1]");
        }
    }
}

std::int64_t drift_count(std::int64_t batch_size, double p) {
    // Absorbs representation error such as 20 * 0.35 = 6.999...
    return static_cast<std::int64_t>(std::floor(static_cast<double>(batch_size) * p + 0.5 + 1e-9));
}

ConfidenceStream synthesize_stream(const DriftScenario& scenario, const ConfidenceSource& source,
                                   std::int64_t batch_size, std::uint64_t seed) {
    if (batch_size < 1) throw InvalidArgument("synthesize: batch size must be >= 1");
    validate_source(source);
    if (const auto* pool = std::get_if<PoolSource>(&source); pool && pool->drift.empty()) {
        if (std::any_of(scenario.schedule.begin(), scenario.schedule.end(),
                        [&](double p) { return drift_count(batch_size, p) > 0; })) {
            throw InvalidArgument("synthesize: drift pool is empty but the schedule requires drift observations");
        }
    }

    Engine engine(derive_seed(seed, seed_purpose::synthesis, 0));
    std::vector<Observation> observations;
    observations.reserve(static_cast<std::size_t>(scenario.total_batches * batch_size));
    std::vector<char> flags(static_cast<std::size_t>(batch_size));
    for (std::int64_t j = 1; j <= scenario.total_batches; ++j) {
        std::int64_t drift = drift_count(batch_size, scenario.p(j));
        std::fill(flags.begin(), flags.end(), 0);
        std::fill_n(flags.begin(), drift, 1);
        shuffle_in_place(std::span<char>(flags), engine);
        for (char flag : flags) {
            Observation obs;
            obs.t = static_cast<std::int64_t>(observations.size()) + 1;
            obs.is_drift = flag != 0;
            if (const auto* beta = std::get_if<BetaSource>(&source)) {
                const auto& shape = obs.is_drift ? beta->drift : beta->base;
                obs.z = draw_beta(engine, shape.a, shape.b);
            } else {
                const auto& pool = std::get<PoolSource>(source);
                const auto& entries = obs.is_drift ? pool.drift : pool.base;
                const auto& entry = entries[draw_index(engine, entries.size())];
                obs.z = entry.z;
                obs.label = entry.label;
            }
            observations.push_back(std::move(obs));
        }
    }
    return ConfidenceStream(std::move(observations), batch_size, scenario.change_batch * batch_size);
}

}  // namespace driftwatch
