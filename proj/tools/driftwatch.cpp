#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "driftwatch/error.hpp"
#include "driftwatch/harness.hpp"
#include "driftwatch/parallel.hpp"

namespace dw = driftwatch;

namespace {

struct Common {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> jobs;
    bool faithful = false;
};

void add_common(CLI::App* cmd, Common& c, bool needs_config) {
    auto* opt = cmd->add_option("--config", c.config, "JSON run configuration");
    if (needs_config) opt->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", c.out, "output directory");
    cmd->add_option("--seed", c.seed, "master seed");
    cmd->add_option("--jobs", c.jobs, "worker threads (0 = all cores)");
    cmd->add_flag("--faithful", c.faithful, "evaluate and split at every observation");
}

dw::RunConfig load(const Common& c) {
    auto config = dw::load_run_config(c.config);
    dw::ConfigOverrides o;
    if (!c.out.empty()) o.output_dir = c.out;
    o.seed = c.seed;
    if (c.jobs) o.jobs = dw::resolve_jobs(*c.jobs);
    o.faithful = c.faithful;
    dw::apply_overrides(config, o);
    return config;
}

// Writes to --out when given, stdout otherwise.
template <class Fn>
void emit(const std::string& out, Fn&& fn) {
    if (out.empty()) {
        fn(std::cout);
        return;
    }
    std::ofstream file(out);
    if (!file) throw dw::InvalidArgument("cannot write " + out);
    fn(file);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Confidence-stream drift detection toolkit"};
    app.require_subcommand(1);

    Common calibrate_args, run_args;
    auto* calibrate = app.add_subcommand("calibrate", "simulate null streams and cache CPM thresholds");
    add_common(calibrate, calibrate_args, true);
    auto* run = app.add_subcommand("run", "run every scenario and detector in a config");
    add_common(run, run_args, true);

    std::vector<double> alphas{0.05, 0.01, 0.005, 0.001};
    std::int64_t sims = 10000;
    std::uint64_t peek_seed = 0;
    std::string peek_out;
    auto* peek = app.add_subcommand("peek", "false alarms from repeated testing on growing samples");
    peek->add_option("--alpha", alphas, "significance levels")->expected(0, -1);
    peek->add_option("--sims", sims, "simulations per alpha");
    peek->add_option("--seed", peek_seed, "seed");
    peek->add_option("--out", peek_out, "CSV file (default stdout)");

    std::string scenario_name = "sudden_full";
    std::string scenario_file;
    std::int64_t batch_size = 20, change_batch = dw::kDefaultChangeBatch, total_batches = dw::kDefaultTotalBatches;
    dw::LossParams params;
    std::string curve_out;
    auto* curve = app.add_subcommand("losscurve", "loss as a function of the detection batch");
    curve->add_option("--scenario", scenario_name, "built-in scenario name");
    curve->add_option("--scenario-file", scenario_file, "custom scenario JSON")->check(CLI::ExistingFile);
    curve->add_option("--batch-size", batch_size);
    curve->add_option("--change-batch", change_batch);
    curve->add_option("--total-batches", total_batches);
    curve->add_option("--l0", params.l0, "false alarm loss");
    curve->add_option("--l1", params.l1, "missed alarm loss");
    curve->add_option("--out", curve_out, "CSV file (default stdout)");

    std::string pool_path;
    auto* ingest = app.add_subcommand("ingest-check", "validate a pool CSV (z,label,pool)");
    ingest->add_option("pool", pool_path, "pool CSV")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*calibrate) {
            dw::cmd_calibrate(load(calibrate_args), std::cout);
        } else if (*run) {
            dw::cmd_run(load(run_args), std::cout);
        } else if (*peek) {
            emit(peek_out, [&](std::ostream& out) { dw::cmd_peek(alphas, sims, peek_seed, out); });
        } else if (*curve) {
            dw::DriftScenario scenario;
            if (!scenario_file.empty()) {
                std::ifstream in(scenario_file);
                scenario = dw::read_scenario_json(in, scenario_file);
            } else {
                scenario = dw::make_scenario(dw::parse_scenario_name(scenario_name), change_batch, total_batches);
            }
            emit(curve_out, [&](std::ostream& out) { dw::cmd_losscurve(scenario, batch_size, params, out); });
        } else if (*ingest) {
            std::ifstream in(pool_path);
            dw::cmd_ingest_check(in, std::cout);
        }
    } catch (const std::exception& e) {
        std::cerr << "driftwatch: " << e.what() << '\n';
        return dw::exit_code_for(e);
    }
    return 0;
}
