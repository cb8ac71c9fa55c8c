#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "driftwatch/cpm.hpp"
#include "driftwatch/density.hpp"
#include "driftwatch/error.hpp"
#include "driftwatch/evaluation.hpp"
#include "driftwatch/scenarios.hpp"
#include "driftwatch/thresholds.hpp"
#include "driftwatch/two_sample.hpp"

namespace py = pybind11;
namespace dw = driftwatch;

namespace {

dw::StatisticKind kind_of(const std::string& name) { return dw::parse_statistic_kind(name); }

dw::ConfidenceSource source_of(const std::string& preset) { return dw::beta_preset(preset); }

}  // namespace

PYBIND11_MODULE(_driftwatch, m) {
    m.doc() = "Sequential drift detection on model confidence streams";

    auto error = py::register_exception<dw::Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<dw::InvalidArgument>(m, "InvalidArgument", error.ptr());
    py::register_exception<dw::FormatError>(m, "FormatError", error.ptr());
    py::register_exception<dw::DegenerateSample>(m, "DegenerateSample", error.ptr());
    py::register_exception<dw::CalibrationError>(m, "CalibrationError", error.ptr());
    py::register_exception<dw::MissingThresholds>(m, "MissingThresholds", error.ptr());
    py::register_exception<dw::MissingMoments>(m, "MissingMoments", error.ptr());

    m.def(
        "two_sample_statistic",
        [](const std::string& kind, const std::vector<double>& a, const std::vector<double>& b) {
            return dw::two_sample_statistic(kind_of(kind), a, b);
        },
        py::arg("kind"), py::arg("sample0"), py::arg("sample1"));

    m.def(
        "scan_splits",
        [](const std::string& kind, const std::vector<double>& z, std::int64_t candidate_stride) {
            dw::ClosedFormMoments moments;
            auto s = dw::scan_splits(kind_of(kind), z, candidate_stride, moments);
            return py::make_tuple(s.tau, s.w_max);
        },
        py::arg("kind"), py::arg("z"), py::arg("candidate_stride") = 1, "Returns (tau, w_max).");

    py::class_<dw::ThresholdTable, std::shared_ptr<dw::ThresholdTable>>(m, "ThresholdTable")
        .def_property_readonly("values", &dw::ThresholdTable::values)
        .def("at", &dw::ThresholdTable::at)
        .def("alpha_eval", &dw::ThresholdTable::alpha_eval);

    m.def(
        "calibrate_thresholds",
        [](const std::string& kind, const std::string& alpha_mode, double alpha, std::int64_t t0,
           std::int64_t horizon, std::int64_t evaluation_stride, std::int64_t candidate_stride,
           std::int64_t num_streams, std::uint64_t seed) {
            dw::CalibrationSpec spec;
            spec.kind = kind_of(kind);
            spec.alpha_mode = dw::parse_alpha_mode(alpha_mode);
            spec.alpha = alpha;
            spec.t0 = t0;
            spec.horizon = horizon;
            spec.evaluation_stride = evaluation_stride;
            spec.candidate_stride = candidate_stride;
            spec.num_streams = num_streams;
            spec.seed = seed;
            py::gil_scoped_release release;
            return std::make_shared<dw::ThresholdTable>(dw::calibrate_thresholds(spec));
        },
        py::arg("kind") = "cvm", py::arg("alpha_mode") = "horizon_total", py::arg("alpha") = 0.05,
        py::arg("t0") = 25, py::arg("horizon") = 2000, py::arg("evaluation_stride") = 20,
        py::arg("candidate_stride") = 20, py::arg("num_streams") = 2000, py::arg("seed") = 0);

    m.def(
        "detect",
        [](std::shared_ptr<dw::ThresholdTable> table, const std::vector<double>& z) {
            dw::CpmDetector detector(table);
            auto out = detector.run(z);
            return py::make_tuple(out.d, out.k_hat, out.w_max);
        },
        py::arg("table"), py::arg("z"), "Runs a CPM over z. Returns (d, k_hat, w_max); d is None when undetected.");

    m.def(
        "synthesize_stream",
        [](const std::string& scenario, std::int64_t batch_size, std::uint64_t seed, const std::string& preset) {
            auto s = dw::make_scenario(dw::parse_scenario_name(scenario));
            auto stream = dw::synthesize_stream(s, source_of(preset), batch_size, seed);
            std::vector<double> z;
            std::vector<bool> drift;
            for (const auto& obs : stream.observations()) {
                z.push_back(obs.z);
                drift.push_back(obs.is_drift);
            }
            return py::make_tuple(z, drift, stream.changepoint());
        },
        py::arg("scenario"), py::arg("batch_size") = 20, py::arg("seed") = 0, py::arg("preset") = "default",
        "Returns (z, is_drift, changepoint).");

    m.def("schedule", [](const std::string& name) { return dw::make_scenario(dw::parse_scenario_name(name)).schedule; },
          py::arg("scenario"));

    m.def(
        "loss",
        [](std::optional<std::int64_t> d, const std::string& scenario, std::int64_t batch_size, double l0, double l1) {
            auto s = dw::make_scenario(dw::parse_scenario_name(scenario));
            return dw::loss(s.change_batch * batch_size, d, s.schedule, batch_size, dw::LossParams{l0, l1});
        },
        py::arg("d"), py::arg("scenario"), py::arg("batch_size") = 20, py::arg("l0") = -1000.0,
        py::arg("l1") = -250.0);

    m.def("hochberg_adjust", [](const std::vector<double>& p) { return dw::hochberg_adjust(p); });

    m.def(
        "significant_regions",
        [](const std::vector<double>& before, const std::vector<double>& after, double alpha_star) {
            auto result = dw::local_density_test(dw::kde_fit(before), dw::kde_fit(after), dw::kDefaultGridPoints,
                                                 alpha_star);
            std::vector<py::tuple> out;
            for (const auto& r : dw::extract_regions(result).regions) {
                out.push_back(py::make_tuple(r.lo, r.hi, r.p_value, r.n_points));
            }
            return out;
        },
        py::arg("before"), py::arg("after"), py::arg("alpha_star") = 0.05, "Returns [(lo, hi, p_value, n_points)].");

    m.def(
        "find_outliers",
        [](const std::vector<double>& z, std::int64_t k_hat, std::int64_t d, double alpha_star,
           std::size_t max_outliers) {
            return dw::find_outliers(z, k_hat, d, alpha_star, max_outliers).selection.theta_indices;
        },
        py::arg("z"), py::arg("k_hat"), py::arg("d"), py::arg("alpha_star") = 0.05,
        py::arg("max_outliers") = dw::kDefaultMaxOutliers, "Returns 1-based indices of selected outliers.");

    m.def(
        "peeking_simulation",
        [](double alpha, std::int64_t n, std::int64_t start, std::int64_t sims, std::uint64_t seed) {
            auto r = dw::peeking_simulation(alpha, n, start, sims, seed);
            return py::make_tuple(r.pr_v_ge_1, r.e_v);
        },
        py::arg("alpha"), py::arg("n") = 100, py::arg("start") = 20, py::arg("sims") = 10000, py::arg("seed") = 0,
        "Returns (Pr(V >= 1), E(V)).");

    m.def(
        "naive_detect",
        [](const std::string& method, const std::vector<double>& z, std::int64_t batch_size, double alpha) {
            if (method == "pairwise") return dw::naive_pairwise(z, batch_size, alpha);
            if (method == "splits") return dw::naive_splits(z, batch_size, alpha);
            throw dw::InvalidArgument("method must be 'pairwise' or 'splits'");
        },
        py::arg("method"), py::arg("z"), py::arg("batch_size") = 20, py::arg("alpha") = 0.05);
}
