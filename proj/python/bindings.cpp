#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "sqvdlm/benchmarks.hpp"
#include "sqvdlm/cli.hpp"
#include "sqvdlm/csv_io.hpp"
#include "sqvdlm/diagnostics.hpp"
#include "sqvdlm/em.hpp"
#include "sqvdlm/errors.hpp"
#include "sqvdlm/report_json.hpp"
#include "sqvdlm/synthetic.hpp"

namespace py = pybind11;
using namespace sqvdlm;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

py::object to_python(const report::Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

report::Json from_python(const py::object& o) {
    return report::Json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

// NaN marks a missing month.
MonthlySeries series_from(const std::string& start, const Array& values) {
    if (values.ndim() != 1) throw ContractError("series values must be one-dimensional");
    std::vector<Observation> v(std::size_t(values.shape(0)));
    const auto r = values.unchecked<1>();
    for (py::ssize_t i = 0; i < values.shape(0); ++i) {
        if (!std::isnan(r(i))) v[std::size_t(i)] = r(i);
    }
    return MonthlySeries(MonthStamp::parse(start), std::move(v));
}

Array array_from(const MonthlySeries& s) {
    Array out(py::ssize_t(s.size()));
    auto w = out.mutable_unchecked<1>();
    for (std::size_t i = 0; i < s.size(); ++i) w(py::ssize_t(i)) = s[i] ? *s[i] : std::numeric_limits<double>::quiet_NaN();
    return out;
}

ObservationPanel panel_from(const std::string& start, const Array& target, const Array& replicates) {
    if (replicates.ndim() != 2) throw ContractError("replicates must be a (months, a) array");
    if (replicates.shape(0) != target.shape(0)) throw ContractError("replicates and target lengths differ");
    std::vector<MonthlySeries> reps;
    const auto r = replicates.unchecked<2>();
    for (py::ssize_t j = 0; j < replicates.shape(1); ++j) {
        std::vector<Observation> v(std::size_t(replicates.shape(0)));
        for (py::ssize_t t = 0; t < replicates.shape(0); ++t) {
            if (!std::isnan(r(t, j))) v[std::size_t(t)] = r(t, j);
        }
        reps.emplace_back(MonthStamp::parse(start), std::move(v));
    }
    return ObservationPanel(series_from(start, target), std::move(reps));
}

Array replicate_matrix(const ObservationPanel& p) {
    Array out({py::ssize_t(p.length()), py::ssize_t(p.replicate_count())});
    auto w = out.mutable_unchecked<2>();
    for (std::size_t j = 0; j < p.replicate_count(); ++j)
        for (std::size_t t = 0; t < p.length(); ++t) {
            const auto& v = p.replicate(j)[t];
            w(py::ssize_t(t), py::ssize_t(j)) = v ? *v : std::numeric_limits<double>::quiet_NaN();
        }
    return out;
}

EmConfig em_from(const py::object& config) {
    if (config.is_none()) return {};
    return report::em_config_from_json(from_python(config), {}, "<em_config>");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Dynamic linear models for monthly targets with replicated search-volume series";

    static py::exception<Error> error(m, "SqvdlmError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            PyErr_SetString(error.ptr(), e.what());
        }
    });

    py::class_<ObservationPanel>(m, "Panel")
        .def(py::init(&panel_from), py::arg("start"), py::arg("target"), py::arg("replicates"),
             "Panel from a start month 'YYYY-MM', a target vector and a (months, a) replicate array; NaN is missing.")
        .def_static("read_csv", &io::read_panel_csv_file, py::arg("path"))
        .def_static("from_csv_text", [](const std::string& text) {
            std::istringstream in(text);
            return io::read_panel_csv(in);
        })
        .def("to_csv_text", [](const ObservationPanel& p) {
            std::ostringstream out;
            io::write_panel_csv(out, p);
            return out.str();
        })
        .def_property_readonly("start", [](const ObservationPanel& p) { return p.start().to_string(); })
        .def_property_readonly("end", [](const ObservationPanel& p) { return p.end().to_string(); })
        .def_property_readonly("length", &ObservationPanel::length)
        .def_property_readonly("replicate_count", &ObservationPanel::replicate_count)
        .def_property_readonly("target", [](const ObservationPanel& p) { return array_from(p.target()); })
        .def_property_readonly("replicates", &replicate_matrix)
        .def("select_replicates", &ObservationPanel::select_replicates, py::arg("which"))
        .def("split", [](const ObservationPanel& p, const std::string& cutoff) {
            auto s = split(p, MonthStamp::parse(cutoff));
            return py::make_tuple(s.train, s.test);
        }, py::arg("cutoff"))
        .def("__len__", &ObservationPanel::length);

    m.def("simulate", [](std::uint64_t seed, std::size_t months, std::size_t replicates, const std::string& scenario) {
        auto s = scenario == "paper-like" ? paper_like_scenario() : load_scenario_file(scenario);
        s.config.seed = seed;
        s.config.months = months;
        s.config.replicates = replicates;
        s.config.validate();
        const auto sim = simulate(s.config);
        return py::make_tuple(sim.panel, to_python(report::truth_json(sim, s.config)));
    }, py::arg("seed") = 1, py::arg("months") = 117, py::arg("replicates") = 11, py::arg("scenario") = "paper-like",
       "Simulated panel and a dict with the configuration, latent paths and noise draws.");

    m.def("fit", [](const ObservationPanel& panel, const py::object& em_config) {
        const auto cfg = em_from(em_config);
        return to_python(report::json_of(fit(panel, panel.replicate_count(), cfg)));
    }, py::arg("panel"), py::arg("em_config") = py::none(),
       "Multistart EM fit of the replicate model on the panel as given (no demeaning).");

    m.def("dlm_forecast", [](const ObservationPanel& train, std::size_t horizon, const py::object& em_config,
                             const std::string& name) {
        FitReport fit;
        ForecastResult fc;
        auto out = dlm_forecaster(train, horizon, em_from(em_config), name, &fit, &fc);
        py::dict d;
        d["output"] = to_python(report::json_of(out));
        d["fit"] = to_python(report::json_of(fit));
        d["forecast"] = to_python(report::json_of(fc));
        return d;
    }, py::arg("train"), py::arg("horizon") = 12, py::arg("em_config") = py::none(), py::arg("name") = "DLM1",
       "Demeans the training panel, fits by EM and forecasts.");

    m.def("dlm0", [](const std::string& start, const Array& y, std::size_t horizon, const py::object& em_config) {
        return to_python(report::json_of(dlm0(series_from(start, y), horizon, em_from(em_config))));
    }, py::arg("start"), py::arg("y"), py::arg("horizon") = 12, py::arg("em_config") = py::none());

    m.def("snaive", [](const std::string& start, const Array& y, std::size_t horizon) {
        return to_python(report::json_of(snaive(series_from(start, y), horizon)));
    }, py::arg("start"), py::arg("y"), py::arg("horizon") = 12);

    m.def("holt_winters", [](const std::string& start, const Array& y, std::size_t horizon) {
        return to_python(report::json_of(holt_winters(series_from(start, y), horizon)));
    }, py::arg("start"), py::arg("y"), py::arg("horizon") = 12);

    m.def("sarima", [](const std::string& start, const Array& y, std::size_t horizon) {
        SarimaOptions o;
        o.horizon = horizon;
        return to_python(report::json_of(sarima_fit(series_from(start, y), o)));
    }, py::arg("start"), py::arg("y"), py::arg("horizon") = 12, "AIC selection over the default order grid.");

    m.def("mae", [](const std::vector<double>& a, const std::vector<double>& p) { return mae(a, p); });
    m.def("mape", [](const std::vector<double>& a, const std::vector<double>& p) { return mape(a, p); });
    m.def("rmse", [](const std::vector<double>& a, const std::vector<double>& p) { return rmse(a, p); });

    m.def("ljung_box", [](const std::vector<double>& residuals, int max_lag, int fitted) {
        const auto r = ljung_box(residuals, max_lag, fitted);
        return py::make_tuple(r.statistic, r.p_value, r.df);
    }, py::arg("residuals"), py::arg("max_lag"), py::arg("fitted_parameters") = 0,
       "(statistic, p_value, df)");

    m.def("adf_test", [](const std::vector<double>& x, int max_lag) {
        const auto r = adf_test(x, max_lag);
        py::dict d;
        d["statistic"] = r.statistic;
        d["lags"] = r.lags;
        d["n"] = r.n;
        d["critical_value"] = r.critical_value;
        d["reject"] = r.reject;
        return d;
    }, py::arg("x"), py::arg("max_lag"));

    m.def("prewhitened_ccf", [](const std::vector<double>& x, const std::vector<double>& y, int max_lag, int max_ar) {
        return to_python(report::json_of(prewhitened_ccf(x, y, max_lag, max_ar)));
    }, py::arg("x"), py::arg("y"), py::arg("max_lag"), py::arg("max_ar") = 12);

    m.def("run_cli", [](std::vector<std::string> args) {
        args.insert(args.begin(), "sqvdlm");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = cli::run(int(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
    }, py::arg("args"), "Runs a CLI command in-process; returns (exit_code, stdout, stderr).");
}
