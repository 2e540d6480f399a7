#include "sqvdlm/report_json.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "sqvdlm/csv_io.hpp"
#include "sqvdlm/errors.hpp"

namespace sqvdlm::report {

namespace {

Json num(double x) {
    if (!std::isfinite(x)) return nullptr;
    return x;
}

Json nums(const std::vector<double>& v) { return numbers(v); }

template <class Derived>
Json matrix_rows(const Eigen::MatrixBase<Derived>& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(num(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string initial_state_name(InitialState s) { return s == InitialState::Fixed ? "fixed" : "diffuse"; }

std::string transform_name(Transform t) { return t == Transform::Log ? "log" : "identity"; }

Json start_diagnostics(const std::vector<StartDiagnostic>& starts) {
    Json a = Json::array();
    for (const auto& s : starts) {
        Json d;
        d["index"] = s.index;
        d["ok"] = s.ok;
        d["loglik"] = s.ok ? num(s.loglik) : Json(nullptr);
        d["reason"] = s.reason;
        a.push_back(std::move(d));
    }
    return a;
}

template <class Report>
Json fit_json(const Report& r) {
    Json j;
    j["params"] = json_of(r.params);
    j["loglik"] = num(r.loglik);
    j["converged"] = r.converged;
    j["iterations_used"] = r.iterations_used;
    j["best_start"] = r.best_start;
    j["replicates"] = r.replicates;
    j["ci"] = json_of(r.ci);
    j["loglik_trace"] = nums(r.loglik_trace);
    j["start_diagnostics"] = start_diagnostics(r.start_diagnostics);
    j["config"] = json_of(r.config);
    return j;
}

[[noreturn]] void bad(const std::string& source, const std::string& what) { throw ParseError(source, 0, what); }

}  // namespace

Json numbers(const std::vector<double>& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(num(x));
    return a;
}

Json json_of(const DlmParams& p) {
    Json j;
    j["beta"] = num(p.beta);
    j["sigma2_y1"] = num(p.sigma2_y1);
    j["sigma2_y2"] = num(p.sigma2_y2);
    j["sigma2_x1"] = num(p.sigma2_x1);
    j["sigma2_x2"] = num(p.sigma2_x2);
    j["C"] = matrix_rows(p.C);
    j["x0"] = Json::array({num(p.x0(0)), num(p.x0(1))});
    return j;
}

Json json_of(const ScalarDlmParams& p) {
    Json j;
    j["sigma2_y"] = num(p.sigma2_y);
    j["sigma2_x"] = num(p.sigma2_x);
    j["C"] = matrix_rows(p.C)[0];
    j["x0"] = num(p.x0);
    return j;
}

Json json_of(const EmConfig& c) {
    Json j;
    j["max_iterations"] = c.max_iterations;
    j["rel_tol"] = num(c.rel_tol);
    j["n_starts"] = c.n_starts;
    j["warmup_iterations"] = c.warmup_iterations;
    j["seed"] = c.seed;
    j["variance_floor"] = num(c.variance_floor);
    j["initial_state"] = initial_state_name(c.initial_state);
    j["compute_ci"] = c.compute_ci;
    j["ci_level"] = num(c.ci_level);
    return j;
}

Json json_of(const IntervalReport& ci) {
    Json j;
    j["level"] = num(ci.level);
    j["reliable"] = ci.reliable;
    j["status"] = ci.status;
    Json list = Json::array();
    for (const auto& p : ci.intervals) {
        Json e;
        e["name"] = p.name;
        e["estimate"] = num(p.estimate);
        e["lower"] = num(p.lower);
        e["upper"] = num(p.upper);
        e["std_error"] = num(p.std_error);
        e["transform"] = transform_name(p.transform);
        list.push_back(std::move(e));
    }
    j["intervals"] = std::move(list);
    return j;
}

Json json_of(const FitReport& r) {
    Json j = fit_json(r);
    j["model"] = "replicate";
    return j;
}

Json json_of(const ScalarFitReport& r) {
    Json j = fit_json(r);
    j["model"] = "scalar";
    return j;
}

Json json_of(const ForecastResult& f) {
    Json j;
    j["first"] = f.first.to_string();
    j["level"] = num(f.level);
    j["offsets_applied"] = f.offsets_applied;
    j["target_mean"] = nums(f.target_mean);
    j["target_var"] = nums(f.target_var);
    j["target_lower"] = nums(f.target_lower);
    j["target_upper"] = nums(f.target_upper);
    if (!f.sqv_mean.empty()) {
        j["sqv_mean"] = nums(f.sqv_mean);
        j["sqv_var"] = nums(f.sqv_var);
        j["sqv_lower"] = nums(f.sqv_lower);
        j["sqv_upper"] = nums(f.sqv_upper);
    }
    return j;
}

Json json_of(const ForecasterOutput& f) {
    Json j;
    j["model"] = f.model;
    j["description"] = f.description;
    Json meta = Json::object();
    for (const auto& [k, v] : f.meta) meta[k] = num(v);
    j["model_meta"] = std::move(meta);
    j["level"] = num(f.level);
    j["forecast_start"] = f.forecast_start.to_string();
    j["forecasts"] = nums(f.forecasts);
    j["lower"] = f.lower ? nums(*f.lower) : Json(nullptr);
    j["upper"] = f.upper ? nums(*f.upper) : Json(nullptr);
    j["fitted_start"] = f.fitted_start.to_string();
    j["fitted"] = nums(f.fitted);
    return j;
}

Json json_of(const AccuracyReport& a) {
    Json j;
    for (Metric m : kMetrics) {
        Json row;
        for (Window w : kWindows) {
            auto v = a.get(m, w);
            row[to_string(w)] = v ? num(*v) : Json(nullptr);
        }
        j[to_string(m)] = std::move(row);
    }
    Json counts;
    for (Window w : kWindows) counts[to_string(w)] = a.counts[static_cast<std::size_t>(w)];
    j["counts"] = std::move(counts);
    j["flags"] = a.flags;
    return j;
}

Json json_of(const CcfReport& c) {
    Json j;
    j["lags"] = c.lags;
    j["values"] = nums(c.values);
    j["bound"] = num(c.bound);
    j["n"] = c.n;
    j["ar_order"] = c.ar_order;
    j["ar_coefficients"] = nums(c.ar_coefficients);
    return j;
}

Json json_of(const SimConfig& c) {
    Json j;
    j["replicates"] = c.replicates;
    j["months"] = c.months;
    j["start"] = c.start.to_string();
    j["seed"] = c.seed;
    j["params"] = json_of(c.params);
    return j;
}

Json truth_json(const Simulation& sim, const SimConfig& config) {
    Json j;
    j["config"] = json_of(config);
    std::vector<double> x1, x2, w1, w2;
    for (Eigen::Index t = 0; t < sim.latent.rows(); ++t) {
        x1.push_back(sim.latent(t, 0));
        x2.push_back(sim.latent(t, 1));
        w1.push_back(sim.state_noise(t, 0));
        w2.push_back(sim.state_noise(t, 1));
    }
    Json latent;
    latent["target_level"] = nums(x1);
    latent["sqv"] = nums(x2);
    j["latent"] = std::move(latent);
    Json state_noise;
    state_noise["target_level"] = nums(w1);
    state_noise["sqv"] = nums(w2);
    j["state_noise"] = std::move(state_noise);
    j["observation_noise"] = matrix_rows(sim.observation_noise);
    return j;
}

EmConfig em_config_from_json(const Json& j, EmConfig c, const std::string& source) {
    if (!j.is_object()) bad(source, "EM configuration must be a JSON object");
    static const std::set<std::string> known{"max_iterations", "rel_tol",        "n_starts",
                                             "warmup_iterations", "seed",        "variance_floor",
                                             "initial_state",  "compute_ci",     "ci_level"};
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) bad(source, "unknown EM configuration key '" + key + "'");
    }
    try {
        if (j.contains("max_iterations")) c.max_iterations = j.at("max_iterations").get<int>();
        if (j.contains("rel_tol")) c.rel_tol = j.at("rel_tol").get<double>();
        if (j.contains("n_starts")) c.n_starts = j.at("n_starts").get<int>();
        if (j.contains("warmup_iterations")) c.warmup_iterations = j.at("warmup_iterations").get<int>();
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("variance_floor")) c.variance_floor = j.at("variance_floor").get<double>();
        if (j.contains("initial_state")) {
            auto s = j.at("initial_state").get<std::string>();
            if (s == "fixed") c.initial_state = InitialState::Fixed;
            else if (s == "diffuse") c.initial_state = InitialState::Diffuse;
            else bad(source, "initial_state must be \"fixed\" or \"diffuse\"");
        }
        if (j.contains("compute_ci")) c.compute_ci = j.at("compute_ci").get<bool>();
        if (j.contains("ci_level")) c.ci_level = j.at("ci_level").get<double>();
    } catch (const nlohmann::json::exception& e) {
        bad(source, e.what());
    }
    try {
        c.validate();
    } catch (const DomainError& e) {
        bad(source, e.what());
    }
    return c;
}

EmConfig em_config_from_file(const std::string& path, EmConfig base) {
    std::ifstream in(path);
    if (!in) bad(path, "cannot open EM configuration file");
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        bad(path, e.what());
    }
    return em_config_from_json(j, base, path);
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string forecast_csv(const ForecasterOutput& f) {
    std::ostringstream out;
    out << "horizon,mean,lower,upper\n";
    for (std::size_t h = 0; h < f.forecasts.size(); ++h) {
        out << h + 1 << ',' << io::format_double(f.forecasts[h]) << ',';
        if (f.lower) out << io::format_double((*f.lower)[h]);
        out << ',';
        if (f.upper) out << io::format_double((*f.upper)[h]);
        out << '\n';
    }
    return out.str();
}

std::string forecast_csv(const ForecastResult& f) {
    std::ostringstream out;
    out << "horizon,mean,lower,upper\n";
    for (std::size_t h = 0; h < f.horizon(); ++h) {
        out << h + 1 << ',' << io::format_double(f.target_mean[h]) << ',' << io::format_double(f.target_lower[h])
            << ',' << io::format_double(f.target_upper[h]) << '\n';
    }
    return out.str();
}

std::vector<ForecastRow> read_forecast_csv(const std::string& text, const std::string& source) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw ParseError(source, 1, "empty file");
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "horizon,mean,lower,upper") throw ParseError(source, 1, "expected header horizon,mean,lower,upper");
    std::vector<ForecastRow> rows;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        if (!line.empty() && line.back() == ',') f.emplace_back();
        if (f.size() != 4) throw ParseError(source, lineno, "expected 4 fields");
        ForecastRow r;
        double h = 0.0;
        if (!io::parse_double(f[0], h) || h < 1 || h != std::floor(h)) {
            throw ParseError(source, lineno, "bad horizon '" + f[0] + "'");
        }
        r.horizon = static_cast<int>(h);
        if (!io::parse_double(f[1], r.mean)) throw ParseError(source, lineno, "bad mean '" + f[1] + "'");
        for (int k : {2, 3}) {
            if (f[std::size_t(k)].empty()) continue;
            double v = 0.0;
            if (!io::parse_double(f[std::size_t(k)], v)) {
                throw ParseError(source, lineno, "bad bound '" + f[std::size_t(k)] + "'");
            }
            (k == 2 ? r.lower : r.upper) = v;
        }
        rows.push_back(r);
    }
    return rows;
}

}  // namespace sqvdlm::report
