#include "sqvdlm/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sqvdlm/benchmarks.hpp"
#include "sqvdlm/csv_io.hpp"
#include "sqvdlm/diagnostics.hpp"
#include "sqvdlm/errors.hpp"
#include "sqvdlm/report_json.hpp"
#include "sqvdlm/synthetic.hpp"

namespace sqvdlm::cli {

namespace {

using report::Json;

class IoError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f << text;
    if (!f) throw IoError("failed writing '" + path + "'");
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") out << text;
    else write_text(path, text);
}

std::pair<MonthStamp, MonthStamp> parse_range(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw DomainError("--range must be YYYY-MM:YYYY-MM, got '" + text + "'");
    auto first = MonthStamp::parse(text.substr(0, colon));
    auto last = MonthStamp::parse(text.substr(colon + 1));
    if (last < first) throw DomainError("--range is empty: " + text);
    return {first, last};
}

InitialState parse_initial_state(const std::string& s) {
    if (s == "fixed") return InitialState::Fixed;
    if (s == "diffuse") return InitialState::Diffuse;
    throw DomainError("--initial-state must be fixed or diffuse, got '" + s + "'");
}

/// defaults < --em-config file < individual flags.
struct EmFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> initial_state;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--em-config", config_path, "JSON file with EM settings");
        cmd->add_option("--seed", seed, "Random seed for the EM starts");
        cmd->add_option("--initial-state", initial_state, "fixed or diffuse");
    }

    EmConfig resolve() const {
        EmConfig c;
        if (!config_path.empty()) c = report::em_config_from_file(config_path, c);
        if (seed) c.seed = *seed;
        if (initial_state) c.initial_state = parse_initial_state(*initial_state);
        c.validate();
        return c;
    }
};

std::string csv_cell(std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    std::replace(s.begin(), s.end(), '\r', ' ');
    return s;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return char(std::tolower(c)); });
    return s;
}

// ingest

struct IngestArgs {
    std::string target;
    std::vector<std::string> weekly;
    std::string range;
    double below_threshold = 0.5;
    std::string output;
};

int ingest(const IngestArgs& a, std::ostream& out) {
    const auto target = io::read_monthly_csv_file(a.target);
    MonthStamp first = target.start();
    MonthStamp last = target.end();
    if (!a.range.empty()) std::tie(first, last) = parse_range(a.range);
    if (first < target.start() || last > target.end()) {
        throw CoverageError(a.target + ": target covers " + target.start().to_string() + ".." +
                            target.end().to_string() + ", requested " + first.to_string() + ".." +
                            last.to_string());
    }
    io::TrendsParseOptions options;
    options.below_threshold_value = a.below_threshold;
    std::vector<MonthlySeries> replicates;
    for (const auto& path : a.weekly) {
        const auto w = io::read_weekly_trends_csv_file(path, options);
        try {
            replicates.push_back(aggregate_weekly_to_monthly(w.series, first, last));
        } catch (const CoverageError& e) {
            throw CoverageError(path + ": " + e.what());
        }
    }
    const ObservationPanel panel(target.slice(first, last), std::move(replicates));
    std::ostringstream csv;
    io::write_panel_csv(csv, panel);
    emit(a.output, csv.str(), out);
    return kExitOk;
}

// fit

struct FitArgs {
    std::string panel;
    std::string model = "dlm1";
    std::optional<int> run;
    std::string cutoff;
    std::size_t horizon = 12;
    EmFlags em;
    std::string output;
};

MonthStamp resolve_cutoff(const std::string& flag, const ObservationPanel& panel, long default_back) {
    const auto cutoff = flag.empty() ? panel.end() - default_back : MonthStamp::parse(flag);
    if (cutoff < panel.start() || cutoff > panel.end()) {
        throw DomainError("cutoff " + cutoff.to_string() + " outside the panel " + panel.start().to_string() + ".." +
                          panel.end().to_string());
    }
    return cutoff;
}

std::size_t resolve_run(const std::optional<int>& run, const ObservationPanel& panel) {
    const auto a = panel.replicate_count();
    if (a == 0) throw DomainError("panel has no replicate columns");
    if (!run) return a - 1;
    if (*run < 1 || std::size_t(*run) > a) {
        throw DomainError("--run must be in 1.." + std::to_string(a) + ", got " + std::to_string(*run));
    }
    return std::size_t(*run - 1);
}

Json training_json(const ObservationPanel& train) {
    Json j;
    j["start"] = train.start().to_string();
    j["end"] = train.end().to_string();
    j["months"] = train.length();
    j["replicates"] = train.replicate_count();
    return j;
}

int fit_command(const FitArgs& a, std::ostream& out) {
    if (a.model != "dlm1" && a.model != "dlm2" && a.model != "dlm0") {
        throw DomainError("--model must be dlm1, dlm2 or dlm0, got '" + a.model + "'");
    }
    const auto em = a.em.resolve();
    const auto panel = io::read_panel_csv_file(a.panel);
    const auto cutoff = resolve_cutoff(a.cutoff, panel, 0);
    auto train = panel.slice(panel.start(), cutoff);

    Json config;
    config["command"] = "fit";
    config["panel"] = a.panel;
    config["model"] = a.model;
    config["cutoff"] = cutoff.to_string();
    config["horizon"] = a.horizon;
    config["em"] = report::json_of(em);

    Json doc;
    if (a.model == "dlm0") {
        ScalarFitReport fit;
        const auto fc = dlm0(train.target(), a.horizon, em, &fit);
        doc["config"] = std::move(config);
        doc["training"] = training_json(train);
        const auto obs = train.target().observed();
        double offset = 0.0;
        for (double v : obs) offset += v;
        doc["demean_offsets"] = Json::array({obs.empty() ? 0.0 : offset / double(obs.size())});
        doc["fit"] = report::json_of(fit);
        doc["forecast"] = report::json_of(fc);
    } else {
        if (a.model == "dlm2") {
            const auto run = resolve_run(a.run, panel);
            train = train.select_replicates({run});
            config["run"] = run + 1;
        }
        FitReport fit;
        ForecastResult fr;
        const auto name = a.model == "dlm1" ? "DLM1" : "DLM2";
        dlm_forecaster(train, a.horizon, em, name, &fit, &fr);
        doc["config"] = std::move(config);
        doc["training"] = training_json(train);
        doc["demean_offsets"] = report::numbers(*demean(train, train.end()).demean_offsets());
        doc["fit"] = report::json_of(fit);
        doc["forecast"] = report::json_of(fr);
    }
    emit(a.output, report::dump(doc), out);
    return kExitOk;
}

// compare

struct CompareArgs {
    std::string panel;
    std::string cutoff;
    std::size_t horizon = 12;
    std::optional<int> run;
    EmFlags em;
    std::string out_dir;
};

struct ModelRun {
    std::string name;
    std::optional<ForecasterOutput> output;
    std::string status = "ok";
};

template <class F>
ModelRun attempt(const std::string& name, F&& f) {
    ModelRun r;
    r.name = name;
    try {
        r.output = f();
    } catch (const std::exception& e) {
        r.status = std::string("failed: ") + e.what();
    }
    return r;
}

int compare_command(const CompareArgs& a, std::ostream& out) {
    const auto em = a.em.resolve();
    const auto panel = io::read_panel_csv_file(a.panel);
    const auto cutoff = resolve_cutoff(a.cutoff, panel, 12);
    if (cutoff >= panel.end()) throw DomainError("compare needs at least one holdout month after the cutoff");
    if (a.horizon == 0) throw DomainError("--horizon must be positive");
    const auto run = resolve_run(a.run, panel);
    const auto parts = split(panel, cutoff);
    const auto& train = parts.train;
    const auto holdout_end = std::min(panel.end(), cutoff + long(a.horizon));
    const auto holdout = panel.target().slice(cutoff + 1, holdout_end);
    const auto y = train.target();

    std::filesystem::create_directories(a.out_dir);
    const std::filesystem::path dir(a.out_dir);

    FitReport dlm1_fit, dlm2_fit;
    ForecastResult dlm1_fc, dlm2_fc;
    std::vector<ModelRun> runs;
    runs.push_back(attempt("DLM1", [&] { return dlm_forecaster(train, a.horizon, em, "DLM1", &dlm1_fit, &dlm1_fc); }));
    runs.push_back(attempt("DLM0", [&] { return dlm0(y, a.horizon, em); }));
    runs.push_back(attempt("SARIMA", [&] {
        SarimaOptions o;
        o.horizon = a.horizon;
        o.level = em.ci_level;
        return sarima_fit(y, o);
    }));
    runs.push_back(attempt("HW", [&] { return holt_winters(y, a.horizon); }));
    runs.push_back(attempt("SNAIVE", [&] { return snaive(y, a.horizon); }));
    auto dlm2 = attempt("DLM2", [&] {
        return dlm_forecaster(train.select_replicates({run}), a.horizon, em, "DLM2", &dlm2_fit, &dlm2_fc);
    });

    bool partial = false;
    std::vector<std::pair<std::string, AccuracyReport>> table;
    std::vector<std::string> statuses;
    Json models = Json::array();
    for (auto& r : runs) {
        AccuracyReport acc;
        if (r.output) {
            try {
                acc = accuracy(y, *r.output, holdout);
            } catch (const std::exception& e) {
                r.status = std::string("failed: ") + e.what();
            }
        }
        if (r.status != "ok") partial = true;
        table.emplace_back(r.name, acc);
        statuses.push_back(r.status);
        Json m;
        m["model"] = r.name;
        m["status"] = r.status;
        if (r.output) {
            write_text((dir / ("forecast_" + lower(r.name) + ".csv")).string(), report::forecast_csv(*r.output));
            m["output"] = report::json_of(*r.output);
            m["accuracy"] = report::json_of(acc);
        }
        models.push_back(std::move(m));
    }

    // The status column is appended after the nine metric cells.
    std::istringstream tin(accuracy_table_csv(table));
    std::ostringstream tout;
    std::string line;
    std::getline(tin, line);
    tout << line << ",status\n";
    for (std::size_t i = 0; std::getline(tin, line) && i < statuses.size(); ++i) {
        tout << line << ',' << csv_cell(statuses[i]) << '\n';
    }
    write_text((dir / "accuracy.csv").string(), tout.str());

    Json interval = nullptr;
    if (dlm2.output && runs[0].output) {
        write_text((dir / "forecast_dlm2.csv").string(), report::forecast_csv(*dlm2.output));
        const auto pct = interval_length_pct_diff(dlm1_fc, dlm2_fc);
        std::ostringstream csv;
        csv << "horizon,pct_diff\n";
        for (std::size_t h = 0; h < pct.size(); ++h) csv << h + 1 << ',' << io::format_double(pct[h]) << '\n';
        write_text((dir / "interval_pct_dlm2_vs_dlm1.csv").string(), csv.str());
        interval = report::numbers(pct);
    } else {
        partial = true;
        if (dlm2.status == "ok") dlm2.status = "skipped: DLM1 failed";
    }

    Json config;
    config["command"] = "compare";
    config["panel"] = a.panel;
    config["cutoff"] = cutoff.to_string();
    config["horizon"] = a.horizon;
    config["run"] = run + 1;
    config["holdout"] = {holdout.start().to_string(), holdout.end().to_string()};
    config["em"] = report::json_of(em);

    Json doc;
    doc["config"] = std::move(config);
    doc["training"] = training_json(train);
    doc["models"] = std::move(models);
    Json d2;
    d2["status"] = dlm2.status;
    if (dlm2.output) d2["output"] = report::json_of(*dlm2.output);
    doc["dlm2"] = std::move(d2);
    doc["interval_pct_dlm2_vs_dlm1"] = std::move(interval);
    if (runs[0].output) doc["dlm1_fit"] = report::json_of(dlm1_fit);
    if (dlm2.output) doc["dlm2_fit"] = report::json_of(dlm2_fit);
    write_text((dir / "compare.json").string(), report::dump(doc));

    out << "wrote " << a.out_dir << '\n';
    return partial ? kExitPartial : kExitOk;
}

// simulate

struct SimulateArgs {
    std::string scenario = "paper-like";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> months;
    std::optional<std::size_t> replicates;
    std::string output;
    std::string truth;
};

int simulate_command(const SimulateArgs& a, std::ostream& out) {
    auto scenario = a.scenario == "paper-like" ? paper_like_scenario() : load_scenario_file(a.scenario);
    auto& config = scenario.config;
    if (a.seed) config.seed = *a.seed;
    if (a.months) config.months = *a.months;
    if (a.replicates) config.replicates = *a.replicates;
    config.validate();
    const auto sim = simulate(config);

    std::ostringstream csv;
    io::write_panel_csv(csv, sim.panel);
    emit(a.output, csv.str(), out);

    std::string truth_path = a.truth;
    if (truth_path.empty() && !a.output.empty() && a.output != "-") truth_path = a.output + ".truth.json";
    if (!truth_path.empty()) {
        Json doc = report::truth_json(sim, config);
        doc["scenario"] = scenario.name;
        write_text(truth_path, report::dump(doc));
    }
    return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Search-query-volume dynamic linear models: ingest, fit, compare, simulate"};
    app.name("sqvdlm");
    app.require_subcommand(1);

    IngestArgs ia;
    auto* ingest_cmd = app.add_subcommand("ingest", "Aggregate weekly Trends files onto a monthly target panel");
    ingest_cmd->add_option("--target", ia.target, "Monthly target CSV (date,value)")->required();
    ingest_cmd->add_option("--weekly", ia.weekly, "Weekly Trends CSV; repeat once per replicate")->required();
    ingest_cmd->add_option("--range", ia.range, "Months to keep, YYYY-MM:YYYY-MM");
    ingest_cmd->add_option("--below-threshold", ia.below_threshold, "Value used for '<1' entries")
        ->capture_default_str();
    ingest_cmd->add_option("-o,--output", ia.output, "Panel CSV path (default stdout)");

    FitArgs fa;
    auto* fit_cmd = app.add_subcommand("fit", "Fit a DLM by EM and write a JSON report");
    fit_cmd->add_option("--panel", fa.panel, "Panel CSV")->required();
    fit_cmd->add_option("--model", fa.model, "dlm1, dlm2 or dlm0")->capture_default_str();
    fit_cmd->add_option("--run", fa.run, "Replicate kept by dlm2, 1-based (default: last)");
    fit_cmd->add_option("--cutoff", fa.cutoff, "Last training month YYYY-MM (default: panel end)");
    fit_cmd->add_option("--horizon", fa.horizon, "Forecast horizon")->capture_default_str();
    fa.em.add_to(fit_cmd);
    fit_cmd->add_option("-o,--output", fa.output, "JSON path (default stdout)");

    CompareArgs ca;
    auto* compare_cmd = app.add_subcommand("compare", "Fit all models on one split and tabulate accuracy");
    compare_cmd->add_option("--panel", ca.panel, "Panel CSV")->required();
    compare_cmd->add_option("--cutoff", ca.cutoff, "Last training month YYYY-MM (default: end - 12)");
    compare_cmd->add_option("--horizon", ca.horizon, "Forecast horizon")->capture_default_str();
    compare_cmd->add_option("--run", ca.run, "Replicate used by DLM2, 1-based (default: last)");
    ca.em.add_to(compare_cmd);
    compare_cmd->add_option("--out-dir", ca.out_dir, "Directory for CSV and JSON outputs")->required();

    SimulateArgs sa;
    auto* simulate_cmd = app.add_subcommand("simulate", "Simulate a panel with known latent truth");
    simulate_cmd->add_option("--scenario", sa.scenario, "paper-like or a scenario JSON file")->capture_default_str();
    simulate_cmd->add_option("--seed", sa.seed, "Random seed");
    simulate_cmd->add_option("--T", sa.months, "Number of months");
    simulate_cmd->add_option("--replicates", sa.replicates, "Number of replicate series");
    simulate_cmd->add_option("-o,--output", sa.output, "Panel CSV path (default stdout)");
    simulate_cmd->add_option("--truth", sa.truth, "Truth JSON path (default <output>.truth.json)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*ingest_cmd) return ingest(ia, out);
        if (*fit_cmd) return fit_command(fa, out);
        if (*compare_cmd) return compare_command(ca, out);
        if (*simulate_cmd) return simulate_command(sa, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitUsage;
}

}  // namespace sqvdlm::cli
