#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "sqvdlm/cli.hpp"
#include "sqvdlm/csv_io.hpp"
#include "sqvdlm/report_json.hpp"

using namespace sqvdlm;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "sqvdlm");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Result r;
    r.code = cli::run(int(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("sqvdlm_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& f) const { return (path / f).string(); }
};

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) out.push_back(line);
    return out;
}

std::vector<std::string> fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        auto c = line.find(',', pos);
        out.push_back(line.substr(pos, c == std::string::npos ? std::string::npos : c - pos));
        if (c == std::string::npos) break;
        pos = c + 1;
    }
    return out;
}

const std::string kFastEm = R"({"n_starts": 3, "max_iterations": 300, "warmup_iterations": 10})";

}  // namespace

TEST_CASE("simulate: paper-like panel shape, sidecar and determinism") {
    TempDir dir("cli_sim");
    auto r = run({"simulate", "--scenario", "paper-like", "--T", "117", "--seed", "1", "-o", dir / "p.csv"});
    REQUIRE(r.code == 0);
    const auto text = slurp(dir / "p.csv");
    const auto rows = lines(text);
    REQUIRE(rows.size() == 118);
    CHECK(fields(rows[0]).size() == 13);  // date + target + 11 replicates
    CHECK(rows[1].rfind("2004-01,", 0) == 0);
    CHECK(rows.back().rfind("2013-09,", 0) == 0);

    const auto truth = report::Json::parse(slurp(dir / "p.csv.truth.json"));
    CHECK(truth["config"]["seed"] == 1);
    CHECK(truth["config"]["months"] == 117);
    CHECK(truth["config"]["params"]["beta"] == 104.56);
    CHECK(truth["latent"]["sqv"].size() == 117);

    std::istringstream in(text);
    const auto panel = io::read_panel_csv(in);
    std::ostringstream again;
    io::write_panel_csv(again, panel);
    CHECK(again.str() == text);

    REQUIRE(run({"simulate", "--seed", "1", "--T", "117", "-o", dir / "q.csv"}).code == 0);
    CHECK(slurp(dir / "q.csv") == text);
    CHECK(slurp(dir / "q.csv.truth.json") == slurp(dir / "p.csv.truth.json"));
    REQUIRE(run({"simulate", "--seed", "2", "--T", "117", "-o", dir / "s.csv"}).code == 0);
    CHECK(slurp(dir / "s.csv") != text);
}

TEST_CASE("simulate: validation and usage errors") {
    TempDir dir("cli_sim_err");
    auto r = run({"simulate", "--T", "1", "-o", dir / "p.csv"});
    CHECK(r.code == cli::kExitError);
    CHECK(r.err.find("error:") != std::string::npos);
    CHECK(run({"simulate", "--bogus"}).code == cli::kExitUsage);
    CHECK(run({"nonsense"}).code == cli::kExitUsage);
    CHECK(run({}).code == cli::kExitUsage);
    CHECK(run({"simulate", "--scenario", dir / "missing.json"}).code == cli::kExitError);
    CHECK(run({"--help"}).code == cli::kExitOk);
}

TEST_CASE("ingest: one target and weekly files become an aligned panel") {
    TempDir dir("cli_ingest");
    spit(dir / "target.csv", "date,value\n2012-01,100\n2012-02,110\n2012-03,120\n2012-04,130\n");
    // Weekly grid from 2011-12-26: January and February are fully covered.
    std::ostringstream w1, w2;
    w1 << "# export\nWeek,hotel\n";
    w2 << "Week,hotels\n";
    auto day = std::chrono::sys_days{std::chrono::year{2011} / 12 / 26};
    for (int k = 0; k < 18; ++k) {
        const auto ymd = std::chrono::year_month_day{day + std::chrono::days{7 * k}};
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()), unsigned(ymd.day()));
        w1 << buf << ",50\n";
        w2 << buf << (k == 3 ? ",<1\n" : ",20\n");
    }
    spit(dir / "w1.csv", w1.str());
    spit(dir / "w2.csv", w2.str());

    auto r = run({"ingest", "--target", dir / "target.csv", "--weekly", dir / "w1.csv", "--weekly", dir / "w2.csv",
                  "-o", dir / "panel.csv"});
    REQUIRE(r.code == 0);
    std::istringstream in(slurp(dir / "panel.csv"));
    const auto panel = io::read_panel_csv(in);
    CHECK(panel.replicate_count() == 2);
    CHECK(panel.length() == 4);
    CHECK(*panel.replicate(0)[0] == 50.0);
    CHECK(*panel.target()[3] == 130.0);

    r = run({"ingest", "--target", dir / "target.csv", "--weekly", dir / "w1.csv", "--range", "2012-02:2012-03"});
    REQUIRE(r.code == 0);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 3);
    CHECK(rows[1] == "2012-02,110,50");
    CHECK(rows[2] == "2012-03,120,50");

    r = run({"ingest", "--target", dir / "target.csv", "--weekly", dir / "w1.csv", "--range", "2012-02:2012-08"});
    CHECK(r.code == cli::kExitError);

    spit(dir / "bad.csv", "date,value\n2012-01,100\n2012/02,110\n");
    r = run({"ingest", "--target", dir / "bad.csv", "--weekly", dir / "w1.csv"});
    CHECK(r.code == cli::kExitError);
    CHECK(r.err.find("bad.csv:3") != std::string::npos);

    CHECK(run({"ingest", "--weekly", dir / "w1.csv"}).code == cli::kExitUsage);
}

TEST_CASE("fit: model selection, cutoff, config precedence and determinism") {
    TempDir dir("cli_fit");
    REQUIRE(run({"simulate", "--seed", "3", "--T", "117", "-o", dir / "p.csv"}).code == 0);
    spit(dir / "em.json", R"({"n_starts": 3, "max_iterations": 300, "warmup_iterations": 10, "seed": 5})");

    auto r = run({"fit", "--panel", dir / "p.csv", "--model", "dlm2", "--cutoff", "2012-09", "--em-config",
                  dir / "em.json", "--seed", "9", "-o", dir / "f.json"});
    REQUIRE(r.code == 0);
    const auto text = slurp(dir / "f.json");
    const auto j = report::Json::parse(text);
    CHECK(j["training"]["replicates"] == 1);
    CHECK(j["training"]["months"] == 105);
    CHECK(j["training"]["end"] == "2012-09");
    CHECK(j["config"]["run"] == 11);
    CHECK(j["config"]["em"]["seed"] == 9);
    CHECK(j["config"]["em"]["n_starts"] == 3);
    CHECK(j["fit"]["config"]["seed"] == 9);
    CHECK(j["fit"]["params"]["beta"].is_number());
    CHECK(j["fit"]["ci"]["intervals"].size() > 0);
    CHECK(j["forecast"]["first"] == "2012-10");
    CHECK(j["forecast"]["target_mean"].size() == 12);

    REQUIRE(run({"fit", "--panel", dir / "p.csv", "--model", "dlm2", "--cutoff", "2012-09", "--em-config",
                 dir / "em.json", "--seed", "9", "-o", dir / "g.json"})
                .code == 0);
    CHECK(slurp(dir / "g.json") == text);

    r = run({"fit", "--panel", dir / "p.csv", "--model", "dlm1", "--em-config", dir / "em.json"});
    REQUIRE(r.code == 0);
    const auto j1 = report::Json::parse(r.out);
    CHECK(j1["training"]["replicates"] == 11);
    CHECK(j1["training"]["months"] == 117);
    CHECK(j1["config"]["em"]["seed"] == 5);

    r = run({"fit", "--panel", dir / "p.csv", "--model", "dlm0", "--cutoff", "2012-09", "--em-config",
             dir / "em.json"});
    REQUIRE(r.code == 0);
    CHECK(report::Json::parse(r.out)["fit"]["model"] == "scalar");

    CHECK(run({"fit", "--panel", dir / "p.csv", "--model", "dlm3"}).code == cli::kExitError);
    CHECK(run({"fit", "--panel", dir / "p.csv", "--model", "dlm2", "--run", "12"}).code == cli::kExitError);
    CHECK(run({"fit", "--panel", dir / "p.csv", "--cutoff", "2020-01"}).code == cli::kExitError);
    spit(dir / "bad_em.json", R"({"n_start": 3})");
    r = run({"fit", "--panel", dir / "p.csv", "--em-config", dir / "bad_em.json"});
    CHECK(r.code == cli::kExitError);
    CHECK(r.err.find("n_start") != std::string::npos);
}

TEST_CASE("compare: table shape, SNAIVE cells by hand, interval curve, round-trips") {
    TempDir dir("cli_compare");
    REQUIRE(run({"simulate", "--seed", "4", "--T", "117", "-o", dir / "p.csv"}).code == 0);
    spit(dir / "em.json", kFastEm);
    const auto out = dir / "out";
    auto r = run({"compare", "--panel", dir / "p.csv", "--em-config", dir / "em.json", "--out-dir", out});
    REQUIRE(r.code == 0);

    const auto table = lines(slurp(out + "/accuracy.csv"));
    REQUIRE(table.size() == 6);
    CHECK(table[0] ==
          "model,MAE_In,MAE_Out-6,MAE_Out-12,MAPE_In,MAPE_Out-6,MAPE_Out-12,RMSE_In,RMSE_Out-6,RMSE_Out-12,status");
    const std::vector<std::string> names{"DLM1", "DLM0", "SARIMA", "HW", "SNAIVE"};
    for (std::size_t i = 0; i < names.size(); ++i) {
        const auto f = fields(table[i + 1]);
        REQUIRE(f.size() == 11);
        CHECK(f[0] == names[i]);
        for (std::size_t c = 1; c <= 9; ++c) {
            double v = 0.0;
            CHECK(io::parse_double(f[c], v));
        }
        CHECK(f[10] == "ok");
    }

    // SNAIVE recomputed from the panel: fitted y_{t-12}, forecast of the
    // holdout month repeats the same calendar month of the last training year.
    std::istringstream pin(slurp(dir / "p.csv"));
    const auto panel = io::read_panel_csv(pin);
    const auto y = panel.target().dense();
    const std::size_t n_train = y.size() - 12;
    std::vector<double> in_a, in_p, out6_a, out6_p, out12_a, out12_p;
    for (std::size_t t = 12; t < n_train; ++t) {
        in_a.push_back(y[t]);
        in_p.push_back(y[t - 12]);
    }
    for (std::size_t h = 0; h < 12; ++h) {
        auto& a = h < 6 ? out6_a : out12_a;
        auto& p = h < 6 ? out6_p : out12_p;
        a.push_back(y[n_train + h]);
        p.push_back(y[n_train - 12 + h]);
    }
    auto hand_mae = [](const std::vector<double>& a, const std::vector<double>& p) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - p[i]);
        return s / double(a.size());
    };
    auto hand_rmse = [](const std::vector<double>& a, const std::vector<double>& p) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - p[i]) * (a[i] - p[i]);
        return std::sqrt(s / double(a.size()));
    };
    auto hand_mape = [](const std::vector<double>& a, const std::vector<double>& p) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += 100.0 * std::abs(a[i] - p[i]) / std::abs(a[i]);
        return s / double(a.size());
    };
    const auto doc = report::Json::parse(slurp(out + "/compare.json"));
    const auto& snaive = doc["models"][4];
    REQUIRE(snaive["model"] == "SNAIVE");
    const auto& acc = snaive["accuracy"];
    CHECK(acc["MAE"]["In"].get<double>() == hand_mae(in_a, in_p));
    CHECK(acc["MAE"]["Out-6"].get<double>() == hand_mae(out6_a, out6_p));
    CHECK(acc["MAE"]["Out-12"].get<double>() == hand_mae(out12_a, out12_p));
    CHECK(acc["RMSE"]["In"].get<double>() == hand_rmse(in_a, in_p));
    CHECK(acc["RMSE"]["Out-12"].get<double>() == hand_rmse(out12_a, out12_p));
    CHECK(acc["MAPE"]["Out-6"].get<double>() == hand_mape(out6_a, out6_p));
    CHECK(acc["MAPE"]["In"].get<double>() == hand_mape(in_a, in_p));

    const auto curve = lines(slurp(out + "/interval_pct_dlm2_vs_dlm1.csv"));
    REQUIRE(curve.size() == 13);
    CHECK(curve[0] == "horizon,pct_diff");
    for (int h = 1; h <= 12; ++h) CHECK(fields(curve[std::size_t(h)])[0] == std::to_string(h));

    for (const auto* m : {"dlm1", "dlm0", "sarima", "hw", "snaive", "dlm2"}) {
        const auto rows = report::read_forecast_csv(slurp(out + "/forecast_" + m + ".csv"));
        CHECK(rows.size() == 12);
    }
    const auto snaive_rows = report::read_forecast_csv(slurp(out + "/forecast_snaive.csv"));
    for (std::size_t h = 0; h < 12; ++h) CHECK(snaive_rows[h].mean == y[n_train - 12 + h]);

    CHECK(doc["config"]["cutoff"] == "2012-09");
    CHECK(doc["config"]["em"]["n_starts"] == 3);
    CHECK(doc["config"]["holdout"][0] == "2012-10");
}

TEST_CASE("compare: a model failure is marked in the table and exits 3") {
    TempDir dir("cli_compare_partial");
    REQUIRE(run({"simulate", "--seed", "5", "--T", "117", "-o", dir / "p.csv"}).code == 0);
    // Blank one training target value: the DLMs handle it, the benchmarks need complete data.
    auto rows = lines(slurp(dir / "p.csv"));
    auto f = fields(rows[50]);
    f[1].clear();
    std::string joined = f[0];
    for (std::size_t i = 1; i < f.size(); ++i) joined += "," + f[i];
    rows[50] = joined;
    std::string text;
    for (const auto& l : rows) text += l + "\n";
    spit(dir / "p.csv", text);
    spit(dir / "em.json", kFastEm);

    auto r = run({"compare", "--panel", dir / "p.csv", "--em-config", dir / "em.json", "--out-dir", dir / "out"});
    CHECK(r.code == cli::kExitPartial);
    const auto table = lines(slurp(dir / "out/accuracy.csv"));
    REQUIRE(table.size() == 6);
    CHECK(fields(table[1]).back() == "ok");
    CHECK(fields(table[5]).back().rfind("failed:", 0) == 0);
    CHECK(fields(table[5]).size() == 11);
}
