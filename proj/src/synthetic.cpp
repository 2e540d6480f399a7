#include "sqvdlm/synthetic.hpp"

#include <gsl/gsl_cdf.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "sqvdlm/errors.hpp"

namespace sqvdlm {

void SimConfig::validate() const {
    if (months < 2) throw DomainError("simulation needs at least 2 months, got " + std::to_string(months));
    if (replicates < 1) throw DomainError("simulation needs at least one replicate");
    for (double v : {params.sigma2_y1, params.sigma2_y2, params.sigma2_x1, params.sigma2_x2}) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("simulation variances must be finite and >= 0");
    }
    if (!std::isfinite(params.beta) || !params.C.allFinite() || !params.x0.allFinite()) {
        throw DomainError("simulation parameters must be finite");
    }
}

NormalStream::NormalStream(std::uint64_t seed, std::uint32_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32), stream};
    engine_.seed(seq);
}

double NormalStream::operator()() {
    // 53 random bits, centred in their cell so u is strictly inside (0, 1).
    const double u = (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    return gsl_cdf_ugaussian_Pinv(u);
}

Simulation simulate(const SimConfig& config) {
    config.validate();
    const auto& p = config.params;
    const std::size_t T = config.months;
    const std::size_t a = config.replicates;
    const auto n = static_cast<Eigen::Index>(T);

    Simulation sim{ObservationPanel(MonthlySeries(config.start, std::vector<Observation>(T)),
                                    {MonthlySeries(config.start, std::vector<Observation>(T))}),
                   Matrix(n, 2), Matrix(n, 2), Matrix(n, static_cast<Eigen::Index>(a + 1))};

    const double sd_x[2] = {std::sqrt(p.sigma2_x1), std::sqrt(p.sigma2_x2)};
    for (int k = 0; k < 2; ++k) {
        NormalStream z(config.seed, static_cast<std::uint32_t>(k));
        for (Eigen::Index t = 0; t < n; ++t) sim.state_noise(t, k) = sd_x[k] * z();
    }
    for (std::size_t i = 0; i <= a; ++i) {
        NormalStream z(config.seed, static_cast<std::uint32_t>(2 + i));
        const double sd = std::sqrt(i == 0 ? p.sigma2_y1 : p.sigma2_y2);
        for (Eigen::Index t = 0; t < n; ++t) sim.observation_noise(t, Eigen::Index(i)) = sd * z();
    }

    Eigen::Vector2d x = p.x0;
    for (Eigen::Index t = 0; t < n; ++t) {
        const int m = (config.start + static_cast<long>(t)).month() - 1;
        const Eigen::Vector2d prev = x;
        x(0) = prev(0) + p.beta * prev(1) + p.C(0, m) + sim.state_noise(t, 0);
        x(1) = prev(1) + p.C(1, m) + sim.state_noise(t, 1);
        sim.latent.row(t) = x.transpose();
    }

    auto row = [&](std::size_t i) {
        std::vector<Observation> v(T);
        const int k = i == 0 ? 0 : 1;
        for (std::size_t t = 0; t < T; ++t) {
            v[t] = sim.latent(Eigen::Index(t), k) + sim.observation_noise(Eigen::Index(t), Eigen::Index(i));
        }
        return MonthlySeries(config.start, std::move(v));
    };
    std::vector<MonthlySeries> reps;
    for (std::size_t j = 1; j <= a; ++j) reps.push_back(row(j));
    sim.panel = ObservationPanel(row(0), std::move(reps));
    return sim;
}

Eigen::Matrix<double, 1, 12> march_peak_effects(double amplitude) {
    auto s = [&](int m) { return amplitude * std::cos(2.0 * std::numbers::pi * (m - 3) / 12.0); };
    Eigen::Matrix<double, 1, 12> c;
    for (int m = 1; m <= 12; ++m) c(0, m - 1) = s(m) - s(m == 1 ? 12 : m - 1);
    return c;
}

namespace {

constexpr double kTargetAmplitude = 15000.0;
constexpr double kSqvAmplitude = 10.0;

}  // namespace

Scenario paper_like_scenario() {
    Scenario s;
    s.name = "paper-like";
    s.note = "published DLM1 point estimates; seasonal amplitudes are declared, not estimated";
    auto& p = s.config.params;
    p.beta = 104.56;
    p.sigma2_y1 = 1.25e7;
    p.sigma2_y2 = 1.63;
    p.sigma2_x1 = 2.89e6;
    p.sigma2_x2 = 13.66;
    p.C.row(0) = march_peak_effects(kTargetAmplitude);
    p.C.row(1) = march_peak_effects(kSqvAmplitude);
    p.x0.setZero();
    s.config.replicates = 11;
    s.config.months = 117;
    s.config.start = MonthStamp(2004, 1);
    s.config.seed = 1;
    return s;
}

Scenario parse_scenario_json(const std::string& text, const std::string& source) {
    using nlohmann::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(source, 0, e.what());
    }
    try {
        Scenario s;
        s.name = j.value("name", std::string("custom"));
        s.note = j.value("note", std::string());
        auto& c = s.config;
        c.replicates = j.at("replicates").get<std::size_t>();
        c.months = j.at("months").get<std::size_t>();
        c.start = MonthStamp::parse(j.at("start").get<std::string>());
        c.seed = j.value("seed", std::uint64_t{1});
        const auto& p = j.at("params");
        c.params.beta = p.at("beta").get<double>();
        c.params.sigma2_y1 = p.at("sigma2_y1").get<double>();
        c.params.sigma2_y2 = p.at("sigma2_y2").get<double>();
        c.params.sigma2_x1 = p.at("sigma2_x1").get<double>();
        c.params.sigma2_x2 = p.at("sigma2_x2").get<double>();
        if (p.contains("x0")) {
            auto x0 = p.at("x0").get<std::vector<double>>();
            if (x0.size() != 2) throw DomainError("x0 must have 2 entries");
            c.params.x0 = Eigen::Vector2d(x0[0], x0[1]);
        }
        if (p.contains("C")) {
            auto rows = p.at("C").get<std::vector<std::vector<double>>>();
            if (rows.size() != 2 || rows[0].size() != 12 || rows[1].size() != 12) {
                throw DomainError("C must be a 2 x 12 array");
            }
            for (int r = 0; r < 2; ++r)
                for (int k = 0; k < 12; ++k) c.params.C(r, k) = rows[std::size_t(r)][std::size_t(k)];
        } else if (p.contains("seasonal_amplitude")) {
            auto amp = p.at("seasonal_amplitude").get<std::vector<double>>();
            if (amp.size() != 2) throw DomainError("seasonal_amplitude must have 2 entries");
            c.params.C.row(0) = march_peak_effects(amp[0]);
            c.params.C.row(1) = march_peak_effects(amp[1]);
        }
        c.validate();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(source, 0, e.what());
    }
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open scenario file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario_json(buf.str(), path);
}

}  // namespace sqvdlm
