#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "sqvdlm/benchmarks.hpp"
#include "sqvdlm/errors.hpp"
#include "sqvdlm/synthetic.hpp"

using namespace sqvdlm;

namespace {

MonthlySeries series_of(const std::vector<double>& v, MonthStamp start = MonthStamp(2004, 1)) {
    return MonthlySeries(start, std::vector<Observation>(v.begin(), v.end()));
}

double seasonal_shape(std::size_t t) { return 10.0 * std::sin(2.0 * std::numbers::pi * double(t % 12) / 12.0); }

// 1 + c_1 B + ... as a product of polynomials in the same form.
std::vector<double> mul(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

std::vector<double> lag_poly(const std::vector<double>& c, int s, double sign) {
    std::vector<double> out(c.size() * std::size_t(s) + 1, 0.0);
    out[0] = 1.0;
    for (std::size_t i = 0; i < c.size(); ++i) out[(i + 1) * std::size_t(s)] = sign * c[i];
    return out;
}

// Concentrated Gaussian log-likelihood of the differenced series w[first..]
// conditional on w[first..conditioning-1], from the dense autocovariance
// matrix (psi weights truncated far beyond any memory in the tests).
double dense_sarima_loglik(const std::vector<double>& y, const SarimaFit& f, double* sigma2_out = nullptr) {
    const auto& o = f.order;
    std::vector<double> diff{1.0};
    for (int i = 0; i < o.d; ++i) diff = mul(diff, {1.0, -1.0});
    for (int i = 0; i < o.D; ++i) diff = mul(diff, lag_poly({1.0}, 12, -1.0));
    const std::size_t first = diff.size() - 1;
    std::vector<double> w;
    for (std::size_t t = first; t < y.size(); ++t) {
        double v = 0.0;
        for (std::size_t j = 0; j < diff.size(); ++j) v += diff[j] * y[t - j];
        w.push_back(v - f.mean);
    }
    const auto phi = mul(lag_poly(f.ar, 1, -1.0), lag_poly(f.sar, 12, -1.0));
    const auto theta = mul(lag_poly(f.ma, 1, 1.0), lag_poly(f.sma, 12, 1.0));
    const std::size_t L = 20000;
    std::vector<double> psi(L, 0.0);
    for (std::size_t j = 0; j < L; ++j) {
        double v = j < theta.size() ? theta[j] : 0.0;
        for (std::size_t k = 1; k < phi.size() && k <= j; ++k) v -= phi[k] * psi[j - k];
        psi[j] = v;
    }
    const auto N = static_cast<Eigen::Index>(w.size());
    std::vector<double> gamma(std::size_t(N), 0.0);
    for (std::size_t h = 0; h < std::size_t(N); ++h)
        for (std::size_t j = 0; j + h < L; ++j) gamma[h] += psi[j] * psi[j + h];
    Eigen::MatrixXd G(N, N);
    for (Eigen::Index i = 0; i < N; ++i)
        for (Eigen::Index j = 0; j < N; ++j) G(i, j) = gamma[std::size_t(std::abs(i - j))];
    const Eigen::Index h = static_cast<Eigen::Index>(f.conditioning - first);
    const Eigen::Index n = N - h;
    Eigen::Map<const Eigen::VectorXd> wv(w.data(), N);
    Eigen::VectorXd resid = wv.tail(n);
    Eigen::MatrixXd S = G.bottomRightCorner(n, n);
    if (h > 0) {
        const Eigen::LLT<Eigen::MatrixXd> head(G.topLeftCorner(h, h));
        resid -= G.bottomLeftCorner(n, h) * head.solve(wv.head(h));
        S -= G.bottomLeftCorner(n, h) * head.solve(G.topRightCorner(h, n));
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(S);
    const double q = resid.dot(llt.solve(resid));
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
    const double s2 = q / double(n);
    if (sigma2_out) *sigma2_out = s2;
    return -0.5 * (double(n) * (std::log(2.0 * std::numbers::pi) + std::log(s2) + 1.0) + logdet);
}

// y from a SARIMA recursion with burn-in.
std::vector<double> simulate_sarima(const SarimaOrder& o, const std::vector<double>& ar, const std::vector<double>& ma,
                                    const std::vector<double>& sar, const std::vector<double>& sma, double mean,
                                    std::size_t T, std::uint64_t seed) {
    const auto phi = mul(lag_poly(ar, 1, -1.0), lag_poly(sar, 12, -1.0));
    const auto theta = mul(lag_poly(ma, 1, 1.0), lag_poly(sma, 12, 1.0));
    std::vector<double> diff{1.0};
    for (int i = 0; i < o.d; ++i) diff = mul(diff, {1.0, -1.0});
    for (int i = 0; i < o.D; ++i) diff = mul(diff, lag_poly({1.0}, 12, -1.0));
    NormalStream z(seed, 0);
    const std::size_t burn = 300;
    std::vector<double> e(T + burn), w(T + burn, 0.0), y(T + burn, 0.0);
    for (auto& v : e) v = z();
    for (std::size_t t = 0; t < T + burn; ++t) {
        double v = 0.0;
        for (std::size_t k = 1; k < phi.size() && k <= t; ++k) v -= phi[k] * w[t - k];
        for (std::size_t k = 0; k < theta.size() && k <= t; ++k) v += theta[k] * e[t - k];
        w[t] = v;
        double yt = w[t] + mean;
        for (std::size_t k = 1; k < diff.size() && k <= t; ++k) yt -= diff[k] * y[t - k];
        y[t] = yt;
    }
    return {y.end() - long(T), y.end()};
}

SarimaOptions single_order(const SarimaOrder& o) {
    SarimaOptions opt;
    opt.grid = SarimaGrid{{o.p}, {o.d}, {o.q}, {o.P}, {o.D}, {o.Q}};
    return opt;
}

}  // namespace

TEST_CASE("snaive: periodic series has zero forecast error") {
    std::vector<double> y;
    for (std::size_t t = 0; t < 60; ++t) y.push_back(50.0 + seasonal_shape(t));
    const auto out = snaive(series_of({y.begin(), y.begin() + 48}), 12);
    REQUIRE(out.horizon() == 12);
    for (std::size_t h = 0; h < 12; ++h) CHECK(out.forecasts[h] == y[48 + h]);
    CHECK(out.forecast_start == MonthStamp(2008, 1));
    CHECK(!out.lower.has_value());
}

TEST_CASE("snaive: June 2013 forecast is the June 2012 observation") {
    std::vector<double> y;
    for (std::size_t t = 0; t < 105; ++t) y.push_back(1000.0 + 3.7 * double(t) + std::sqrt(double(t) + 0.5));
    const auto train = series_of(y);
    REQUIRE(train.end() == MonthStamp(2012, 9));
    const auto out = snaive(train, 9);
    CHECK(out.forecast_start + 8 == MonthStamp(2013, 6));
    CHECK(out.forecasts[8] == *train[train.index_of(MonthStamp(2012, 6))]);
}

TEST_CASE("snaive: horizon 13 wraps to the first forecast") {
    std::vector<double> y;
    for (std::size_t t = 0; t < 30; ++t) y.push_back(double(t * t));
    const auto out = snaive(series_of(y), 13);
    CHECK(out.forecasts[12] == out.forecasts[0]);
    CHECK(out.fitted_start == MonthStamp(2005, 1));
    REQUIRE(out.fitted.size() == 18);
    for (std::size_t i = 0; i < out.fitted.size(); ++i) CHECK(out.fitted[i] == y[i]);
}

TEST_CASE("snaive: contract errors") {
    CHECK_THROWS_AS(snaive(series_of(std::vector<double>(11, 1.0)), 3), ContractError);
    CHECK_THROWS_AS(snaive(series_of(std::vector<double>(24, 1.0)), 0), DomainError);
    std::vector<Observation> gap(24, 1.0);
    gap[5] = std::nullopt;
    CHECK_THROWS(snaive(MonthlySeries(MonthStamp(2004, 1), gap), 3));
}

TEST_CASE("holt_winters: noiseless trend plus seasonality is recovered") {
    std::vector<double> y;
    for (std::size_t t = 0; t < 132; ++t) y.push_back(100.0 + 2.0 * double(t) + seasonal_shape(t));
    const auto out = holt_winters(series_of({y.begin(), y.begin() + 120}), 12);
    double mape = 0.0;
    for (std::size_t h = 0; h < 12; ++h) mape += std::abs(out.forecasts[h] - y[120 + h]) / std::abs(y[120 + h]);
    mape *= 100.0 / 12.0;
    CHECK(mape < 0.1);
}

TEST_CASE("holt_winters: constant series forecasts the constant") {
    const auto out = holt_winters(series_of(std::vector<double>(40, 7.25)), 18);
    for (double f : out.forecasts) CHECK(f == doctest::Approx(7.25).epsilon(1e-12));
}

TEST_CASE("holt_winters: weights are interior and beat every grid point") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n(0.0, 4.0);
    std::vector<double> y;
    double level = 50.0;
    for (std::size_t t = 0; t < 96; ++t) {
        level += 0.3 + 0.5 * n(rng);
        y.push_back(level + seasonal_shape(t) + n(rng));
    }
    const auto out = holt_winters(series_of(y), 12);
    const HoltWintersWeights w{out.meta_value("alpha"), out.meta_value("beta"), out.meta_value("gamma")};
    for (double v : {w.alpha, w.beta, w.gamma}) {
        CHECK(v >= 1e-4);
        CHECK(v <= 1.0 - 1e-4);
        CHECK(v != 0.0);
        CHECK(v != 1.0);
    }
    const double sse = out.meta_value("sse");
    CHECK(sse == doctest::Approx(holt_winters_sse(y, w)).epsilon(1e-12));
    CHECK(out.meta_value("grid_points") == 19.0 * 19.0 * 19.0);
    for (int i = 1; i < 20; ++i)
        for (int j = 1; j < 20; ++j)
            for (int k = 1; k < 20; ++k) CHECK_LE(sse, holt_winters_sse(y, {0.05 * i, 0.05 * j, 0.05 * k}));
}

TEST_CASE("holt_winters: fitted values are one-step predictions over the whole sample") {
    std::vector<double> y;
    for (std::size_t t = 0; t < 36; ++t) y.push_back(20.0 + seasonal_shape(t) + 0.1 * double(t % 5));
    HoltWintersOptions opt;
    opt.fixed_weights = HoltWintersWeights{0.3, 0.1, 0.2};
    const auto out = holt_winters(series_of(y), 5, opt);
    CHECK(out.fitted_start == MonthStamp(2004, 1));
    REQUIRE(out.fitted.size() == y.size());
    double sse = 0.0;
    for (std::size_t t = 0; t < y.size(); ++t) sse += (y[t] - out.fitted[t]) * (y[t] - out.fitted[t]);
    CHECK(sse == doctest::Approx(out.meta_value("sse")).epsilon(1e-12));
}

TEST_CASE("holt_winters: contract errors") {
    CHECK_THROWS_AS(holt_winters(series_of(std::vector<double>(23, 1.0)), 12), ContractError);
    HoltWintersOptions bad;
    bad.grid_step = 1.5;
    CHECK_THROWS_AS(holt_winters(series_of(std::vector<double>(30, 1.0)), 12, bad), DomainError);
}

TEST_CASE("sarima: likelihood matches the dense conditional Gaussian oracle") {
    struct Case {
        SarimaOrder order;
        std::vector<double> ar, ma, sar, sma;
        double mean;
    };
    const std::vector<Case> cases{
        {{1, 0, 1, 0, 0, 0}, {0.6}, {0.3}, {}, {}, 5.0},
        {{0, 1, 1, 0, 1, 1}, {}, {-0.4}, {}, {-0.5}, 0.0},
        {{1, 0, 0, 1, 0, 0}, {0.5}, {}, {0.4}, {}, -2.0},
        {{2, 0, 2, 0, 0, 1}, {0.5, -0.3}, {0.2, 0.1}, {}, {0.3}, 1.0},
        {{1, 1, 0, 1, 0, 1}, {0.4}, {}, {0.3}, {0.2}, 0.0},
    };
    std::uint64_t seed = 1;
    for (const auto& c : cases) {
        CAPTURE(c.order.to_string());
        const auto y = simulate_sarima(c.order, c.ar, c.ma, c.sar, c.sma, c.mean, 90, seed++);
        const auto fit = sarima_fit_order(series_of(y), c.order, 13);
        CHECK(fit.conditioning == 13);
        CHECK(fit.with_mean == (c.order.d == 0 && c.order.D == 0));
        double s2 = 0.0;
        const double oracle = dense_sarima_loglik(y, fit, &s2);
        CHECK(fit.loglik == doctest::Approx(oracle).epsilon(1e-8));
        CHECK(fit.sigma2 == doctest::Approx(s2).epsilon(1e-7));
        CHECK(fit.aic == 2.0 * fit.k - 2.0 * fit.loglik);

        // The estimate is a local maximum of the oracle likelihood.
        auto perturbed = fit;
        for (auto* v : {&perturbed.ar, &perturbed.ma, &perturbed.sar, &perturbed.sma}) {
            for (double& x : *v) {
                for (double d : {-2e-3, 2e-3}) {
                    x += d;
                    CHECK(dense_sarima_loglik(y, perturbed) <= fit.loglik + 1e-6);
                    x -= d;
                }
            }
        }
    }
}

TEST_CASE("sarima: conditioning must cover the differencing span") {
    const auto y = simulate_sarima({0, 1, 0, 0, 1, 0}, {}, {}, {}, {}, 0.0, 60, 3);
    CHECK_THROWS_AS(sarima_fit_order(series_of(y), {0, 1, 0, 0, 1, 0}, 5), ContractError);
}

TEST_CASE("sarima: reported AIC is definitional and minimal over converged candidates") {
    const auto y = simulate_sarima({1, 0, 0, 0, 1, 0}, {0.7}, {}, {}, {}, 0.0, 96, 21);
    SarimaOptions opt;
    opt.grid = SarimaGrid{{0, 1}, {0, 1}, {0, 1}, {0}, {0, 1}, {0, 1}};
    std::vector<SarimaCandidate> table;
    const auto out = sarima_fit(series_of(y), opt, &table);
    REQUIRE(table.size() == 32);
    const double aic = out.meta_value("aic");
    CHECK(aic == 2.0 * out.meta_value("k") - 2.0 * out.meta_value("loglik"));
    bool found = false;
    for (const auto& c : table) {
        CHECK(c.order.to_string().size() > 0);
        if (!c.converged) continue;
        CHECK(c.aic == 2.0 * c.k - 2.0 * c.loglik);
        CHECK(aic <= c.aic);
        found = found || c.aic == aic;
    }
    CHECK(found);
    CHECK(out.fitted_start == MonthStamp(2004, 1) + long(out.meta_value("d") + 12 * out.meta_value("D")));
    CHECK(out.fitted.size() + std::size_t(out.meta_value("d") + 12 * out.meta_value("D")) == y.size());
}

TEST_CASE("sarima: AR(1) forecast has the closed form") {
    const auto y = simulate_sarima({1, 0, 0, 0, 0, 0}, {0.6}, {}, {}, {}, 3.0, 80, 5);
    const auto fit = sarima_fit_order(series_of(y), {1, 0, 0, 0, 0, 0}, 13);
    const auto fc = sarima_forecast(series_of(y), fit, 6, 0.9);
    const double phi = fit.ar[0];
    const double z = normal_interval_z(0.9);
    for (std::size_t h = 1; h <= 6; ++h) {
        const double mean = fit.mean + std::pow(phi, double(h)) * (y.back() - fit.mean);
        const double var = fit.sigma2 * (1.0 - std::pow(phi, 2.0 * double(h))) / (1.0 - phi * phi);
        CHECK(fc.target_mean[h - 1] == doctest::Approx(mean).epsilon(1e-10));
        CHECK(fc.target_var[h - 1] == doctest::Approx(var).epsilon(1e-10));
        CHECK(fc.target_upper[h - 1] == doctest::Approx(mean + z * std::sqrt(var)).epsilon(1e-10));
    }
}

TEST_CASE("sarima: pure differencing models forecast like naive methods") {
    std::vector<double> y;
    NormalStream z(4, 0);
    double level = 10.0;
    for (std::size_t t = 0; t < 60; ++t) {
        level += z();
        y.push_back(level + seasonal_shape(t));
    }
    const auto rw = sarima_fit(series_of(y), single_order({0, 1, 0, 0, 0, 0}));
    for (std::size_t h = 0; h < 12; ++h) CHECK(rw.forecasts[h] == doctest::Approx(y.back()).epsilon(1e-12));

    const auto seasonal = sarima_fit(series_of(y), single_order({0, 0, 0, 0, 1, 0}));
    const auto sn = snaive(series_of(y), 12);
    const double s2 = seasonal.meta_value("sigma2");
    for (std::size_t h = 0; h < 12; ++h) {
        CHECK(seasonal.forecasts[h] == doctest::Approx(sn.forecasts[h]).epsilon(1e-12));
        const double half = (*seasonal.upper)[h] - seasonal.forecasts[h];
        CHECK(half == doctest::Approx(normal_interval_z(0.95) * std::sqrt(s2)).epsilon(1e-9));
    }
}

TEST_CASE("sarima: errors") {
    CHECK_THROWS_AS(sarima_fit(series_of(std::vector<double>(35, 1.0))), ContractError);
    const auto y = simulate_sarima({1, 0, 0, 0, 0, 0}, {0.5}, {}, {}, {}, 0.0, 48, 9);
    auto opt = single_order({1, 0, 1, 0, 0, 0});
    opt.max_iterations = 1;
    std::vector<SarimaCandidate> table;
    CHECK_THROWS_AS(sarima_fit(series_of(y), opt, &table), EstimationError);
    try {
        sarima_fit(series_of(y), opt);
    } catch (const EstimationError& e) {
        CHECK(std::string(e.what()).find("(1,0,1)(0,0,0)12") != std::string::npos);
    }
}

TEST_CASE("sarima: determinism") {
    const auto y = simulate_sarima({0, 1, 1, 0, 1, 1}, {}, {-0.3}, {}, {-0.4}, 0.0, 72, 13);
    SarimaOptions opt;
    opt.grid = SarimaGrid{{0, 1}, {1}, {0, 1}, {0}, {1}, {0, 1}};
    const auto a = sarima_fit(series_of(y), opt);
    const auto b = sarima_fit(series_of(y), opt);
    CHECK(a.forecasts == b.forecasts);
    CHECK(a.meta == b.meta);
}

TEST_CASE("dlm0: scalar model is the replicate model without the search block") {
    DlmParams p;
    p.beta = 3.0;
    p.sigma2_y1 = 2.0;
    p.sigma2_x1 = 0.5;
    for (int m = 0; m < 12; ++m) p.C(0, m) = 0.1 * m;
    p.x0(0) = 1.5;
    ScalarDlmParams s;
    s.sigma2_y = 2.0;
    s.sigma2_x = 0.5;
    s.C = p.C.row(0);
    s.x0 = 1.5;
    const auto full = build_nhnr_dlm(p, 2);
    const auto scalar = build_scalar_dlm(s);
    CHECK(scalar.G(0, 0) == full.G(0, 0));
    CHECK(scalar.F(0, 0) == full.F(0, 0));
    CHECK(scalar.V(0, 0) == full.V(0, 0));
    CHECK(scalar.W(0, 0) == full.W(0, 0));
    CHECK(scalar.C.row(0) == full.C.row(0));
    CHECK(scalar.x0(0) == full.x0(0));
}

TEST_CASE("dlm0: likelihood equals a hand-built scalar filter") {
    auto hand = [](const ScalarDlmParams& p, const std::vector<double>& y, MonthStamp start) {
        double m = p.x0, P = 0.0, ll = 0.0;
        for (std::size_t t = 0; t < y.size(); ++t) {
            const double a = m + p.C(0, (start + long(t)).month() - 1);
            const double R = P + p.sigma2_x;
            const double F = R + p.sigma2_y;
            const double v = y[t] - a;
            ll += -0.5 * (std::log(2.0 * std::numbers::pi * F) + v * v / F);
            m = a + R / F * v;
            P = R - R * R / F;
        }
        return ll;
    };

    ScalarDlmParams p;
    p.sigma2_y = 1.3;
    p.sigma2_x = 0.7;
    p.C << 0.5, -0.2, 0.1, 0.0, 0.3, -0.4, 0.2, 0.0, -0.1, 0.6, -0.3, 0.1;
    p.x0 = 2.0;
    const std::vector<double> y4{2.1, 2.9, 1.7, 3.4};
    const auto s4 = series_of(y4, MonthStamp(2010, 11));
    CHECK(kalman_filter(build_scalar_dlm(p), ObservationMatrix::from_series(s4)).loglik ==
          doctest::Approx(hand(p, y4, MonthStamp(2010, 11))).epsilon(1e-8));

    std::vector<double> y;
    NormalStream z(8, 0);
    double level = 100.0;
    for (std::size_t t = 0; t < 48; ++t) {
        level += 2.0 * z() + 0.5 * seasonal_shape(t);
        y.push_back(level + z());
    }
    EmConfig cfg;
    cfg.n_starts = 4;
    cfg.compute_ci = false;
    ScalarFitReport report;
    const auto out = dlm0(series_of(y), 12, cfg, &report);
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= double(y.size());
    std::vector<double> centred;
    for (double v : y) centred.push_back(v - mean);
    CHECK(report.loglik == doctest::Approx(hand(report.params, centred, MonthStamp(2004, 1))).epsilon(1e-8));
    CHECK(out.meta_value("loglik") == report.loglik);
    CHECK(out.fitted.size() == y.size());
    CHECK(out.lower.has_value());
}

TEST_CASE("dlm0: zero state noise and no seasonality gives flat forecasts") {
    // Variances must be positive; 1e-12 stands in for zero.
    ScalarDlmParams p;
    p.sigma2_y = 1.0;
    p.sigma2_x = 1e-12;
    p.x0 = 4.0;
    const auto spec = build_scalar_dlm(p);
    const auto filt = kalman_filter(spec, ObservationMatrix::from_series(series_of({4.5, 3.2, 4.1, 3.9})));
    ForecastOptions o;
    o.horizon = 15;
    const auto fc = forecast(spec, filt, o);
    for (double f : fc.target_mean) CHECK(f == fc.target_mean[0]);
    for (double v : fc.target_var) CHECK(v == doctest::Approx(fc.target_var[0]).epsilon(1e-10));
}

TEST_CASE("dlm0: contract errors") {
    CHECK_THROWS_AS(dlm0(series_of(std::vector<double>(23, 1.0)), 12), ContractError);
}

TEST_CASE("DLM1 beats DLM0 out of sample on replicate-model data with large beta") {
    int wins = 0;
    EmConfig cfg;
    cfg.n_starts = 5;
    cfg.compute_ci = false;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto sc = paper_like_scenario();
        sc.config.seed = seed;
        const auto sim = simulate(sc.config);
        const auto parts = split(sim.panel, sim.panel.end() - 12);
        const auto d1 = dlm_forecaster(parts.train, 12, cfg);
        const auto d0 = dlm0(parts.train.target(), 12, cfg);
        double r1 = 0.0, r0 = 0.0;
        for (std::size_t h = 0; h < 12; ++h) {
            const double y = *parts.test.target()[h];
            r1 += (d1.forecasts[h] - y) * (d1.forecasts[h] - y);
            r0 += (d0.forecasts[h] - y) * (d0.forecasts[h] - y);
        }
        wins += r1 < r0;
    }
    CHECK(wins > 5);
}
