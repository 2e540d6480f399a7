#include "sqvdlm/diagnostics.hpp"

#include <gsl/gsl_cdf.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sqvdlm/errors.hpp"

namespace sqvdlm {

namespace {

void require_same_length(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw ContractError("actual and predicted lengths differ");
    if (a.empty()) throw ContractError("no values to score");
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

double mae(const std::vector<double>& actual, const std::vector<double>& predicted) {
    require_same_length(actual, predicted);
    double s = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) s += std::abs(actual[i] - predicted[i]);
    return s / static_cast<double>(actual.size());
}

double rmse(const std::vector<double>& actual, const std::vector<double>& predicted) {
    require_same_length(actual, predicted);
    double s = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) s += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
    return std::sqrt(s / static_cast<double>(actual.size()));
}

double mape(const std::vector<double>& actual, const std::vector<double>& predicted) {
    require_same_length(actual, predicted);
    double s = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        if (actual[i] == 0.0) throw DomainError("MAPE undefined: actual value is zero");
        s += 100.0 * std::abs(actual[i] - predicted[i]) / std::abs(actual[i]);
    }
    return s / static_cast<double>(actual.size());
}

std::string to_string(Metric m) {
    switch (m) {
        case Metric::MAE: return "MAE";
        case Metric::MAPE: return "MAPE";
        case Metric::RMSE: return "RMSE";
    }
    return "?";
}

std::string to_string(Window w) {
    switch (w) {
        case Window::In: return "In";
        case Window::Out6: return "Out-6";
        case Window::Out12: return "Out-12";
    }
    return "?";
}

AccuracyReport accuracy(const MonthlySeries& train, const MonthStamp& fitted_start, const std::vector<double>& fitted,
                        const std::vector<double>& forecasts, const MonthlySeries& holdout) {
    AccuracyReport report;
    std::array<std::vector<double>, 3> act, pred;

    for (std::size_t i = 0; i < fitted.size(); ++i) {
        const MonthStamp t = fitted_start + static_cast<long>(i);
        if (t < train.start() || t > train.end()) continue;
        const auto& y = train[train.index_of(t)];
        if (!y) continue;
        act[0].push_back(*y);
        pred[0].push_back(fitted[i]);
    }

    const std::size_t covered = std::min(forecasts.size(), holdout.size());
    const std::array<std::pair<std::size_t, std::size_t>, 2> spans{{{0, 6}, {6, 12}}};
    for (std::size_t w = 0; w < 2; ++w) {
        const auto [lo, hi] = spans[w];
        if (covered < hi) {
            report.flags.push_back(to_string(kWindows[w + 1]) + ": holdout does not cover horizons " +
                                   std::to_string(lo + 1) + "-" + std::to_string(hi));
            continue;
        }
        for (std::size_t h = lo; h < hi; ++h) {
            if (!holdout[h]) continue;
            act[w + 1].push_back(*holdout[h]);
            pred[w + 1].push_back(forecasts[h]);
        }
        if (act[w + 1].size() < hi - lo) {
            report.flags.push_back(to_string(kWindows[w + 1]) + ": missing actual values skipped");
        }
    }

    for (std::size_t w = 0; w < 3; ++w) {
        report.counts[w] = act[w].size();
        if (act[w].empty()) continue;
        report.values[0][w] = mae(act[w], pred[w]);
        report.values[2][w] = rmse(act[w], pred[w]);
        try {
            report.values[1][w] = mape(act[w], pred[w]);
        } catch (const DomainError&) {
            report.flags.push_back(to_string(kWindows[w]) + ": MAPE undefined, an actual value is zero");
        }
    }
    return report;
}

AccuracyReport accuracy(const MonthlySeries& train, const ForecasterOutput& output, const MonthlySeries& holdout) {
    if (holdout.start() != output.forecast_start) {
        throw ContractError("holdout starts at " + holdout.start().to_string() + " but forecasts at " +
                            output.forecast_start.to_string());
    }
    return accuracy(train, output.fitted_start, output.fitted, output.forecasts, holdout);
}

std::string accuracy_table_csv(const std::vector<std::pair<std::string, AccuracyReport>>& rows) {
    std::ostringstream out;
    out.precision(10);
    out << "model";
    for (Metric m : kMetrics)
        for (Window w : kWindows) out << ',' << to_string(m) << '_' << to_string(w);
    out << '\n';
    for (const auto& [name, rep] : rows) {
        out << name;
        for (Metric m : kMetrics) {
            for (Window w : kWindows) {
                out << ',';
                if (const auto v = rep.get(m, w)) out << *v;
            }
        }
        out << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Prewhitened cross-correlation

double CcfReport::at(int lag) const {
    for (std::size_t i = 0; i < lags.size(); ++i) {
        if (lags[i] == lag) return values[i];
    }
    throw ContractError("lag " + std::to_string(lag) + " outside the reported range");
}

namespace {

std::vector<double> autocovariances(const std::vector<double>& x, int max_lag) {
    const double m = mean_of(x);
    const auto n = x.size();
    std::vector<double> c(std::size_t(max_lag) + 1, 0.0);
    for (std::size_t k = 0; k <= std::size_t(max_lag); ++k) {
        for (std::size_t t = k; t < n; ++t) c[k] += (x[t] - m) * (x[t - k] - m);
        c[k] /= static_cast<double>(n);
    }
    return c;
}

struct ArFit {
    std::vector<double> phi;
    double sigma2 = 0.0;
};

// Durbin-Levinson on sample autocovariances; AIC n log sigma2_p + 2p.
ArFit yule_walker_aic(const std::vector<double>& x, int max_ar) {
    const auto c = autocovariances(x, max_ar);
    if (!(c[0] > 0.0)) throw DegeneracyError("prewhitening: series has zero variance");
    const double n = static_cast<double>(x.size());
    ArFit best{{}, c[0]};
    double best_aic = n * std::log(c[0]);
    std::vector<double> phi;
    double v = c[0];
    for (int p = 1; p <= max_ar; ++p) {
        double num = c[std::size_t(p)];
        for (int j = 1; j < p; ++j) num -= phi[std::size_t(j - 1)] * c[std::size_t(p - j)];
        const double k = num / v;
        if (!(std::abs(k) < 1.0)) throw EstimationError("prewhitening AR fit is nonstationary");
        std::vector<double> next(static_cast<std::size_t>(p));
        next[std::size_t(p - 1)] = k;
        for (int j = 1; j < p; ++j) next[std::size_t(j - 1)] = phi[std::size_t(j - 1)] - k * phi[std::size_t(p - j - 1)];
        phi = std::move(next);
        v *= (1.0 - k * k);
        const double aic = n * std::log(v) + 2.0 * p;
        if (aic < best_aic) {
            best_aic = aic;
            best = {phi, v};
        }
    }
    return best;
}

std::vector<double> ar_filter(const std::vector<double>& x, const std::vector<double>& phi) {
    const double m = mean_of(x);
    std::vector<double> e;
    for (std::size_t t = phi.size(); t < x.size(); ++t) {
        double v = x[t] - m;
        for (std::size_t j = 0; j < phi.size(); ++j) v -= phi[j] * (x[t - j - 1] - m);
        e.push_back(v);
    }
    return e;
}

}  // namespace

CcfReport prewhitened_ccf(const std::vector<double>& x, const std::vector<double>& y, int max_lag, int max_ar) {
    if (max_lag < 0) throw DomainError("max lag must be nonnegative");
    if (max_ar < 0) throw DomainError("prewhitening AR order must be nonnegative");
    if (x.size() != y.size()) throw ContractError("cross-correlated series must have equal lengths");
    if (x.size() < 3 * std::size_t(std::max(max_lag, 1))) {
        throw ContractError("series length " + std::to_string(x.size()) + " is below 3 x max lag");
    }
    if (x.size() <= std::size_t(max_ar) + 2) throw ContractError("series too short for the prewhitening AR order");

    const auto ar = yule_walker_aic(x, max_ar);
    const auto ex = ar_filter(x, ar.phi);
    const auto ey = ar_filter(y, ar.phi);
    const double mx = mean_of(ex);
    const double my = mean_of(ey);
    double sxx = 0.0, syy = 0.0;
    for (std::size_t t = 0; t < ex.size(); ++t) {
        sxx += (ex[t] - mx) * (ex[t] - mx);
        syy += (ey[t] - my) * (ey[t] - my);
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) throw DegeneracyError("prewhitened residuals have zero variance");

    CcfReport r;
    r.n = ex.size();
    r.bound = 1.96 / std::sqrt(static_cast<double>(r.n));
    r.ar_order = static_cast<int>(ar.phi.size());
    r.ar_coefficients = ar.phi;
    const auto n = static_cast<long>(r.n);
    for (int k = -max_lag; k <= max_lag; ++k) {
        double s = 0.0;
        for (long t = std::max(0L, -long(k)); t < n && t + k < n; ++t) {
            s += (ex[std::size_t(t)] - mx) * (ey[std::size_t(t + k)] - my);
        }
        r.lags.push_back(k);
        r.values.push_back(s / std::sqrt(sxx * syy));
    }
    return r;
}

CcfReport prewhitened_ccf(const MonthlySeries& x, const MonthlySeries& y, int max_lag, int max_ar) {
    if (x.start() != y.start() || x.size() != y.size()) {
        throw ContractError("cross-correlated series must cover the same months");
    }
    return prewhitened_ccf(x.dense("CCF input x"), y.dense("CCF input y"), max_lag, max_ar);
}

// ---------------------------------------------------------------------------
// Ljung-Box

LjungBox ljung_box(const std::vector<double>& residuals, int max_lag, int fitted_parameters) {
    if (max_lag < 1) throw DomainError("Ljung-Box needs max_lag >= 1");
    const int df = max_lag - fitted_parameters;
    if (df <= 0) throw DomainError("Ljung-Box degrees of freedom must be positive, got " + std::to_string(df));
    if (residuals.size() <= std::size_t(max_lag)) {
        throw ContractError("Ljung-Box needs more than " + std::to_string(max_lag) + " residuals");
    }
    const auto c = autocovariances(residuals, max_lag);
    if (!(c[0] > 0.0)) throw DegeneracyError("Ljung-Box residuals have zero variance");
    const double n = static_cast<double>(residuals.size());
    double q = 0.0;
    for (int k = 1; k <= max_lag; ++k) {
        const double r = c[std::size_t(k)] / c[0];
        q += r * r / (n - k);
    }
    q *= n * (n + 2.0);
    return {q, gsl_cdf_chisq_Q(q, df), df};
}

// ---------------------------------------------------------------------------
// Augmented Dickey-Fuller

namespace {

struct AdfRegression {
    double statistic = 0.0;
    double rss = 0.0;
    std::size_t n = 0;
    int k = 0;
};

// Rows t = first..T-1 of dx_t on (1, x_{t-1}, dx_{t-1}, ..., dx_{t-lags}).
AdfRegression adf_regression(const std::vector<double>& x, int lags, std::size_t first) {
    const auto L = static_cast<std::size_t>(lags);
    if (first < L + 1) throw ContractError("ADF sample starts before the lagged differences exist");
    if (x.size() <= first) throw ContractError("ADF sample is empty");
    const auto n = static_cast<Eigen::Index>(x.size() - first);
    const Eigen::Index k = 2 + lags;
    if (n <= k) throw DegeneracyError("ADF regression has no residual degrees of freedom");
    Matrix X(n, k);
    Vector yv(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const std::size_t t = first + std::size_t(i);
        yv(i) = x[t] - x[t - 1];
        X(i, 0) = 1.0;
        X(i, 1) = x[t - 1];
        for (std::size_t j = 1; j <= L; ++j) X(i, 1 + Eigen::Index(j)) = x[t - j] - x[t - j - 1];
    }
    const Eigen::ColPivHouseholderQR<Matrix> qr(X);
    if (qr.rank() < k) throw DegeneracyError("ADF regression design is rank deficient");
    const Vector beta = qr.solve(yv);
    const Vector resid = yv - X * beta;
    AdfRegression out;
    out.rss = resid.squaredNorm();
    out.n = static_cast<std::size_t>(n);
    out.k = static_cast<int>(k);
    const double s2 = out.rss / static_cast<double>(n - k);
    const Matrix xtx_inv = (X.transpose() * X).inverse();
    const double se = std::sqrt(s2 * xtx_inv(1, 1));
    if (!(se > 0.0) || !std::isfinite(se)) throw DegeneracyError("ADF regression has zero residual variance");
    out.statistic = beta(1) / se;
    return out;
}

}  // namespace

double adf_statistic(const std::vector<double>& x, int lags) {
    if (lags < 0) throw DomainError("ADF lag order must be nonnegative");
    return adf_regression(x, lags, std::size_t(lags) + 1).statistic;
}

double adf_critical_value_5pct(std::size_t n) {
    // Dickey-Fuller tau_mu, 5%.
    static constexpr std::array<std::pair<double, double>, 5> table{
        {{25.0, -3.00}, {50.0, -2.93}, {100.0, -2.89}, {250.0, -2.88}, {500.0, -2.87}}};
    constexpr double asymptotic = -2.86;
    const double m = static_cast<double>(n);
    if (m <= table.front().first) return table.front().second;
    for (std::size_t i = 1; i < table.size(); ++i) {
        if (m <= table[i].first) {
            const auto [n0, c0] = table[i - 1];
            const auto [n1, c1] = table[i];
            return c0 + (c1 - c0) * (m - n0) / (n1 - n0);
        }
    }
    const auto [nl, cl] = table.back();
    return asymptotic + (cl - asymptotic) * (nl / m);
}

AdfResult adf_test(const std::vector<double>& x, int max_lag) {
    if (x.size() < 25) throw ContractError("ADF test needs at least 25 observations");
    if (max_lag < 0) throw DomainError("ADF lag order must be nonnegative");
    const std::size_t common = std::size_t(max_lag) + 1;
    int best = 0;
    double best_aic = std::numeric_limits<double>::infinity();
    for (int p = 0; p <= max_lag; ++p) {
        const auto r = adf_regression(x, p, common);
        const double aic = static_cast<double>(r.n) * std::log(r.rss / static_cast<double>(r.n)) + 2.0 * r.k;
        if (aic < best_aic) {
            best_aic = aic;
            best = p;
        }
    }
    AdfResult out;
    out.lags = best;
    out.statistic = adf_statistic(x, best);
    out.n = x.size();
    out.critical_value = adf_critical_value_5pct(x.size());
    out.reject = out.statistic < out.critical_value;
    return out;
}

AdfResult adf_test(const MonthlySeries& x, int max_lag) { return adf_test(x.dense("ADF input"), max_lag); }

// ---------------------------------------------------------------------------

std::vector<double> interval_length_pct_diff(const ForecastResult& a, const ForecastResult& b) {
    if (a.horizon() != b.horizon()) throw ContractError("interval comparison needs equal horizons");
    if (a.level != b.level) throw ContractError("interval comparison needs equal levels");
    std::vector<double> out;
    for (std::size_t h = 0; h < a.horizon(); ++h) {
        const double la = a.target_upper[h] - a.target_lower[h];
        const double lb = b.target_upper[h] - b.target_lower[h];
        if (!(la > 0.0)) throw DomainError("reference interval has zero length at horizon " + std::to_string(h + 1));
        out.push_back(100.0 * (lb - la) / la);
    }
    return out;
}

}  // namespace sqvdlm
