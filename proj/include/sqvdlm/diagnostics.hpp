#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sqvdlm/benchmarks.hpp"
#include "sqvdlm/dlm.hpp"
#include "sqvdlm/series.hpp"

namespace sqvdlm {

double mae(const std::vector<double>& actual, const std::vector<double>& predicted);
double rmse(const std::vector<double>& actual, const std::vector<double>& predicted);
/// Percent. Throws DomainError when an actual value is zero.
double mape(const std::vector<double>& actual, const std::vector<double>& predicted);

enum class Metric { MAE, MAPE, RMSE };
/// In-sample, horizons 1-6, horizons 7-12.
enum class Window { In, Out6, Out12 };

inline constexpr std::array<Metric, 3> kMetrics{Metric::MAE, Metric::MAPE, Metric::RMSE};
inline constexpr std::array<Window, 3> kWindows{Window::In, Window::Out6, Window::Out12};
std::string to_string(Metric m);
std::string to_string(Window w);

struct AccuracyReport {
    /// values[metric][window]; empty when the window is not covered or the
    /// metric is undefined there (see flags).
    std::array<std::array<std::optional<double>, 3>, 3> values{};
    std::array<std::size_t, 3> counts{};
    std::vector<std::string> flags;

    std::optional<double> get(Metric m, Window w) const {
        return values[static_cast<std::size_t>(m)][static_cast<std::size_t>(w)];
    }
};

/// In-sample errors use months where both `train` and the fitted values are
/// observed; Out-6 and Out-12 are reported only when the holdout covers all
/// of horizons 1-6 and 7-12 respectively.
AccuracyReport accuracy(const MonthlySeries& train, const MonthStamp& fitted_start, const std::vector<double>& fitted,
                        const std::vector<double>& forecasts, const MonthlySeries& holdout);
AccuracyReport accuracy(const MonthlySeries& train, const ForecasterOutput& output, const MonthlySeries& holdout);

/// model x {MAE, MAPE, RMSE} x {In, Out-6, Out-12} as CSV; undefined cells are empty.
std::string accuracy_table_csv(const std::vector<std::pair<std::string, AccuracyReport>>& rows);

struct CcfReport {
    std::vector<int> lags;       // -L..L; lag k correlates x_t with y_{t+k}
    std::vector<double> values;
    double bound = 0.0;          // 1.96 / sqrt(n)
    std::size_t n = 0;           // residual pairs
    int ar_order = 0;
    std::vector<double> ar_coefficients;

    double at(int lag) const;
};

/// AR(p) fitted to x by Yule-Walker with p chosen by AIC (p <= max_ar); both
/// series are filtered with that polynomial before cross-correlating.
CcfReport prewhitened_ccf(const MonthlySeries& x, const MonthlySeries& y, int max_lag, int max_ar = 12);
CcfReport prewhitened_ccf(const std::vector<double>& x, const std::vector<double>& y, int max_lag, int max_ar = 12);

struct LjungBox {
    double statistic = 0.0;
    double p_value = 1.0;
    int df = 0;
};

/// Q = n(n+2) sum_{k=1..K} r_k^2 / (n-k) on demeaned residuals, chi-square
/// with K - fitted_parameters degrees of freedom.
LjungBox ljung_box(const std::vector<double>& residuals, int max_lag, int fitted_parameters = 0);

struct AdfResult {
    double statistic = 0.0;
    int lags = 0;
    std::size_t n = 0;             // series length the critical value refers to
    double critical_value = 0.0;   // 5%, constant only
    bool reject = false;           // unit root rejected at 5%
};

/// t-statistic on gamma in dx_t = alpha + gamma x_{t-1} + sum_j delta_j dx_{t-j} + e_t
/// with exactly `lags` lagged differences, on all usable observations.
double adf_statistic(const std::vector<double>& x, int lags);

/// Lag order by AIC over 0..max_lag on a common sample, then the chosen
/// regression on all usable observations.
AdfResult adf_test(const std::vector<double>& x, int max_lag);
AdfResult adf_test(const MonthlySeries& x, int max_lag);

/// Tabulated 5% Dickey-Fuller critical value (constant, no trend), linear in
/// n between table sizes and in 1/n beyond the last one.
double adf_critical_value_5pct(std::size_t n);

/// 100 (L_b - L_a) / L_a per horizon with L = upper - lower.
std::vector<double> interval_length_pct_diff(const ForecastResult& a, const ForecastResult& b);

}  // namespace sqvdlm
