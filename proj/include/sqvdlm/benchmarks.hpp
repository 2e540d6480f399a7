#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sqvdlm/dlm.hpp"
#include "sqvdlm/em.hpp"
#include "sqvdlm/series.hpp"

namespace sqvdlm {

/// Common output of every forecaster.
struct ForecasterOutput {
    std::string model;
    /// One-step in-sample predictions for train months fitted_start..end.
    MonthStamp fitted_start;
    std::vector<double> fitted;
    MonthStamp forecast_start;
    std::vector<double> forecasts;
    /// Per-horizon bounds at `level`, when the model provides them.
    std::optional<std::vector<double>> lower;
    std::optional<std::vector<double>> upper;
    double level = 0.95;
    /// Selected orders, smoothing weights, AIC and similar, in a stable order.
    std::vector<std::pair<std::string, double>> meta;
    std::string description;

    std::size_t horizon() const { return forecasts.size(); }
    /// Throws ContractError if `key` is absent.
    double meta_value(const std::string& key) const;
};

/// Forecast for month T+h repeats the observed value twelve months before
/// T+1+((h-1) mod 12); fitted value at t is y_{t-12}.
ForecasterOutput snaive(const MonthlySeries& train, std::size_t horizon);

struct HoltWintersWeights {
    double alpha = 0.5;
    double beta = 0.1;
    double gamma = 0.1;
};

struct HoltWintersOptions {
    double grid_step = 0.05;
    double clamp = 1e-4;
    /// Skip the search and use these weights.
    std::optional<HoltWintersWeights> fixed_weights;
};

/// One-step squared error sum of additive Holt-Winters at the given weights,
/// with initial states from a classical decomposition of the first two years.
double holt_winters_sse(const std::vector<double>& y, const HoltWintersWeights& w);

/// Additive Holt-Winters with weights minimising in-sample one-step SSE.
ForecasterOutput holt_winters(const MonthlySeries& train, std::size_t horizon,
                              const HoltWintersOptions& options = {});

struct SarimaOrder {
    int p = 0, d = 0, q = 0;
    int P = 0, D = 0, Q = 0;

    int parameter_count(bool with_mean) const { return p + q + P + Q + (with_mean ? 1 : 0) + 1; }
    std::string to_string() const;
    auto operator<=>(const SarimaOrder&) const = default;
};

struct SarimaGrid {
    std::vector<int> p{0, 1, 2}, d{0, 1}, q{0, 1, 2};
    std::vector<int> P{0, 1}, D{0, 1}, Q{0, 1};

    std::vector<SarimaOrder> orders() const;
};

struct SarimaCandidate {
    SarimaOrder order;
    bool converged = false;
    double loglik = 0.0;
    double aic = 0.0;
    int k = 0;
    std::string status;
};

struct SarimaOptions {
    SarimaGrid grid;
    std::size_t horizon = 12;
    double level = 0.95;
    int max_iterations = 2000;
    double simplex_tol = 1e-5;
    /// Fits with an AR or MA root (in B) of modulus below this are boundary
    /// solutions and count as not converged; 0 disables the check.
    double min_root_modulus = 1.01;
};

struct SarimaFit {
    SarimaOrder order;
    std::vector<double> ar;        // phi_1..phi_p
    std::vector<double> ma;        // theta_1..theta_q
    std::vector<double> sar;       // Phi_1..Phi_P
    std::vector<double> sma;       // Theta_1..Theta_Q
    double mean = 0.0;             // only with d = D = 0
    bool with_mean = false;
    double sigma2 = 0.0;
    double loglik = 0.0;
    double aic = 0.0;
    int k = 0;
    std::size_t conditioning = 0;  // leading observations the likelihood conditions on
};

/// Fits one order. The likelihood of the differenced series is exact given
/// the first `conditioning` observations, so fits on one sample are comparable
/// across differencing orders.
SarimaFit sarima_fit_order(const MonthlySeries& train, const SarimaOrder& order, std::size_t conditioning,
                           const SarimaOptions& options = {});

/// AIC selection over the grid; the winner is refit and forecast. The
/// per-candidate table is returned through `candidates` when given.
ForecasterOutput sarima_fit(const MonthlySeries& train, const SarimaOptions& options = {},
                            std::vector<SarimaCandidate>* candidates = nullptr);

/// Forecast of a fitted SARIMA from the end of `train`.
ForecastResult sarima_forecast(const MonthlySeries& train, const SarimaFit& fit, std::size_t horizon, double level);

/// Scalar random walk with monthly effects (no search data), fitted by EM on
/// the demeaned training series; `report` receives the fit on that scale.
ForecasterOutput dlm0(const MonthlySeries& train, std::size_t horizon, const EmConfig& config = {},
                      ScalarFitReport* report = nullptr);

/// Replicate DLM fitted by EM on the demeaned training panel; forecasts are
/// re-centred with the training offsets.
ForecasterOutput dlm_forecaster(const ObservationPanel& train, std::size_t horizon, const EmConfig& config = {},
                                const std::string& name = "DLM1", FitReport* report = nullptr,
                                ForecastResult* forecast_out = nullptr);

}  // namespace sqvdlm
