#include "sqvdlm/benchmarks.hpp"

#include "sqvdlm/errors.hpp"
#include "sqvdlm/replicate_filter.hpp"

namespace sqvdlm {

double ForecasterOutput::meta_value(const std::string& key) const {
    for (const auto& [k, v] : meta) {
        if (k == key) return v;
    }
    throw ContractError(model + " has no meta entry " + key);
}

ForecasterOutput snaive(const MonthlySeries& train, std::size_t horizon) {
    if (train.size() < 12) {
        throw ContractError("SNAIVE needs at least 12 training months, got " + std::to_string(train.size()));
    }
    if (horizon < 1) throw DomainError("forecast horizon must be at least 1");
    const auto y = train.dense("SNAIVE training series");
    const std::size_t T = y.size();

    ForecasterOutput out;
    out.model = "SNAIVE";
    out.description = "seasonal naive, period 12";
    out.fitted_start = train.start() + 12;
    out.fitted.assign(y.begin(), y.end() - 12);
    out.forecast_start = train.end() + 1;
    for (std::size_t h = 1; h <= horizon; ++h) out.forecasts.push_back(y[T - 12 + (h - 1) % 12]);
    out.meta = {{"period", 12.0}};
    return out;
}

namespace {

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

ForecasterOutput dlm0(const MonthlySeries& train, std::size_t horizon, const EmConfig& config,
                      ScalarFitReport* report_out) {
    if (train.size() < 24) {
        throw ContractError("DLM0 needs at least 24 training months, got " + std::to_string(train.size()));
    }
    const auto observed = train.observed();
    if (observed.empty()) throw DomainError("DLM0 training series has no observations");
    const double offset = mean_of(observed);
    std::vector<Observation> centred(train.size());
    for (std::size_t t = 0; t < train.size(); ++t) {
        if (train[t]) centred[t] = *train[t] - offset;
    }
    const MonthlySeries y(train.start(), std::move(centred));

    auto report = fit_scalar(y, config);
    const auto spec = build_scalar_dlm(report.params, config.initial_state);
    const auto filt = kalman_filter(spec, ObservationMatrix::from_series(y));
    ForecastOptions o;
    o.horizon = horizon;
    o.level = config.ci_level;
    o.offsets = std::vector<double>{offset};
    const auto fc = forecast(spec, filt, o);

    ForecasterOutput out;
    out.model = "DLM0";
    out.description = "random walk with fixed monthly effects";
    out.fitted_start = train.start();
    for (const auto& a : filt.predicted_mean) out.fitted.push_back(a(0) + offset);
    out.forecast_start = fc.first;
    out.forecasts = fc.target_mean;
    out.lower = fc.target_lower;
    out.upper = fc.target_upper;
    out.level = fc.level;
    out.meta = {{"loglik", report.loglik},
                {"sigma2_y", report.params.sigma2_y},
                {"sigma2_x", report.params.sigma2_x},
                {"iterations", static_cast<double>(report.iterations_used)},
                {"converged", report.converged ? 1.0 : 0.0}};
    if (report_out) *report_out = std::move(report);
    return out;
}

ForecasterOutput dlm_forecaster(const ObservationPanel& train, std::size_t horizon, const EmConfig& config,
                                const std::string& name, FitReport* report_out, ForecastResult* forecast_out) {
    const auto centred = demean(train, train.end());
    const auto a = centred.replicate_count();
    auto report = fit(centred, a, config);
    const auto spec = build_nhnr_dlm(report.params, a, config.initial_state);
    const auto model = reduced::to_model(report.params, config.initial_state);
    const auto filt = reduced::filter(model, reduced::reduce(centred));

    ForecastOptions o;
    o.horizon = horizon;
    o.level = config.ci_level;
    o.offsets = centred.demean_offsets();
    o.latent_component = 1;
    const auto fc = forecast_from_state(spec, train.end() + 1, filt.filtered_mean.back(), filt.filtered_cov.back(), o);

    const double offset = (*centred.demean_offsets())[0];
    ForecasterOutput out;
    out.model = name;
    out.description = "replicate DLM, a = " + std::to_string(a);
    out.fitted_start = train.start();
    for (double p : filt.target_prediction) out.fitted.push_back(p + offset);
    out.forecast_start = fc.first;
    out.forecasts = fc.target_mean;
    out.lower = fc.target_lower;
    out.upper = fc.target_upper;
    out.level = fc.level;
    out.meta = {{"replicates", static_cast<double>(a)},
                {"loglik", report.loglik},
                {"beta", report.params.beta},
                {"sigma2_y1", report.params.sigma2_y1},
                {"sigma2_y2", report.params.sigma2_y2},
                {"sigma2_x1", report.params.sigma2_x1},
                {"sigma2_x2", report.params.sigma2_x2},
                {"iterations", static_cast<double>(report.iterations_used)},
                {"converged", report.converged ? 1.0 : 0.0}};
    if (report_out) *report_out = std::move(report);
    if (forecast_out) *forecast_out = fc;
    return out;
}

}  // namespace sqvdlm
