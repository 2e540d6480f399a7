#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "sqvdlm/benchmarks.hpp"
#include "sqvdlm/errors.hpp"

namespace sqvdlm {

namespace {

constexpr std::size_t kPeriod = 12;

struct HwState {
    double level = 0.0;
    double trend = 0.0;
    std::array<double, kPeriod> season{};  // season[i] applies to observation i mod 12
};

// Classical additive decomposition of the first two years: a centred 2x12
// moving average gives the trend over observations 6..17, the detrended values
// give one seasonal index per position (normalised to sum to zero), and a line
// through the deseasonalised first 24 points gives level and trend at t = 0.
HwState initial_state(const std::vector<double>& y) {
    HwState s;
    std::array<double, kPeriod> idx{};
    for (std::size_t t = 6; t < 18; ++t) {
        double ma = 0.5 * (y[t - 6] + y[t + 6]);
        for (std::size_t j = t - 5; j <= t + 5; ++j) ma += y[j];
        idx[t % kPeriod] = y[t] - ma / 12.0;
    }
    double mean = 0.0;
    for (double v : idx) mean += v;
    mean /= kPeriod;
    for (std::size_t i = 0; i < kPeriod; ++i) s.season[i] = idx[i] - mean;

    // Least squares of y_t - s_t on t = 1..24.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t t = 0; t < 2 * kPeriod; ++t) {
        const double x = static_cast<double>(t + 1);
        const double v = y[t] - s.season[t % kPeriod];
        sx += x;
        sy += v;
        sxx += x * x;
        sxy += x * v;
    }
    const double n = 2.0 * kPeriod;
    s.trend = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    s.level = (sy - s.trend * sx) / n;
    return s;
}

// Runs the recursions; returns SSE and leaves the final state in `s`.
double run(const std::vector<double>& y, const HoltWintersWeights& w, HwState& s, std::vector<double>* fitted) {
    double sse = 0.0;
    for (std::size_t t = 0; t < y.size(); ++t) {
        const std::size_t i = t % kPeriod;
        const double pred = s.level + s.trend + s.season[i];
        if (fitted) fitted->push_back(pred);
        const double e = y[t] - pred;
        sse += e * e;
        const double prev_level = s.level;
        s.level = w.alpha * (y[t] - s.season[i]) + (1.0 - w.alpha) * (s.level + s.trend);
        s.trend = w.beta * (s.level - prev_level) + (1.0 - w.beta) * s.trend;
        s.season[i] = w.gamma * (y[t] - s.level) + (1.0 - w.gamma) * s.season[i];
    }
    return sse;
}

struct NmData {
    const std::vector<double>* y;
    double clamp;
};

HoltWintersWeights clamp_weights(const gsl_vector* x, double c) {
    auto cl = [&](double v) { return std::clamp(v, c, 1.0 - c); };
    return {cl(gsl_vector_get(x, 0)), cl(gsl_vector_get(x, 1)), cl(gsl_vector_get(x, 2))};
}

double nm_objective(const gsl_vector* x, void* params) {
    const auto* d = static_cast<const NmData*>(params);
    const double sse = holt_winters_sse(*d->y, clamp_weights(x, d->clamp));
    return std::isfinite(sse) ? sse : std::numeric_limits<double>::max();
}

HoltWintersWeights refine(const std::vector<double>& y, const HoltWintersWeights& start, double clamp, double step) {
    NmData data{&y, clamp};
    gsl_multimin_function f{&nm_objective, 3, &data};
    gsl_vector* x = gsl_vector_alloc(3);
    gsl_vector* ss = gsl_vector_alloc(3);
    gsl_vector_set(x, 0, start.alpha);
    gsl_vector_set(x, 1, start.beta);
    gsl_vector_set(x, 2, start.gamma);
    gsl_vector_set_all(ss, step / 2.0);
    gsl_multimin_fminimizer* m = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 3);
    gsl_multimin_fminimizer_set(m, &f, x, ss);
    for (int it = 0; it < 1000; ++it) {
        if (gsl_multimin_fminimizer_iterate(m) != GSL_SUCCESS) break;
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m), 1e-8) == GSL_SUCCESS) break;
    }
    const auto out = clamp_weights(m->x, clamp);
    gsl_multimin_fminimizer_free(m);
    gsl_vector_free(ss);
    gsl_vector_free(x);
    return out;
}

}  // namespace

double holt_winters_sse(const std::vector<double>& y, const HoltWintersWeights& w) {
    if (y.size() < 2 * kPeriod) throw ContractError("Holt-Winters needs at least 24 observations");
    HwState s = initial_state(y);
    return run(y, w, s, nullptr);
}

ForecasterOutput holt_winters(const MonthlySeries& train, std::size_t horizon, const HoltWintersOptions& options) {
    if (train.size() < 2 * kPeriod) {
        throw ContractError("Holt-Winters needs at least 24 training months, got " + std::to_string(train.size()));
    }
    if (horizon < 1) throw DomainError("forecast horizon must be at least 1");
    if (!(options.grid_step > 0.0 && options.grid_step < 1.0)) throw DomainError("grid step must lie in (0, 1)");
    const auto y = train.dense("Holt-Winters training series");

    HoltWintersWeights best;
    double best_sse = std::numeric_limits<double>::infinity();
    std::size_t grid_points = 0;
    if (options.fixed_weights) {
        best = *options.fixed_weights;
        best_sse = holt_winters_sse(y, best);
    } else {
        const int n = static_cast<int>(std::round(1.0 / options.grid_step));
        for (int i = 1; i < n; ++i) {
            for (int j = 1; j < n; ++j) {
                for (int k = 1; k < n; ++k) {
                    const HoltWintersWeights w{i * options.grid_step, j * options.grid_step, k * options.grid_step};
                    const double sse = holt_winters_sse(y, w);
                    ++grid_points;
                    if (sse < best_sse) {
                        best_sse = sse;
                        best = w;
                    }
                }
            }
        }
        const auto refined = refine(y, best, options.clamp, options.grid_step);
        const double refined_sse = holt_winters_sse(y, refined);
        if (refined_sse < best_sse) {
            best = refined;
            best_sse = refined_sse;
        }
    }

    HwState s = initial_state(y);
    ForecasterOutput out;
    out.model = "HW";
    out.description = "additive Holt-Winters, period 12";
    out.fitted_start = train.start();
    run(y, best, s, &out.fitted);
    out.forecast_start = train.end() + 1;
    const std::size_t T = y.size();
    for (std::size_t h = 1; h <= horizon; ++h) {
        // Latest seasonal estimate for the position of T + h.
        out.forecasts.push_back(s.level + static_cast<double>(h) * s.trend + s.season[(T + h - 1) % kPeriod]);
    }
    out.meta = {{"alpha", best.alpha},
                {"beta", best.beta},
                {"gamma", best.gamma},
                {"sse", best_sse},
                {"grid_points", static_cast<double>(grid_points)}};
    return out;
}

}  // namespace sqvdlm
