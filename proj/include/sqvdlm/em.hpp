#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sqvdlm/dlm.hpp"
#include "sqvdlm/series.hpp"

namespace sqvdlm {

struct EmConfig {
    int max_iterations = 5000;
    double rel_tol = 1e-8;  // on |l_k - l_{k-1}| / max(1, |l_{k-1}|)
    int n_starts = 20;
    int warmup_iterations = 50;
    std::uint64_t seed = 1;
    /// Variances are floored at variance_floor times the sample variance of
    /// the series they belong to.
    double variance_floor = 1e-8;
    InitialState initial_state = InitialState::Fixed;
    bool compute_ci = true;
    double ci_level = 0.95;

    /// Throws DomainError when a field is out of range.
    void validate() const;
};

enum class Transform { Identity, Log };

struct ParameterInterval {
    std::string name;
    double estimate = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double std_error = 0.0;  // in the transformed coordinate
    Transform transform = Transform::Identity;
};

struct IntervalReport {
    double level = 0.95;
    bool reliable = true;
    std::string status = "ok";
    std::vector<ParameterInterval> intervals;

    /// Throws ContractError for an unknown name.
    const ParameterInterval& at(const std::string& name) const;
};

struct StartDiagnostic {
    int index = 0;
    bool ok = false;
    double loglik = 0.0;  // after warm-up
    std::string reason;
};

template <class Params>
struct BasicFitReport {
    Params params;
    double loglik = 0.0;  // at params; the maximum of the trace
    std::vector<double> loglik_trace;
    bool converged = false;
    int iterations_used = 0;
    int best_start = 0;
    std::size_t replicates = 0;
    EmConfig config;
    IntervalReport ci;
    std::vector<StartDiagnostic> start_diagnostics;
};

using FitReport = BasicFitReport<DlmParams>;
using ScalarFitReport = BasicFitReport<ScalarDlmParams>;

/// Smoothed state moments for t = 0..T (index 0 is x_0); cross[t] is
/// Cov(x_t, x_{t-1} | Y) with cross[0] unused.
struct SufficientStats {
    MonthStamp start;
    std::vector<Vector> mean;
    std::vector<Matrix> cov;
    std::vector<Matrix> cross;
    double loglik = 0.0;
};

SufficientStats e_step(const StateSpaceSpec& spec, const ObservationPanel& panel);
SufficientStats e_step(const StateSpaceSpec& spec, const MonthlySeries& target);

struct MStepOptions {
    InitialState initial_state = InitialState::Fixed;
    double variance_floor = 1e-8;
};

/// Closed-form conditional maximisation in the order (beta, C) -> x0 -> W -> V.
/// Throws DegeneracyError if the (beta, C) normal equations are singular.
DlmParams m_step(const SufficientStats& stats, const ObservationPanel& panel,
                 const MStepOptions& options = {});
ScalarDlmParams m_step(const SufficientStats& stats, const MonthlySeries& target,
                       const MStepOptions& options = {});

/// Multistart EM. `replicates` must equal the panel's replicate count.
FitReport fit(const ObservationPanel& panel, std::size_t replicates, const EmConfig& config = {});
/// Multistart EM for the scalar random walk with monthly effects.
ScalarFitReport fit_scalar(const MonthlySeries& target, const EmConfig& config = {});

/// Wald intervals from a central-difference Hessian in transformed coordinates
/// (log for variances, identity otherwise).
IntervalReport hessian_ci(const ObservationPanel& panel, const DlmParams& params, double level = 0.95,
                          InitialState init = InitialState::Fixed);
IntervalReport hessian_ci(const MonthlySeries& target, const ScalarDlmParams& params, double level = 0.95,
                          InitialState init = InitialState::Fixed);

/// Generic engine: `loglik` takes transformed coordinates `theta`.
IntervalReport hessian_intervals(const std::function<double(const Vector&)>& loglik, const Vector& theta,
                                 const std::vector<std::string>& names,
                                 const std::vector<Transform>& transforms, double level);

/// Parameter names in the order used by hessian_ci.
std::vector<std::string> parameter_names(bool scalar, InitialState init);

}  // namespace sqvdlm
