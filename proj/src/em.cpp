#include "sqvdlm/em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "sqvdlm/errors.hpp"
#include "sqvdlm/replicate_filter.hpp"

namespace sqvdlm {

void EmConfig::validate() const {
    if (max_iterations < 1) throw DomainError("max_iterations must be >= 1");
    if (!(rel_tol > 0.0)) throw DomainError("rel_tol must be positive");
    if (n_starts < 1) throw DomainError("n_starts must be >= 1");
    if (warmup_iterations < 0) throw DomainError("warmup_iterations must be >= 0");
    if (!(variance_floor > 0.0)) throw DomainError("variance_floor must be positive");
    if (!(ci_level > 0.0 && ci_level < 1.0)) throw DomainError("ci_level must lie in (0, 1)");
}

const ParameterInterval& IntervalReport::at(const std::string& name) const {
    for (const auto& p : intervals) {
        if (p.name == name) return p;
    }
    throw ContractError("no interval named " + name);
}

namespace {

using reduced::Model;
using reduced::Moments;
using reduced::ReducedPanel;

struct Floors {
    double target = 1.0;
    double replicate = 1.0;
};

double sample_variance(const std::vector<double>& x) {
    if (x.size() < 2) return 0.0;
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return ss / static_cast<double>(x.size() - 1);
}

std::vector<double> observed_targets(const ReducedPanel& y) {
    std::vector<double> out;
    for (std::size_t t = 0; t < y.length(); ++t) {
        if (y.target_observed[t]) out.push_back(y.target[t]);
    }
    return out;
}

double replicate_cell_variance(const ReducedPanel& y) {
    double n = 0.0;
    double sum = 0.0;
    for (std::size_t t = 0; t < y.length(); ++t) {
        n += y.rep_count[t];
        sum += y.rep_count[t] * y.rep_mean[t];
    }
    if (n < 2.0) return 0.0;
    const double grand = sum / n;
    double ss = 0.0;
    for (std::size_t t = 0; t < y.length(); ++t) {
        ss += y.rep_scatter[t] + y.rep_count[t] * (y.rep_mean[t] - grand) * (y.rep_mean[t] - grand);
    }
    return ss / (n - 1.0);
}

Floors make_floors(const ReducedPanel& y, double factor) {
    auto positive = [](double v) { return v > 0.0 && std::isfinite(v) ? v : 1.0; };
    Floors f;
    f.target = factor * positive(sample_variance(observed_targets(y)));
    if (y.has_replicates()) f.replicate = factor * positive(replicate_cell_variance(y));
    return f;
}

template <int Q>
using Xi = Eigen::Matrix<double, 2 * Q, 1>;
template <int Q>
using XiCov = Eigen::Matrix<double, 2 * Q, 2 * Q>;

// First and second moments of (x_t; x_{t-1}).
template <int Q>
void xi_moments(const Moments<Q>& m, std::size_t t, Xi<Q>& mu, XiCov<Q>& M) {
    mu << m.mean[t], m.mean[t - 1];
    M.template topLeftCorner<Q, Q>() = m.cov[t];
    M.template topRightCorner<Q, Q>() = m.cross[t];
    M.template bottomLeftCorner<Q, Q>() = m.cross[t].transpose();
    M.template bottomRightCorner<Q, Q>() = m.cov[t - 1];
    M += mu * mu.transpose();
}

template <int Q>
void update_observation_variances(Model<Q>& out, const Moments<Q>& m, const ReducedPanel& y, const Floors& floors) {
    const std::size_t T = y.length();
    double ss1 = 0.0;
    std::size_t n1 = 0;
    for (std::size_t t = 0; t < T; ++t) {
        if (!y.target_observed[t]) continue;
        const double e = y.target[t] - m.mean[t + 1](0);
        ss1 += e * e + m.cov[t + 1](0, 0);
        ++n1;
    }
    if (n1 > 0) out.v_target = std::max(ss1 / static_cast<double>(n1), floors.target);
    if constexpr (Q == 2) {
        double ss2 = 0.0;
        double n2 = 0.0;
        for (std::size_t t = 0; t < T; ++t) {
            const int k = y.rep_count[t];
            if (k == 0) continue;
            const double e = y.rep_mean[t] - m.mean[t + 1](1);
            ss2 += y.rep_scatter[t] + k * (e * e + m.cov[t + 1](1, 1));
            n2 += k;
        }
        if (n2 > 0) out.v_replicate = std::max(ss2 / n2, floors.replicate);
    }
}

Model<2> m_step_impl(const Model<2>& current, Moments<2> m, const ReducedPanel& y, InitialState init,
                     const Floors& floors) {
    const std::size_t T = y.length();
    Model<2> out = current;
    Xi<2> mu;
    XiCov<2> M;

    // (beta, c1) from the X1 evolution row: L = a - beta d with
    // a = (1, 0, -1, 0), d = (0, 0, 0, 1).
    Eigen::Matrix<double, 13, 13> A = Eigen::Matrix<double, 13, 13>::Zero();
    Eigen::Matrix<double, 13, 1> b = Eigen::Matrix<double, 13, 1>::Zero();
    std::array<int, 12> count{};
    std::array<double, 12> c2_sum{};
    for (std::size_t t = 1; t <= T; ++t) {
        xi_moments<2>(m, t, mu, M);
        const int k = 1 + y.month[t - 1];
        A(0, 0) += M(3, 3);
        b(0) += M(0, 3) - M(2, 3);
        A(0, k) += mu(3);
        A(k, 0) += mu(3);
        A(k, k) += 1.0;
        b(k) += mu(0) - mu(2);
        ++count[static_cast<std::size_t>(k - 1)];
        c2_sum[static_cast<std::size_t>(k - 1)] += mu(1) - mu(3);
    }
    for (int k = 0; k < 12; ++k) {
        if (count[static_cast<std::size_t>(k)] == 0) A(k + 1, k + 1) = 1.0;
    }
    Eigen::LDLT<Eigen::Matrix<double, 13, 13>> ldlt(A);
    const auto d = ldlt.vectorD();
    if (ldlt.info() != Eigen::Success || !(d.minCoeff() > 1e-14 * d.cwiseAbs().maxCoeff()) ||
        !(ldlt.rcond() > 1e-14)) {
        throw DegeneracyError("singular normal equations for (beta, C) in the M-step");
    }
    const Eigen::Matrix<double, 13, 1> sol = ldlt.solve(b);
    const double beta = sol(0);
    out.G << 1.0, beta, 0.0, 1.0;
    for (int k = 0; k < 12; ++k) {
        const auto n = count[static_cast<std::size_t>(k)];
        out.C(0, k) = n > 0 ? sol(k + 1) : 0.0;
        out.C(1, k) = n > 0 ? c2_sum[static_cast<std::size_t>(k)] / n : 0.0;
    }

    if (init == InitialState::Fixed && T > 0) {
        Eigen::Matrix2d g_inv;
        g_inv << 1.0, -beta, 0.0, 1.0;
        out.x0 = g_inv * (m.mean[1] - out.C.col(y.month[0]));
        m.mean[0] = out.x0;
    }

    // W from the expected squared state residuals under the new (beta, C, x0).
    Eigen::Matrix<double, 4, 1> l1;
    l1 << 1.0, 0.0, -1.0, -beta;
    Eigen::Matrix<double, 4, 1> l2;
    l2 << 0.0, 1.0, 0.0, -1.0;
    double s1 = 0.0;
    double s2 = 0.0;
    for (std::size_t t = 1; t <= T; ++t) {
        xi_moments<2>(m, t, mu, M);
        const double c1 = out.C(0, y.month[t - 1]);
        const double c2 = out.C(1, y.month[t - 1]);
        s1 += l1.dot(M * l1) - 2.0 * c1 * l1.dot(mu) + c1 * c1;
        s2 += l2.dot(M * l2) - 2.0 * c2 * l2.dot(mu) + c2 * c2;
    }
    if (T > 0) {
        out.w(0) = std::max(s1 / static_cast<double>(T), floors.target);
        out.w(1) = std::max(s2 / static_cast<double>(T), floors.replicate);
    }
    update_observation_variances<2>(out, m, y, floors);
    return out;
}

Model<1> m_step_impl(const Model<1>& current, Moments<1> m, const ReducedPanel& y, InitialState init,
                     const Floors& floors) {
    const std::size_t T = y.length();
    Model<1> out = current;
    std::array<int, 12> count{};
    std::array<double, 12> sum{};
    for (std::size_t t = 1; t <= T; ++t) {
        const auto k = static_cast<std::size_t>(y.month[t - 1]);
        ++count[k];
        sum[k] += m.mean[t](0) - m.mean[t - 1](0);
    }
    for (std::size_t k = 0; k < 12; ++k) out.C(0, Eigen::Index(k)) = count[k] > 0 ? sum[k] / count[k] : 0.0;
    if (init == InitialState::Fixed && T > 0) {
        out.x0(0) = m.mean[1](0) - out.C(0, y.month[0]);
        m.mean[0] = out.x0;
    }
    Xi<1> mu;
    XiCov<1> M;
    const Eigen::Vector2d l(1.0, -1.0);
    double s = 0.0;
    for (std::size_t t = 1; t <= T; ++t) {
        xi_moments<1>(m, t, mu, M);
        const double c = out.C(0, y.month[t - 1]);
        s += l.dot(M * l) - 2.0 * c * l.dot(mu) + c * c;
    }
    if (T > 0) out.w(0) = std::max(s / static_cast<double>(T), floors.target);
    update_observation_variances<1>(out, m, y, floors);
    return out;
}

DlmParams to_params(const Model<2>& m) {
    DlmParams p;
    p.beta = m.G(0, 1);
    p.sigma2_y1 = m.v_target;
    p.sigma2_y2 = m.v_replicate;
    p.sigma2_x1 = m.w(0);
    p.sigma2_x2 = m.w(1);
    p.C = m.C;
    p.x0 = m.x0;
    return p;
}

ScalarDlmParams to_params(const Model<1>& m) {
    ScalarDlmParams p;
    p.sigma2_y = m.v_target;
    p.sigma2_x = m.w(0);
    p.C = m.C;
    p.x0 = m.x0(0);
    return p;
}

template <int Q>
Moments<Q> to_moments(const SufficientStats& s) {
    if (s.mean.empty() || s.mean[0].size() != Q) throw ContractError("statistics do not match the model dimension");
    Moments<Q> m;
    m.loglik = s.loglik;
    for (std::size_t t = 0; t < s.mean.size(); ++t) {
        m.mean.push_back(s.mean[t]);
        m.cov.push_back(s.cov[t]);
        m.cross.push_back(s.cross[t]);
    }
    return m;
}

template <int Q>
Model<Q> model_with_initial_state(InitialState init) {
    Model<Q> m;
    if (init == InitialState::Diffuse) m.P0 = kDiffuseVariance * Model<Q>::Mat::Identity();
    return m;
}

// Starting values ------------------------------------------------------------

struct DataSummary {
    double target_var_diff = 1.0;
    double rep_var_diff = 1.0;
    double beta_range = 1.0;
    std::array<double, 12> c1{};
    std::array<double, 12> c2{};
    double first_target = 0.0;
    double first_rep = 0.0;
};

double first_diff_variance(const std::vector<double>& v, const std::vector<bool>& ok) {
    std::vector<double> d;
    for (std::size_t t = 1; t < v.size(); ++t) {
        if (ok[t] && ok[t - 1]) d.push_back(v[t] - v[t - 1]);
    }
    const double var = sample_variance(d);
    return var > 0.0 && std::isfinite(var) ? var : 1.0;
}

std::array<double, 12> monthly_mean_diff(const ReducedPanel& y, const std::vector<double>& v,
                                         const std::vector<bool>& ok) {
    std::array<double, 12> sum{};
    std::array<int, 12> n{};
    for (std::size_t t = 1; t < v.size(); ++t) {
        if (ok[t] && ok[t - 1]) {
            const auto k = static_cast<std::size_t>(y.month[t]);
            sum[k] += v[t] - v[t - 1];
            ++n[k];
        }
    }
    for (std::size_t k = 0; k < 12; ++k) sum[k] = n[k] > 0 ? sum[k] / n[k] : 0.0;
    return sum;
}

DataSummary summarise(const ReducedPanel& y) {
    DataSummary s;
    s.target_var_diff = first_diff_variance(y.target, y.target_observed);
    s.c1 = monthly_mean_diff(y, y.target, y.target_observed);
    for (std::size_t t = 0; t < y.length(); ++t) {
        if (y.target_observed[t]) {
            s.first_target = y.target[t];
            break;
        }
    }
    if (y.has_replicates()) {
        std::vector<bool> ok(y.length());
        std::vector<double> means;
        for (std::size_t t = 0; t < y.length(); ++t) {
            ok[t] = y.rep_count[t] > 0;
            if (ok[t]) means.push_back(y.rep_mean[t]);
        }
        s.rep_var_diff = first_diff_variance(y.rep_mean, ok);
        s.c2 = monthly_mean_diff(y, y.rep_mean, ok);
        for (std::size_t t = 0; t < y.length(); ++t) {
            if (ok[t]) {
                s.first_rep = y.rep_mean[t];
                break;
            }
        }
        const double sd_t = std::sqrt(sample_variance(observed_targets(y)));
        const double sd_r = std::sqrt(sample_variance(means));
        s.beta_range = sd_r > 0.0 && sd_t > 0.0 ? 2.0 * sd_t / sd_r : 1.0;
    }
    return s;
}

template <int Q>
Model<Q> draw_start(const DataSummary& s, InitialState init, std::uint64_t seed, int index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto log_uniform = [&](double scale) { return scale * std::pow(10.0, -2.0 + 2.0 * unit(rng)); };

    Model<Q> m = model_with_initial_state<Q>(init);
    for (int k = 0; k < 12; ++k) m.C(0, k) = s.c1[static_cast<std::size_t>(k)];
    m.v_target = log_uniform(s.target_var_diff);
    m.w(0) = log_uniform(s.target_var_diff);
    if (init == InitialState::Fixed) m.x0(0) = s.first_target;
    if constexpr (Q == 2) {
        const double beta = s.beta_range * (2.0 * unit(rng) - 1.0);
        m.G(0, 1) = beta;
        m.v_replicate = log_uniform(s.rep_var_diff);
        m.w(1) = log_uniform(s.rep_var_diff);
        for (int k = 0; k < 12; ++k) {
            m.C(1, k) = s.c2[static_cast<std::size_t>(k)];
            // Remove the part of the target drift explained by beta at the start level.
            m.C(0, k) -= beta * s.first_rep;
        }
        if (init == InitialState::Fixed) m.x0(1) = s.first_rep;
    }
    return m;
}

// EM driver ------------------------------------------------------------------

template <int Q>
struct Run {
    Model<Q> model;     // next parameters to evaluate
    Model<Q> best;      // parameters with the largest evaluated likelihood
    double best_ll = -std::numeric_limits<double>::infinity();
    std::vector<double> trace;
    int iterations = 0;
    bool converged = false;
};

template <int Q>
void advance(Run<Q>& run, const ReducedPanel& y, InitialState init, const Floors& floors, int budget,
             double rel_tol) {
    for (int i = 0; i < budget && !run.converged; ++i) {
        const auto moments = reduced::e_step(run.model, y);
        const double ll = moments.loglik;
        ++run.iterations;
        if (ll > run.best_ll || run.trace.empty()) {
            run.best_ll = ll;
            run.best = run.model;
        }
        if (!run.trace.empty()) {
            const double prev = run.trace.back();
            run.trace.push_back(ll);
            if (std::abs(ll - prev) / std::max(1.0, std::abs(prev)) < rel_tol) {
                run.converged = true;
                break;
            }
        } else {
            run.trace.push_back(ll);
        }
        run.model = m_step_impl(run.model, moments, y, init, floors);
    }
}

template <int Q>
BasicFitReport<decltype(to_params(std::declval<Model<Q>>()))> run_em(const ReducedPanel& y, const EmConfig& config) {
    config.validate();
    const Floors floors = make_floors(y, config.variance_floor);
    const DataSummary summary = summarise(y);
    const int warmup = std::min(config.warmup_iterations, config.max_iterations);

    using Report = BasicFitReport<decltype(to_params(std::declval<Model<Q>>()))>;
    Report report;
    report.config = config;

    std::vector<Run<Q>> runs(static_cast<std::size_t>(config.n_starts));
    int best = -1;
    for (int s = 0; s < config.n_starts; ++s) {
        auto& run = runs[static_cast<std::size_t>(s)];
        StartDiagnostic diag;
        diag.index = s;
        try {
            run.model = draw_start<Q>(summary, config.initial_state, config.seed, s);
            advance<Q>(run, y, config.initial_state, floors, std::max(warmup, 1), config.rel_tol);
            diag.loglik = run.best_ll;
            diag.ok = std::isfinite(run.best_ll);
            if (!diag.ok) diag.reason = "non-finite log-likelihood";
        } catch (const Error& e) {
            diag.ok = false;
            diag.loglik = -std::numeric_limits<double>::infinity();
            diag.reason = e.what();
        }
        if (diag.ok && (best < 0 || diag.loglik > runs[static_cast<std::size_t>(best)].best_ll)) best = s;
        report.start_diagnostics.push_back(diag);
    }
    if (best < 0) {
        std::ostringstream msg;
        msg << "no EM start produced a finite likelihood:";
        for (const auto& d : report.start_diagnostics) msg << "\n  start " << d.index << ": " << d.reason;
        throw EstimationError(msg.str());
    }

    auto& run = runs[static_cast<std::size_t>(best)];
    try {
        advance<Q>(run, y, config.initial_state, floors, config.max_iterations - run.iterations, config.rel_tol);
    } catch (const DegeneracyError&) {
        // Keep the best parameters evaluated before the failure.
    }
    report.params = to_params(run.best);
    report.loglik = run.best_ll;
    report.loglik_trace = run.trace;
    report.converged = run.converged;
    report.iterations_used = run.iterations;
    report.best_start = best;
    return report;
}

// Hessian parameterisation ---------------------------------------------------

std::vector<Transform> parameter_transforms(bool scalar, InitialState init) {
    std::vector<Transform> t;
    if (!scalar) t.push_back(Transform::Identity);
    const int variances = scalar ? 2 : 4;
    for (int i = 0; i < variances; ++i) t.push_back(Transform::Log);
    const int c = scalar ? 12 : 24;
    for (int i = 0; i < c; ++i) t.push_back(Transform::Identity);
    if (init == InitialState::Fixed) {
        for (int i = 0; i < (scalar ? 1 : 2); ++i) t.push_back(Transform::Identity);
    }
    return t;
}

Vector pack(const DlmParams& p, InitialState init) {
    Vector th(init == InitialState::Fixed ? 31 : 29);
    th(0) = p.beta;
    th(1) = std::log(p.sigma2_y1);
    th(2) = std::log(p.sigma2_y2);
    th(3) = std::log(p.sigma2_x1);
    th(4) = std::log(p.sigma2_x2);
    for (int k = 0; k < 12; ++k) {
        th(5 + k) = p.C(0, k);
        th(17 + k) = p.C(1, k);
    }
    if (init == InitialState::Fixed) {
        th(29) = p.x0(0);
        th(30) = p.x0(1);
    }
    return th;
}

DlmParams unpack(const Vector& th, InitialState init) {
    DlmParams p;
    p.beta = th(0);
    p.sigma2_y1 = std::exp(th(1));
    p.sigma2_y2 = std::exp(th(2));
    p.sigma2_x1 = std::exp(th(3));
    p.sigma2_x2 = std::exp(th(4));
    for (int k = 0; k < 12; ++k) {
        p.C(0, k) = th(5 + k);
        p.C(1, k) = th(17 + k);
    }
    if (init == InitialState::Fixed) p.x0 = Eigen::Vector2d(th(29), th(30));
    return p;
}

Vector pack(const ScalarDlmParams& p, InitialState init) {
    Vector th(init == InitialState::Fixed ? 15 : 14);
    th(0) = std::log(p.sigma2_y);
    th(1) = std::log(p.sigma2_x);
    for (int k = 0; k < 12; ++k) th(2 + k) = p.C(0, k);
    if (init == InitialState::Fixed) th(14) = p.x0;
    return th;
}

ScalarDlmParams unpack_scalar(const Vector& th, InitialState init) {
    ScalarDlmParams p;
    p.sigma2_y = std::exp(th(0));
    p.sigma2_x = std::exp(th(1));
    for (int k = 0; k < 12; ++k) p.C(0, k) = th(2 + k);
    if (init == InitialState::Fixed) p.x0 = th(14);
    return p;
}

}  // namespace

// Public API -------------------------------------------------------------------

std::vector<std::string> parameter_names(bool scalar, InitialState init) {
    std::vector<std::string> n;
    if (scalar) {
        n = {"sigma2_y", "sigma2_x"};
        for (int k = 1; k <= 12; ++k) n.push_back("C[" + std::to_string(k) + "]");
        if (init == InitialState::Fixed) n.push_back("x0");
        return n;
    }
    n = {"beta", "sigma2_y1", "sigma2_y2", "sigma2_x1", "sigma2_x2"};
    for (int r = 1; r <= 2; ++r) {
        for (int k = 1; k <= 12; ++k) n.push_back("C" + std::to_string(r) + "[" + std::to_string(k) + "]");
    }
    if (init == InitialState::Fixed) {
        n.push_back("x0[1]");
        n.push_back("x0[2]");
    }
    return n;
}

namespace {

SufficientStats stats_from_smoother(const StateSpaceSpec& spec, const FilterResult& f) {
    const auto sm = kalman_smoother(spec, f);
    SufficientStats s;
    s.start = f.start;
    s.loglik = f.loglik;
    s.mean.push_back(sm.initial_mean);
    s.cov.push_back(sm.initial_cov);
    s.cross.push_back(Matrix::Zero(spec.state_dim(), spec.state_dim()));
    for (std::size_t t = 0; t < f.length(); ++t) {
        s.mean.push_back(sm.smoothed_mean[t]);
        s.cov.push_back(sm.smoothed_cov[t]);
        s.cross.push_back(sm.lag_one_cov[t]);
    }
    return s;
}

void check_stats_length(const SufficientStats& stats, std::size_t T) {
    if (stats.mean.size() != T + 1 || stats.cov.size() != T + 1 || stats.cross.size() != T + 1) {
        throw ContractError("statistics length does not match the data");
    }
}

}  // namespace

SufficientStats e_step(const StateSpaceSpec& spec, const ObservationPanel& panel) {
    return stats_from_smoother(spec, kalman_filter(spec, panel));
}

SufficientStats e_step(const StateSpaceSpec& spec, const MonthlySeries& target) {
    return stats_from_smoother(spec, kalman_filter(spec, ObservationMatrix::from_series(target)));
}

DlmParams m_step(const SufficientStats& stats, const ObservationPanel& panel, const MStepOptions& options) {
    check_stats_length(stats, panel.length());
    const auto y = reduced::reduce(panel);
    auto current = model_with_initial_state<2>(options.initial_state);
    return to_params(m_step_impl(current, to_moments<2>(stats), y, options.initial_state,
                                 make_floors(y, options.variance_floor)));
}

ScalarDlmParams m_step(const SufficientStats& stats, const MonthlySeries& target, const MStepOptions& options) {
    check_stats_length(stats, target.size());
    const auto y = reduced::reduce(target);
    auto current = model_with_initial_state<1>(options.initial_state);
    return to_params(m_step_impl(current, to_moments<1>(stats), y, options.initial_state,
                                 make_floors(y, options.variance_floor)));
}

FitReport fit(const ObservationPanel& panel, std::size_t replicates, const EmConfig& config) {
    if (replicates != panel.replicate_count()) {
        throw ContractError("replicate count " + std::to_string(replicates) + " does not match the panel (" +
                            std::to_string(panel.replicate_count()) + ")");
    }
    const auto y = reduced::reduce(panel);
    auto report = run_em<2>(y, config);
    report.replicates = replicates;
    if (config.compute_ci) report.ci = hessian_ci(panel, report.params, config.ci_level, config.initial_state);
    return report;
}

ScalarFitReport fit_scalar(const MonthlySeries& target, const EmConfig& config) {
    const auto y = reduced::reduce(target);
    auto report = run_em<1>(y, config);
    if (config.compute_ci) report.ci = hessian_ci(target, report.params, config.ci_level, config.initial_state);
    return report;
}

IntervalReport hessian_ci(const ObservationPanel& panel, const DlmParams& params, double level, InitialState init) {
    const auto y = reduced::reduce(panel);
    auto ll = [&](const Vector& th) {
        try {
            return reduced::filter(reduced::to_model(unpack(th, init), init), y).loglik;
        } catch (const DegeneracyError&) {
            return -std::numeric_limits<double>::infinity();
        }
    };
    return hessian_intervals(ll, pack(params, init), parameter_names(false, init), parameter_transforms(false, init),
                             level);
}

IntervalReport hessian_ci(const MonthlySeries& target, const ScalarDlmParams& params, double level,
                          InitialState init) {
    const auto y = reduced::reduce(target);
    auto ll = [&](const Vector& th) {
        try {
            return reduced::filter(reduced::to_model(unpack_scalar(th, init), init), y).loglik;
        } catch (const DegeneracyError&) {
            return -std::numeric_limits<double>::infinity();
        }
    };
    return hessian_intervals(ll, pack(params, init), parameter_names(true, init), parameter_transforms(true, init),
                             level);
}

}  // namespace sqvdlm
