#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

#include "sqvdlm/benchmarks.hpp"
#include "sqvdlm/errors.hpp"

namespace sqvdlm {

std::string SarimaOrder::to_string() const {
    std::ostringstream s;
    s << "(" << p << "," << d << "," << q << ")(" << P << "," << D << "," << Q << ")12";
    return s.str();
}

std::vector<SarimaOrder> SarimaGrid::orders() const {
    std::vector<SarimaOrder> out;
    for (int p_ : p)
        for (int d_ : d)
            for (int q_ : q)
                for (int P_ : P)
                    for (int D_ : D)
                        for (int Q_ : Q) out.push_back({p_, d_, q_, P_, D_, Q_});
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

constexpr int kSeason = 12;
// Bound on the unconstrained PACF coordinate; tanh(7) = 1 - 1.7e-6.
constexpr double kMaxPacf = 7.0;

// Coefficients c_1..c_n of 1 + c_1 B + ... from a product of polynomials given
// in the same form.
std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

// Stationary AR coefficients from partial autocorrelations in (-1, 1).
std::vector<double> pacf_to_ar(const std::vector<double>& r) {
    std::vector<double> phi;
    for (std::size_t k = 0; k < r.size(); ++k) {
        std::vector<double> next(k + 1);
        next[k] = r[k];
        for (std::size_t j = 0; j < k; ++j) next[j] = phi[j] - r[k] * phi[k - 1 - j];
        phi = std::move(next);
    }
    return phi;
}

// Differencing operator (1 - B)^d (1 - B^12)^D as 1 - sum delta_j B^j.
std::vector<double> differencing_weights(int d, int D) {
    std::vector<double> poly{1.0};
    for (int i = 0; i < d; ++i) poly = poly_mul(poly, {1.0, -1.0});
    for (int i = 0; i < D; ++i) {
        std::vector<double> s(kSeason + 1, 0.0);
        s[0] = 1.0;
        s[kSeason] = -1.0;
        poly = poly_mul(poly, s);
    }
    std::vector<double> delta(poly.size() - 1);
    for (std::size_t j = 1; j < poly.size(); ++j) delta[j - 1] = -poly[j];
    return delta;
}

struct Coefficients {
    std::vector<double> ar, ma, sar, sma;
    double mean = 0.0;
};

// ARMA in Harvey's state-space form: alpha_{t+1} = T alpha_t + R eps_{t+1},
// w_t = alpha_t[0], T companion with first column a, R = (1, b_1, ..., b_{r-1}).
struct Arma {
    Eigen::Index r = 1;
    Vector a;
    Vector R;
};

Arma make_arma(const Coefficients& c) {
    std::vector<double> ar_poly{1.0};
    for (double v : c.ar) ar_poly.push_back(-v);
    std::vector<double> sar_poly(std::size_t(kSeason) * c.sar.size() + 1, 0.0);
    sar_poly[0] = 1.0;
    for (std::size_t i = 0; i < c.sar.size(); ++i) sar_poly[(i + 1) * kSeason] = -c.sar[i];
    std::vector<double> ma_poly{1.0};
    for (double v : c.ma) ma_poly.push_back(v);
    std::vector<double> sma_poly(std::size_t(kSeason) * c.sma.size() + 1, 0.0);
    sma_poly[0] = 1.0;
    for (std::size_t i = 0; i < c.sma.size(); ++i) sma_poly[(i + 1) * kSeason] = c.sma[i];

    const auto phi = poly_mul(ar_poly, sar_poly);
    const auto theta = poly_mul(ma_poly, sma_poly);
    const auto p = static_cast<Eigen::Index>(phi.size() - 1);
    const auto q = static_cast<Eigen::Index>(theta.size() - 1);
    Arma m;
    m.r = std::max<Eigen::Index>(p, q + 1);
    m.a = Vector::Zero(m.r);
    m.R = Vector::Zero(m.r);
    for (Eigen::Index i = 0; i < p; ++i) m.a(i) = -phi[std::size_t(i + 1)];
    m.R(0) = 1.0;
    for (Eigen::Index j = 1; j <= q; ++j) m.R(j) = theta[std::size_t(j)];
    return m;
}

Matrix transition_matrix(const Arma& m) {
    Matrix T = Matrix::Zero(m.r, m.r);
    T.col(0) = m.a;
    for (Eigen::Index i = 0; i + 1 < m.r; ++i) T(i, i + 1) = 1.0;
    return T;
}

// Stationary covariance of the state (unit innovation variance). With the
// AR and MA coefficients padded to length r,
//     alpha_{t,i} = sum_{j=0}^{r-i} (a_{i+j} w_{t-1-j} + R_{i+j} eps_{t-j}),
// so it follows from the autocovariances of w and the psi weights
// (E[w_s eps_u] = psi_{s-u}).
Matrix stationary_covariance(const Arma& m) {
    const Eigen::Index r = m.r;
    Eigen::Index p = r;
    while (p > 0 && m.a(p - 1) == 0.0) --p;
    Eigen::Index q = r - 1;
    while (q > 0 && m.R(q) == 0.0) --q;

    std::vector<double> psi(std::size_t(r) + 1, 0.0);
    for (Eigen::Index j = 0; j <= r; ++j) {
        double v = j < r ? m.R(j) : 0.0;
        for (Eigen::Index k = 1; k <= std::min(j, p); ++k) v += m.a(k - 1) * psi[std::size_t(j - k)];
        psi[std::size_t(j)] = v;
    }

    // gamma(h) - sum_k a_k gamma(|h-k|) = sum_{j>=h} b_j psi_{j-h}, h = 0..p.
    auto rhs_at = [&](Eigen::Index h) {
        double v = 0.0;
        for (Eigen::Index j = h; j <= q; ++j) v += m.R(j) * psi[std::size_t(j - h)];
        return v;
    };
    std::vector<double> gamma(std::size_t(r) + 1, 0.0);
    {
        Matrix M = Matrix::Identity(p + 1, p + 1);
        Vector rhs(p + 1);
        for (Eigen::Index h = 0; h <= p; ++h) {
            for (Eigen::Index k = 1; k <= p; ++k) M(h, std::abs(h - k)) -= m.a(k - 1);
            rhs(h) = rhs_at(h);
        }
        const Vector g = M.partialPivLu().solve(rhs);
        if (!g.allFinite()) throw DegeneracyError("ARMA autocovariances are not finite");
        for (Eigen::Index h = 0; h <= std::min(p, r); ++h) gamma[std::size_t(h)] = g(h);
    }
    for (Eigen::Index h = p + 1; h <= r; ++h) {
        double v = rhs_at(h);
        for (Eigen::Index k = 1; k <= p; ++k) v += m.a(k - 1) * gamma[std::size_t(h - k)];
        gamma[std::size_t(h)] = v;
    }
    auto psi_at = [&](Eigen::Index lag) { return lag < 0 ? 0.0 : psi[std::size_t(lag)]; };

    Matrix P(r, r);
    for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index k = i; k < r; ++k) {
            double v = 0.0;
            for (Eigen::Index j = 0; i + j < r; ++j) {
                const double ai = m.a(i + j);
                const double Ri = m.R(i + j);
                for (Eigen::Index l = 0; k + l < r; ++l) {
                    const double ak = m.a(k + l);
                    const double Rk = m.R(k + l);
                    v += ai * ak * gamma[std::size_t(std::abs(j - l))];
                    v += ai * Rk * psi_at(l - 1 - j);
                    v += Ri * ak * psi_at(j - 1 - l);
                    if (j == l) v += Ri * Rk;
                }
            }
            P(i, k) = v;
            P(k, i) = v;
        }
    }
    return P;
}

struct ArmaFilterOutput {
    double ss = 0.0;       // sum v^2 / F over the likelihood sample
    double log_f = 0.0;    // sum log F over the likelihood sample
    std::size_t n = 0;
    std::vector<double> predictions;  // E[w_t | past] + mean, t = first..end
    Vector final_mean;
    Matrix final_cov;  // unit innovation variance scale
};

// Filters w[first..] (observed exactly); contributions counted for t >= sum_from.
// The model is time invariant and starts from its stationary covariance, so
// P_{t+1} - P_t = M_t W_t W_t' has rank one and the Chandrasekhar recursions
//     F_{t+1} = F_t + M_t W_t[0]^2,   K_{t+1} = K_t + M_t W_t[0] T W_t,
//     W_{t+1} = T W_t - K_t W_t[0] / F_t,   M_{t+1} = M_t - (M_t W_t[0])^2 / F_{t+1}
// give the gain K_t = T P_t Z' in O(r) per step.
ArmaFilterOutput filter_arma(const Arma& m, const std::vector<double>& w, std::size_t first, std::size_t sum_from,
                             double mean, bool track_state) {
    ArmaFilterOutput out;
    const Eigen::Index r = m.r;
    auto times_t = [&](const Vector& x, Vector& y) {
        y.head(r - 1) = x.tail(r - 1);
        y(r - 1) = 0.0;
        y += x(0) * m.a;
    };
    Matrix P;
    if (track_state) P = stationary_covariance(m);
    const Matrix P0 = track_state ? P : stationary_covariance(m);
    double F = P0(0, 0);
    Vector K(r);
    times_t(P0.col(0), K);
    Vector W = K;
    double M = -1.0 / F;
    Vector a = Vector::Zero(r);
    Vector next(r);
    Vector TW(r);
    for (std::size_t t = first; t < w.size(); ++t) {
        if (!(F > 1e-300) || !std::isfinite(F)) {
            throw DegeneracyError("ARMA innovation variance vanished", static_cast<long>(t + 1));
        }
        const double v = w[t] - mean - a(0);
        if (track_state) out.predictions.push_back(a(0) + mean);
        if (t >= sum_from) {
            out.ss += v * v / F;
            out.log_f += std::log(F);
            ++out.n;
        }
        if (t + 1 == w.size()) {
            if (!track_state) break;
            out.final_mean = a + P.col(0) * (v / F);
            out.final_cov = P - P.col(0) * P.row(0) / F;
            symmetrize(out.final_cov);
            break;
        }
        times_t(a, next);
        a = next + K * (v / F);

        const double w0 = W(0);
        const double F_next = F + M * w0 * w0;
        times_t(W, TW);
        if (track_state) P.noalias() += M * W * W.transpose();
        W = TW - K * (w0 / F);
        K += (M * w0) * TW;
        M -= (M * w0) * (M * w0) / F_next;
        F = F_next;
    }
    return out;
}

// Smallest root modulus of 1 - c_1 B^s - ... - c_n B^{ns}; the roots in B^s are
// inverses of the companion eigenvalues.
double min_root(const std::vector<double>& c, int s) {
    if (c.empty()) return std::numeric_limits<double>::infinity();
    const auto n = static_cast<Eigen::Index>(c.size());
    Matrix comp = Matrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) comp(0, j) = c[std::size_t(j)];
    for (Eigen::Index i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    const double largest = comp.eigenvalues().cwiseAbs().maxCoeff();
    if (largest == 0.0) return std::numeric_limits<double>::infinity();
    return std::pow(1.0 / largest, 1.0 / s);
}

double min_root(const SarimaFit& f) {
    auto neg = [](std::vector<double> v) {
        for (double& x : v) x = -x;
        return v;
    };
    return std::min({min_root(f.ar, 1), min_root(f.sar, kSeason), min_root(neg(f.ma), 1), min_root(neg(f.sma), kSeason)});
}

struct Problem {
    SarimaOrder order;
    std::vector<double> w;  // differenced series, defined from index `first`
    std::size_t first = 0;
    std::size_t sum_from = 0;
    bool with_mean = false;
    double w_mean = 0.0;
    double w_sd = 1.0;
    std::size_t dim = 0;
};

Coefficients decode(const Problem& pr, const double* u) {
    Coefficients c;
    std::size_t i = 0;
    auto take = [&](int n) {
        std::vector<double> r;
        for (int k = 0; k < n; ++k) r.push_back(std::tanh(std::clamp(u[i++], -kMaxPacf, kMaxPacf)));
        return pacf_to_ar(r);
    };
    c.ar = take(pr.order.p);
    c.ma = take(pr.order.q);
    for (double& v : c.ma) v = -v;
    c.sar = take(pr.order.P);
    c.sma = take(pr.order.Q);
    for (double& v : c.sma) v = -v;
    if (pr.with_mean) c.mean = pr.w_mean + pr.w_sd * u[i++];
    return c;
}

double concentrated_loglik(const ArmaFilterOutput& f) {
    const double n = static_cast<double>(f.n);
    const double sigma2 = std::max(f.ss / n, std::numeric_limits<double>::min());
    return -0.5 * (n * std::log(2.0 * std::numbers::pi) + n * std::log(sigma2) + n + f.log_f);
}

double objective(const gsl_vector* x, void* params) {
    const auto* pr = static_cast<const Problem*>(params);
    try {
        const auto c = decode(*pr, x->data);
        const auto f = filter_arma(make_arma(c), pr->w, pr->first, pr->sum_from, c.mean, false);
        const double ll = concentrated_loglik(f);
        return std::isfinite(ll) ? -ll : std::numeric_limits<double>::max();
    } catch (const DegeneracyError&) {
        return std::numeric_limits<double>::max();
    }
}

Problem make_problem(const std::vector<double>& y, const SarimaOrder& order, std::size_t conditioning) {
    Problem pr;
    pr.order = order;
    const auto delta = differencing_weights(order.d, order.D);
    pr.first = delta.size();
    if (conditioning < pr.first) throw ContractError("conditioning shorter than the differencing span");
    if (conditioning + 2 > y.size()) throw ContractError("too few observations after conditioning");
    pr.sum_from = conditioning;
    pr.w.assign(y.size(), 0.0);
    for (std::size_t t = pr.first; t < y.size(); ++t) {
        double v = y[t];
        for (std::size_t j = 1; j <= delta.size(); ++j) v -= delta[j - 1] * y[t - j];
        pr.w[t] = v;
    }
    pr.with_mean = order.d == 0 && order.D == 0;
    double s = 0.0;
    double ss = 0.0;
    const double n = static_cast<double>(y.size() - pr.sum_from);
    for (std::size_t t = pr.sum_from; t < y.size(); ++t) s += pr.w[t];
    pr.w_mean = s / n;
    for (std::size_t t = pr.sum_from; t < y.size(); ++t) ss += (pr.w[t] - pr.w_mean) * (pr.w[t] - pr.w_mean);
    pr.w_sd = std::sqrt(ss / n);
    if (!(pr.w_sd > 0.0)) pr.w_sd = 1.0;
    pr.dim = static_cast<std::size_t>(order.p + order.q + order.P + order.Q) + (pr.with_mean ? 1 : 0);
    return pr;
}

SarimaFit finish(const Problem& pr, const std::vector<double>& u) {
    const auto c = decode(pr, u.data());
    const auto f = filter_arma(make_arma(c), pr.w, pr.first, pr.sum_from, c.mean, false);
    SarimaFit fit;
    fit.order = pr.order;
    fit.ar = c.ar;
    fit.ma = c.ma;
    fit.sar = c.sar;
    fit.sma = c.sma;
    fit.mean = c.mean;
    fit.with_mean = pr.with_mean;
    fit.sigma2 = f.ss / static_cast<double>(f.n);
    fit.loglik = concentrated_loglik(f);
    fit.k = pr.order.parameter_count(pr.with_mean);
    fit.aic = 2.0 * fit.k - 2.0 * fit.loglik;
    fit.conditioning = pr.sum_from;
    return fit;
}

SarimaFit fit_problem(const Problem& pr, const SarimaOptions& options, bool& converged) {
    std::vector<double> u(pr.dim, 0.0);
    converged = true;
    if (pr.dim > 0) {
        gsl_multimin_function f{&objective, pr.dim, const_cast<Problem*>(&pr)};
        gsl_vector* x = gsl_vector_alloc(pr.dim);
        gsl_vector* step = gsl_vector_alloc(pr.dim);
        gsl_vector_set_all(x, 0.0);
        gsl_vector_set_all(step, 0.3);
        gsl_multimin_fminimizer* m = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, pr.dim);
        gsl_multimin_fminimizer_set(m, &f, x, step);
        // Converged when the simplex is small, or when the best value has not
        // moved over a long window (boundary ridges where the simplex crawls).
        converged = false;
        const int window = 100 * static_cast<int>(pr.dim);
        double anchor = std::numeric_limits<double>::infinity();
        for (int it = 0; it < options.max_iterations; ++it) {
            if (gsl_multimin_fminimizer_iterate(m) != GSL_SUCCESS) break;
            if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m), options.simplex_tol) == GSL_SUCCESS) {
                converged = true;
                break;
            }
            if ((it + 1) % window == 0) {
                const double fval = gsl_multimin_fminimizer_minimum(m);
                if (std::abs(anchor - fval) <= 1e-9 * (1.0 + std::abs(fval))) {
                    converged = true;
                    break;
                }
                anchor = fval;
            }
        }
        for (std::size_t i = 0; i < pr.dim; ++i) u[i] = gsl_vector_get(m->x, i);
        gsl_multimin_fminimizer_free(m);
        gsl_vector_free(step);
        gsl_vector_free(x);
    }
    return finish(pr, u);
}

}  // namespace

SarimaFit sarima_fit_order(const MonthlySeries& train, const SarimaOrder& order, std::size_t conditioning,
                           const SarimaOptions& options) {
    const auto y = train.dense("SARIMA training series");
    const auto pr = make_problem(y, order, conditioning);
    bool converged = false;
    return fit_problem(pr, options, converged);
}

ForecastResult sarima_forecast(const MonthlySeries& train, const SarimaFit& fit, std::size_t horizon, double level) {
    const auto y = train.dense("SARIMA training series");
    const auto delta = differencing_weights(fit.order.d, fit.order.D);
    Coefficients c{fit.ar, fit.ma, fit.sar, fit.sma, fit.mean};
    const Arma m = make_arma(c);
    Problem pr = make_problem(y, fit.order, std::max(fit.conditioning, delta.size()));
    const auto f = filter_arma(m, pr.w, pr.first, pr.sum_from, fit.mean, true);

    // Augmented state (alpha_t, y_t, ..., y_{t-L+1}) with L = max(1, d + 12 D).
    const Eigen::Index r = m.r;
    const auto L = static_cast<Eigen::Index>(std::max<std::size_t>(1, delta.size()));
    const Eigen::Index n = r + L;
    StateSpaceSpec spec;
    spec.G = Matrix::Zero(n, n);
    spec.G.topLeftCorner(r, r) = transition_matrix(m);
    spec.G.block(r, 0, 1, r) = transition_matrix(m).row(0);
    for (std::size_t j = 1; j <= delta.size(); ++j) spec.G(r, r + Eigen::Index(j) - 1) = delta[j - 1];
    for (Eigen::Index i = 1; i < L; ++i) spec.G(r + i, r + i - 1) = 1.0;
    Vector g = Vector::Zero(n);
    g.head(r) = m.R;
    g(r) = 1.0;
    spec.W = fit.sigma2 * g * g.transpose();
    spec.C = Matrix::Zero(n, 12);
    if (fit.with_mean) spec.C.row(r).setConstant(fit.mean);
    spec.F = Matrix::Zero(1, n);
    spec.F(0, r) = 1.0;
    spec.V = Matrix::Zero(1, 1);
    spec.x0 = Vector::Zero(n);
    spec.P0 = Matrix::Zero(n, n);

    Vector mean = Vector::Zero(n);
    mean.head(r) = f.final_mean;
    for (Eigen::Index i = 0; i < L; ++i) mean(r + i) = y[y.size() - 1 - std::size_t(i)];
    Matrix cov = Matrix::Zero(n, n);
    cov.topLeftCorner(r, r) = fit.sigma2 * f.final_cov;

    ForecastOptions o;
    o.horizon = horizon;
    o.level = level;
    return forecast_from_state(spec, train.end() + 1, mean, cov, o);
}

ForecasterOutput sarima_fit(const MonthlySeries& train, const SarimaOptions& options,
                            std::vector<SarimaCandidate>* candidates) {
    if (train.size() < 36) {
        throw ContractError("SARIMA needs at least 36 training months, got " + std::to_string(train.size()));
    }
    const auto y = train.dense("SARIMA training series");
    const auto orders = options.grid.orders();
    if (orders.empty()) throw DomainError("empty SARIMA grid");
    std::size_t conditioning = 0;
    for (const auto& o : orders) {
        if (o.p < 0 || o.q < 0 || o.P < 0 || o.Q < 0 || o.d < 0 || o.D < 0) throw DomainError("negative SARIMA order");
        conditioning = std::max<std::size_t>(conditioning, std::size_t(o.d + kSeason * o.D));
    }

    std::vector<SarimaCandidate> table;
    std::optional<SarimaFit> best;
    for (const auto& order : orders) {
        SarimaCandidate cand;
        cand.order = order;
        try {
            const auto pr = make_problem(y, order, conditioning);
            bool converged = false;
            const auto fit = fit_problem(pr, options, converged);
            cand.loglik = fit.loglik;
            cand.aic = fit.aic;
            cand.k = fit.k;
            const bool finite = std::isfinite(fit.aic);
            const bool interior = min_root(fit) >= options.min_root_modulus;
            cand.converged = converged && finite && interior;
            if (!finite) {
                cand.status = "non-finite likelihood";
            } else if (!converged) {
                cand.status = "simplex did not converge";
            } else if (!interior) {
                cand.status = "root near the unit circle";
            } else {
                cand.status = "ok";
            }
            if (cand.converged) {
                const bool better =
                    !best || fit.aic < best->aic ||
                    (fit.aic == best->aic && (fit.k < best->k || (fit.k == best->k && order < best->order)));
                if (better) best = fit;
            }
        } catch (const Error& e) {
            cand.status = e.what();
        }
        table.push_back(cand);
    }
    if (candidates) *candidates = table;
    if (!best) {
        std::ostringstream msg;
        msg << "no SARIMA candidate converged:";
        for (const auto& c : table) msg << "\n  " << c.order.to_string() << ": " << c.status;
        throw EstimationError(msg.str());
    }

    const auto fc = sarima_forecast(train, *best, options.horizon, options.level);
    const auto delta = differencing_weights(best->order.d, best->order.D);
    const auto pr = make_problem(y, best->order, conditioning);
    const auto path = filter_arma(make_arma({best->ar, best->ma, best->sar, best->sma, best->mean}), pr.w, pr.first,
                                  pr.sum_from, best->mean, true);

    ForecasterOutput out;
    out.model = "SARIMA";
    out.description = "SARIMA" + best->order.to_string();
    out.fitted_start = train.start() + static_cast<long>(delta.size());
    for (std::size_t t = pr.first; t < y.size(); ++t) {
        // y_t = w_t + sum delta_j y_{t-j}; replace w_t by its prediction.
        double pred = path.predictions[t - pr.first];
        for (std::size_t j = 1; j <= delta.size(); ++j) pred += delta[j - 1] * y[t - j];
        out.fitted.push_back(pred);
    }
    out.forecast_start = fc.first;
    out.forecasts = fc.target_mean;
    out.lower = fc.target_lower;
    out.upper = fc.target_upper;
    out.level = fc.level;
    const auto& o = best->order;
    out.meta = {{"p", double(o.p)}, {"d", double(o.d)}, {"q", double(o.q)}, {"P", double(o.P)},
                {"D", double(o.D)}, {"Q", double(o.Q)}, {"aic", best->aic}, {"loglik", best->loglik},
                {"k", double(best->k)}, {"sigma2", best->sigma2}, {"conditioning", double(best->conditioning)}};
    return out;
}

}  // namespace sqvdlm
