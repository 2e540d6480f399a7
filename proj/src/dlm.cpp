#include "sqvdlm/dlm.hpp"

#include <gsl/gsl_cdf.h>

#include <cmath>
#include <string>

#include "sqvdlm/errors.hpp"

namespace sqvdlm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kConditionThreshold = 1e-12;

void require_psd(const Matrix& a, const char* name) {
    if ((a - a.transpose()).norm() > 1e-10 * std::max(1.0, a.norm())) {
        throw DomainError(std::string(name) + " is not symmetric");
    }
    if (a.rows() == 0) return;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
    const double tol = 1e-10 * std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
    if (eig.eigenvalues().minCoeff() < -tol) {
        throw DomainError(std::string(name) + " is not positive semidefinite");
    }
}

Eigen::Map<const Eigen::Matrix<double, 12, 1>> as_vector(const std::array<double, 12>& s) {
    return Eigen::Map<const Eigen::Matrix<double, 12, 1>>(s.data());
}

}  // namespace

void StateSpaceSpec::validate() const {
    const auto m = F.rows();
    const auto q = F.cols();
    if (m < 1 || q < 1) throw ContractError("state-space dimensions must be positive");
    if (G.rows() != q || G.cols() != q) throw ContractError("G must be q x q");
    if (C.rows() != q || C.cols() != 12) throw ContractError("C must be q x 12");
    if (V.rows() != m || V.cols() != m) throw ContractError("V must be m x m");
    if (W.rows() != q || W.cols() != q) throw ContractError("W must be q x q");
    if (x0.size() != q) throw ContractError("x0 must have q entries");
    if (P0.rows() != q || P0.cols() != q) throw ContractError("P0 must be q x q");
    require_psd(V, "V");
    require_psd(W, "W");
    require_psd(P0, "P0");
}

StateSpaceSpec build_nhnr_dlm(const DlmParams& p, std::size_t replicates, InitialState init) {
    if (replicates < 1) throw DomainError("replicate count must be at least 1");
    for (double v : {p.sigma2_y1, p.sigma2_y2, p.sigma2_x1, p.sigma2_x2}) {
        if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("variances must be positive and finite");
    }
    const auto m = static_cast<Eigen::Index>(replicates) + 1;
    StateSpaceSpec s;
    s.F = Matrix::Zero(m, 2);
    s.F(0, 0) = 1.0;
    s.F.bottomRows(m - 1).col(1).setOnes();
    s.G = Matrix::Identity(2, 2);
    s.G(0, 1) = p.beta;
    s.C = p.C;
    Vector vdiag = Vector::Constant(m, p.sigma2_y2);
    vdiag(0) = p.sigma2_y1;
    s.V = vdiag.asDiagonal();
    s.W = Eigen::Vector2d(p.sigma2_x1, p.sigma2_x2).asDiagonal();
    if (init == InitialState::Fixed) {
        s.x0 = p.x0;
        s.P0 = Matrix::Zero(2, 2);
    } else {
        s.x0 = Vector::Zero(2);
        s.P0 = kDiffuseVariance * Matrix::Identity(2, 2);
    }
    return s;
}

StateSpaceSpec build_scalar_dlm(const ScalarDlmParams& p, InitialState init) {
    for (double v : {p.sigma2_y, p.sigma2_x}) {
        if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("variances must be positive and finite");
    }
    StateSpaceSpec s;
    s.F = Matrix::Ones(1, 1);
    s.G = Matrix::Ones(1, 1);
    s.C = p.C;
    s.V = Matrix::Constant(1, 1, p.sigma2_y);
    s.W = Matrix::Constant(1, 1, p.sigma2_x);
    if (init == InitialState::Fixed) {
        s.x0 = Vector::Constant(1, p.x0);
        s.P0 = Matrix::Zero(1, 1);
    } else {
        s.x0 = Vector::Zero(1);
        s.P0 = Matrix::Constant(1, 1, kDiffuseVariance);
    }
    return s;
}

ObservationMatrix ObservationMatrix::from_panel(const ObservationPanel& panel) {
    const auto T = static_cast<Eigen::Index>(panel.length());
    const auto m = static_cast<Eigen::Index>(panel.replicate_count() + 1);
    ObservationMatrix y{panel.start(), Matrix::Zero(T, m),
                        Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(T, m, false)};
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& row = panel.row(static_cast<std::size_t>(i));
        for (Eigen::Index t = 0; t < T; ++t) {
            if (const auto& v = row[static_cast<std::size_t>(t)]) {
                y.values(t, i) = *v;
                y.observed(t, i) = true;
            }
        }
    }
    return y;
}

ObservationMatrix ObservationMatrix::from_series(const MonthlySeries& series) {
    const auto T = static_cast<Eigen::Index>(series.size());
    ObservationMatrix y{series.start(), Matrix::Zero(T, 1),
                        Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(T, 1, false)};
    for (Eigen::Index t = 0; t < T; ++t) {
        if (const auto& v = series[static_cast<std::size_t>(t)]) {
            y.values(t, 0) = *v;
            y.observed(t, 0) = true;
        }
    }
    return y;
}

ObservationMatrix ObservationMatrix::from_values(const MonthStamp& start, const std::vector<double>& v) {
    const auto T = static_cast<Eigen::Index>(v.size());
    ObservationMatrix y{start, Eigen::Map<const Vector>(v.data(), T),
                        Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(T, 1, true)};
    return y;
}

FilterResult kalman_filter(const StateSpaceSpec& spec, const ObservationMatrix& y) {
    const auto q = spec.state_dim();
    if (y.dim() != spec.obs_dim()) {
        throw ContractError("observation dimension " + std::to_string(y.dim()) +
                            " does not match the model's " + std::to_string(spec.obs_dim()));
    }
    const auto T = static_cast<std::size_t>(y.length());

    FilterResult out;
    out.start = y.start;
    out.predicted_mean.reserve(T);
    out.predicted_cov.reserve(T);
    out.filtered_mean.reserve(T);
    out.filtered_cov.reserve(T);
    out.innovation.reserve(T);
    out.innovation_cov.reserve(T);
    out.observed_rows.reserve(T);

    Vector m = spec.x0;
    Matrix P = spec.P0;
    const Matrix I = Matrix::Identity(q, q);

    for (std::size_t t = 0; t < T; ++t) {
        const auto month = y.start + static_cast<long>(t);
        Vector a = spec.G * m + spec.C * as_vector(month_indicator(month));
        Matrix R = spec.G * P * spec.G.transpose() + spec.W;
        symmetrize(R);
        out.predicted_mean.push_back(a);
        out.predicted_cov.push_back(R);

        std::vector<Eigen::Index> rows;
        for (Eigen::Index i = 0; i < y.dim(); ++i) {
            if (y.observed(static_cast<Eigen::Index>(t), i)) rows.push_back(i);
        }
        const auto n_obs = static_cast<Eigen::Index>(rows.size());
        if (n_obs == 0) {
            m = a;
            P = R;
            out.innovation.emplace_back(0);
            out.innovation_cov.emplace_back(0, 0);
        } else {
            Matrix Fo(n_obs, q);
            Matrix Vo(n_obs, n_obs);
            Vector v(n_obs);
            for (Eigen::Index r = 0; r < n_obs; ++r) {
                Fo.row(r) = spec.F.row(rows[static_cast<std::size_t>(r)]);
                v(r) = y.values(static_cast<Eigen::Index>(t), rows[static_cast<std::size_t>(r)]);
                for (Eigen::Index c = 0; c < n_obs; ++c) {
                    Vo(r, c) = spec.V(rows[static_cast<std::size_t>(r)], rows[static_cast<std::size_t>(c)]);
                }
            }
            v -= Fo * a;
            Matrix S = Fo * R * Fo.transpose() + Vo;
            symmetrize(S);

            Eigen::LDLT<Matrix> ldlt(S);
            if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
                !(ldlt.rcond() > kConditionThreshold) || (ldlt.vectorD().array() <= 0.0).any()) {
                throw DegeneracyError("innovation covariance is singular at t = " + std::to_string(t + 1),
                                      static_cast<long>(t + 1));
            }
            const Matrix K = ldlt.solve(Fo * R).transpose();  // R F' S^{-1}
            m = a + K * v;
            const Matrix IKF = I - K * Fo;
            P = IKF * R * IKF.transpose() + K * Vo * K.transpose();
            symmetrize(P);

            const double log_det = ldlt.vectorD().array().log().sum();
            out.loglik += -0.5 * (static_cast<double>(n_obs) * kLog2Pi + log_det + v.dot(ldlt.solve(v)));
            out.innovation.push_back(v);
            out.innovation_cov.push_back(S);
        }
        if (!std::isfinite(out.loglik)) {
            throw DegeneracyError("log-likelihood is not finite at t = " + std::to_string(t + 1),
                                  static_cast<long>(t + 1));
        }
        out.filtered_mean.push_back(m);
        out.filtered_cov.push_back(P);
        out.observed_rows.push_back(std::move(rows));
    }
    return out;
}

FilterResult kalman_filter(const StateSpaceSpec& spec, const ObservationPanel& panel) {
    return kalman_filter(spec, ObservationMatrix::from_panel(panel));
}

SmootherResult kalman_smoother(const StateSpaceSpec& spec, const FilterResult& f) {
    const std::size_t T = f.length();
    if (f.predicted_mean.size() != T || f.predicted_cov.size() != T || f.filtered_cov.size() != T) {
        throw ContractError("filter result has inconsistent lengths");
    }
    if (T > 0 && f.filtered_mean.front().size() != spec.state_dim()) {
        throw ContractError("filter result does not match the model's state dimension");
    }
    SmootherResult out;
    out.smoothed_mean.resize(T);
    out.smoothed_cov.resize(T);
    out.lag_one_cov.resize(T);
    if (T == 0) {
        out.initial_mean = spec.x0;
        out.initial_cov = spec.P0;
        return out;
    }
    out.smoothed_mean[T - 1] = f.filtered_mean[T - 1];
    out.smoothed_cov[T - 1] = f.filtered_cov[T - 1];

    for (std::size_t t = T; t-- > 0;) {
        // Smooth x_{t-1} (index t-1 in 1-based time is filtered slot t-1, or x_0).
        const Vector& m_prev = t == 0 ? spec.x0 : f.filtered_mean[t - 1];
        const Matrix& P_prev = t == 0 ? spec.P0 : f.filtered_cov[t - 1];
        const Matrix& R = f.predicted_cov[t];
        // J = P_prev G' R^{-1}; a pseudo-inverse handles singular R (zero state noise).
        const Matrix J = R.completeOrthogonalDecomposition().solve(spec.G * P_prev).transpose();
        Vector s_prev = m_prev + J * (out.smoothed_mean[t] - f.predicted_mean[t]);
        Matrix S_prev = P_prev + J * (out.smoothed_cov[t] - R) * J.transpose();
        symmetrize(S_prev);
        out.lag_one_cov[t] = out.smoothed_cov[t] * J.transpose();
        if (t == 0) {
            out.initial_mean = std::move(s_prev);
            out.initial_cov = std::move(S_prev);
        } else {
            out.smoothed_mean[t - 1] = std::move(s_prev);
            out.smoothed_cov[t - 1] = std::move(S_prev);
        }
    }
    return out;
}

double loglik(const StateSpaceSpec& spec, const ObservationPanel& panel) {
    return kalman_filter(spec, panel).loglik;
}

double normal_interval_z(double level) {
    if (!(level > 0.0 && level < 1.0)) {
        throw DomainError("interval level must lie in (0, 1)");
    }
    return gsl_cdf_ugaussian_Pinv(0.5 + 0.5 * level);
}

ForecastResult forecast_from_state(const StateSpaceSpec& spec, const MonthStamp& first,
                                   const Vector& mean, const Matrix& cov,
                                   const ForecastOptions& options) {
    if (options.horizon < 1) throw DomainError("forecast horizon must be at least 1");
    const double z = normal_interval_z(options.level);

    double target_offset = 0.0;
    double sqv_offset = 0.0;
    if (options.offsets) {
        const auto& o = *options.offsets;
        if (o.empty()) throw ContractError("offset vector is empty");
        target_offset = o[0];
        if (o.size() > 1) {
            double sum = 0.0;
            for (std::size_t i = 1; i < o.size(); ++i) sum += o[i];
            sqv_offset = sum / static_cast<double>(o.size() - 1);
        }
    }

    ForecastResult out;
    out.first = first;
    out.level = options.level;
    out.offsets_applied = options.offsets.has_value();

    Vector a = mean;
    Matrix P = cov;
    const auto f0 = spec.F.row(0);
    for (std::size_t h = 0; h < options.horizon; ++h) {
        const auto month = first + static_cast<long>(h);
        a = spec.G * a + spec.C * as_vector(month_indicator(month));
        P = spec.G * P * spec.G.transpose() + spec.W;
        symmetrize(P);

        const double mu = f0.dot(a) + target_offset;
        const double var = std::max(0.0, f0 * P * f0.transpose() + spec.V(0, 0));
        out.target_mean.push_back(mu);
        out.target_var.push_back(var);
        out.target_lower.push_back(mu - z * std::sqrt(var));
        out.target_upper.push_back(mu + z * std::sqrt(var));
        if (options.latent_component) {
            const auto k = *options.latent_component;
            const double smu = a(k) + sqv_offset;
            const double svar = std::max(0.0, P(k, k));
            out.sqv_mean.push_back(smu);
            out.sqv_var.push_back(svar);
            out.sqv_lower.push_back(smu - z * std::sqrt(svar));
            out.sqv_upper.push_back(smu + z * std::sqrt(svar));
        }
    }
    return out;
}

ForecastResult forecast(const StateSpaceSpec& spec, const FilterResult& filter,
                        const ForecastOptions& options) {
    if (filter.length() == 0) throw ContractError("cannot forecast from an empty filter result");
    return forecast_from_state(spec, filter.start + static_cast<long>(filter.length()),
                               filter.filtered_mean.back(), filter.filtered_cov.back(), options);
}

}  // namespace sqvdlm
