#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "sqvdlm/series.hpp"

namespace sqvdlm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Gaussian linear state-space model with fixed monthly effects in the state
/// equation:
///
///     y_t = F x_t + v_t,                 v_t ~ N(0, V)
///     x_t = G x_{t-1} + C s_t + w_t,     w_t ~ N(0, W)
///     x_0 ~ N(x0, P0)
///
/// where s_t is the 12-dim month indicator of t.
struct StateSpaceSpec {
    Matrix F;   // m x q
    Matrix G;   // q x q
    Matrix C;   // q x 12
    Matrix V;   // m x m
    Matrix W;   // q x q
    Vector x0;  // q
    Matrix P0;  // q x q

    Eigen::Index obs_dim() const { return F.rows(); }
    Eigen::Index state_dim() const { return G.rows(); }

    /// Throws ContractError on inconsistent shapes, DomainError on an
    /// asymmetric or indefinite covariance.
    void validate() const;
};

/// How x_0 enters the model.
enum class InitialState {
    Fixed,    // x0 is a parameter, P0 = 0
    Diffuse,  // x0 = 0, P0 = diffuse_variance * I
};

inline constexpr double kDiffuseVariance = 1e7;

/// Parameters of the two-state replicate model: target level X1 driven by the
/// lagged latent search interest X2 through beta.
struct DlmParams {
    double beta = 0.0;
    double sigma2_y1 = 1.0;  // target observation noise
    double sigma2_y2 = 1.0;  // per-replicate observation noise (shared)
    double sigma2_x1 = 1.0;  // target state noise
    double sigma2_x2 = 1.0;  // latent SQV state noise
    Eigen::Matrix<double, 2, 12> C = Eigen::Matrix<double, 2, 12>::Zero();
    Eigen::Vector2d x0 = Eigen::Vector2d::Zero();

    bool operator==(const DlmParams&) const = default;
};

/// Scalar random walk with monthly effects; the replicate model with the X2
/// block and replicate rows removed.
struct ScalarDlmParams {
    double sigma2_y = 1.0;
    double sigma2_x = 1.0;
    Eigen::Matrix<double, 1, 12> C = Eigen::Matrix<double, 1, 12>::Zero();
    double x0 = 0.0;

    bool operator==(const ScalarDlmParams&) const = default;
};

/// F is (a+1) x 2 with rows (1,0),(0,1),...,(0,1); G = [[1, beta],[0, 1]];
/// V = diag(s_y1, s_y2, ..., s_y2); W = diag(s_x1, s_x2).
StateSpaceSpec build_nhnr_dlm(const DlmParams& params, std::size_t replicates,
                              InitialState init = InitialState::Fixed);
StateSpaceSpec build_scalar_dlm(const ScalarDlmParams& params,
                                InitialState init = InitialState::Fixed);

/// Dense observation matrix with an explicit mask, one row per month.
struct ObservationMatrix {
    MonthStamp start;
    Matrix values;                                          // T x m, unobserved cells are 0
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> observed;  // T x m

    Eigen::Index length() const { return values.rows(); }
    Eigen::Index dim() const { return values.cols(); }

    static ObservationMatrix from_panel(const ObservationPanel& panel);
    static ObservationMatrix from_series(const MonthlySeries& series);
    /// Fully observed univariate data.
    static ObservationMatrix from_values(const MonthStamp& start, const std::vector<double>& y);
};

struct FilterResult {
    MonthStamp start;
    std::vector<Vector> predicted_mean;  // a_t = E[x_t | y_1..t-1], t = 1..T
    std::vector<Matrix> predicted_cov;
    std::vector<Vector> filtered_mean;  // m_t = E[x_t | y_1..t]
    std::vector<Matrix> filtered_cov;
    std::vector<Vector> innovation;  // observed components only
    std::vector<Matrix> innovation_cov;
    std::vector<std::vector<Eigen::Index>> observed_rows;
    double loglik = 0.0;

    std::size_t length() const { return filtered_mean.size(); }
};

struct SmootherResult {
    Vector initial_mean;  // E[x_0 | Y]
    Matrix initial_cov;
    std::vector<Vector> smoothed_mean;  // t = 1..T
    std::vector<Matrix> smoothed_cov;
    std::vector<Matrix> lag_one_cov;  // Cov(x_t, x_{t-1} | Y), t = 1..T (t = 1 pairs with x_0)
};

/// Kalman filter with row deletion at missing observations. Throws
/// DegeneracyError carrying t when an innovation covariance is singular.
FilterResult kalman_filter(const StateSpaceSpec& spec, const ObservationMatrix& y);
FilterResult kalman_filter(const StateSpaceSpec& spec, const ObservationPanel& panel);

/// Rauch-Tung-Striebel smoother with lag-one cross covariances.
SmootherResult kalman_smoother(const StateSpaceSpec& spec, const FilterResult& filter);

double loglik(const StateSpaceSpec& spec, const ObservationPanel& panel);

struct ForecastResult {
    MonthStamp first;  // month of horizon 1
    double level = 0.95;
    bool offsets_applied = false;
    std::vector<double> target_mean;
    std::vector<double> target_var;
    std::vector<double> target_lower;
    std::vector<double> target_upper;
    // Latent search-interest state, when the model has one.
    std::vector<double> sqv_mean;
    std::vector<double> sqv_var;
    std::vector<double> sqv_lower;
    std::vector<double> sqv_upper;

    std::size_t horizon() const { return target_mean.size(); }
};

struct ForecastOptions {
    std::size_t horizon = 12;
    double level = 0.95;
    /// Demean offsets (a+1 entries); the target gets entry 0 and the latent
    /// SQV the average of the replicate entries.
    std::optional<std::vector<double>> offsets;
    /// State component reported as latent SQV, if any.
    std::optional<Eigen::Index> latent_component;
};

/// Runs the state equation forward from the final filtered moments.
ForecastResult forecast(const StateSpaceSpec& spec, const FilterResult& filter,
                        const ForecastOptions& options);
/// Same, starting from explicit moments of x_T; `first` is the month of T+1.
ForecastResult forecast_from_state(const StateSpaceSpec& spec, const MonthStamp& first,
                                   const Vector& mean, const Matrix& cov,
                                   const ForecastOptions& options);

/// Two-sided standard normal quantile for a central interval at `level`.
double normal_interval_z(double level);

/// (A + A') / 2.
inline void symmetrize(Matrix& a) { a = 0.5 * (a + a.transpose()).eval(); }

}  // namespace sqvdlm
