#pragma once

// Exact reduced-form Kalman recursions for the replicate model.
//
// With a shared replicate variance the replicate mean is sufficient for the
// latent SQV state: the a replicate rows collapse to one row with variance
// s_y2 / k_t (k_t = replicates observed at t) plus a closed-form term for the
// within-month scatter. The recursions run on fixed-size 1x1 or 2x2 matrices
// and give the same likelihood and moments as the generic filter on the full
// (a+1)-row panel.

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "sqvdlm/dlm.hpp"
#include "sqvdlm/errors.hpp"
#include "sqvdlm/series.hpp"

namespace sqvdlm::reduced {

struct ReducedPanel {
    MonthStamp start;
    std::vector<int> month;  // 0..11
    std::vector<double> target;
    std::vector<bool> target_observed;
    // Replicate summaries (empty for the scalar model).
    std::vector<double> rep_mean;
    std::vector<int> rep_count;
    std::vector<double> rep_scatter;  // sum of squared deviations from rep_mean

    std::size_t length() const { return month.size(); }
    bool has_replicates() const { return !rep_count.empty(); }
    std::size_t target_count() const;
    std::size_t replicate_cells() const;
};

ReducedPanel reduce(const ObservationPanel& panel);
ReducedPanel reduce(const MonthlySeries& target);

template <int Q>
struct Model {
    using Mat = Eigen::Matrix<double, Q, Q>;
    using Vec = Eigen::Matrix<double, Q, 1>;
    Mat G = Mat::Identity();
    Eigen::Matrix<double, Q, 12> C = Eigen::Matrix<double, Q, 12>::Zero();
    Vec w = Vec::Ones();  // diagonal of W
    double v_target = 1.0;
    double v_replicate = 1.0;
    Vec x0 = Vec::Zero();
    Mat P0 = Mat::Zero();
};

Model<2> to_model(const DlmParams& p, InitialState init);
Model<1> to_model(const ScalarDlmParams& p, InitialState init);

template <int Q>
struct Filter {
    using Mat = Eigen::Matrix<double, Q, Q>;
    using Vec = Eigen::Matrix<double, Q, 1>;
    std::vector<Vec> predicted_mean;
    std::vector<Mat> predicted_cov;
    std::vector<Vec> filtered_mean;
    std::vector<Mat> filtered_cov;
    std::vector<double> target_prediction;  // one-step E[y1_t | y_1..t-1]
    double loglik = 0.0;
};

/// Smoothed moments with index 0 holding x_0; cross[t] = Cov(x_t, x_{t-1} | Y).
template <int Q>
struct Moments {
    using Mat = Eigen::Matrix<double, Q, Q>;
    using Vec = Eigen::Matrix<double, Q, 1>;
    std::vector<Vec> mean;
    std::vector<Mat> cov;
    std::vector<Mat> cross;
    double loglik = 0.0;
};

namespace detail {
inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;

template <int Q>
inline void scalar_update(Eigen::Matrix<double, Q, 1>& a, Eigen::Matrix<double, Q, Q>& P, int row,
                          double y, double r, double& loglik, std::size_t t) {
    const double f = P(row, row) + r;
    if (!(f > 0.0) || !std::isfinite(f)) {
        throw DegeneracyError("innovation variance is not positive at t = " + std::to_string(t + 1),
                              static_cast<long>(t + 1));
    }
    const double v = y - a(row);
    const Eigen::Matrix<double, Q, 1> k = P.col(row) / f;
    a += k * v;
    P -= f * k * k.transpose();
    P = 0.5 * (P + P.transpose()).eval();
    loglik += -0.5 * (detail::kLog2Pi + std::log(f) + v * v / f);
}
}  // namespace detail

template <int Q>
Filter<Q> filter(const Model<Q>& model, const ReducedPanel& y) {
    using Mat = typename Filter<Q>::Mat;
    using Vec = typename Filter<Q>::Vec;
    if constexpr (Q == 2) {
        if (!y.has_replicates()) throw ContractError("two-state model needs replicate rows");
    }
    const std::size_t T = y.length();
    Filter<Q> out;
    out.predicted_mean.reserve(T);
    out.predicted_cov.reserve(T);
    out.filtered_mean.reserve(T);
    out.filtered_cov.reserve(T);
    out.target_prediction.reserve(T);

    Vec m = model.x0;
    Mat P = model.P0;
    const Mat W = model.w.asDiagonal();
    for (std::size_t t = 0; t < T; ++t) {
        Vec a = model.G * m + model.C.col(y.month[t]);
        Mat R = model.G * P * model.G.transpose() + W;
        R = 0.5 * (R + R.transpose()).eval();
        out.predicted_mean.push_back(a);
        out.predicted_cov.push_back(R);
        out.target_prediction.push_back(a(0));

        if (y.target_observed[t]) {
            detail::scalar_update<Q>(a, R, 0, y.target[t], model.v_target, out.loglik, t);
        }
        if constexpr (Q == 2) {
            const int k = y.rep_count[t];
            if (k > 0) {
                const double v = model.v_replicate;
                detail::scalar_update<Q>(a, R, 1, y.rep_mean[t], v / k, out.loglik, t);
                out.loglik += -0.5 * ((k - 1) * (detail::kLog2Pi + std::log(v)) + std::log(double(k)) +
                                      y.rep_scatter[t] / v);
            }
        }
        if (!std::isfinite(out.loglik)) {
            throw DegeneracyError("log-likelihood is not finite at t = " + std::to_string(t + 1),
                                  static_cast<long>(t + 1));
        }
        m = a;
        P = R;
        out.filtered_mean.push_back(m);
        out.filtered_cov.push_back(P);
    }
    return out;
}

template <int Q>
Moments<Q> smooth(const Model<Q>& model, const Filter<Q>& f) {
    using Mat = typename Moments<Q>::Mat;
    const std::size_t T = f.filtered_mean.size();
    Moments<Q> out;
    out.loglik = f.loglik;
    out.mean.resize(T + 1);
    out.cov.resize(T + 1);
    out.cross.resize(T + 1, Mat::Zero());
    if (T == 0) {
        out.mean[0] = model.x0;
        out.cov[0] = model.P0;
        return out;
    }
    out.mean[T] = f.filtered_mean[T - 1];
    out.cov[T] = f.filtered_cov[T - 1];
    for (std::size_t t = T; t >= 1; --t) {
        const auto& m_prev = t == 1 ? model.x0 : f.filtered_mean[t - 2];
        const Mat& P_prev = t == 1 ? model.P0 : f.filtered_cov[t - 2];
        const Mat& R = f.predicted_cov[t - 1];
        const Mat J = P_prev * model.G.transpose() * R.inverse();
        out.mean[t - 1] = m_prev + J * (out.mean[t] - f.predicted_mean[t - 1]);
        Mat S = P_prev + J * (out.cov[t] - R) * J.transpose();
        out.cov[t - 1] = 0.5 * (S + S.transpose());
        out.cross[t] = out.cov[t] * J.transpose();
    }
    return out;
}

template <int Q>
Moments<Q> e_step(const Model<Q>& model, const ReducedPanel& y) {
    return smooth(model, filter(model, y));
}

}  // namespace sqvdlm::reduced
