#pragma once

// Test-only reference computations. Nothing here calls the Kalman recursions:
// moments of the stacked Gaussian are built by summing the state equation
// explicitly, then densities and conditionals use dense linear algebra.

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "sqvdlm/dlm.hpp"

namespace oracle {

using sqvdlm::Matrix;
using sqvdlm::Vector;

struct JointGaussian {
    // State moments for t = 0..T stacked as blocks of size q.
    Vector state_mean;
    Matrix state_cov;
    // Observed entries of Y stacked in (t, row) order.
    Vector y;
    Vector y_mean;
    Matrix y_cov;
    Matrix cross;  // Cov(states, y)
    Eigen::Index q = 0;
    Eigen::Index T = 0;
};

inline Matrix matrix_power(const Matrix& g, int k) {
    Matrix out = Matrix::Identity(g.rows(), g.cols());
    for (int i = 0; i < k; ++i) out = out * g;
    return out;
}

inline JointGaussian build_joint(const sqvdlm::StateSpaceSpec& spec, const sqvdlm::ObservationMatrix& obs) {
    const auto q = spec.state_dim();
    const auto T = obs.length();
    JointGaussian j;
    j.q = q;
    j.T = T;
    j.state_mean = Vector::Zero((T + 1) * q);
    j.state_cov = Matrix::Zero((T + 1) * q, (T + 1) * q);

    // Means: x_t = G x_{t-1} + C s_t.
    j.state_mean.segment(0, q) = spec.x0;
    for (Eigen::Index t = 1; t <= T; ++t) {
        Vector s = Vector::Zero(12);
        s((obs.start + static_cast<long>(t - 1)).month() - 1) = 1.0;
        j.state_mean.segment(t * q, q) = spec.G * j.state_mean.segment((t - 1) * q, q) + spec.C * s;
    }
    // Cov(x_t, x_u) = G^t P0 G^u' + sum_{k=1}^{min(t,u)} G^{t-k} W G^{u-k}'.
    for (Eigen::Index t = 0; t <= T; ++t) {
        for (Eigen::Index u = 0; u <= T; ++u) {
            Matrix c = matrix_power(spec.G, int(t)) * spec.P0 * matrix_power(spec.G, int(u)).transpose();
            for (Eigen::Index k = 1; k <= std::min(t, u); ++k) {
                c += matrix_power(spec.G, int(t - k)) * spec.W * matrix_power(spec.G, int(u - k)).transpose();
            }
            j.state_cov.block(t * q, u * q, q, q) = c;
        }
    }

    std::vector<std::pair<Eigen::Index, Eigen::Index>> cells;  // (t, row), t is 1-based
    for (Eigen::Index t = 1; t <= T; ++t) {
        for (Eigen::Index i = 0; i < obs.dim(); ++i) {
            if (obs.observed(t - 1, i)) cells.emplace_back(t, i);
        }
    }
    const auto n = static_cast<Eigen::Index>(cells.size());
    j.y = Vector(n);
    j.y_mean = Vector(n);
    j.y_cov = Matrix(n, n);
    j.cross = Matrix((T + 1) * q, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        auto [ta, ia] = cells[static_cast<std::size_t>(a)];
        j.y(a) = obs.values(ta - 1, ia);
        j.y_mean(a) = spec.F.row(ia).dot(j.state_mean.segment(ta * q, q));
        for (Eigen::Index b = 0; b < n; ++b) {
            auto [tb, ib] = cells[static_cast<std::size_t>(b)];
            double v = spec.F.row(ia) * j.state_cov.block(ta * q, tb * q, q, q) * spec.F.row(ib).transpose();
            if (ta == tb) v += spec.V(ia, ib);
            j.y_cov(a, b) = v;
        }
        for (Eigen::Index t = 0; t <= T; ++t) {
            j.cross.block(t * q, a, q, 1) = j.state_cov.block(t * q, ta * q, q, q) * spec.F.row(ia).transpose();
        }
    }
    return j;
}

inline double log_density(const JointGaussian& j) {
    const auto n = j.y.size();
    if (n == 0) return 0.0;
    Eigen::FullPivLU<Matrix> lu(j.y_cov);
    const Vector r = j.y - j.y_mean;
    const double log_det = std::log(std::abs(lu.determinant()));
    return -0.5 * (static_cast<double>(n) * std::log(2.0 * M_PI) + log_det + r.dot(lu.solve(r)));
}

struct Conditional {
    std::vector<Vector> mean;  // t = 0..T
    std::vector<Matrix> cov;
    std::vector<Matrix> cross;  // Cov(x_t, x_{t-1} | Y), t = 1..T at index t
};

inline Conditional conditional_moments(const JointGaussian& j) {
    const auto q = j.q;
    const auto N = (j.T + 1) * q;
    Vector mean = j.state_mean;
    Matrix cov = j.state_cov;
    if (j.y.size() > 0) {
        Eigen::FullPivLU<Matrix> lu(j.y_cov);
        mean += j.cross * lu.solve(j.y - j.y_mean);
        cov -= j.cross * lu.solve(j.cross.transpose());
    }
    Conditional c;
    for (Eigen::Index t = 0; t <= j.T; ++t) {
        c.mean.push_back(mean.segment(t * q, q));
        c.cov.push_back(cov.block(t * q, t * q, q, q));
        c.cross.push_back(t == 0 ? Matrix::Zero(q, q) : Matrix(cov.block(t * q, (t - 1) * q, q, q)));
    }
    (void)N;
    return c;
}

/// Random model with q, m in 1..3 and well-conditioned covariances.
inline sqvdlm::StateSpaceSpec random_spec(std::mt19937_64& rng, Eigen::Index m, Eigen::Index q) {
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.2, 1.0);
    auto randn = [&](Eigen::Index r, Eigen::Index c) {
        Matrix a(r, c);
        for (Eigen::Index i = 0; i < r; ++i)
            for (Eigen::Index k = 0; k < c; ++k) a(i, k) = z(rng);
        return a;
    };
    auto random_pd = [&](Eigen::Index d) {
        Matrix a = randn(d, d);
        Matrix p = 0.5 * a * a.transpose();
        for (Eigen::Index i = 0; i < d; ++i) p(i, i) += u(rng);
        return p;
    };
    sqvdlm::StateSpaceSpec s;
    s.F = randn(m, q);
    s.G = 0.6 * randn(q, q);
    s.C = randn(q, 12);
    s.V = random_pd(m);
    s.W = random_pd(q);
    s.x0 = randn(q, 1);
    s.P0 = (rng() % 2 == 0) ? Matrix(Matrix::Zero(q, q)) : random_pd(q);
    return s;
}

inline sqvdlm::ObservationMatrix random_observations(std::mt19937_64& rng, Eigen::Index T, Eigen::Index m,
                                                     double missing_rate) {
    std::normal_distribution<double> z(0.0, 2.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    sqvdlm::ObservationMatrix y{sqvdlm::MonthStamp(2004, 1 + int(rng() % 12)), Matrix::Zero(T, m),
                                Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(T, m, true)};
    for (Eigen::Index t = 0; t < T; ++t) {
        for (Eigen::Index i = 0; i < m; ++i) {
            y.values(t, i) = z(rng);
            if (u(rng) < missing_rate) {
                y.observed(t, i) = false;
                y.values(t, i) = 0.0;
            }
        }
    }
    return y;
}

}  // namespace oracle
