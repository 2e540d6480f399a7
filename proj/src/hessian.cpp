#include <cmath>
#include <limits>

#include "sqvdlm/em.hpp"
#include "sqvdlm/errors.hpp"

namespace sqvdlm {

namespace {

double back_transform(double v, Transform t) { return t == Transform::Log ? std::exp(v) : v; }

}  // namespace

IntervalReport hessian_intervals(const std::function<double(const Vector&)>& loglik, const Vector& theta,
                                 const std::vector<std::string>& names, const std::vector<Transform>& transforms,
                                 double level) {
    const Eigen::Index n = theta.size();
    if (static_cast<Eigen::Index>(names.size()) != n || static_cast<Eigen::Index>(transforms.size()) != n) {
        throw ContractError("hessian_intervals: names and transforms must match theta");
    }
    const double z = normal_interval_z(level);

    Vector h(n);
    for (Eigen::Index i = 0; i < n; ++i) h(i) = 1e-4 * std::max(1.0, std::abs(theta(i)));

    auto at = [&](Eigen::Index i, double si, Eigen::Index j, double sj) {
        Vector th = theta;
        th(i) += si * h(i);
        th(j) += sj * h(j);
        return loglik(th);
    };
    const double f0 = loglik(theta);
    Matrix H(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Vector up = theta;
        Vector down = theta;
        up(i) += h(i);
        down(i) -= h(i);
        H(i, i) = (loglik(up) - 2.0 * f0 + loglik(down)) / (h(i) * h(i));
        for (Eigen::Index j = 0; j < i; ++j) {
            const double v = (at(i, 1, j, 1) - at(i, 1, j, -1) - at(i, -1, j, 1) + at(i, -1, j, -1)) / (4.0 * h(i) * h(j));
            H(i, j) = v;
            H(j, i) = v;
        }
    }

    IntervalReport out;
    out.level = level;
    Matrix cov(n, n);
    if (!H.allFinite()) {
        out.reliable = false;
        out.status = "non-finite Hessian";
        cov.setConstant(std::numeric_limits<double>::quiet_NaN());
    } else {
        // Covariance = (-H)^{-1}, restricted to directions of negative curvature.
        Eigen::SelfAdjointEigenSolver<Matrix> eig(-H);
        const Vector lambda = eig.eigenvalues();
        const double tol = 1e-12 * std::max(1.0, lambda.cwiseAbs().maxCoeff());
        Vector inv = Vector::Zero(n);
        int dropped = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (lambda(i) > tol) {
                inv(i) = 1.0 / lambda(i);
            } else {
                ++dropped;
            }
        }
        cov = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
        if (dropped > 0) {
            out.reliable = false;
            out.status = "Hessian not negative definite (" + std::to_string(dropped) +
                         " direction(s) dropped); intervals use the stable subspace";
        }
    }

    for (Eigen::Index i = 0; i < n; ++i) {
        ParameterInterval p;
        p.name = names[static_cast<std::size_t>(i)];
        p.transform = transforms[static_cast<std::size_t>(i)];
        p.estimate = back_transform(theta(i), p.transform);
        const double var = cov(i, i);
        if (std::isfinite(var) && var > 0.0) {
            p.std_error = std::sqrt(var);
            p.lower = back_transform(theta(i) - z * p.std_error, p.transform);
            p.upper = back_transform(theta(i) + z * p.std_error, p.transform);
        }
        if (!(p.lower < p.upper)) {
            // No usable curvature along this coordinate.
            p.std_error = std::numeric_limits<double>::infinity();
            p.lower = p.transform == Transform::Log ? 0.0 : -std::numeric_limits<double>::infinity();
            p.upper = std::numeric_limits<double>::infinity();
            out.reliable = false;
            if (out.status == "ok") out.status = "unidentified coordinate(s)";
        }
        out.intervals.push_back(p);
    }
    return out;
}

}  // namespace sqvdlm
