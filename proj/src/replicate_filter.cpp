#include "sqvdlm/replicate_filter.hpp"

#include <algorithm>

namespace sqvdlm::reduced {

std::size_t ReducedPanel::target_count() const {
    return static_cast<std::size_t>(std::count(target_observed.begin(), target_observed.end(), true));
}

std::size_t ReducedPanel::replicate_cells() const {
    std::size_t n = 0;
    for (int k : rep_count) n += static_cast<std::size_t>(k);
    return n;
}

namespace {

void fill_target(ReducedPanel& out, const MonthlySeries& target) {
    const auto T = target.size();
    out.start = target.start();
    out.month.resize(T);
    out.target.assign(T, 0.0);
    out.target_observed.assign(T, false);
    for (std::size_t t = 0; t < T; ++t) {
        out.month[t] = target.stamp_at(t).month() - 1;
        if (target[t]) {
            out.target[t] = *target[t];
            out.target_observed[t] = true;
        }
    }
}

}  // namespace

ReducedPanel reduce(const ObservationPanel& panel) {
    ReducedPanel out;
    fill_target(out, panel.target());
    const auto T = panel.length();
    out.rep_mean.assign(T, 0.0);
    out.rep_count.assign(T, 0);
    out.rep_scatter.assign(T, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
        double sum = 0.0;
        int k = 0;
        for (const auto& r : panel.replicates()) {
            if (r[t]) {
                sum += *r[t];
                ++k;
            }
        }
        if (k == 0) continue;
        const double mean = sum / k;
        double ss = 0.0;
        for (const auto& r : panel.replicates()) {
            if (r[t]) ss += (*r[t] - mean) * (*r[t] - mean);
        }
        out.rep_mean[t] = mean;
        out.rep_count[t] = k;
        out.rep_scatter[t] = ss;
    }
    return out;
}

ReducedPanel reduce(const MonthlySeries& target) {
    ReducedPanel out;
    fill_target(out, target);
    return out;
}

Model<2> to_model(const DlmParams& p, InitialState init) {
    Model<2> m;
    m.G << 1.0, p.beta, 0.0, 1.0;
    m.C = p.C;
    m.w << p.sigma2_x1, p.sigma2_x2;
    m.v_target = p.sigma2_y1;
    m.v_replicate = p.sigma2_y2;
    if (init == InitialState::Fixed) {
        m.x0 = p.x0;
        m.P0.setZero();
    } else {
        m.x0.setZero();
        m.P0 = kDiffuseVariance * Eigen::Matrix2d::Identity();
    }
    return m;
}

Model<1> to_model(const ScalarDlmParams& p, InitialState init) {
    Model<1> m;
    m.G(0, 0) = 1.0;
    m.C = p.C;
    m.w(0) = p.sigma2_x;
    m.v_target = p.sigma2_y;
    m.v_replicate = 1.0;
    if (init == InitialState::Fixed) {
        m.x0(0) = p.x0;
        m.P0.setZero();
    } else {
        m.x0.setZero();
        m.P0(0, 0) = kDiffuseVariance;
    }
    return m;
}

}  // namespace sqvdlm::reduced
