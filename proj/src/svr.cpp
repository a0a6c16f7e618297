#include "mvad/svr.hpp"

#include "mvad/smo.hpp"

#include <cmath>
#include <stdexcept>

namespace mvad {

double rbf_kernel(const Vector& a, const Vector& b, double gamma) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

ThresholdRegressor ThresholdRegressor::constant(double value) {
    ThresholdRegressor r;
    r.bias_ = value;
    r.fitted_ = true;
    r.const_mode_ = true;
    return r;
}

ThresholdRegressor ThresholdRegressor::from_parts(std::vector<Vector> support,
                                                  Vector beta, double bias,
                                                  double gamma) {
    if (support.size() != beta.size())
        throw std::invalid_argument("ThresholdRegressor: support/beta mismatch");
    ThresholdRegressor r;
    r.support_ = std::move(support);
    r.beta_ = std::move(beta);
    r.bias_ = bias;
    r.gamma_ = gamma;
    r.fitted_ = true;
    r.const_mode_ = false;
    return r;
}

double ThresholdRegressor::predict(const Vector& z) const {
    if (!fitted_) throw std::logic_error("ThresholdRegressor: not fitted");
    if (const_mode_) return bias_;
    double s = bias_;
    for (std::size_t i = 0; i < support_.size(); ++i)
        s += beta_[i] * rbf_kernel(support_[i], z, gamma_);
    return s;
}

ThresholdRegressor ThresholdRegressor::fit_svr(const std::vector<Vector>& inputs,
                                               const Vector& targets,
                                               SvrConfig cfg) {
    if (inputs.empty() || inputs.size() != targets.size())
        throw std::invalid_argument("fit_svr: empty or mismatched training data");
    const std::size_t dim = inputs.front().size();
    const double gamma = cfg.gamma > 0.0 ? cfg.gamma : 1.0 / static_cast<double>(dim);

    // Deterministic stride subsample above the cap.
    std::vector<std::size_t> keep;
    if (inputs.size() > cfg.max_train_points) {
        const double stride = static_cast<double>(inputs.size()) /
                              static_cast<double>(cfg.max_train_points);
        for (std::size_t i = 0; i < cfg.max_train_points; ++i)
            keep.push_back(static_cast<std::size_t>(i * stride));
    } else {
        keep.resize(inputs.size());
        for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = i;
    }
    const std::size_t n = keep.size();

    Matrix K(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        K(i, i) = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = rbf_kernel(inputs[keep[i]], inputs[keep[j]], gamma);
            K(i, j) = v;
            K(j, i) = v;
        }
    }

    // Variables: alpha_i (y=+1) then alpha*_i (y=-1).
    smo::Problem prob;
    prob.K = &K;
    prob.point.resize(2 * n);
    prob.y.resize(2 * n);
    prob.p.resize(2 * n);
    prob.ub.assign(2 * n, cfg.C);
    for (std::size_t i = 0; i < n; ++i) {
        prob.point[i] = i;
        prob.point[n + i] = i;
        prob.y[i] = 1.0;
        prob.y[n + i] = -1.0;
        prob.p[i] = cfg.epsilon - targets[keep[i]];
        prob.p[n + i] = cfg.epsilon + targets[keep[i]];
    }

    smo::Result sol = smo::solve(prob, Vector(2 * n, 0.0), cfg.tol, cfg.max_iter);

    ThresholdRegressor r;
    r.gamma_ = gamma;
    r.bias_ = -sol.rho;
    for (std::size_t i = 0; i < n; ++i) {
        const double beta = sol.x[i] - sol.x[n + i];
        if (std::fabs(beta) > 1e-12) {
            r.support_.push_back(inputs[keep[i]]);
            r.beta_.push_back(beta);
        }
    }
    r.fitted_ = true;
    return r;
}

} // namespace mvad
