#include "mvad/baselines.hpp"

#include "mvad/hash.hpp"
#include "mvad/smo.hpp"
#include "mvad/svr.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mvad {

void OsvmDetector::fit(const std::vector<Matrix>& train,
                       const std::vector<Matrix>& val, std::uint64_t) {
    if (train.empty()) throw std::invalid_argument("osvm: empty training set");
    if (!(cfg_.osvm_nu > 0.0 && cfg_.osvm_nu <= 1.0))
        throw std::invalid_argument("osvm: nu must be in (0, 1]");

    auto windows = make_windows(train, cfg_.window);
    if (windows.empty()) throw std::invalid_argument("osvm: sequences shorter than L");

    points_.clear();
    if (windows.size() > cfg_.osvm_max_train_windows) {
        const double stride = static_cast<double>(windows.size()) /
                              static_cast<double>(cfg_.osvm_max_train_windows);
        for (std::size_t i = 0; i < cfg_.osvm_max_train_windows; ++i)
            points_.push_back(windows[static_cast<std::size_t>(i * stride)].values);
    } else {
        for (auto& w : windows) points_.push_back(std::move(w.values));
    }

    const std::size_t n = points_.size();
    const std::size_t dim = points_.front().size();
    gamma_ = cfg_.osvm_gamma > 0.0 ? cfg_.osvm_gamma
                                   : 1.0 / static_cast<double>(dim);

    Matrix K(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        K(i, i) = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = rbf_kernel(points_[i], points_[j], gamma_);
            K(i, j) = v;
            K(j, i) = v;
        }
    }

    smo::Problem prob;
    prob.K = &K;
    prob.point.resize(n);
    for (std::size_t i = 0; i < n; ++i) prob.point[i] = i;
    prob.y.assign(n, 1.0);
    prob.p.assign(n, 0.0);
    const double ub = 1.0 / (cfg_.osvm_nu * static_cast<double>(n));
    prob.ub.assign(n, ub);

    // Feasible start: sum alpha = 1 with the first floor(nu*n) at the bound.
    Vector x0(n, 0.0);
    double remaining = 1.0;
    for (std::size_t i = 0; i < n && remaining > 0.0; ++i) {
        const double take = std::min(ub, remaining);
        x0[i] = take;
        remaining -= take;
    }
    if (remaining > 1e-12)
        throw std::invalid_argument("osvm: infeasible nu (sum bound below 1)");

    smo::Result sol = smo::solve(prob, std::move(x0), cfg_.osvm_tol,
                                 cfg_.osvm_max_iter);
    alpha_ = std::move(sol.x);
    rho_ = sol.rho;

    // Validation scores: negated decision values per window.
    val_values_.clear();
    val_maxima_.clear();
    for (const auto& seq : val) {
        double worst = -1e300;
        for (const auto& w : make_windows(seq, cfg_.window)) {
            const double s = -decision_value(w.values);
            val_values_.push_back(s);
            worst = std::max(worst, s);
        }
        if (worst > -1e300) val_maxima_.push_back(worst);
    }
    if (val_values_.empty()) {
        val_values_ = {0.0};
        val_maxima_ = {0.0};
    }
}

double OsvmDetector::decision_value(const Vector& window) const {
    if (alpha_.empty()) throw std::logic_error("osvm: not fitted");
    double f = -rho_;
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (alpha_[i] <= 1e-12) continue;
        f += alpha_[i] * rbf_kernel(points_[i], window, gamma_);
    }
    return f;
}

std::size_t OsvmDetector::support_count() const {
    std::size_t c = 0;
    for (double a : alpha_)
        if (a > 1e-12) ++c;
    return c;
}

ScoreSeries OsvmDetector::score_execution(const Matrix& seq,
                                          const std::string&) const {
    ScoreSeries s;
    for (const auto& w : make_windows(seq, cfg_.window)) {
        s.values.push_back(-decision_value(w.values));
        s.step_index.push_back(w.end_index);
    }
    return s;
}

std::uint64_t OsvmDetector::state_hash() const {
    Fnv1a h;
    h.update(alpha_);
    h.update(&rho_, sizeof(rho_));
    for (const auto& p : points_) h.update(p);
    return h.digest();
}

} // namespace mvad
