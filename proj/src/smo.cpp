#include "mvad/smo.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mvad::smo {

Result solve(const Problem& prob, Vector x0, double tol, long max_iter) {
    const std::size_t n = prob.y.size();
    if (!prob.K) throw std::invalid_argument("smo: missing kernel matrix");
    if (prob.point.size() != n || prob.p.size() != n || prob.ub.size() != n ||
        x0.size() != n)
        throw std::invalid_argument("smo: inconsistent problem sizes");

    const Matrix& K = *prob.K;
    Result res;
    res.x = std::move(x0);
    Vector& x = res.x;

    // G = p + Q x.
    Vector G = prob.p;
    for (std::size_t j = 0; j < n; ++j) {
        if (x[j] == 0.0) continue;
        const double cj = prob.y[j] * x[j];
        const double* Krow = K[prob.point[j]];
        for (std::size_t i = 0; i < n; ++i)
            G[i] += prob.y[i] * cj * Krow[prob.point[i]];
    }

    const double bound_eps = 1e-12;
    auto in_up = [&](std::size_t i) {
        return prob.y[i] > 0 ? x[i] < prob.ub[i] - bound_eps : x[i] > bound_eps;
    };
    auto in_low = [&](std::size_t i) {
        return prob.y[i] > 0 ? x[i] > bound_eps : x[i] < prob.ub[i] - bound_eps;
    };

    long it = 0;
    for (; it < max_iter; ++it) {
        // Maximal violating pair.
        double m = -std::numeric_limits<double>::infinity();
        double M = std::numeric_limits<double>::infinity();
        std::size_t i = n, j = n;
        for (std::size_t p = 0; p < n; ++p) {
            const double v = -prob.y[p] * G[p];
            if (in_up(p) && v > m) {
                m = v;
                i = p;
            }
            if (in_low(p) && v < M) {
                M = v;
                j = p;
            }
        }
        if (i == n || j == n || m - M < tol) {
            res.converged = true;
            break;
        }

        const double* Ki = K[prob.point[i]];
        const double* Kj = K[prob.point[j]];
        double a = Ki[prob.point[i]] + Kj[prob.point[j]] - 2.0 * Ki[prob.point[j]];
        if (a <= 0.0) a = 1e-12;

        double delta = (m - M) / a;
        // Box clipping along the feasible direction.
        if (prob.y[i] > 0)
            delta = std::min(delta, prob.ub[i] - x[i]);
        else
            delta = std::min(delta, x[i]);
        if (prob.y[j] > 0)
            delta = std::min(delta, x[j]);
        else
            delta = std::min(delta, prob.ub[j] - x[j]);
        if (delta <= 0.0) {
            res.converged = true; // numerically stuck at a KKT point
            break;
        }

        const double dxi = prob.y[i] * delta;
        const double dxj = -prob.y[j] * delta;
        x[i] += dxi;
        x[j] += dxj;

        for (std::size_t p = 0; p < n; ++p) {
            G[p] += prob.y[p] * (dxi * prob.y[i] * Ki[prob.point[p]] +
                                 dxj * prob.y[j] * Kj[prob.point[p]]);
        }
    }
    res.iters = it;

    // rho from the KKT conditions (free-variable average, else midpoint).
    double ub_acc = std::numeric_limits<double>::infinity();
    double lb_acc = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    std::size_t nr_free = 0;
    for (std::size_t p = 0; p < n; ++p) {
        const double yG = prob.y[p] * G[p];
        if (x[p] >= prob.ub[p] - bound_eps) {
            if (prob.y[p] < 0)
                ub_acc = std::min(ub_acc, yG);
            else
                lb_acc = std::max(lb_acc, yG);
        } else if (x[p] <= bound_eps) {
            if (prob.y[p] > 0)
                ub_acc = std::min(ub_acc, yG);
            else
                lb_acc = std::max(lb_acc, yG);
        } else {
            sum_free += yG;
            ++nr_free;
        }
    }
    res.rho = nr_free > 0 ? sum_free / static_cast<double>(nr_free)
                          : (ub_acc + lb_acc) / 2.0;
    res.grad = std::move(G);
    return res;
}

} // namespace mvad::smo
