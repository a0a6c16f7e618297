#pragma once

// Central finite differences — the independent gradient oracle used across
// the test suites. Deliberately knows nothing about the backward passes it
// checks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>

namespace testsup {

// d f / d (*slot), central difference.
inline double central_diff(const std::function<double()>& f, double* slot,
                           double h = 1e-6) {
    const double orig = *slot;
    *slot = orig + h;
    const double fp = f();
    *slot = orig - h;
    const double fm = f();
    *slot = orig;
    return (fp - fm) / (2.0 * h);
}

// Relative error with a scale floor so near-zero pairs do not blow up.
inline double rel_err(double a, double b, double floor_scale = 1e-2) {
    return std::fabs(a - b) /
           std::max({std::fabs(a), std::fabs(b), floor_scale});
}

// Max relative error between an analytic gradient array and finite
// differences of f over the n slots starting at x.
inline double max_grad_rel_err(const std::function<double()>& f, double* x,
                               const double* analytic, std::size_t n,
                               double h = 1e-6) {
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double fd = central_diff(f, x + i, h);
        worst = std::max(worst, rel_err(analytic[i], fd));
    }
    return worst;
}

} // namespace testsup
