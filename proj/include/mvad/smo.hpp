#pragma once

#include "mvad/tensor.hpp"

#include <cstddef>
#include <vector>

namespace mvad::smo {

// Box-and-equality QP in LIBSVM form:
//   min 1/2 x^T Q x + p^T x   s.t.  y^T x = y^T x0,  0 <= x_i <= ub_i
// with Q_ij = y_i y_j K[point[i]][point[j]]. Solved by maximal-violating-pair
// SMO. The kernel matrix is shared between variables via `point` so the
// epsilon-SVR's alpha/alpha* pairs reuse one K.
struct Problem {
    const Matrix* K = nullptr;
    std::vector<std::size_t> point;
    Vector y;  // each +-1
    Vector p;  // linear term
    Vector ub; // per-variable upper bound
};

struct Result {
    Vector x;
    Vector grad; // gradient of the objective at x
    double rho = 0.0;
    long iters = 0;
    bool converged = false;
};

Result solve(const Problem& prob, Vector x0, double tol, long max_iter);

} // namespace mvad::smo
