#pragma once

#include "mvad/tensor.hpp"

#include <vector>

namespace mvad {

struct RocPoint {
    double value = 0.0; // sensitivity parameter at this operating point
    double tpr = 0.0;
    double fpr = 0.0;
};

// Execution-level ROC: at each sweep value v an execution is flagged iff its
// statistic exceeds v. Appends the (0,0) and (1,1) endpoints. Throws when
// either class is empty.
std::vector<RocPoint> roc_curve(const Vector& sweep_values, const Vector& stats,
                                const std::vector<int>& labels);

// Trapezoidal area over FPR-sorted points; needs at least two points.
double auc(std::vector<RocPoint> points);

// Evenly spaced sweep grid spanning [lo - pad, hi + pad].
Vector sweep_grid(double lo, double hi, std::size_t count, double pad = 1.0);

} // namespace mvad
