#pragma once

#include <cmath>

namespace mvad {

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// log(1 + e^x), stable for |x| up to ~700; strictly positive for finite x.
inline double softplus(double x) {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

inline double dtanh_from_y(double y) { return 1.0 - y * y; }
inline double dsigmoid_from_y(double y) { return y * (1.0 - y); }

} // namespace mvad
