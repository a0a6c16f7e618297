#include "mvad/preprocess.hpp"

#include <cmath>
#include <stdexcept>

namespace mvad {

Matrix resample(const Matrix& src, std::size_t T) {
    if (src.rows < 2) throw std::invalid_argument("resample: need >= 2 source rows");
    if (T < 2) throw std::invalid_argument("resample: target length must be >= 2");

    const std::size_t S = src.rows;
    const std::size_t D = src.cols;
    Matrix out(T, D);
    const double step = static_cast<double>(S - 1) / static_cast<double>(T - 1);
    for (std::size_t j = 0; j < T; ++j) {
        const double u = static_cast<double>(j) * step;
        std::size_t i0 = static_cast<std::size_t>(u);
        if (i0 >= S - 1) i0 = S - 2;
        const double frac = u - static_cast<double>(i0);
        for (std::size_t d = 0; d < D; ++d)
            out(j, d) = (1.0 - frac) * src(i0, d) + frac * src(i0 + 1, d);
    }
    return out;
}

std::size_t resample_index(std::size_t src_index, std::size_t src_len,
                           std::size_t T) {
    if (src_len < 2 || T < 2) return 0;
    const double u = static_cast<double>(src_index) *
                     static_cast<double>(T - 1) / static_cast<double>(src_len - 1);
    const double r = std::floor(u + 0.5);
    return r >= static_cast<double>(T - 1) ? T - 1
                                           : static_cast<std::size_t>(r);
}

NormStats normalize_fit(const std::vector<Matrix>& train) {
    if (train.empty()) throw std::invalid_argument("normalize_fit: empty split");
    const std::size_t D = train.front().cols;
    NormStats s;
    s.min.assign(D, std::numeric_limits<double>::infinity());
    s.max.assign(D, -std::numeric_limits<double>::infinity());
    for (const auto& m : train) {
        if (m.cols != D)
            throw std::invalid_argument("normalize_fit: channel count mismatch");
        for (std::size_t t = 0; t < m.rows; ++t)
            for (std::size_t d = 0; d < D; ++d) {
                s.min[d] = std::min(s.min[d], m(t, d));
                s.max[d] = std::max(s.max[d], m(t, d));
            }
    }
    return s;
}

Matrix normalize_apply(const Matrix& m, const NormStats& s) {
    if (m.cols != s.dims())
        throw std::invalid_argument("normalize_apply: channel count mismatch");
    Matrix out(m.rows, m.cols);
    for (std::size_t d = 0; d < m.cols; ++d) {
        const double lo = s.min[d];
        const double range = s.max[d] - lo;
        for (std::size_t t = 0; t < m.rows; ++t) {
            // Degenerate (constant) channels map to 0.
            out(t, d) = range > 0.0 ? (m(t, d) - lo) / range : 0.0;
        }
    }
    return out;
}

Execution extract_features(const Execution& e) {
    if (!is_17_channel(e))
        throw std::invalid_argument("extract_features: execution '" + e.id +
                                    "' is not in the 17-channel layout");
    const std::size_t T = e.signal.rows;
    Execution out = e;
    out.channels = layout_4_features();
    out.signal = Matrix(T, 4);

    const double dt = 1.0 / e.rate_hz;
    double accum = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
        const double* row = e.signal[t];
        const double fmag =
            std::sqrt(row[1] * row[1] + row[2] * row[2] + row[3] * row[3]);
        accum += fmag * dt;
        const double dx = row[11] - row[14];
        const double dy = row[12] - row[15];
        const double dz = row[13] - row[16];
        out.signal(t, 0) = row[0];  // sound energy
        out.signal(t, 1) = row[4];  // first joint torque
        out.signal(t, 2) = accum;   // accumulated force
        out.signal(t, 3) = std::sqrt(dx * dx + dy * dy + dz * dz);
    }
    return out;
}

} // namespace mvad
