#include "mvad/baselines.hpp"

#include "mvad/hash.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mvad {

std::vector<WindowedSample> make_windows(const Matrix& seq, std::size_t L,
                                         std::size_t source) {
    if (L < 1) throw std::invalid_argument("make_windows: L >= 1");
    std::vector<WindowedSample> out;
    if (seq.rows < L) return out;
    const std::size_t D = seq.cols;
    out.reserve(seq.rows - L + 1);
    for (std::size_t end = L; end <= seq.rows; ++end) {
        WindowedSample w;
        w.source = source;
        w.end_index = end;
        w.values.resize(L * D);
        for (std::size_t j = 0; j < L; ++j)
            for (std::size_t d = 0; d < D; ++d)
                w.values[j * D + d] = seq(end - L + j, d);
        out.push_back(std::move(w));
    }
    return out;
}

std::vector<WindowedSample> make_windows(const std::vector<Matrix>& seqs,
                                         std::size_t L) {
    std::vector<WindowedSample> out;
    for (std::size_t s = 0; s < seqs.size(); ++s) {
        auto w = make_windows(seqs[s], L, s);
        out.insert(out.end(), std::make_move_iterator(w.begin()),
                   std::make_move_iterator(w.end()));
    }
    return out;
}

ErrorModel ErrorModel::fit(const std::vector<Vector>& errors) {
    if (errors.empty()) throw std::invalid_argument("ErrorModel: no samples");
    const std::size_t d = errors.front().size();
    ErrorModel m;
    m.mean.assign(d, 0.0);
    m.var.assign(d, 0.0);
    for (const auto& e : errors)
        for (std::size_t i = 0; i < d; ++i) m.mean[i] += e[i];
    const double n = static_cast<double>(errors.size());
    for (auto& v : m.mean) v /= n;
    for (const auto& e : errors)
        for (std::size_t i = 0; i < d; ++i) {
            const double c = e[i] - m.mean[i];
            m.var[i] += c * c;
        }
    for (auto& v : m.var) v = std::max(v / n, 1e-8);
    return m;
}

double ErrorModel::mahalanobis_sq(const Vector& e) const {
    require_size(e, mean.size(), "mahalanobis: error vector");
    double s = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        const double c = e[i] - mean[i];
        s += c * c / var[i];
    }
    return s;
}

// ---------------------------------------------------------------------------
// RANDOM
// ---------------------------------------------------------------------------

void RandomDetector::fit(const std::vector<Matrix>&, const std::vector<Matrix>&,
                         std::uint64_t seed) {
    seed_ = seed;
    val_values_ = {0.0, 1.0};
}

double RandomDetector::draw(const std::string& id) const {
    Fnv1a h;
    h.update(&seed_, sizeof(seed_));
    h.update(id);
    return static_cast<double>(h.digest() >> 11) * 0x1.0p-53;
}

ScoreSeries RandomDetector::score_execution(const Matrix&,
                                            const std::string& id) const {
    // Flagged at weight w iff draw < w, i.e. statistic 1-draw exceeds 1-w.
    ScoreSeries s;
    s.values = {1.0 - draw(id)};
    s.step_index = {1};
    return s;
}

std::unique_ptr<DetectorMethod> make_baseline(const std::string& name,
                                              const BaselineConfig& cfg) {
    if (name == "random") return std::make_unique<RandomDetector>(cfg);
    if (name == "osvm") return std::make_unique<OsvmDetector>(cfg);
    if (name == "ae") return std::make_unique<WindowAeDetector>(cfg);
    if (name == "encdecad") return std::make_unique<EncDecAdDetector>(cfg);
    throw std::invalid_argument("unknown baseline: " + name);
}

} // namespace mvad
