#include "mvad/roc.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace mvad {

std::vector<RocPoint> roc_curve(const Vector& sweep_values, const Vector& stats,
                                const std::vector<int>& labels) {
    if (stats.size() != labels.size())
        throw std::invalid_argument("roc_curve: stats/labels size mismatch");
    std::size_t pos = 0, neg = 0;
    for (int l : labels) (l ? pos : neg) += 1;
    if (pos == 0 || neg == 0)
        throw std::invalid_argument("roc_curve: a class is empty; rates undefined");

    std::vector<RocPoint> pts;
    pts.reserve(sweep_values.size() + 2);
    for (double v : sweep_values) {
        std::size_t tp = 0, fp = 0;
        for (std::size_t i = 0; i < stats.size(); ++i) {
            if (stats[i] > v) (labels[i] ? tp : fp) += 1;
        }
        pts.push_back({v, static_cast<double>(tp) / static_cast<double>(pos),
                       static_cast<double>(fp) / static_cast<double>(neg)});
    }
    pts.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    pts.push_back({-std::numeric_limits<double>::infinity(), 1.0, 1.0});
    return pts;
}

double auc(std::vector<RocPoint> points) {
    if (points.size() < 2)
        throw std::invalid_argument("auc: need at least two points");
    std::sort(points.begin(), points.end(), [](const RocPoint& a, const RocPoint& b) {
        if (a.fpr != b.fpr) return a.fpr < b.fpr;
        return a.tpr < b.tpr;
    });
    double area = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        const double dx = points[i].fpr - points[i - 1].fpr;
        area += dx * 0.5 * (points[i].tpr + points[i - 1].tpr);
    }
    return area;
}

Vector sweep_grid(double lo, double hi, std::size_t count, double pad) {
    if (count < 2) throw std::invalid_argument("sweep_grid: count >= 2");
    const double a = lo - pad;
    const double b = hi + pad;
    Vector g(count);
    for (std::size_t i = 0; i < count; ++i)
        g[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1);
    return g;
}

} // namespace mvad
