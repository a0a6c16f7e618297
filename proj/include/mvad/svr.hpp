#pragma once

#include "mvad/tensor.hpp"

#include <cstddef>
#include <vector>

namespace mvad {

struct SvrConfig {
    double C = 1.0;
    double epsilon = 0.1; // tube width
    double gamma = 0.0;   // RBF width; <= 0 means 1/input_dim
    double tol = 1e-3;
    long max_iter = 1000000;
    std::size_t max_train_points = 2000; // deterministic subsample cap
};

// Smooth map from latent state to expected anomaly score: an RBF epsilon-SVR
// expansion, or a constant stand-in for fixed thresholding.
class ThresholdRegressor {
public:
    ThresholdRegressor() = default;

    static ThresholdRegressor fit_svr(const std::vector<Vector>& inputs,
                                      const Vector& targets, SvrConfig cfg);
    static ThresholdRegressor constant(double value);

    // f(z) = sum_i beta_i exp(-gamma ||z - z_i||^2) + bias, or the constant.
    double predict(const Vector& z) const;

    bool fitted() const { return fitted_; }
    bool is_constant() const { return const_mode_; }
    double bias() const { return bias_; }
    double gamma() const { return gamma_; }
    std::size_t support_size() const { return support_.size(); }

    // Serialization access.
    const std::vector<Vector>& support() const { return support_; }
    const Vector& coefficients() const { return beta_; }
    static ThresholdRegressor from_parts(std::vector<Vector> support, Vector beta,
                                         double bias, double gamma);

private:
    std::vector<Vector> support_;
    Vector beta_;
    double bias_ = 0.0;
    double gamma_ = 1.0;
    bool fitted_ = false;
    bool const_mode_ = false;
};

double rbf_kernel(const Vector& a, const Vector& b, double gamma);

} // namespace mvad
