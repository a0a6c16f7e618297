#pragma once

#include "mvad/dense.hpp"
#include "mvad/lstm_cell.hpp"
#include "mvad/method.hpp"
#include "mvad/tensor.hpp"

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace mvad {

// Flattened window of L consecutive observations. Windows advance one step
// at a time and never cross execution boundaries.
struct WindowedSample {
    Vector values;         // L*D, row-major over time
    std::size_t source;    // index of the owning execution
    std::size_t end_index; // 1-based step of the window's last row
};

std::vector<WindowedSample> make_windows(const Matrix& seq, std::size_t L,
                                         std::size_t source = 0);
std::vector<WindowedSample> make_windows(const std::vector<Matrix>& seqs,
                                         std::size_t L);

// Diagonal Gaussian over reconstruction-error vectors.
struct ErrorModel {
    Vector mean, var;
    static ErrorModel fit(const std::vector<Vector>& errors); // var floored 1e-8
    double mahalanobis_sq(const Vector& e) const;
};

struct BaselineConfig {
    std::size_t window = 3; // L

    std::size_t ae_hidden = 16;
    std::size_t ae_bottleneck = 3;
    double ae_lr = 1e-3;
    std::size_t ae_max_epochs = 40;
    std::size_t ae_patience = 4;
    std::size_t ae_batch = 64;

    std::size_t ed_hidden = 16;
    double ed_lr = 1e-3;
    std::size_t ed_max_epochs = 30;
    std::size_t ed_patience = 4;
    std::size_t ed_batch = 32;
    double ed_grad_clip = 5.0;

    double osvm_nu = 0.10;
    double osvm_gamma = 0.0; // <= 0 means 1/dim
    double osvm_tol = 1e-4;
    long osvm_max_iter = 2000000;

    std::size_t max_train_windows = 6000;      // AE / EncDec-AD subsample cap
    std::size_t osvm_max_train_windows = 2000; // kernel-matrix cap
};

// Class-weighted coin flip; sensitivity = the weight. The per-execution draw
// is a hash of (seed, execution id), so decisions are deterministic and
// monotone in the weight.
class RandomDetector final : public DetectorMethod {
public:
    explicit RandomDetector(BaselineConfig cfg = {}) : cfg_(cfg) {}
    std::string name() const override { return "random"; }
    void fit(const std::vector<Matrix>& train, const std::vector<Matrix>& val,
             std::uint64_t seed) override;
    ScoreSeries score_execution(const Matrix& seq,
                                const std::string& id) const override;
    const Vector& validation_values() const override { return val_values_; }
    const Vector& validation_exec_maxima() const override { return val_values_; }
    std::uint64_t state_hash() const override { return seed_; }

    double draw(const std::string& id) const; // uniform in [0,1)

    void export_state(std::map<std::string, Vector>& arrays,
                      std::map<std::string, double>& scalars) const override;
    void import_state(const std::map<std::string, Vector>& arrays,
                      const std::map<std::string, double>& scalars) override;

private:
    BaselineConfig cfg_;
    std::uint64_t seed_ = 0;
    Vector val_values_;
};

// One-class SVM over sliding windows, RBF kernel, solved in the dual.
class OsvmDetector final : public DetectorMethod {
public:
    explicit OsvmDetector(BaselineConfig cfg = {}) : cfg_(cfg) {}
    std::string name() const override { return "osvm"; }
    void fit(const std::vector<Matrix>& train, const std::vector<Matrix>& val,
             std::uint64_t seed) override;
    // Scores are negated decision values: positive outside the boundary.
    ScoreSeries score_execution(const Matrix& seq,
                                const std::string& id) const override;
    const Vector& validation_values() const override { return val_values_; }
    const Vector& validation_exec_maxima() const override { return val_maxima_; }
    std::uint64_t state_hash() const override;

    // Signed distance-style decision value: negative outside the boundary.
    double decision_value(const Vector& window) const;
    std::size_t support_count() const;
    std::size_t train_count() const { return points_.size(); }

    void export_state(std::map<std::string, Vector>& arrays,
                      std::map<std::string, double>& scalars) const override;
    void import_state(const std::map<std::string, Vector>& arrays,
                      const std::map<std::string, double>& scalars) override;

private:
    BaselineConfig cfg_;
    std::vector<Vector> points_;
    Vector alpha_;
    double rho_ = 0.0;
    double gamma_ = 1.0;
    Vector val_values_, val_maxima_;
};

// Feed-forward autoencoder over flattened windows; score = squared
// reconstruction error.
class WindowAeDetector final : public DetectorMethod {
public:
    explicit WindowAeDetector(BaselineConfig cfg = {}) : cfg_(cfg) {}
    std::string name() const override { return "ae"; }
    void fit(const std::vector<Matrix>& train, const std::vector<Matrix>& val,
             std::uint64_t seed) override;
    ScoreSeries score_execution(const Matrix& seq,
                                const std::string& id) const override;
    const Vector& validation_values() const override { return val_values_; }
    const Vector& validation_exec_maxima() const override { return val_maxima_; }
    std::uint64_t state_hash() const override;

    double window_score(const Vector& window) const; // squared error
    Vector reconstruct(const Vector& window) const;

    void export_state(std::map<std::string, Vector>& arrays,
                      std::map<std::string, double>& scalars) const override;
    void import_state(const std::map<std::string, Vector>& arrays,
                      const std::map<std::string, double>& scalars) override;

private:
    BaselineConfig cfg_;
    std::vector<DenseParams> layers_;
    Vector val_values_, val_maxima_;
};

// LSTM encoder-decoder over windows, reconstructing in reverse order; score
// is the Mahalanobis distance of the error vector under a diagonal Gaussian
// fitted on validation errors.
class EncDecAdDetector final : public DetectorMethod {
public:
    explicit EncDecAdDetector(BaselineConfig cfg = {}) : cfg_(cfg) {}
    std::string name() const override { return "encdecad"; }
    void fit(const std::vector<Matrix>& train, const std::vector<Matrix>& val,
             std::uint64_t seed) override;
    ScoreSeries score_execution(const Matrix& seq,
                                const std::string& id) const override;
    const Vector& validation_values() const override { return val_values_; }
    const Vector& validation_exec_maxima() const override { return val_maxima_; }
    std::uint64_t state_hash() const override;

    Vector error_vector(const Vector& window) const; // L*D reconstruction error
    const ErrorModel& error_model() const { return error_model_; }

    void export_state(std::map<std::string, Vector>& arrays,
                      std::map<std::string, double>& scalars) const override;
    void import_state(const std::map<std::string, Vector>& arrays,
                      const std::map<std::string, double>& scalars) override;

private:
    BaselineConfig cfg_;
    LstmCellParams enc_, dec_;
    DenseParams head_;
    ErrorModel error_model_;
    Vector val_values_, val_maxima_;
};

std::unique_ptr<DetectorMethod> make_baseline(const std::string& name,
                                              const BaselineConfig& cfg);

// Teacher-forced reconstruction loss for one flattened window with gradients
// accumulated through both LSTMs and the head (the EncDec-AD training step;
// exposed so the backward pass can be checked against finite differences).
double encdecad_window_loss_grad(const Vector& window, std::size_t L,
                                 const LstmCellParams& enc,
                                 const LstmCellParams& dec,
                                 const DenseParams& head, LstmCellParams& genc,
                                 LstmCellParams& gdec, DenseParams& ghead);

} // namespace mvad
