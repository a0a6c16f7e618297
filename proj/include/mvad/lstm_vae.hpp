#pragma once

#include "mvad/adam.hpp"
#include "mvad/dense.hpp"
#include "mvad/lstm_cell.hpp"
#include "mvad/rng.hpp"
#include "mvad/tensor.hpp"

#include <cstdint>
#include <limits>
#include <vector>

namespace mvad {

// Mean + diagonal covariance. Used for the latent posterior, the
// reconstruction distribution, and the prior.
struct DiagGaussian {
    Vector mean;
    Vector var;
};

// Prior mean moves linearly from p1 (step 1) to pT (step T); covariance is
// pinned to the identity.
struct PriorSchedule {
    Vector p1, pT;
    std::size_t T = 1;
};

// mu_p(t) for t in 1..T.
Vector prior_mean(std::size_t t, const PriorSchedule& sched);

// KL( N(q.mean, diag(q.var)) || N(mu_p, I) ), diagonal closed form.
double kl_term(const DiagGaussian& q, const Vector& mu_p);

// Negative log density of x under N(r.mean, diag(r.var)).
double gaussian_nll(const Vector& x, const DiagGaussian& r);

// z = mu + sqrt(var) .* eps with eps ~ N(0, I) drawn from rng.
Vector sample_diag_gaussian(const Vector& mu, const Vector& var, Rng& rng);

// Same map with the standard-normal draws supplied by the caller.
Vector reparameterize(const Vector& mu, const Vector& var, const Vector& eps);

// x + sigma_noise * N(0, I). Training-time input corruption.
Vector corrupt(const Vector& x, double sigma_noise, Rng& rng);

struct LstmVaeConfig {
    std::size_t input_dim = 17; // D
    std::size_t latent_dim = 3; // K
    std::size_t enc_hidden = 32;
    std::size_t dec_hidden = 32;
    double sigma_noise = 0.1;
    double learning_rate = 0.001;
    std::size_t max_epochs = 100;
    std::size_t patience = 4;
    std::size_t batch_size = 16;
    double grad_clip = 5.0;
    double improve_tol = 1e-4; // absolute validation-improvement tolerance
    double prior_start = 0.0;  // p1 = prior_start * ones(K)
    double prior_end = 2.0;    // pT = prior_end * ones(K)
    std::uint64_t seed = 1;

    void validate() const;
    PriorSchedule prior_for(std::size_t T) const;
};

struct LstmVaeParams {
    LstmCellParams enc;       // D -> H_enc
    DenseParams enc_mu;       // H_enc -> K, identity
    DenseParams enc_var;      // H_enc -> K, softplus
    LstmCellParams dec;       // K -> H_dec
    DenseParams dec_mu;       // H_dec -> D, identity
    DenseParams dec_var;      // H_dec -> D, softplus

    static LstmVaeParams create(const LstmVaeConfig& cfg, Rng& rng);
    static LstmVaeParams shaped_like(const LstmVaeConfig& cfg); // zeros

    void zero();
    std::size_t param_count() const;
    std::vector<TensorRef> tensors();

    // Named flat views in a stable order (serialization, hashing).
    template <class F>
    void visit(F&& f) {
        f("enc.W", enc.W.a);
        f("enc.U", enc.U.a);
        f("enc.b", enc.b);
        f("enc_mu.W", enc_mu.W.a);
        f("enc_mu.b", enc_mu.b);
        f("enc_var.W", enc_var.W.a);
        f("enc_var.b", enc_var.b);
        f("dec.W", dec.W.a);
        f("dec.U", dec.U.a);
        f("dec.b", dec.b);
        f("dec_mu.W", dec_mu.W.a);
        f("dec_mu.b", dec_mu.b);
        f("dec_var.W", dec_var.W.a);
        f("dec_var.b", dec_var.b);
    }
    template <class F>
    void visit(F&& f) const {
        const_cast<LstmVaeParams*>(this)->visit(
            [&](const char* name, const std::vector<double>& v) { f(name, v); });
    }
};

// Recurrent state for one stream; must be reset at sequence start.
struct RecurrentState {
    LstmState lstm;
    bool live = false;
    void reset(std::size_t hidden) {
        lstm.reset(hidden);
        live = true;
    }
};

// Posterior q(z_t | x_1..t); advances the encoder state one step.
DiagGaussian encode_step(const Vector& x, const LstmVaeParams& p,
                         RecurrentState& st);

// Reconstruction distribution at the decoder's next step.
DiagGaussian decode_step(const Vector& z, const LstmVaeParams& p,
                         RecurrentState& st);

// -L_dvae summed over the sequence: per step KL(q_t || prior_t) + NLL of the
// clean x_t under the reconstruction from one sampled z_t, with the encoder
// fed corrupted input. States reset internally at t=1.
double sequence_loss(const Matrix& x_seq, const LstmVaeConfig& cfg,
                     const LstmVaeParams& p, const PriorSchedule& prior,
                     Rng& rng);

// Deterministic variant used for validation and scoring-side checks: no
// corruption, z_t = posterior mean.
double sequence_loss_eval(const Matrix& x_seq, const LstmVaeParams& p,
                          const PriorSchedule& prior);

// Forward + full backprop through time with frozen noise draws. eps_x is the
// standard-normal corruption noise (T x D, scaled by sigma_noise inside);
// eps_z the latent draws (T x K). Gradients accumulate into `grads`.
double sequence_loss_grad(const Matrix& x_seq, const LstmVaeConfig& cfg,
                          const LstmVaeParams& p, const PriorSchedule& prior,
                          const Matrix& eps_x, const Matrix& eps_z,
                          LstmVaeParams& grads);

// Early-stopping bookkeeping: stop once the validation loss has not improved
// (by more than `tol`, absolute) for `patience` consecutive epochs.
class EarlyStopper {
public:
    EarlyStopper(std::size_t patience, double tol)
        : patience_(patience), tol_(tol) {}

    // Feed one epoch's validation loss; true means stop after this epoch.
    bool observe(double val_loss) {
        ++epoch_;
        if (val_loss < best_val_ - tol_) {
            best_val_ = val_loss;
            best_epoch_ = epoch_;
            stale_ = 0;
        } else {
            ++stale_;
        }
        return stale_ >= patience_;
    }

    std::size_t best_epoch() const { return best_epoch_; }
    double best_val() const { return best_val_; }
    std::size_t epochs_seen() const { return epoch_; }

private:
    std::size_t patience_;
    double tol_;
    std::size_t epoch_ = 0;
    std::size_t best_epoch_ = 0;
    std::size_t stale_ = 0;
    double best_val_ = std::numeric_limits<double>::infinity();
};

struct EpochStats {
    double train_loss = 0.0; // mean per-sequence -L_dvae over training batches
    double val_loss = 0.0;   // deterministic validation -L_dvae
};

struct TrainHistory {
    std::vector<EpochStats> epochs;
    std::size_t best_epoch = 0; // 1-based
    double best_val = std::numeric_limits<double>::infinity();
    bool early_stopped = false;
};

struct TrainResult {
    LstmVaeParams params; // best-validation checkpoint
    PriorSchedule prior;
    TrainHistory history;
};

// Minimizes mean -L_dvae with Adam (global-norm clipping), evaluates the
// validation set each epoch, and returns the best-validation parameters.
// `warm_start` seeds the weights for the fine-tune phase of two-phase
// training.
TrainResult train_lstm_vae(const std::vector<Matrix>& train_set,
                           const std::vector<Matrix>& val_set,
                           const LstmVaeConfig& cfg,
                           const LstmVaeParams* warm_start = nullptr);

} // namespace mvad
