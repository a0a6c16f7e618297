#include "mvad/lstm_vae.hpp"

#include "mvad/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mvad {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
} // namespace

Vector prior_mean(std::size_t t, const PriorSchedule& sched) {
    if (t < 1 || t > sched.T)
        throw std::out_of_range("prior_mean: step index outside 1..T");
    const std::size_t K = sched.p1.size();
    require_size(sched.pT, K, "prior_mean: pT");
    if (sched.T == 1) return sched.p1;
    const double w = static_cast<double>(t - 1) / static_cast<double>(sched.T - 1);
    Vector mu(K);
    for (std::size_t i = 0; i < K; ++i)
        mu[i] = sched.p1[i] + w * (sched.pT[i] - sched.p1[i]);
    return mu;
}

double kl_term(const DiagGaussian& q, const Vector& mu_p) {
    const std::size_t K = q.mean.size();
    require_size(q.var, K, "kl_term: var");
    require_size(mu_p, K, "kl_term: mu_p");
    double tr = 0.0, gap = 0.0, logdet = 0.0;
    for (std::size_t i = 0; i < K; ++i) {
        if (!(q.var[i] > 0.0))
            throw std::domain_error("kl_term: non-positive variance");
        tr += q.var[i];
        const double d = mu_p[i] - q.mean[i];
        gap += d * d;
        logdet += std::log(q.var[i]);
    }
    return 0.5 * (tr + gap - static_cast<double>(K) - logdet);
}

double gaussian_nll(const Vector& x, const DiagGaussian& r) {
    const std::size_t D = x.size();
    require_size(r.mean, D, "gaussian_nll: mean");
    require_size(r.var, D, "gaussian_nll: var");
    double logdet = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < D; ++i) {
        if (!(r.var[i] > 0.0))
            throw std::domain_error("gaussian_nll: non-positive variance");
        logdet += std::log(r.var[i]);
        const double d = x[i] - r.mean[i];
        quad += d * d / r.var[i];
    }
    return 0.5 * (logdet + quad + static_cast<double>(D) * kLog2Pi);
}

Vector reparameterize(const Vector& mu, const Vector& var, const Vector& eps) {
    const std::size_t n = mu.size();
    require_size(var, n, "reparameterize: var");
    require_size(eps, n, "reparameterize: eps");
    Vector z(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (var[i] < 0.0)
            throw std::domain_error("reparameterize: negative variance");
        z[i] = mu[i] + std::sqrt(var[i]) * eps[i];
    }
    return z;
}

Vector sample_diag_gaussian(const Vector& mu, const Vector& var, Rng& rng) {
    Vector eps(mu.size());
    for (auto& e : eps) e = rng.normal();
    return reparameterize(mu, var, eps);
}

Vector corrupt(const Vector& x, double sigma_noise, Rng& rng) {
    if (sigma_noise < 0.0)
        throw std::domain_error("corrupt: negative noise scale");
    Vector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = x[i] + sigma_noise * rng.normal();
    return out;
}

void LstmVaeConfig::validate() const {
    if (input_dim < 1) throw std::invalid_argument("config: input_dim >= 1");
    if (latent_dim < 1) throw std::invalid_argument("config: latent_dim >= 1");
    if (enc_hidden < latent_dim || dec_hidden < latent_dim)
        throw std::invalid_argument("config: hidden sizes must be >= latent_dim");
    if (sigma_noise < 0.0) throw std::invalid_argument("config: sigma_noise >= 0");
    if (patience < 1) throw std::invalid_argument("config: patience >= 1");
    if (batch_size < 1) throw std::invalid_argument("config: batch_size >= 1");
    if (max_epochs < 1) throw std::invalid_argument("config: max_epochs >= 1");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("config: learning_rate > 0");
}

PriorSchedule LstmVaeConfig::prior_for(std::size_t T) const {
    PriorSchedule s;
    s.p1.assign(latent_dim, prior_start);
    s.pT.assign(latent_dim, prior_end);
    s.T = T;
    return s;
}

LstmVaeParams LstmVaeParams::create(const LstmVaeConfig& cfg, Rng& rng) {
    cfg.validate();
    LstmVaeParams p;
    p.enc = LstmCellParams(cfg.input_dim, cfg.enc_hidden);
    p.enc_mu = DenseParams(cfg.enc_hidden, cfg.latent_dim, Activation::identity);
    p.enc_var = DenseParams(cfg.enc_hidden, cfg.latent_dim, Activation::softplus);
    p.dec = LstmCellParams(cfg.latent_dim, cfg.dec_hidden);
    p.dec_mu = DenseParams(cfg.dec_hidden, cfg.input_dim, Activation::identity);
    p.dec_var = DenseParams(cfg.dec_hidden, cfg.input_dim, Activation::softplus);
    p.enc.init(rng);
    p.enc_mu.init(rng);
    p.enc_var.init(rng);
    p.dec.init(rng);
    p.dec_mu.init(rng);
    p.dec_var.init(rng);
    return p;
}

LstmVaeParams LstmVaeParams::shaped_like(const LstmVaeConfig& cfg) {
    LstmVaeParams p;
    p.enc = LstmCellParams(cfg.input_dim, cfg.enc_hidden);
    p.enc_mu = DenseParams(cfg.enc_hidden, cfg.latent_dim, Activation::identity);
    p.enc_var = DenseParams(cfg.enc_hidden, cfg.latent_dim, Activation::softplus);
    p.dec = LstmCellParams(cfg.latent_dim, cfg.dec_hidden);
    p.dec_mu = DenseParams(cfg.dec_hidden, cfg.input_dim, Activation::identity);
    p.dec_var = DenseParams(cfg.dec_hidden, cfg.input_dim, Activation::softplus);
    return p;
}

void LstmVaeParams::zero() {
    enc.zero();
    enc_mu.zero();
    enc_var.zero();
    dec.zero();
    dec_mu.zero();
    dec_var.zero();
}

std::size_t LstmVaeParams::param_count() const {
    return enc.param_count() + enc_mu.param_count() + enc_var.param_count() +
           dec.param_count() + dec_mu.param_count() + dec_var.param_count();
}

std::vector<TensorRef> LstmVaeParams::tensors() {
    std::vector<TensorRef> t;
    visit([&](const char*, std::vector<double>& v) {
        t.push_back({v.data(), v.size()});
    });
    return t;
}

DiagGaussian encode_step(const Vector& x, const LstmVaeParams& p,
                         RecurrentState& st) {
    if (!st.live)
        throw std::logic_error("encode_step: state not reset at sequence start");
    lstm_cell_step(x, st.lstm, p.enc);
    DiagGaussian q;
    dense_forward(st.lstm.h, p.enc_mu, q.mean);
    dense_forward(st.lstm.h, p.enc_var, q.var);
    return q;
}

DiagGaussian decode_step(const Vector& z, const LstmVaeParams& p,
                         RecurrentState& st) {
    if (!st.live)
        throw std::logic_error("decode_step: state not reset at sequence start");
    lstm_cell_step(z, st.lstm, p.dec);
    DiagGaussian r;
    dense_forward(st.lstm.h, p.dec_mu, r.mean);
    dense_forward(st.lstm.h, p.dec_var, r.var);
    return r;
}

namespace {

Vector row_of(const Matrix& m, std::size_t r) {
    return Vector(m[r], m[r] + m.cols);
}

} // namespace

double sequence_loss(const Matrix& x_seq, const LstmVaeConfig& cfg,
                     const LstmVaeParams& p, const PriorSchedule& prior,
                     Rng& rng) {
    if (x_seq.rows == 0) throw std::invalid_argument("sequence_loss: empty sequence");
    RecurrentState enc_st, dec_st;
    enc_st.reset(p.enc.hidden_size);
    dec_st.reset(p.dec.hidden_size);
    double loss = 0.0;
    for (std::size_t t = 0; t < x_seq.rows; ++t) {
        const Vector x = row_of(x_seq, t);
        const Vector xc = corrupt(x, cfg.sigma_noise, rng);
        const DiagGaussian q = encode_step(xc, p, enc_st);
        const Vector z = sample_diag_gaussian(q.mean, q.var, rng);
        const DiagGaussian r = decode_step(z, p, dec_st);
        loss += kl_term(q, prior_mean(t + 1, prior)) + gaussian_nll(x, r);
    }
    return loss;
}

double sequence_loss_eval(const Matrix& x_seq, const LstmVaeParams& p,
                          const PriorSchedule& prior) {
    if (x_seq.rows == 0)
        throw std::invalid_argument("sequence_loss_eval: empty sequence");
    RecurrentState enc_st, dec_st;
    enc_st.reset(p.enc.hidden_size);
    dec_st.reset(p.dec.hidden_size);
    double loss = 0.0;
    for (std::size_t t = 0; t < x_seq.rows; ++t) {
        const Vector x = row_of(x_seq, t);
        const DiagGaussian q = encode_step(x, p, enc_st);
        const DiagGaussian r = decode_step(q.mean, p, dec_st);
        loss += kl_term(q, prior_mean(t + 1, prior)) + gaussian_nll(x, r);
    }
    return loss;
}

double sequence_loss_grad(const Matrix& x_seq, const LstmVaeConfig& cfg,
                          const LstmVaeParams& p, const PriorSchedule& prior,
                          const Matrix& eps_x, const Matrix& eps_z,
                          LstmVaeParams& grads) {
    const std::size_t T = x_seq.rows;
    const std::size_t D = x_seq.cols;
    const std::size_t K = p.enc_mu.out;
    const std::size_t He = p.enc.hidden_size;
    const std::size_t Hd = p.dec.hidden_size;
    if (T == 0) throw std::invalid_argument("sequence_loss_grad: empty sequence");
    if (eps_x.rows != T || eps_x.cols != D)
        throw std::invalid_argument("sequence_loss_grad: eps_x shape");
    if (eps_z.rows != T || eps_z.cols != K)
        throw std::invalid_argument("sequence_loss_grad: eps_z shape");

    // ---- forward, caching every step ----
    std::vector<LstmStepCache> enc_cache(T), dec_cache(T);
    std::vector<DenseCache> mu_z_cache(T), var_z_cache(T), mu_x_cache(T),
        var_x_cache(T);
    std::vector<Vector> mu_p(T);

    LstmState enc_st, dec_st;
    enc_st.reset(He);
    dec_st.reset(Hd);

    double loss = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
        Vector x = row_of(x_seq, t);
        Vector xc(D);
        for (std::size_t d = 0; d < D; ++d)
            xc[d] = x[d] + cfg.sigma_noise * eps_x(t, d);

        lstm_cell_step(xc, enc_st, p.enc, &enc_cache[t]);
        Vector mu_z, var_z;
        dense_forward(enc_st.h, p.enc_mu, mu_z, &mu_z_cache[t]);
        dense_forward(enc_st.h, p.enc_var, var_z, &var_z_cache[t]);

        Vector eps(K);
        for (std::size_t i = 0; i < K; ++i) eps[i] = eps_z(t, i);
        Vector z = reparameterize(mu_z, var_z, eps);

        lstm_cell_step(z, dec_st, p.dec, &dec_cache[t]);
        Vector mu_x, var_x;
        dense_forward(dec_st.h, p.dec_mu, mu_x, &mu_x_cache[t]);
        dense_forward(dec_st.h, p.dec_var, var_x, &var_x_cache[t]);

        mu_p[t] = prior_mean(t + 1, prior);
        loss += kl_term({mu_z, var_z}, mu_p[t]) + gaussian_nll(x, {mu_x, var_x});
    }

    // ---- backward through time ----
    Vector dh_enc(He, 0.0), dc_enc(He, 0.0);
    Vector dh_dec(Hd, 0.0), dc_dec(Hd, 0.0);
    Vector dz(K), dxc(D), dh_tmp, dc_tmp;

    for (std::size_t ti = T; ti-- > 0;) {
        const Vector x = row_of(x_seq, ti);
        const Vector& mu_x = mu_x_cache[ti].y;
        const Vector& var_x = var_x_cache[ti].y;

        // d NLL / d mu_x, d NLL / d var_x
        Vector dmu_x(D), dvar_x(D);
        for (std::size_t d = 0; d < D; ++d) {
            const double diff = mu_x[d] - x[d];
            dmu_x[d] = diff / var_x[d];
            dvar_x[d] = 0.5 * (1.0 / var_x[d] - diff * diff / (var_x[d] * var_x[d]));
        }

        Vector dh_dec_local(Hd, 0.0);
        dense_backward(mu_x_cache[ti], p.dec_mu, dmu_x, grads.dec_mu, &dh_dec_local);
        dense_backward(var_x_cache[ti], p.dec_var, dvar_x, grads.dec_var,
                       &dh_dec_local);
        for (std::size_t j = 0; j < Hd; ++j) dh_dec_local[j] += dh_dec[j];

        lstm_cell_backward(dec_cache[ti], p.dec, dh_dec_local, dc_dec, grads.dec,
                           dz, dh_tmp, dc_tmp);
        dh_dec = dh_tmp;
        dc_dec = dc_tmp;

        // Reparameterization: z = mu_z + sqrt(var_z) * eps.
        const Vector& mu_z = mu_z_cache[ti].y;
        const Vector& var_z = var_z_cache[ti].y;
        Vector dmu_z(K), dvar_z(K);
        for (std::size_t i = 0; i < K; ++i) {
            const double e = eps_z(ti, i);
            dmu_z[i] = dz[i];
            dvar_z[i] = dz[i] * e / (2.0 * std::sqrt(var_z[i]));
            // KL term.
            dmu_z[i] += mu_z[i] - mu_p[ti][i];
            dvar_z[i] += 0.5 * (1.0 - 1.0 / var_z[i]);
        }

        Vector dh_enc_local(He, 0.0);
        dense_backward(mu_z_cache[ti], p.enc_mu, dmu_z, grads.enc_mu, &dh_enc_local);
        dense_backward(var_z_cache[ti], p.enc_var, dvar_z, grads.enc_var,
                       &dh_enc_local);
        for (std::size_t j = 0; j < He; ++j) dh_enc_local[j] += dh_enc[j];

        lstm_cell_backward(enc_cache[ti], p.enc, dh_enc_local, dc_enc, grads.enc,
                           dxc, dh_tmp, dc_tmp);
        dh_enc = dh_tmp;
        dc_enc = dc_tmp;
    }
    return loss;
}

TrainResult train_lstm_vae(const std::vector<Matrix>& train_set,
                           const std::vector<Matrix>& val_set,
                           const LstmVaeConfig& cfg,
                           const LstmVaeParams* warm_start) {
    cfg.validate();
    if (train_set.empty() || val_set.empty())
        throw std::invalid_argument("train_lstm_vae: empty dataset");
    const std::size_t T = train_set.front().rows;
    const std::size_t D = cfg.input_dim;
    auto check_seq = [&](const Matrix& m) {
        if (m.rows != T)
            throw std::invalid_argument("train_lstm_vae: non-uniform sequence length");
        if (m.cols != D)
            throw std::invalid_argument("train_lstm_vae: channel count mismatch");
    };
    for (const auto& m : train_set) check_seq(m);
    for (const auto& m : val_set) check_seq(m);

    const PriorSchedule prior = cfg.prior_for(T);
    Rng root(cfg.seed);
    Rng init_rng = root.fork(0);
    Rng noise_rng = root.fork(1);
    Rng shuffle_rng = root.fork(2);

    LstmVaeParams params =
        warm_start ? *warm_start : LstmVaeParams::create(cfg, init_rng);
    LstmVaeParams grads = LstmVaeParams::shaped_like(cfg);
    auto param_refs = params.tensors();
    auto grad_refs = grads.tensors();

    Adam opt(total_size(param_refs),
             AdamConfig{cfg.learning_rate, 0.9, 0.999, 1e-8});
    EarlyStopper stopper(cfg.patience, cfg.improve_tol);

    TrainResult out;
    out.prior = prior;
    out.params = params;

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);

    Matrix eps_x(T, D), eps_z(T, cfg.latent_dim);

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size();
             start += cfg.batch_size) {
            const std::size_t stop =
                std::min(order.size(), start + cfg.batch_size);
            grads.zero();
            double batch_loss = 0.0;
            for (std::size_t bi = start; bi < stop; ++bi) {
                for (auto& e : eps_x.a) e = noise_rng.normal();
                for (auto& e : eps_z.a) e = noise_rng.normal();
                batch_loss += sequence_loss_grad(train_set[order[bi]], cfg,
                                                 params, prior, eps_x, eps_z,
                                                 grads);
            }
            const double inv = 1.0 / static_cast<double>(stop - start);
            for (auto& g : grad_refs) kernels::active().scale(inv, g.data, g.size);
            clip_global_norm(grad_refs, cfg.grad_clip);
            opt.step(param_refs, grad_refs);
            epoch_loss += batch_loss;
        }

        double val_loss = 0.0;
        for (const auto& m : val_set)
            val_loss += sequence_loss_eval(m, params, prior);
        val_loss /= static_cast<double>(val_set.size());

        out.history.epochs.push_back(
            {epoch_loss / static_cast<double>(train_set.size()), val_loss});

        const bool stop = stopper.observe(val_loss);
        if (stopper.best_epoch() == epoch) out.params = params;
        if (stop) {
            out.history.early_stopped = true;
            break;
        }
    }
    out.history.best_epoch = stopper.best_epoch();
    out.history.best_val = stopper.best_val();
    return out;
}

} // namespace mvad
