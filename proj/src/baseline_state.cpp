#include "mvad/baselines.hpp"

#include <bit>
#include <stdexcept>

// Checkpoint state exchange for the baseline detectors. Arrays carry bit-exact
// doubles; integer fields travel as exact small doubles.

namespace mvad {

namespace {

double must_scalar(const std::map<std::string, double>& m, const char* key) {
    auto it = m.find(key);
    if (it == m.end())
        throw std::invalid_argument(std::string("checkpoint: missing scalar ") + key);
    return it->second;
}

const Vector& must_array(const std::map<std::string, Vector>& m, const char* key) {
    auto it = m.find(key);
    if (it == m.end())
        throw std::invalid_argument(std::string("checkpoint: missing array ") + key);
    return it->second;
}

std::size_t as_size(double v) { return static_cast<std::size_t>(v); }

} // namespace

// ---------------------------------------------------------------------------
// RANDOM
// ---------------------------------------------------------------------------

void RandomDetector::export_state(std::map<std::string, Vector>& arrays,
                                  std::map<std::string, double>& scalars) const {
    arrays["seed_bits"] = {std::bit_cast<double>(seed_)};
    arrays["val_values"] = val_values_;
    scalars["window"] = static_cast<double>(cfg_.window);
}

void RandomDetector::import_state(const std::map<std::string, Vector>& arrays,
                                  const std::map<std::string, double>& scalars) {
    seed_ = std::bit_cast<std::uint64_t>(must_array(arrays, "seed_bits").at(0));
    val_values_ = must_array(arrays, "val_values");
    cfg_.window = as_size(must_scalar(scalars, "window"));
}

// ---------------------------------------------------------------------------
// OSVM
// ---------------------------------------------------------------------------

void OsvmDetector::export_state(std::map<std::string, Vector>& arrays,
                                std::map<std::string, double>& scalars) const {
    const std::size_t n = points_.size();
    const std::size_t dim = n ? points_.front().size() : 0;
    Vector flat;
    flat.reserve(n * dim);
    for (const auto& p : points_) flat.insert(flat.end(), p.begin(), p.end());
    arrays["points"] = std::move(flat);
    arrays["alpha"] = alpha_;
    arrays["val_values"] = val_values_;
    arrays["val_maxima"] = val_maxima_;
    scalars["n"] = static_cast<double>(n);
    scalars["dim"] = static_cast<double>(dim);
    scalars["rho"] = rho_;
    scalars["gamma"] = gamma_;
    scalars["window"] = static_cast<double>(cfg_.window);
    scalars["nu"] = cfg_.osvm_nu;
}

void OsvmDetector::import_state(const std::map<std::string, Vector>& arrays,
                                const std::map<std::string, double>& scalars) {
    const std::size_t n = as_size(must_scalar(scalars, "n"));
    const std::size_t dim = as_size(must_scalar(scalars, "dim"));
    const Vector& flat = must_array(arrays, "points");
    if (flat.size() != n * dim)
        throw std::invalid_argument("checkpoint: osvm points size mismatch");
    points_.assign(n, Vector(dim));
    for (std::size_t i = 0; i < n; ++i)
        points_[i].assign(flat.begin() + static_cast<long>(i * dim),
                          flat.begin() + static_cast<long>((i + 1) * dim));
    alpha_ = must_array(arrays, "alpha");
    val_values_ = must_array(arrays, "val_values");
    val_maxima_ = must_array(arrays, "val_maxima");
    rho_ = must_scalar(scalars, "rho");
    gamma_ = must_scalar(scalars, "gamma");
    cfg_.window = as_size(must_scalar(scalars, "window"));
    cfg_.osvm_nu = must_scalar(scalars, "nu");
}

// ---------------------------------------------------------------------------
// AE
// ---------------------------------------------------------------------------

void WindowAeDetector::export_state(std::map<std::string, Vector>& arrays,
                                    std::map<std::string, double>& scalars) const {
    scalars["window"] = static_cast<double>(cfg_.window);
    scalars["layers"] = static_cast<double>(layers_.size());
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const std::string tag = "layer" + std::to_string(l);
        arrays[tag + ".W"] = layers_[l].W.a;
        arrays[tag + ".b"] = layers_[l].b;
        scalars[tag + ".in"] = static_cast<double>(layers_[l].in);
        scalars[tag + ".out"] = static_cast<double>(layers_[l].out);
        scalars[tag + ".act"] = static_cast<double>(layers_[l].act);
    }
    arrays["val_values"] = val_values_;
    arrays["val_maxima"] = val_maxima_;
}

void WindowAeDetector::import_state(const std::map<std::string, Vector>& arrays,
                                    const std::map<std::string, double>& scalars) {
    cfg_.window = as_size(must_scalar(scalars, "window"));
    const std::size_t n_layers = as_size(must_scalar(scalars, "layers"));
    layers_.clear();
    for (std::size_t l = 0; l < n_layers; ++l) {
        const std::string tag = "layer" + std::to_string(l);
        const std::size_t in = as_size(must_scalar(scalars, (tag + ".in").c_str()));
        const std::size_t out = as_size(must_scalar(scalars, (tag + ".out").c_str()));
        const auto act = static_cast<Activation>(
            static_cast<int>(must_scalar(scalars, (tag + ".act").c_str())));
        DenseParams p(in, out, act);
        p.W.a = must_array(arrays, (tag + ".W").c_str());
        p.b = must_array(arrays, (tag + ".b").c_str());
        if (p.W.a.size() != in * out || p.b.size() != out)
            throw std::invalid_argument("checkpoint: ae layer shape mismatch");
        layers_.push_back(std::move(p));
    }
    val_values_ = must_array(arrays, "val_values");
    val_maxima_ = must_array(arrays, "val_maxima");
}

// ---------------------------------------------------------------------------
// EncDec-AD
// ---------------------------------------------------------------------------

void EncDecAdDetector::export_state(std::map<std::string, Vector>& arrays,
                                    std::map<std::string, double>& scalars) const {
    scalars["window"] = static_cast<double>(cfg_.window);
    scalars["input_dim"] = static_cast<double>(enc_.input_size);
    scalars["hidden"] = static_cast<double>(enc_.hidden_size);
    arrays["enc.W"] = enc_.W.a;
    arrays["enc.U"] = enc_.U.a;
    arrays["enc.b"] = enc_.b;
    arrays["dec.W"] = dec_.W.a;
    arrays["dec.U"] = dec_.U.a;
    arrays["dec.b"] = dec_.b;
    arrays["head.W"] = head_.W.a;
    arrays["head.b"] = head_.b;
    arrays["err.mean"] = error_model_.mean;
    arrays["err.var"] = error_model_.var;
    arrays["val_values"] = val_values_;
    arrays["val_maxima"] = val_maxima_;
}

void EncDecAdDetector::import_state(const std::map<std::string, Vector>& arrays,
                                    const std::map<std::string, double>& scalars) {
    cfg_.window = as_size(must_scalar(scalars, "window"));
    const std::size_t D = as_size(must_scalar(scalars, "input_dim"));
    const std::size_t H = as_size(must_scalar(scalars, "hidden"));
    enc_ = LstmCellParams(D, H);
    dec_ = LstmCellParams(D, H);
    head_ = DenseParams(H, D, Activation::identity);
    enc_.W.a = must_array(arrays, "enc.W");
    enc_.U.a = must_array(arrays, "enc.U");
    enc_.b = must_array(arrays, "enc.b");
    dec_.W.a = must_array(arrays, "dec.W");
    dec_.U.a = must_array(arrays, "dec.U");
    dec_.b = must_array(arrays, "dec.b");
    head_.W.a = must_array(arrays, "head.W");
    head_.b = must_array(arrays, "head.b");
    error_model_.mean = must_array(arrays, "err.mean");
    error_model_.var = must_array(arrays, "err.var");
    val_values_ = must_array(arrays, "val_values");
    val_maxima_ = must_array(arrays, "val_maxima");
    if (enc_.W.a.size() != 4 * H * D || head_.W.a.size() != H * D)
        throw std::invalid_argument("checkpoint: encdecad shape mismatch");
}

} // namespace mvad
