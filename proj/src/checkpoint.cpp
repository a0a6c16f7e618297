#include "mvad/checkpoint.hpp"

#include <json.hpp>

#include <cstring>
#include <fstream>
#include <stdexcept>

using nlohmann::json;

namespace mvad {

namespace {

constexpr int kFormatVersion = 1;

const char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string b64_encode(const Vector& v) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(v.data());
    const std::size_t n = v.size() * sizeof(double);
    std::string out;
    out.reserve((n + 2) / 3 * 4);
    for (std::size_t i = 0; i < n; i += 3) {
        unsigned int b = bytes[i] << 16;
        if (i + 1 < n) b |= bytes[i + 1] << 8;
        if (i + 2 < n) b |= bytes[i + 2];
        out += kB64Alphabet[(b >> 18) & 0x3F];
        out += kB64Alphabet[(b >> 12) & 0x3F];
        out += i + 1 < n ? kB64Alphabet[(b >> 6) & 0x3F] : '=';
        out += i + 2 < n ? kB64Alphabet[b & 0x3F] : '=';
    }
    return out;
}

Vector b64_decode(const std::string& s) {
    static int lut[256];
    static bool init = false;
    if (!init) {
        for (int i = 0; i < 256; ++i) lut[i] = -1;
        for (int i = 0; i < 64; ++i) lut[static_cast<unsigned char>(kB64Alphabet[i])] = i;
        init = true;
    }
    std::vector<unsigned char> bytes;
    bytes.reserve(s.size() / 4 * 3);
    unsigned int acc = 0;
    int bits = 0;
    for (char ch : s) {
        if (ch == '=') break;
        const int v = lut[static_cast<unsigned char>(ch)];
        if (v < 0) throw std::invalid_argument("checkpoint: bad base64");
        acc = (acc << 6) | static_cast<unsigned int>(v);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            bytes.push_back(static_cast<unsigned char>((acc >> bits) & 0xFF));
        }
    }
    if (bytes.size() % sizeof(double) != 0)
        throw std::invalid_argument("checkpoint: blob is not a double array");
    Vector out(bytes.size() / sizeof(double));
    std::memcpy(out.data(), bytes.data(), bytes.size());
    return out;
}

json envelope(const std::string& method) {
    json j;
    j["format_version"] = kFormatVersion;
    j["method"] = method;
    return j;
}

json read_envelope(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    json j;
    in >> j;
    if (!j.contains("format_version") || j["format_version"] != kFormatVersion)
        throw std::runtime_error("unsupported checkpoint version in " + path);
    return j;
}

json norm_to_json(const NormStats& n) {
    return {{"min", b64_encode(n.min)}, {"max", b64_encode(n.max)}};
}

NormStats norm_from_json(const json& j) {
    NormStats n;
    n.min = b64_decode(j.at("min").get<std::string>());
    n.max = b64_decode(j.at("max").get<std::string>());
    return n;
}

} // namespace

void save_checkpoint(const TrainedDetector& det, const std::string& path) {
    json j = envelope("lstm_vae");
    j["config"] = {{"input_dim", det.config.input_dim},
                   {"latent_dim", det.config.latent_dim},
                   {"enc_hidden", det.config.enc_hidden},
                   {"dec_hidden", det.config.dec_hidden},
                   {"sigma_noise", det.config.sigma_noise},
                   {"learning_rate", det.config.learning_rate},
                   {"max_epochs", det.config.max_epochs},
                   {"patience", det.config.patience},
                   {"batch_size", det.config.batch_size},
                   {"grad_clip", det.config.grad_clip},
                   {"improve_tol", det.config.improve_tol},
                   {"prior_start", det.config.prior_start},
                   {"prior_end", det.config.prior_end},
                   {"seed", det.config.seed}};
    j["resample_len"] = det.resample_len;
    j["channels"] = det.channels;
    j["norm"] = norm_to_json(det.norm);
    j["prior"] = {{"p1", b64_encode(det.prior.p1)},
                  {"pT", b64_encode(det.prior.pT)},
                  {"T", det.prior.T}};

    json weights;
    det.params.visit([&](const char* name, const std::vector<double>& v) {
        weights[name] = b64_encode(v);
    });
    j["weights"] = weights;

    json reg;
    reg["kind"] = det.regressor.is_constant() ? "constant" : "svr";
    reg["bias"] = json::array({b64_encode({det.regressor.bias()})});
    reg["gamma"] = json::array({b64_encode({det.regressor.gamma()})});
    if (!det.regressor.is_constant()) {
        Vector flat;
        const auto& sv = det.regressor.support();
        const std::size_t dim = sv.empty() ? det.config.latent_dim : sv[0].size();
        for (const auto& p : sv) flat.insert(flat.end(), p.begin(), p.end());
        reg["support_dim"] = dim;
        reg["support"] = b64_encode(flat);
        reg["coefficients"] = b64_encode(det.regressor.coefficients());
    }
    j["regressor"] = reg;
    j["calibration"] =
        json::array({b64_encode({det.val_score_mean, det.c_default})});

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out << j.dump(2) << "\n";
}

TrainedDetector load_detector_checkpoint(const std::string& path) {
    json j = read_envelope(path);
    if (j.at("method") != "lstm_vae")
        throw std::runtime_error(path + " is not an lstm_vae checkpoint");

    TrainedDetector det;
    const json& c = j.at("config");
    det.config.input_dim = c.at("input_dim").get<std::size_t>();
    det.config.latent_dim = c.at("latent_dim").get<std::size_t>();
    det.config.enc_hidden = c.at("enc_hidden").get<std::size_t>();
    det.config.dec_hidden = c.at("dec_hidden").get<std::size_t>();
    det.config.sigma_noise = c.at("sigma_noise").get<double>();
    det.config.learning_rate = c.at("learning_rate").get<double>();
    det.config.max_epochs = c.at("max_epochs").get<std::size_t>();
    det.config.patience = c.at("patience").get<std::size_t>();
    det.config.batch_size = c.at("batch_size").get<std::size_t>();
    det.config.grad_clip = c.at("grad_clip").get<double>();
    det.config.improve_tol = c.at("improve_tol").get<double>();
    det.config.prior_start = c.at("prior_start").get<double>();
    det.config.prior_end = c.at("prior_end").get<double>();
    det.config.seed = c.at("seed").get<std::uint64_t>();

    det.resample_len = j.at("resample_len").get<std::size_t>();
    det.channels = j.at("channels").get<std::vector<std::string>>();
    det.norm = norm_from_json(j.at("norm"));
    det.prior.p1 = b64_decode(j.at("prior").at("p1").get<std::string>());
    det.prior.pT = b64_decode(j.at("prior").at("pT").get<std::string>());
    det.prior.T = j.at("prior").at("T").get<std::size_t>();

    det.params = LstmVaeParams::shaped_like(det.config);
    det.params.visit([&](const char* name, std::vector<double>& v) {
        const Vector loaded =
            b64_decode(j.at("weights").at(name).get<std::string>());
        if (loaded.size() != v.size())
            throw std::runtime_error(std::string("checkpoint weight shape: ") + name);
        v = loaded;
    });

    const json& reg = j.at("regressor");
    const Vector bias = b64_decode(reg.at("bias")[0].get<std::string>());
    const Vector gamma = b64_decode(reg.at("gamma")[0].get<std::string>());
    if (reg.at("kind") == "constant") {
        det.regressor = ThresholdRegressor::constant(bias.at(0));
    } else {
        const std::size_t dim = reg.at("support_dim").get<std::size_t>();
        const Vector flat = b64_decode(reg.at("support").get<std::string>());
        const Vector coef = b64_decode(reg.at("coefficients").get<std::string>());
        if (dim == 0 || flat.size() % dim != 0)
            throw std::runtime_error("checkpoint: bad support blob");
        std::vector<Vector> sv(flat.size() / dim);
        for (std::size_t i = 0; i < sv.size(); ++i)
            sv[i].assign(flat.begin() + static_cast<long>(i * dim),
                         flat.begin() + static_cast<long>((i + 1) * dim));
        det.regressor =
            ThresholdRegressor::from_parts(std::move(sv), coef, bias.at(0), gamma.at(0));
    }
    const Vector cal = b64_decode(j.at("calibration")[0].get<std::string>());
    det.val_score_mean = cal.at(0);
    det.c_default = cal.at(1);
    return det;
}

std::string checkpoint_kind(const std::string& path) {
    return read_envelope(path).at("method").get<std::string>();
}

void save_baseline_checkpoint(const DetectorMethod& method,
                              const std::vector<std::string>& channels,
                              const NormStats& norm, std::size_t resample_len,
                              std::size_t window, double default_op,
                              const std::string& path) {
    json j = envelope(method.name());
    j["channels"] = channels;
    j["norm"] = norm_to_json(norm);
    j["resample_len"] = resample_len;
    j["window"] = window;
    j["calibration"] = json::array({b64_encode({default_op})});

    std::map<std::string, Vector> arrays;
    std::map<std::string, double> scalars;
    method.export_state(arrays, scalars);
    json ja, js;
    for (const auto& [k, v] : arrays) ja[k] = b64_encode(v);
    for (const auto& [k, v] : scalars) js[k] = v;
    j["arrays"] = ja;
    j["scalars"] = js;

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out << j.dump(2) << "\n";
}

BaselineCheckpoint load_baseline_checkpoint(const std::string& path) {
    json j = read_envelope(path);
    BaselineCheckpoint ck;
    ck.method = j.at("method").get<std::string>();
    ck.channels = j.at("channels").get<std::vector<std::string>>();
    ck.norm = norm_from_json(j.at("norm"));
    ck.resample_len = j.at("resample_len").get<std::size_t>();
    ck.window = j.at("window").get<std::size_t>();
    ck.default_op = b64_decode(j.at("calibration")[0].get<std::string>()).at(0);

    std::map<std::string, Vector> arrays;
    std::map<std::string, double> scalars;
    for (const auto& [k, v] : j.at("arrays").items())
        arrays[k] = b64_decode(v.get<std::string>());
    for (const auto& [k, v] : j.at("scalars").items()) scalars[k] = v.get<double>();

    BaselineConfig cfg;
    cfg.window = ck.window;
    ck.detector = make_baseline(ck.method, cfg);
    ck.detector->import_state(arrays, scalars);
    return ck;
}

} // namespace mvad
