#include "mvad/benchmark.hpp"

#include "mvad/preprocess.hpp"
#include "mvad/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace fs = std::filesystem;
using nlohmann::json;

namespace mvad {

void BenchmarkConfig::validate() const {
    if (groups < 2)
        throw std::invalid_argument("benchmark: need >= 2 groups for leave-one-group-out");
    if (executions_per_group < 2)
        throw std::invalid_argument("benchmark: need >= 2 executions per group");
    if (!(anomaly_fraction > 0.0 && anomaly_fraction < 1.0))
        throw std::invalid_argument("benchmark: anomaly_fraction must be in (0,1)");
    if (t_raw_min < 4 || t_raw_max < t_raw_min)
        throw std::invalid_argument("benchmark: bad t_raw range");
    if (layout != "17ch" && layout != "4feat")
        throw std::invalid_argument("benchmark: layout must be 17ch or 4feat");
    if (!(rate_hz > 0.0)) throw std::invalid_argument("benchmark: rate_hz > 0");
    if (observation_noise < 0.0)
        throw std::invalid_argument("benchmark: observation_noise >= 0");
}

const Execution* Dataset::find(const std::string& id) const {
    for (const auto& e : executions)
        if (e.id == id) return &e;
    return nullptr;
}

std::vector<std::string> Dataset::group_names() const {
    std::vector<std::string> g;
    for (const auto& e : executions)
        if (std::find(g.begin(), g.end(), e.group) == g.end()) g.push_back(e.group);
    return g;
}

namespace {

// Raised-cosine ramp from 0 at a to 1 at b.
double ramp(double u, double a, double b) {
    if (u <= a) return 0.0;
    if (u >= b) return 1.0;
    const double w = (u - a) / (b - a);
    return 0.5 - 0.5 * std::cos(3.14159265358979323846 * w);
}

// 0 -> 1 -> 0 plateau with cosine shoulders.
double plateau(double u, double up0, double up1, double dn0, double dn1) {
    return ramp(u, up0, up1) * (1.0 - ramp(u, dn0, dn1));
}

double gauss_bump(double u, double center, double width) {
    const double d = (u - center) / width;
    return std::exp(-0.5 * d * d);
}

// Task-level structure shared by every group: the coupling between forces,
// torques, and posture is fixed hardware dynamics.
struct TaskStyle {
    double torque_mix[7];  // coupling of each torque channel to |force|
    double torque_post[7]; // coupling to the spoon trajectory
    double force_dir[3];   // nominal contact-force direction
};

TaskStyle make_task_style(Rng& rng) {
    TaskStyle t;
    for (int j = 0; j < 7; ++j) {
        t.torque_mix[j] = rng.uniform(0.2, 0.8);
        t.torque_post[j] = rng.uniform(-0.4, 0.4);
    }
    t.force_dir[0] = rng.uniform(-0.2, 0.2);
    t.force_dir[1] = rng.uniform(-0.2, 0.2);
    t.force_dir[2] = -(0.8 + 0.2 * rng.uniform());
    return t;
}

// Per-group (per-person) style: timing, amplitudes, and geometry vary; the
// physics does not.
struct GroupStyle {
    double contact_mean; // nominal contact time in [0,1]
    double force_dir[3];
    double force_amp;
    double torque_mix[7];
    double torque_post[7];
    Vector offsets; // per-channel additive offsets
    double mouth[3];
    double spoon_start[3];
};

GroupStyle make_style(const TaskStyle& task, Rng& rng, double scale) {
    GroupStyle g;
    g.contact_mean = 0.48 + scale * rng.uniform(-0.05, 0.05);
    for (int k = 0; k < 3; ++k)
        g.force_dir[k] = task.force_dir[k] + scale * rng.uniform(-0.05, 0.05);
    g.force_amp = 0.7 + scale * rng.uniform(-0.15, 0.15);
    for (int j = 0; j < 7; ++j) {
        g.torque_mix[j] = task.torque_mix[j];
        g.torque_post[j] = task.torque_post[j];
    }
    g.offsets.assign(17, 0.0);
    for (auto& o : g.offsets) o = scale * rng.uniform(-0.05, 0.05);
    for (double& m : g.mouth) m = 0.3 + scale * rng.uniform(-0.08, 0.08);
    for (double& s : g.spoon_start) s = scale * rng.uniform(-0.05, 0.05);
    return g;
}

// Clean 17-channel signal for one execution; `contact` already jittered.
// contact_env receives the per-step contact envelope so observation noise can
// be phase-dependent (the contact phase is inherently messier).
Matrix clean_signal(std::size_t T, const GroupStyle& g, double contact,
                    double amp_jitter, double width_jitter, Rng& rng,
                    Vector& contact_env_out) {
    Matrix m(T, 17);
    contact_env_out.assign(T, 0.0);
    const double up0 = contact - 0.10 * width_jitter;
    const double up1 = contact - 0.02 * width_jitter;
    const double dn0 = contact + 0.06 * width_jitter;
    const double dn1 = contact + 0.14 * width_jitter;
    const double approach0 = 0.10, approach1 = contact - 0.06;
    const double retreat0 = contact + 0.10, retreat1 = 0.92;

    // Two fixed low-frequency wobbles per execution.
    const double ph1 = rng.uniform(0.0, 6.283), ph2 = rng.uniform(0.0, 6.283);

    // Small head sway, shared across mouth coordinates.
    double sway = 0.0;

    for (std::size_t t = 0; t < T; ++t) {
        const double u = static_cast<double>(t) / static_cast<double>(T - 1);
        const double contact_env = plateau(u, up0, up1, dn0, dn1);
        contact_env_out[t] = contact_env;
        const double fmag = g.force_amp * amp_jitter * contact_env *
                            (1.0 + 0.06 * std::sin(25.0 * u + ph1));

        // sound energy: noise floor + contact burst, nonnegative
        m(t, 0) = std::max(
            0.0, 0.03 + 0.22 * amp_jitter * gauss_bump(u, contact, 0.05) +
                     0.02 * std::sin(40.0 * u + ph2) * contact_env);

        // forces
        for (int k = 0; k < 3; ++k) m(t, 1 + k) = g.force_dir[k] * fmag;

        // spoon trajectory: start -> mouth -> start
        const double reach = ramp(u, approach0, approach1) *
                             (1.0 - ramp(u, retreat0, retreat1));
        for (int k = 0; k < 3; ++k) {
            m(t, 11 + k) =
                g.spoon_start[k] + (g.mouth[k] - g.spoon_start[k]) * reach +
                0.01 * std::sin(12.0 * u + ph1 + k);
        }

        // torques: coupled to |force| and to posture (spoon z)
        for (int j = 0; j < 7; ++j) {
            m(t, 4 + j) = g.torque_mix[j] * fmag + g.torque_post[j] * m(t, 13) +
                          0.05 * std::sin(6.0 * u + ph2 + j);
        }

        // mouth position: near-constant with slow sway
        sway = 0.97 * sway + 0.002 * rng.normal();
        for (int k = 0; k < 3; ++k) m(t, 14 + k) = g.mouth[k] + sway * (k == 0 ? 1.0 : 0.6);
    }

    return m;
}

double channel_std(const Matrix& m, std::size_t d, std::size_t t0, std::size_t t1) {
    double s = 0.0, s2 = 0.0;
    const double n = static_cast<double>(t1 - t0);
    for (std::size_t t = t0; t < t1; ++t) {
        s += m(t, d);
        s2 += m(t, d) * m(t, d);
    }
    const double mean = s / n;
    const double var = std::max(0.0, s2 / n - mean * mean);
    return std::sqrt(var);
}

// Injects one anomaly family in place; returns the onset index.
std::size_t inject_anomaly(Matrix& m, const std::string& family,
                           const GroupStyle& g, double contact,
                           double magnitude, Rng& rng) {
    const std::size_t T = m.rows;
    const std::size_t attack = std::max<std::size_t>(4, T / 14); // ~0.5 s

    auto pick_onset = [&](double lo, double hi) {
        lo = std::min(std::max(lo, 0.10), 0.80);
        hi = std::min(std::max(hi, lo + 0.01), 0.85);
        return static_cast<std::size_t>(rng.uniform(lo, hi) *
                                        static_cast<double>(T));
    };
    auto attack_env = [&](std::size_t t, std::size_t onset) {
        if (t < onset) return 0.0;
        const std::size_t dt = t - onset;
        if (dt >= attack) return 1.0;
        return 0.5 - 0.5 * std::cos(3.14159265358979323846 *
                                    static_cast<double>(dt) /
                                    static_cast<double>(attack));
    };

    if (family == "force_bump") {
        // Sustained push along a random direction, coupled into the torques.
        const std::size_t onset = pick_onset(0.25, 0.70);
        double dir[3];
        double n = 0.0;
        for (double& d : dir) {
            d = rng.normal();
            n += d * d;
        }
        n = std::sqrt(n);
        const double amp =
            magnitude * 5.0 *
            std::max({channel_std(m, 1, 0, onset), channel_std(m, 2, 0, onset),
                      channel_std(m, 3, 0, onset), 0.05});
        for (std::size_t t = onset; t < T; ++t) {
            const double env =
                attack_env(t, onset) * (1.0 + 0.08 * std::sin(0.7 * t));
            for (int k = 0; k < 3; ++k) m(t, 1 + k) += dir[k] / n * amp * env;
            for (int j = 0; j < 7; ++j)
                m(t, 4 + j) += g.torque_mix[j] * 0.6 * amp * env;
            m(t, 0) += 0.05 * amp *
                       gauss_bump(static_cast<double>(t),
                                  static_cast<double>(onset + attack), 3.0);
        }
        return onset;
    }
    if (family == "drift") {
        // Offset growing from the onset on the forces, coherently coupled
        // into the torques (a miscalibrating sensor pulls both).
        const std::size_t onset = pick_onset(0.20, 0.50);
        double dir[3];
        for (double& d : dir) d = rng.uniform() < 0.5 ? -1.0 : 1.0;
        const double target =
            magnitude * 3.0 *
            std::max({channel_std(m, 1, 0, onset), channel_std(m, 2, 0, onset),
                      channel_std(m, 3, 0, onset), 0.10});
        for (std::size_t t = onset; t < T; ++t) {
            const double w = static_cast<double>(t - onset) /
                             static_cast<double>(T - onset);
            for (int k = 0; k < 3; ++k) m(t, 1 + k) += dir[k] * target * w;
            for (int j = 0; j < 4; ++j)
                m(t, 4 + j) += g.torque_mix[j] * 0.5 * target * w;
        }
        return onset;
    }
    if (family == "audio_burst") {
        // Environmental noise: repeating loud bursts until near the end.
        const std::size_t onset = pick_onset(0.25, 0.60);
        const double amp =
            magnitude * 5.0 * std::max(channel_std(m, 0, 0, onset), 0.08);
        const std::size_t dur =
            std::min(T - onset, static_cast<std::size_t>(
                                    rng.uniform(0.25, 0.5) *
                                    static_cast<double>(T)));
        for (std::size_t t = onset; t < onset + dur; ++t) {
            const double env =
                0.5 + 0.5 * std::sin(0.9 * static_cast<double>(t - onset));
            m(t, 0) += amp * env * std::fabs(rng.normal());
        }
        return onset;
    }
    if (family == "dropout") {
        // One sensor family holds its reading across the interaction span,
        // then resumes with a step discontinuity.
        const std::size_t onset = pick_onset(contact - 0.12, contact + 0.02);
        static const std::pair<int, int> families[] = {{1, 4}, {4, 11}, {11, 14}};
        const auto [lo, hi] = families[rng.below(3)];
        const std::size_t dur = std::min(
            T - onset, static_cast<std::size_t>(rng.uniform(1.5, 2.5) *
                                                static_cast<double>(T) / 7.0));
        for (int ch = lo; ch < hi; ++ch) {
            const double held = m(onset, ch);
            for (std::size_t t = onset; t < onset + dur; ++t) m(t, ch) = held;
        }
        return onset;
    }
    if (family == "trajectory_deviation") {
        // The spoon veers off its path and recovers; the arm's effort
        // channels do not explain the motion.
        const std::size_t onset = pick_onset(0.25, 0.55);
        const double width = static_cast<double>(T) / 8.0;
        const double center = static_cast<double>(onset) + 1.2 * width;
        for (int k = 0; k < 3; ++k) {
            const double amp =
                magnitude * 4.0 *
                std::max(channel_std(m, 11 + k, 0, onset), 0.12) *
                (rng.uniform() < 0.5 ? -1.0 : 1.0);
            for (std::size_t t = onset; t < T; ++t)
                m(t, 11 + k) +=
                    amp * gauss_bump(static_cast<double>(t), center, width);
        }
        return onset;
    }
    if (family == "freeze") {
        // Early termination: the controller faults mid-task. Efforts and
        // sound fall back to their rest levels over a couple of steps and
        // hold exactly; the arm parks where it was. The mouth stays live.
        const std::size_t onset = pick_onset(contact - 0.06, contact + 0.08);
        const std::size_t fall = std::max<std::size_t>(2, T / 40);
        Vector rest(17, 0.0);
        for (std::size_t d = 0; d < 17; ++d) {
            double acc = 0.0;
            const std::size_t n0 = std::max<std::size_t>(4, T / 20);
            for (std::size_t t = 0; t < n0; ++t) acc += m(t, d);
            rest[d] = acc / static_cast<double>(n0);
        }
        for (std::size_t t = onset; t < T; ++t) {
            const double w =
                t - onset >= fall
                    ? 1.0
                    : static_cast<double>(t - onset) / static_cast<double>(fall);
            // efforts and sound decay to rest, then hold exactly
            for (int ch : {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10}) {
                const double base = (t - onset >= fall) ? rest[ch]
                                                        : m(t, ch);
                m(t, ch) = (1.0 - w) * base + w * rest[ch];
            }
            // the arm parks: spoon holds its onset position exactly
            for (int ch = 11; ch < 14; ++ch) m(t, ch) = m(onset, ch);
            // mouth channels stay as generated (the person keeps moving)
        }
        return onset;
    }
    throw std::invalid_argument("unknown anomaly family: " + family);
}

} // namespace

Dataset generate_benchmark(const BenchmarkConfig& cfg) {
    cfg.validate();
    Dataset ds;
    Rng root(cfg.seed);
    Rng task_rng = root.fork(999);
    const TaskStyle task = make_task_style(task_rng);

    const std::size_t anomalous_per_group = static_cast<std::size_t>(
        std::lround(cfg.anomaly_fraction *
                    static_cast<double>(cfg.executions_per_group)));

    for (std::size_t gi = 0; gi < cfg.groups; ++gi) {
        Rng grng = root.fork(1000 + gi);
        GroupStyle style = make_style(task, grng, cfg.group_scale);
        const std::string gname = "g" + std::to_string(gi + 1);

        // Anomalous slots: deterministic but spread across the group.
        std::vector<bool> is_anom(cfg.executions_per_group, false);
        {
            std::vector<std::size_t> idx(cfg.executions_per_group);
            for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
            grng.shuffle(idx);
            for (std::size_t i = 0; i < anomalous_per_group; ++i) is_anom[idx[i]] = true;
        }

        std::size_t family_cursor = gi; // stagger family cycling across groups
        std::size_t nonanom_count = 0;
        for (std::size_t ei = 0; ei < cfg.executions_per_group; ++ei) {
            Rng erng = root.fork((gi + 1) * 100000 + ei);
            const std::size_t T =
                cfg.t_raw_min + erng.below(cfg.t_raw_max - cfg.t_raw_min + 1);
            const double contact = style.contact_mean + 0.03 * erng.normal();
            const double amp_jitter = 1.0 + 0.10 * erng.normal();
            // How messy this particular bite is; the threshold layer has to
            // absorb this spread, the model cannot predict it.
            const double messiness = erng.uniform(0.6, 1.6);

            Vector contact_env;
            Matrix sig = clean_signal(T, style, contact, amp_jitter, 1.0, erng,
                                      contact_env);

            // Group offsets + observation noise first; the hold-type anomaly
            // families then freeze exactly-constant spans on top. Contact is
            // inherently messier: food and lips perturb the effort and sound
            // channels, so their noise grows with the contact envelope.
            for (std::size_t t = 0; t < T; ++t) {
                const double messy = 1.0 + 3.5 * messiness * contact_env[t];
                const double messy_sound = 1.0 + 1.5 * messiness * contact_env[t];
                for (std::size_t d = 0; d < 17; ++d) {
                    double ns = (d == 0) ? 0.5 * cfg.observation_noise * messy_sound
                                         : cfg.observation_noise;
                    if (d >= 1 && d <= 10) ns *= messy; // forces, torques
                    sig(t, d) += style.offsets[d] + ns * erng.normal();
                }
                sig(t, 0) = std::max(0.0, sig(t, 0)); // sound energy stays nonnegative
            }

            // Ingest convention: every channel except the sound level reports
            // relative to its first reading, so constant per-person geometry
            // and sensor offsets drop out while trajectory shape remains.
            for (std::size_t d = 1; d < 17; ++d) {
                const double first = sig(0, d);
                for (std::size_t t = 0; t < T; ++t) sig(t, d) -= first;
            }

            Execution e;
            e.id = gname + "_e" + std::to_string(ei + 1);
            e.group = gname;
            e.channels = layout_17_channels();
            e.rate_hz = cfg.rate_hz;

            if (is_anom[ei]) {
                const std::string family =
                    anomaly_families()[family_cursor % anomaly_families().size()];
                ++family_cursor;
                const std::size_t onset = inject_anomaly(
                    sig, family, style, contact, cfg.anomaly_magnitude, erng);
                e.anomalous = true;
                e.anomaly_type = family;
                e.onset = static_cast<long>(onset);
            }

            e.signal = std::move(sig);
            if (cfg.layout == "4feat") e = extract_features(e);
            e.validate();

            if (!e.anomalous) {
                // 3-of-4 train / 1-of-4 val split of the non-anomalous pool.
                if (nonanom_count % 4 == 3)
                    ds.val_ids.push_back(e.id);
                else
                    ds.train_ids.push_back(e.id);
                ++nonanom_count;
            }
            ds.executions.push_back(std::move(e));
        }
    }
    return ds;
}

void save_dataset(const Dataset& ds, const std::string& dir,
                  const BenchmarkConfig* provenance) {
    fs::create_directories(dir);
    json manifest;
    manifest["format_version"] = 1;
    json execs = json::array();
    for (const auto& e : ds.executions) {
        const std::string file = e.id + ".csv";
        save_execution(e, (fs::path(dir) / file).string());
        execs.push_back({{"file", file},
                         {"id", e.id},
                         {"group", e.group},
                         {"label", e.anomalous ? "anomalous" : "non_anomalous"},
                         {"type", e.anomaly_type},
                         {"onset", e.onset}});
    }
    manifest["executions"] = execs;
    manifest["splits"] = {{"train", ds.train_ids}, {"val", ds.val_ids}};
    if (provenance) {
        manifest["benchmark_config"] = {
            {"groups", provenance->groups},
            {"executions_per_group", provenance->executions_per_group},
            {"anomaly_fraction", provenance->anomaly_fraction},
            {"t_raw_min", provenance->t_raw_min},
            {"t_raw_max", provenance->t_raw_max},
            {"rate_hz", provenance->rate_hz},
            {"layout", provenance->layout},
            {"observation_noise", provenance->observation_noise},
            {"group_scale", provenance->group_scale},
            {"anomaly_magnitude", provenance->anomaly_magnitude},
            {"seed", provenance->seed}};
    }
    std::ofstream out(fs::path(dir) / "manifest.json");
    if (!out) throw std::runtime_error("cannot write manifest in " + dir);
    out << manifest.dump(2) << "\n";
}

Dataset load_dataset(const std::string& dir) {
    std::ifstream in(fs::path(dir) / "manifest.json");
    if (!in) throw std::runtime_error("no manifest.json in " + dir);
    json manifest;
    in >> manifest;

    Dataset ds;
    for (const auto& je : manifest.at("executions")) {
        const std::string file = je.at("file").get<std::string>();
        Execution e = load_execution((fs::path(dir) / file).string());
        if (e.id != je.at("id").get<std::string>())
            throw std::runtime_error("manifest id mismatch for " + file);
        ds.executions.push_back(std::move(e));
    }
    if (manifest.contains("splits")) {
        for (const auto& v : manifest["splits"].value("train", json::array()))
            ds.train_ids.push_back(v.get<std::string>());
        for (const auto& v : manifest["splits"].value("val", json::array()))
            ds.val_ids.push_back(v.get<std::string>());
    }
    return ds;
}

} // namespace mvad
