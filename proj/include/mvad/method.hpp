#pragma once

#include "mvad/tensor.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace mvad {

// Per-execution anomaly evidence: one value per evaluation point (step or
// window end), each tagged with its 1-based step index. An execution is
// flagged at sensitivity v iff max(values) > v; the first crossing gives the
// detection step.
struct ScoreSeries {
    Vector values;
    std::vector<std::size_t> step_index;

    double maximum() const {
        double m = -1e300;
        for (double v : values) m = m > v ? m : v;
        return m;
    }
    long first_above(double v) const {
        for (std::size_t i = 0; i < values.size(); ++i)
            if (values[i] > v) return static_cast<long>(step_index[i]);
        return -1;
    }
};

// Shared detector interface: fit on non-anomalous data, score executions,
// expose the validation score distribution for the sensitivity sweep. The
// ROC harness treats every method identically through this surface.
class DetectorMethod {
public:
    virtual ~DetectorMethod() = default;

    virtual std::string name() const = 0;

    // `train`/`val` are preprocessed non-anomalous sequences.
    virtual void fit(const std::vector<Matrix>& train,
                     const std::vector<Matrix>& val, std::uint64_t seed) = 0;

    // Per-step or per-window scores for one preprocessed execution. `id`
    // identifies the execution (the data-independent baseline hashes it).
    virtual ScoreSeries score_execution(const Matrix& seq,
                                        const std::string& id) const = 0;

    // All validation point scores (sweep-grid range) and per-execution
    // maxima (default operating point calibration).
    virtual const Vector& validation_values() const = 0;
    virtual const Vector& validation_exec_maxima() const = 0;

    // Fingerprint of the fitted state; test-group perturbations must not
    // change it.
    virtual std::uint64_t state_hash() const = 0;

    // Checkpoint state exchange: arrays hold bit-exact doubles, scalars hold
    // small integers and hyperparameters.
    virtual void export_state(std::map<std::string, Vector>&,
                              std::map<std::string, double>&) const {
        throw std::logic_error(name() + ": checkpointing not supported");
    }
    virtual void import_state(const std::map<std::string, Vector>&,
                              const std::map<std::string, double>&) {
        throw std::logic_error(name() + ": checkpointing not supported");
    }
};

} // namespace mvad
