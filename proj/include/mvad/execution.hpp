#pragma once

#include "mvad/tensor.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mvad {

// One task execution: a T_raw x D signal matrix plus label metadata.
struct Execution {
    std::string id;
    std::string group;
    std::vector<std::string> channels;
    Matrix signal; // T_raw x D, at rate_hz
    double rate_hz = 20.0;
    bool anomalous = false;
    std::string anomaly_type = "-"; // "-" when non-anomalous
    long onset = -1;                // source-rate step index; -1 when none

    std::size_t length() const { return signal.rows; }
    std::size_t dims() const { return signal.cols; }

    // Label/shape invariants; throws std::invalid_argument on violation.
    void validate() const;
};

struct ParseError : std::runtime_error {
    ParseError(const std::string& path, std::size_t line, const std::string& what)
        : std::runtime_error(path + ":" + std::to_string(line) + ": " + what),
          line_number(line) {}
    std::size_t line_number;
};

// Execution CSV: a `# meta:` line, a channel-name header, then one row of
// decimal floats per step. Round-trips doubles exactly.
Execution load_execution(const std::string& path);
void save_execution(const Execution& e, const std::string& path);

// Canonical channel layouts.
const std::vector<std::string>& layout_17_channels();
const std::vector<std::string>& layout_4_features();
bool is_17_channel(const Execution& e);

} // namespace mvad
