#include "mvad/execution.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace mvad {

void Execution::validate() const {
    if (channels.size() != signal.cols)
        throw std::invalid_argument("execution " + id +
                                    ": channel names do not match signal width");
    if (!all_finite(signal))
        throw std::invalid_argument("execution " + id + ": non-finite values");
    if (anomalous && onset < 0)
        throw std::invalid_argument("execution " + id +
                                    ": anomalous label requires an onset index");
    if (!anomalous && onset >= 0)
        throw std::invalid_argument("execution " + id +
                                    ": onset given for a non-anomalous execution");
    if (anomalous && static_cast<std::size_t>(onset) >= signal.rows)
        throw std::invalid_argument("execution " + id + ": onset beyond end");
    if (!(rate_hz > 0.0))
        throw std::invalid_argument("execution " + id + ": rate_hz must be > 0");
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    for (auto& s : out) {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
        while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\t'))
            s.pop_back();
    }
    return out;
}

// Parses `k=v` pairs out of the meta line.
std::string meta_field(const std::string& meta, const std::string& key,
                       const std::string& path, std::size_t line_no) {
    const std::string needle = key + "=";
    std::size_t pos = meta.find(needle);
    if (pos == std::string::npos)
        throw ParseError(path, line_no, "missing meta field '" + key + "'");
    pos += needle.size();
    std::size_t end = meta.find_first_of(",", pos);
    std::string v = meta.substr(pos, end == std::string::npos ? end : end - pos);
    while (!v.empty() && (v.back() == ' ' || v.back() == '\r')) v.pop_back();
    while (!v.empty() && v.front() == ' ') v.erase(v.begin());
    return v;
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

Execution load_execution(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open execution file: " + path);

    Execution e;
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) throw ParseError(path, 1, "empty file");
    ++line_no;
    const std::string prefix = "# meta:";
    if (line.rfind(prefix, 0) != 0)
        throw ParseError(path, line_no, "first line must start with '# meta:'");
    const std::string meta = line.substr(prefix.size());

    e.id = meta_field(meta, "id", path, line_no);
    e.group = meta_field(meta, "group", path, line_no);
    const std::string label = meta_field(meta, "label", path, line_no);
    if (label == "anomalous")
        e.anomalous = true;
    else if (label == "non_anomalous")
        e.anomalous = false;
    else
        throw ParseError(path, line_no, "label must be anomalous|non_anomalous");
    e.anomaly_type = meta_field(meta, "type", path, line_no);
    const std::string onset = meta_field(meta, "onset", path, line_no);
    if (onset == "-") {
        e.onset = -1;
    } else {
        try {
            e.onset = std::stol(onset);
        } catch (const std::exception&) {
            throw ParseError(path, line_no, "onset must be an integer or '-'");
        }
    }
    const std::string rate = meta_field(meta, "rate_hz", path, line_no);
    try {
        e.rate_hz = std::stod(rate);
    } catch (const std::exception&) {
        throw ParseError(path, line_no, "rate_hz must be a float");
    }

    if (!std::getline(in, line)) throw ParseError(path, 2, "missing channel header");
    ++line_no;
    e.channels = split_csv(line);
    const std::size_t D = e.channels.size();
    if (D == 0) throw ParseError(path, line_no, "no channels in header");

    std::vector<double> values;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto cells = split_csv(line);
        if (cells.size() != D)
            throw ParseError(path, line_no,
                             "expected " + std::to_string(D) + " columns, got " +
                                 std::to_string(cells.size()));
        for (const auto& c : cells) {
            char* endp = nullptr;
            const double v = std::strtod(c.c_str(), &endp);
            if (endp == c.c_str() || *endp != '\0')
                throw ParseError(path, line_no, "bad float '" + c + "'");
            values.push_back(v);
        }
        ++rows;
    }
    if (rows == 0) throw ParseError(path, line_no, "no data rows");

    e.signal = Matrix(rows, D);
    e.signal.a = std::move(values);
    try {
        e.validate();
    } catch (const std::invalid_argument& err) {
        throw ParseError(path, line_no, err.what());
    }
    return e;
}

void save_execution(const Execution& e, const std::string& path) {
    e.validate();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write execution file: " + path);

    out << "# meta: id=" << e.id << ", group=" << e.group
        << ", label=" << (e.anomalous ? "anomalous" : "non_anomalous")
        << ", type=" << (e.anomaly_type.empty() ? "-" : e.anomaly_type)
        << ", onset=" << (e.onset < 0 ? std::string("-") : std::to_string(e.onset))
        << ", rate_hz=" << fmt_double(e.rate_hz) << "\n";

    for (std::size_t i = 0; i < e.channels.size(); ++i) {
        if (i) out << ",";
        out << e.channels[i];
    }
    out << "\n";

    for (std::size_t t = 0; t < e.signal.rows; ++t) {
        for (std::size_t d = 0; d < e.signal.cols; ++d) {
            if (d) out << ",";
            out << fmt_double(e.signal(t, d));
        }
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

const std::vector<std::string>& layout_17_channels() {
    static const std::vector<std::string> names = {
        "sound_energy",
        "force_x", "force_y", "force_z",
        "torque_1", "torque_2", "torque_3", "torque_4", "torque_5", "torque_6",
        "torque_7",
        "spoon_x", "spoon_y", "spoon_z",
        "mouth_x", "mouth_y", "mouth_z",
    };
    return names;
}

const std::vector<std::string>& layout_4_features() {
    static const std::vector<std::string> names = {
        "sound_energy", "torque_1", "accumulated_force", "spoon_mouth_distance"};
    return names;
}

bool is_17_channel(const Execution& e) {
    return e.channels == layout_17_channels();
}

} // namespace mvad
