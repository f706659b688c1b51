#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "layer_eval.hpp"

namespace mmq::io {

using json = nlohmann::ordered_json;

inline std::string fmt17(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    CsvTable& row(const std::vector<double>& values) {
        if (values.size() != header_.size()) throw UsageError("CSV row width does not match header");
        std::vector<std::string> r;
        r.reserve(values.size());
        for (double v : values) r.push_back(fmt17(v));
        rows_.push_back(std::move(r));
        return *this;
    }

    CsvTable& row_text(std::vector<std::string> cells) {
        if (cells.size() != header_.size()) throw UsageError("CSV row width does not match header");
        rows_.push_back(std::move(cells));
        return *this;
    }

    std::string str() const {
        std::string out;
        auto line = [&out](const std::vector<std::string>& cells) {
            for (std::size_t k = 0; k < cells.size(); ++k) {
                if (k) out += ',';
                out += csv_field(cells[k]);
            }
            out += '\n';
        };
        line(header_);
        for (const auto& r : rows_) line(r);
        return out;
    }

    std::size_t size() const { return rows_.size(); }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

// write to a sibling temp file, then rename over the target
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error("cannot open " + tmp.string() + " for writing");
        f << content;
        f.flush();
        if (!f) throw Error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

// json has no inf/nan; those go out as strings
inline json num(double v) {
    if (!std::isfinite(v)) return fmt17(v);
    return v;
}

inline json to_json(const LayerEval& ev, double eps) {
    json j;
    j["tag"] = region_name(ev.tag.region);
    j["nu"] = to_string(ev.nu);
    j["phase_1"] = num(ev.phase_1);
    j["phase_13"] = num(ev.phase_13);
    j["phase_0"] = num(ev.phase_0);
    j["amplitude"] = num(ev.amplitude);
    j["value_log10"] = num(ev.log10_value(eps));
    j["diagnostics"] = ev.diagnostics;
    return j;
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

// flat key=value file; '#' starts a comment
inline std::map<std::string, std::string> read_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw UsageError("cannot read config file " + path.string());
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
    };
    while (std::getline(f, line)) {
        ++lineno;
        if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

} // namespace mmq::io
