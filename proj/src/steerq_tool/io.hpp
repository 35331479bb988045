// Copyright 2026 The steerq Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


/**
 * @file io.hpp
 * On-disk formats: shots and targets as line-delimited JSON, curves as CSV
 * with a single '#' provenance line ahead of the header row.
 */

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "steerq/circuit.hpp"

#ifndef STEERQ_VERSION
#define STEERQ_VERSION "dev"
#endif

namespace steerq::tool {

class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Shots

[[nodiscard]] inline json to_json(const ShotRecord &s) {
    return json{{"run", s.run},
                {"readout", s.readout_string()},
                {"zl", s.total_charge},
                {"flips", s.flips},
                {"t", s.cycle}};
}

[[nodiscard]] inline ShotRecord shot_from_json(const json &j) {
    ShotRecord s;
    s.run = j.at("run").get<std::size_t>();
    const auto bits = j.at("readout").get<std::string>();
    s.num_qubits = static_cast<int>(bits.size());
    for (std::size_t q = 0; q < bits.size(); ++q) {
        if (bits[q] == '1') {
            s.readout |= std::uint64_t{1} << q;
        } else if (bits[q] != '0') {
            throw IoError("shot record: readout must consist of 0 and 1");
        }
    }
    s.total_charge = j.at("zl").get<int>();
    s.flips = j.at("flips").get<int>();
    s.cycle = j.value("t", 0);
    if (s.total_charge != total_charge(s.readout, s.num_qubits)) {
        throw IoError("shot record: zl disagrees with readout");
    }
    return s;
}

// ---------------------------------------------------------------------------
// Targets

[[nodiscard]] inline json to_json(const TargetRecord &t) {
    json series = json::array();
    for (const auto &pt : t.series) {
        series.push_back(json{{"t", pt.cycle},
                              {"svn", pt.entropy_vn},
                              {"s2", pt.entropy_renyi2},
                              {"var", pt.variances}});
    }
    return json{{"L", t.num_qubits},
                {"p", t.rate},
                {"T", t.num_cycles},
                {"burn_in", t.burn_in},
                {"realization_seed", t.realization_seed},
                {"outcome_seed", t.outcome_seed},
                {"outcomes", t.outcomes},
                {"series_subsystems", t.series_subsystems},
                {"series", series}};
}

[[nodiscard]] inline TargetRecord target_from_json(const json &j) {
    TargetRecord t;
    t.num_qubits = j.at("L").get<int>();
    t.rate = j.at("p").get<double>();
    t.num_cycles = j.at("T").get<int>();
    t.burn_in = j.at("burn_in").get<int>();
    t.realization_seed = j.at("realization_seed").get<std::uint64_t>();
    t.outcome_seed = j.at("outcome_seed").get<std::uint64_t>();
    t.outcomes = j.at("outcomes").get<std::vector<int>>();
    t.series_subsystems = j.at("series_subsystems").get<std::vector<int>>();
    for (const auto &e : j.at("series")) {
        SeriesPoint pt;
        pt.cycle = e.at("t").get<int>();
        pt.entropy_vn = e.at("svn").get<double>();
        pt.entropy_renyi2 = e.at("s2").get<double>();
        pt.variances = e.at("var").get<std::vector<double>>();
        t.series.push_back(std::move(pt));
    }
    return t;
}

/// Realization a stored target was drawn on.
[[nodiscard]] inline CircuitRealization realization_of(const TargetRecord &t) {
    return sample_realization(t.num_qubits, t.rate, t.num_cycles, t.burn_in, t.realization_seed);
}

// ---------------------------------------------------------------------------
// JSONL

inline void ensure_parent(const std::filesystem::path &path) {
    std::error_code ec;
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) {
            throw IoError("cannot create directory " + path.parent_path().string() + ": " +
                          ec.message());
        }
    }
}

template <class Range>
void write_jsonl(const std::filesystem::path &path, const Range &records) {
    ensure_parent(path);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
        throw IoError("cannot write " + path.string());
    }
    for (const auto &r : records) {
        f << to_json(r).dump() << '\n';
    }
    if (!f) {
        throw IoError("write failed for " + path.string());
    }
}

template <class T, class Parse>
std::vector<T> read_jsonl(const std::filesystem::path &path, Parse parse) {
    std::ifstream f(path);
    if (!f) {
        throw IoError("cannot read " + path.string());
    }
    std::vector<T> out;
    std::string line;
    int n = 0;
    while (std::getline(f, line)) {
        ++n;
        if (line.empty()) {
            continue;
        }
        try {
            out.push_back(parse(json::parse(line)));
        } catch (const json::exception &e) {
            throw IoError(path.string() + ":" + std::to_string(n) + ": " + e.what());
        } catch (const IoError &e) {
            throw IoError(path.string() + ":" + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

[[nodiscard]] inline std::vector<ShotRecord> read_shots(const std::filesystem::path &path) {
    return read_jsonl<ShotRecord>(path, shot_from_json);
}

[[nodiscard]] inline std::vector<TargetRecord> read_targets(const std::filesystem::path &path) {
    return read_jsonl<TargetRecord>(path, target_from_json);
}

// ---------------------------------------------------------------------------
// CSV

[[nodiscard]] inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

[[nodiscard]] inline std::string fmt(int v) { return std::to_string(v); }
[[nodiscard]] inline std::string fmt(std::size_t v) { return std::to_string(v); }

struct Provenance {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string command;

    [[nodiscard]] std::string line() const {
        return "# steerq " STEERQ_VERSION " config_hash=" + config_hash +
               " seed=" + std::to_string(seed) + " command=" + command;
    }
};

class CsvWriter {
  public:
    CsvWriter(const std::filesystem::path &path, const Provenance &prov,
              const std::vector<std::string> &header)
        : path_(path), width_(header.size()) {
        ensure_parent(path);
        f_.open(path, std::ios::binary | std::ios::trunc);
        if (!f_) {
            throw IoError("cannot write " + path.string());
        }
        f_ << prov.line() << '\n';
        row(header);
    }

    void row(const std::vector<std::string> &fields) {
        if (fields.size() != width_) {
            throw std::logic_error("csv row width mismatch in " + path_.string());
        }
        for (std::size_t i = 0; i < fields.size(); ++i) {
            f_ << (i ? "," : "") << fields[i];
        }
        f_ << '\n';
        if (!f_) {
            throw IoError("write failed for " + path_.string());
        }
    }

  private:
    std::filesystem::path path_;
    std::size_t width_;
    std::ofstream f_;
};

/// CSV table read back by column name; '#' lines are skipped.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    [[nodiscard]] std::size_t column(const std::string &name) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) {
                return i;
            }
        }
        throw IoError("csv: no column '" + name + "'");
    }
    [[nodiscard]] double number(std::size_t row, const std::string &name) const {
        return std::stod(rows.at(row).at(column(name)));
    }
};

[[nodiscard]] inline CsvTable read_csv(const std::filesystem::path &path) {
    std::ifstream f(path);
    if (!f) {
        throw IoError("cannot read " + path.string());
    }
    CsvTable t;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            fields.push_back(cell);
        }
        if (t.header.empty()) {
            t.header = std::move(fields);
        } else {
            if (fields.size() != t.header.size()) {
                throw IoError(path.string() + ": row width differs from header");
            }
            t.rows.push_back(std::move(fields));
        }
    }
    if (t.header.empty()) {
        throw IoError(path.string() + ": missing header row");
    }
    return t;
}

} // namespace steerq::tool
