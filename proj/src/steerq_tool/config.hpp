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
 * @file config.hpp
 * Experiment configuration: a flat key = value file with [sections].
 * Comments start with '#'. Lists are comma separated; numeric lists also
 * accept start:stop:step ranges. Every error names the offending line.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "steerq/errors.hpp"
#include "steerq/rng.hpp"
#include "steerq/state_vector.hpp"

namespace steerq::tool {

enum class Averaging { Trajectory, Time, Both };

struct ExperimentConfig {
    std::string name = "experiment";
    std::vector<int> sizes{6, 8, 10, 12, 14, 16};
    std::vector<double> rates{0.0, 0.05, 0.1, 0.15, 0.2, 0.3, 0.5};
    int cycles = 0;   // 0: 3L
    int burn_in = -1; // -1: 2L
    int targets = 50;
    int runs = 1000;
    std::vector<int> subsystems; // empty: 1 .. L/2
    std::uint64_t seed = 0;
    bool has_seed = false;
    Averaging averaging = Averaging::Trajectory;
    std::string output = "steerq-out";
    unsigned threads = 1;

    bool unbiased = true;
    int cv_length = 0;
    int cv_j = 1;
    double entropy_slope = 0.92;
    double p_c = 0.14;
    double nu = 1.3;

    double window = 0.05;
    int num_x = 101;
    bool weighted = false;
    bool odd_half_only = false;
    std::string quantity = "sector0"; // sector0, postselected or entropy
    double pc_min = 0.10, pc_max = 0.20, pc_step = 0.0025;
    double nu_min = 0.9, nu_max = 1.8, nu_step = 0.025;

    int timeevo_size = 12;
    double timeevo_rate = 0.0;
    int timeevo_configs = 100;
    int timeevo_cycles = 24;

    [[nodiscard]] int cycles_for(int L) const { return cycles > 0 ? cycles : 3 * L; }
    [[nodiscard]] int burn_in_for(int L) const { return burn_in >= 0 ? burn_in : 2 * L; }
    [[nodiscard]] std::vector<int> subsystems_for(int L) const {
        if (!subsystems.empty()) {
            return subsystems;
        }
        std::vector<int> out;
        for (int ls = 1; ls <= L / 2; ++ls) {
            out.push_back(ls);
        }
        return out;
    }
};

[[nodiscard]] inline const char *to_string(Averaging a) {
    switch (a) {
    case Averaging::Time:
        return "time";
    case Averaging::Both:
        return "both";
    default:
        return "trajectory";
    }
}

namespace config_detail {

inline std::string trim(const std::string &s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return "";
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string &s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        out.push_back(trim(item));
    }
    return out;
}

inline double to_double(const std::string &v, int line) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size() || !std::isfinite(d)) {
            throw std::invalid_argument(v);
        }
        return d;
    } catch (const std::exception &) {
        throw ConfigError("expected a number, got '" + v + "'", line);
    }
}

inline long long to_int(const std::string &v, int line) {
    try {
        std::size_t used = 0;
        const long long i = std::stoll(v, &used);
        if (used != v.size()) {
            throw std::invalid_argument(v);
        }
        return i;
    } catch (const std::exception &) {
        throw ConfigError("expected an integer, got '" + v + "'", line);
    }
}

inline std::uint64_t to_u64(const std::string &v, int line) {
    try {
        std::size_t used = 0;
        if (!v.empty() && v[0] == '-') {
            throw std::invalid_argument(v);
        }
        const unsigned long long i = std::stoull(v, &used, 0);
        if (used != v.size()) {
            throw std::invalid_argument(v);
        }
        return i;
    } catch (const std::exception &) {
        throw ConfigError("expected a non-negative integer, got '" + v + "'", line);
    }
}

inline bool to_bool(const std::string &v, int line) {
    if (v == "true" || v == "yes" || v == "1") {
        return true;
    }
    if (v == "false" || v == "no" || v == "0") {
        return false;
    }
    throw ConfigError("expected true or false, got '" + v + "'", line);
}

// Comma list of numbers; an item a:b:s expands to a, a+s, ... <= b.
inline std::vector<double> to_doubles(const std::string &v, int line) {
    std::vector<double> out;
    for (const auto &item : split(v, ',')) {
        if (item.empty()) {
            throw ConfigError("empty list item in '" + v + "'", line);
        }
        if (item.find(':') != std::string::npos) {
            const auto parts = split(item, ':');
            if (parts.size() != 3) {
                throw ConfigError("range must be start:stop:step, got '" + item + "'", line);
            }
            const double a = to_double(parts[0], line), b = to_double(parts[1], line),
                         s = to_double(parts[2], line);
            if (!(s > 0.0) || b < a) {
                throw ConfigError("range needs step > 0 and stop >= start", line);
            }
            const auto n = static_cast<long long>(std::floor((b - a) / s + 1e-9));
            for (long long i = 0; i <= n; ++i) {
                out.push_back(a + static_cast<double>(i) * s);
            }
        } else {
            out.push_back(to_double(item, line));
        }
    }
    return out;
}

inline std::vector<int> to_ints(const std::string &v, int line) {
    std::vector<int> out;
    for (double d : to_doubles(v, line)) {
        if (d != std::floor(d)) {
            throw ConfigError("expected integers in '" + v + "'", line);
        }
        out.push_back(static_cast<int>(d));
    }
    return out;
}

} // namespace config_detail

/// Parse configuration text. A seed is mandatory unless the caller supplies one.
[[nodiscard]] inline ExperimentConfig parse_config(const std::string &text,
                                                   bool require_seed = true) {
    using namespace config_detail;
    ExperimentConfig c;
    std::string section;
    std::map<std::string, int> seen;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    int rates_line = 0, sizes_line = 0, subsystems_line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (body.empty()) {
            continue;
        }
        if (body.front() == '[') {
            if (body.back() != ']') {
                throw ConfigError("unterminated section header", line);
            }
            section = trim(body.substr(1, body.size() - 2));
            if (section != "experiment" && section != "estimator" && section != "collapse" &&
                section != "timeevo") {
                throw ConfigError("unknown section [" + section + "]", line);
            }
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("expected key = value", line);
        }
        if (section.empty()) {
            throw ConfigError("key outside of any section", line);
        }
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (value.empty()) {
            throw ConfigError("missing value for '" + key + "'", line);
        }
        const std::string full = section + "." + key;
        if (seen.count(full)) {
            throw ConfigError("duplicate key '" + key + "' (first set on line " +
                                  std::to_string(seen[full]) + ")",
                              line);
        }
        seen[full] = line;

        if (full == "experiment.name") {
            c.name = value;
        } else if (full == "experiment.sizes") {
            c.sizes = to_ints(value, line);
            sizes_line = line;
        } else if (full == "experiment.rates") {
            c.rates = to_doubles(value, line);
            rates_line = line;
        } else if (full == "experiment.cycles") {
            c.cycles = static_cast<int>(to_int(value, line));
            if (c.cycles < 0) {
                throw ConfigError("cycles must be >= 0 (0 means 3L)", line);
            }
        } else if (full == "experiment.burn_in") {
            c.burn_in = static_cast<int>(to_int(value, line));
            if (c.burn_in < -1) {
                throw ConfigError("burn_in must be >= 0, or -1 for 2L", line);
            }
        } else if (full == "experiment.targets") {
            c.targets = static_cast<int>(to_int(value, line));
            if (c.targets < 1) {
                throw ConfigError("targets must be >= 1", line);
            }
        } else if (full == "experiment.runs") {
            c.runs = static_cast<int>(to_int(value, line));
            if (c.runs < 1) {
                throw ConfigError("runs must be >= 1", line);
            }
        } else if (full == "experiment.subsystems") {
            if (value != "all") {
                c.subsystems = to_ints(value, line);
            }
            subsystems_line = line;
        } else if (full == "experiment.seed") {
            c.seed = to_u64(value, line);
            c.has_seed = true;
        } else if (full == "experiment.averaging") {
            if (value == "trajectory") {
                c.averaging = Averaging::Trajectory;
            } else if (value == "time") {
                c.averaging = Averaging::Time;
            } else if (value == "both") {
                c.averaging = Averaging::Both;
            } else {
                throw ConfigError("averaging must be trajectory, time or both", line);
            }
        } else if (full == "experiment.output") {
            c.output = value;
        } else if (full == "experiment.threads") {
            c.threads = static_cast<unsigned>(std::max<long long>(1, to_int(value, line)));
        } else if (full == "estimator.unbiased") {
            c.unbiased = to_bool(value, line);
        } else if (full == "estimator.cv_length") {
            c.cv_length = static_cast<int>(to_int(value, line));
            if (c.cv_length < 0 || c.cv_length % 2 != 0) {
                throw ConfigError("cv_length must be 0 or a positive even integer", line);
            }
        } else if (full == "estimator.cv_j") {
            c.cv_j = static_cast<int>(to_int(value, line));
            if (c.cv_j < 1 || c.cv_j % 2 == 0) {
                throw ConfigError("cv_j must be a positive odd integer", line);
            }
        } else if (full == "estimator.entropy_slope") {
            c.entropy_slope = to_double(value, line);
        } else if (full == "estimator.p_c") {
            c.p_c = to_double(value, line);
        } else if (full == "estimator.nu") {
            c.nu = to_double(value, line);
            if (!(c.nu > 0.0)) {
                throw ConfigError("nu must be positive", line);
            }
        } else if (full == "collapse.window") {
            c.window = to_double(value, line);
            if (!(c.window > 0.0)) {
                throw ConfigError("window must be positive", line);
            }
        } else if (full == "collapse.num_x") {
            c.num_x = static_cast<int>(to_int(value, line));
            if (c.num_x < 2) {
                throw ConfigError("num_x must be >= 2", line);
            }
        } else if (full == "collapse.weighted") {
            c.weighted = to_bool(value, line);
        } else if (full == "collapse.odd_half_only") {
            c.odd_half_only = to_bool(value, line);
        } else if (full == "collapse.quantity") {
            if (value != "sector0" && value != "postselected" && value != "entropy") {
                throw ConfigError("quantity must be sector0, postselected or entropy", line);
            }
            c.quantity = value;
        } else if (full == "collapse.p_c_range" || full == "collapse.nu_range") {
            const auto parts = split(value, ':');
            if (parts.size() != 3) {
                throw ConfigError("range must be start:stop:step", line);
            }
            const double a = to_double(parts[0], line), b = to_double(parts[1], line),
                         s = to_double(parts[2], line);
            if (!(s > 0.0) || b < a) {
                throw ConfigError("range needs step > 0 and stop >= start", line);
            }
            if (key == "p_c_range") {
                c.pc_min = a, c.pc_max = b, c.pc_step = s;
            } else {
                c.nu_min = a, c.nu_max = b, c.nu_step = s;
            }
        } else if (full == "timeevo.size") {
            c.timeevo_size = static_cast<int>(to_int(value, line));
            if (c.timeevo_size % 4 != 0 || c.timeevo_size < 4 ||
                c.timeevo_size > kDefaultMaxQubits) {
                throw ConfigError("timeevo size must be a multiple of 4 in [4, 24]", line);
            }
        } else if (full == "timeevo.rate") {
            c.timeevo_rate = to_double(value, line);
            if (c.timeevo_rate < 0.0 || c.timeevo_rate > 1.0) {
                throw ConfigError("rate must lie in [0, 1]", line);
            }
        } else if (full == "timeevo.configs") {
            c.timeevo_configs = static_cast<int>(to_int(value, line));
            if (c.timeevo_configs < 1) {
                throw ConfigError("configs must be >= 1", line);
            }
        } else if (full == "timeevo.cycles") {
            c.timeevo_cycles = static_cast<int>(to_int(value, line));
            if (c.timeevo_cycles < 1) {
                throw ConfigError("cycles must be >= 1", line);
            }
        } else {
            throw ConfigError("unknown key '" + key + "' in [" + section + "]", line);
        }
    }

    if (require_seed && !c.has_seed) {
        throw ConfigError("experiment.seed is required (runs are never seeded from the clock)");
    }
    if (c.sizes.empty()) {
        throw ConfigError("sizes must not be empty", sizes_line);
    }
    for (int L : c.sizes) {
        if (L < 4 || L % 2 != 0 || L > kDefaultMaxQubits) {
            throw ConfigError("size " + std::to_string(L) + " must be even and in [4, " +
                                  std::to_string(kDefaultMaxQubits) + "]",
                              sizes_line);
        }
    }
    if (c.rates.empty()) {
        throw ConfigError("rates must not be empty", rates_line);
    }
    for (std::size_t i = 0; i < c.rates.size(); ++i) {
        if (c.rates[i] < 0.0 || c.rates[i] > 1.0) {
            throw ConfigError("rate " + std::to_string(c.rates[i]) + " outside [0, 1]",
                              rates_line);
        }
        if (i > 0 && !(c.rates[i] > c.rates[i - 1])) {
            throw ConfigError("rates must be strictly increasing", rates_line);
        }
    }
    for (int ls : c.subsystems) {
        for (int L : c.sizes) {
            if (ls < 1 || ls >= L) {
                throw ConfigError("subsystem length " + std::to_string(ls) +
                                      " outside [1, L-1] for L=" + std::to_string(L),
                                  subsystems_line);
            }
        }
    }
    return c;
}

[[nodiscard]] inline ExperimentConfig load_config(const std::string &path,
                                                  bool require_seed = true) {
    std::ifstream f(path);
    if (!f) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str(), require_seed);
}

/// Canonical dump; its hash identifies the configuration in every output.
[[nodiscard]] inline std::string canonical(const ExperimentConfig &c) {
    std::ostringstream os;
    os.precision(17);
    const auto list = [&](const auto &v) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            os << (i ? "," : "") << v[i];
        }
        os << '\n';
    };
    os << "name=" << c.name << "\nsizes=";
    list(c.sizes);
    os << "rates=";
    list(c.rates);
    os << "cycles=" << c.cycles << "\nburn_in=" << c.burn_in << "\ntargets=" << c.targets
       << "\nruns=" << c.runs << "\nsubsystems=";
    list(c.subsystems);
    os << "seed=" << c.seed << "\naveraging=" << to_string(c.averaging)
       << "\nunbiased=" << c.unbiased << "\ncv_length=" << c.cv_length << "\ncv_j=" << c.cv_j
       << "\nentropy_slope=" << c.entropy_slope << "\np_c=" << c.p_c << "\nnu=" << c.nu
       << "\nwindow=" << c.window << "\nnum_x=" << c.num_x << "\nweighted=" << c.weighted
       << "\nodd_half_only=" << c.odd_half_only << "\nquantity=" << c.quantity << "\npc=" << c.pc_min << ':' << c.pc_max
       << ':' << c.pc_step << "\nnu_grid=" << c.nu_min << ':' << c.nu_max << ':' << c.nu_step
       << "\ntimeevo=" << c.timeevo_size << ',' << c.timeevo_rate << ',' << c.timeevo_configs
       << ',' << c.timeevo_cycles << '\n';
    return os.str();
}

[[nodiscard]] inline std::string config_hash(const ExperimentConfig &c) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(rng_detail::fnv1a(canonical(c))));
    return buf;
}

/// Template written by `steerq init`; every default spelled out.
[[nodiscard]] inline std::string config_template() {
    return R"(# steerq experiment configuration

[experiment]
name = demo
# even chain lengths, 4..24; c_V needs sizes with both even and odd L/2
sizes = 6, 8, 10, 12, 14, 16
# measurement rates; start:stop:step ranges are allowed
rates = 0.0, 0.05, 0.1, 0.15, 0.2, 0.3, 0.5
# cycles per trajectory; 0 means 3L
cycles = 0
# cycles before time averaging starts; -1 means 2L
burn_in = -1
targets = 50
runs = 1000
# subsystem lengths L_s, or "all" for 1..L/2
subsystems = all
seed = 1
# trajectory, time or both; time and both also read steered runs after
# every cycle past burn-in
averaging = trajectory
output = steerq-out
threads = 1

[estimator]
unbiased = true
# c_V compares half chains of the sizes 4k and 4k - 2j; cv_length is 2k
# 0 picks the largest even 2k <= L/2 for each L, or the largest pair present
cv_length = 0
cv_j = 1
entropy_slope = 0.92
p_c = 0.14
nu = 1.3

[collapse]
window = 0.05
num_x = 101
weighted = false
# keep only sizes whose half-chain length L/2 is odd
odd_half_only = false
# curve family at L_s = L/2: sector0, postselected or entropy
quantity = sector0
p_c_range = 0.10:0.20:0.0025
nu_range = 0.9:1.8:0.025

[timeevo]
size = 12
rate = 0.0
configs = 100
cycles = 24
)";
}

} // namespace steerq::tool
