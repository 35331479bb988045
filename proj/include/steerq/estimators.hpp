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
 * @file estimators.hpp
 * From steered shots to fluctuation estimates.
 *
 * The pipeline for one (L, p) point:
 *   1. per target, keep the shots that end in the target's total-charge
 *      sector (zero) and take the sample variance of z_{L_s};
 *   2. average those per-target variances over targets (never pool raw
 *      shots across targets);
 *   3. estimate the parasitic volume-law slope c_V from the half-chain values
 *      of two system sizes, one with L/2 even and one with L/2 odd, and
 *      subtract c_V (L_s - 2);
 *   4. blend raw and corrected values with the step G((p - p_c) L^{1/nu}).
 * Within one size the sector-zero variance is symmetric under
 * L_s -> L - L_s, so step 3 has to compare sizes, not subsystems.
 * The entropy is then read off the piecewise-linear fluctuation law.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "steerq/circuit.hpp"
#include "steerq/errors.hpp"
#include "steerq/rng.hpp"

namespace steerq {

/// Shots whose total charge equals `sector`, in their original order.
[[nodiscard]] inline std::vector<ShotRecord> filter_sector(std::span<const ShotRecord> shots,
                                                           int sector) {
    std::vector<ShotRecord> out;
    for (const auto &s : shots) {
        if (s.total_charge == sector) {
            out.push_back(s);
        }
    }
    return out;
}

/// (1/n) sum (z - mean)^2, times n/(n-1) when unbiased.
[[nodiscard]] inline double sample_variance(std::span<const double> values, bool unbiased) {
    const std::size_t n = values.size();
    if (n < (unbiased ? 2U : 1U)) {
        throw InsufficientData("sample_variance: " + std::to_string(n) + " samples, need " +
                               (unbiased ? "2" : "1"));
    }
    // Shifting by the first value keeps constant inputs at exactly zero.
    const double shift = values.front();
    double sum = 0.0;
    for (double v : values) {
        sum += v - shift;
    }
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double v : values) {
        ss += (v - shift - mean) * (v - shift - mean);
    }
    return ss / static_cast<double>(unbiased ? n - 1 : n);
}

[[nodiscard]] inline double sample_variance(std::span<const ShotRecord> shots, int subsystem_size,
                                            bool unbiased) {
    std::vector<double> z;
    z.reserve(shots.size());
    for (const auto &s : shots) {
        z.push_back(s.subsystem_charge(subsystem_size));
    }
    return sample_variance(z, unbiased);
}

struct SectorStats {
    int sector = 0;
    std::size_t count = 0;
    std::vector<int> subsystems;
    std::vector<double> means;
    /// Unbiased when requested and count >= 2; biased otherwise.
    std::vector<double> variances;
};

/// Per-sector sample statistics, sorted by sector.
[[nodiscard]] inline std::vector<SectorStats> sector_statistics(std::span<const ShotRecord> shots,
                                                               std::span<const int> subsystems,
                                                               bool unbiased) {
    std::map<int, std::vector<ShotRecord>> by_sector;
    for (const auto &s : shots) {
        by_sector[s.total_charge].push_back(s);
    }
    std::vector<SectorStats> out;
    for (const auto &[sector, members] : by_sector) {
        SectorStats st;
        st.sector = sector;
        st.count = members.size();
        st.subsystems.assign(subsystems.begin(), subsystems.end());
        for (int ls : subsystems) {
            double m = 0.0;
            for (const auto &s : members) {
                m += s.subsystem_charge(ls);
            }
            st.means.push_back(m / static_cast<double>(members.size()));
            st.variances.push_back(sample_variance(members, ls, unbiased && members.size() >= 2));
        }
        out.push_back(std::move(st));
    }
    return out;
}

struct Estimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t count = 0;
};

/// Mean over targets with standard error std/sqrt(N).
[[nodiscard]] inline Estimate average_over_targets(std::span<const double> per_target) {
    if (per_target.empty()) {
        throw InsufficientData("average_over_targets: no targets");
    }
    Estimate e;
    e.count = per_target.size();
    e.mean = std::accumulate(per_target.begin(), per_target.end(), 0.0) /
             static_cast<double>(e.count);
    if (e.count > 1) {
        e.stderr_ = std::sqrt(sample_variance(per_target, true) / static_cast<double>(e.count));
    }
    return e;
}

/**
 * Variance of all shots pooled across targets. Kept only as a foil: pooling
 * adds the spread of the per-target means to the estimate.
 */
[[nodiscard]] inline double pooled_variance(std::span<const std::vector<ShotRecord>> per_target,
                                            int subsystem_size, bool unbiased) {
    std::vector<ShotRecord> all;
    for (const auto &t : per_target) {
        all.insert(all.end(), t.begin(), t.end());
    }
    return sample_variance(all, subsystem_size, unbiased);
}

/// c_V from the averaged sector-zero fluctuations at L_s = 2k and 2k - j, j odd.
[[nodiscard]] inline double extract_cv(double fluct_even, double fluct_lower, int j) {
    if (j < 1 || j % 2 == 0) {
        throw InvalidArgument("extract_cv: j must be a positive odd integer");
    }
    return (fluct_even - fluct_lower) / static_cast<double>(j + 1);
}

/// Same, looking both lengths up in a half-chain family indexed by L_s = L/2.
[[nodiscard]] inline double extract_cv(const std::map<int, double> &by_length, int even_length,
                                       int j = 1) {
    if (even_length % 2 != 0 || even_length - j < 1) {
        throw InvalidArgument("extract_cv: need an even length 2k with 2k - j >= 1");
    }
    const auto hi = by_length.find(even_length);
    const auto lo = by_length.find(even_length - j);
    if (hi == by_length.end() || lo == by_length.end()) {
        throw InvalidArgument("extract_cv: missing subsystem length " +
                              std::to_string(hi == by_length.end() ? even_length
                                                                   : even_length - j));
    }
    return extract_cv(hi->second, lo->second, j);
}

/// System sizes whose half-chain values enter c_V: upper has L/2 = 2k, lower 2k - j.
struct CvPair {
    int upper = 0;
    int lower = 0;
    int j = 1;
};

/**
 * The c_V pair used for size L: upper half-chain length 2k is the largest
 * even number <= L/2 (or half_length when nonzero), lower is 2k - j. When
 * either size is missing, the largest pair available among `sizes` is used
 * instead, c_V being independent of L.
 */
[[nodiscard]] inline std::optional<CvPair> select_cv_pair(std::span<const int> sizes,
                                                          int num_qubits, int j = 1,
                                                          int half_length = 0) {
    if (j < 1 || j % 2 == 0) {
        throw InvalidArgument("select_cv_pair: j must be a positive odd integer");
    }
    const auto has = [&](int L) { return std::find(sizes.begin(), sizes.end(), L) != sizes.end(); };
    const auto pair_at = [&](int two_k) -> std::optional<CvPair> {
        if (two_k - j < 1 || !has(2 * two_k) || !has(2 * (two_k - j))) {
            return std::nullopt;
        }
        return CvPair{2 * two_k, 2 * (two_k - j), j};
    };
    const int own = half_length != 0 ? half_length : num_qubits / 2 - (num_qubits / 2) % 2;
    if (const auto p = pair_at(own)) {
        return p;
    }
    std::optional<CvPair> best;
    for (int L : sizes) {
        const int h = L / 2;
        if (h % 2 != 0 || (half_length != 0 && h != half_length)) {
            continue;
        }
        const auto p = pair_at(h);
        if (p && (!best || p->upper > best->upper)) {
            best = p;
        }
    }
    return best;
}

/// Area-law corrected fluctuation: raw - c_V (L_s - 2).
[[nodiscard]] constexpr double corrected_fluctuation(double raw, double cv,
                                                     int subsystem_size) noexcept {
    return raw - cv * static_cast<double>(subsystem_size - 2);
}

/// Smooth unit step G(x) = (tanh x + 1) / 2 evaluated at x = (p - p_c) L^{1/nu}.
[[nodiscard]] inline double step_weight(double p, double p_c, double nu, int num_qubits) {
    if (!(nu > 0.0)) {
        throw InvalidArgument("step_weight: nu must be positive");
    }
    const double x = (p - p_c) * std::pow(static_cast<double>(num_qubits), 1.0 / nu);
    return 0.5 * (std::tanh(x) + 1.0);
}

/// raw - G((p - p_c) L^{1/nu}) c_V (L_s - 2).
[[nodiscard]] inline double effective_fluctuation(double raw, double cv, int subsystem_size,
                                                  double p, double p_c, double nu,
                                                  int num_qubits) {
    return raw - step_weight(p, p_c, nu, num_qubits) * cv *
                     static_cast<double>(subsystem_size - 2);
}

inline constexpr double kDefaultEntropySlope = 0.92;

/**
 * Entropy from charge fluctuations: a * v below the knee at v = 2 and
 * 2 ln 2 * v + (2a - 4 ln 2) above it; continuous at the knee.
 */
[[nodiscard]] inline double reconstruct_entropy(double fluctuation,
                                                double a = kDefaultEntropySlope) {
    if (fluctuation < 0.0) {
        throw InvalidArgument("reconstruct_entropy: negative fluctuation");
    }
    constexpr double two_ln2 = 2.0 * std::numbers::ln2;
    if (fluctuation <= 2.0) {
        return a * fluctuation;
    }
    return two_ln2 * fluctuation + (2.0 * a - 2.0 * two_ln2);
}

struct EntropyFit {
    double slope_low = 0.0;  // through the origin, below the knee
    double slope_high = 0.0; // free line above the knee
    double intercept_high = 0.0;
    std::size_t n_low = 0;
    std::size_t n_high = 0;
};

/**
 * Least-squares fit of the two-regime entropy/fluctuation law. Points with
 * fluctuation <= 2 fit S = a v; the rest fit S = b v + c.
 */
[[nodiscard]] inline EntropyFit
fit_entropy_fluctuation_relation(std::span<const std::pair<double, double>> points) {
    if (points.size() < 10) {
        throw FitDegenerate("entropy fit: need at least 10 points, got " +
                            std::to_string(points.size()));
    }
    double sxx_lo = 0, sxy_lo = 0;
    double n_hi = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    EntropyFit fit;
    for (const auto &[v, s] : points) {
        if (v <= 2.0) {
            sxx_lo += v * v;
            sxy_lo += v * s;
            ++fit.n_low;
        } else {
            n_hi += 1;
            sx += v;
            sy += s;
            sxx += v * v;
            sxy += v * s;
            ++fit.n_high;
        }
    }
    const double det = n_hi * sxx - sx * sx;
    if (fit.n_low < 2 || fit.n_high < 2 || !(sxx_lo > 0.0) ||
        !(det > 1e-12 * std::max(1.0, n_hi * sxx))) {
        throw FitDegenerate("entropy fit: points do not span both regimes");
    }
    fit.slope_low = sxy_lo / sxx_lo;
    fit.slope_high = (n_hi * sxy - sx * sy) / det;
    fit.intercept_high = (sy - fit.slope_high * sx) / n_hi;
    return fit;
}

/// Normalized histogram of z_{L_s} from shots; bin k holds z = -L_s + 2k.
[[nodiscard]] inline std::vector<double>
subsystem_charge_histogram(std::span<const ShotRecord> shots, int subsystem_size) {
    std::vector<double> hist(static_cast<std::size_t>(subsystem_size) + 1, 0.0);
    if (shots.empty()) {
        return hist;
    }
    for (const auto &s : shots) {
        hist[static_cast<std::size_t>((s.subsystem_charge(subsystem_size) + subsystem_size) / 2)] +=
            1.0;
    }
    for (auto &h : hist) {
        h /= static_cast<double>(shots.size());
    }
    return hist;
}

[[nodiscard]] inline double total_variation_distance(std::span<const double> a,
                                                     std::span<const double> b) {
    if (a.size() != b.size()) {
        throw InvalidArgument("total_variation_distance: size mismatch");
    }
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d += std::abs(a[i] - b[i]);
    }
    return 0.5 * d;
}

/**
 * Bootstrap standard error of a statistic of N targets. `stat` receives the
 * resampled target indices.
 */
template <class Stat>
[[nodiscard]] double bootstrap_stderr(std::size_t num_targets, Stat &&stat,
                                      std::size_t resamples = 1000, std::uint64_t seed = 0) {
    if (num_targets < 2 || resamples < 2) {
        throw InsufficientData("bootstrap: need at least two targets and two resamples");
    }
    Stream rng(seed, "bootstrap");
    std::vector<std::size_t> idx(num_targets);
    std::vector<double> values;
    values.reserve(resamples);
    for (std::size_t r = 0; r < resamples; ++r) {
        for (auto &i : idx) {
            i = static_cast<std::size_t>(rng.uniform() * static_cast<double>(num_targets));
        }
        values.push_back(stat(std::span<const std::size_t>(idx)));
    }
    return std::sqrt(sample_variance(values, true));
}

// ---------------------------------------------------------------------------
// Per-target summaries and the averaged fluctuation curve.

/// Everything one target contributes at one (L, p).
struct TargetSummary {
    std::size_t shots = 0;
    std::size_t sector0_shots = 0;
    std::vector<int> subsystems;
    std::vector<double> raw;          // full steered ensemble
    std::vector<double> sector0;      // Z_L = 0 filtered; NaN when undetermined
    std::vector<double> postselected; // exact variance of the target state
};

[[nodiscard]] inline TargetSummary summarize_target(std::span<const ShotRecord> shots,
                                                    const StateVector &target_state,
                                                    std::span<const int> subsystems,
                                                    bool unbiased) {
    TargetSummary t;
    t.shots = shots.size();
    t.subsystems.assign(subsystems.begin(), subsystems.end());
    const auto zero = filter_sector(shots, 0);
    t.sector0_shots = zero.size();
    const std::size_t need = unbiased ? 2 : 1;
    for (int ls : subsystems) {
        t.raw.push_back(shots.size() >= need ? sample_variance(shots, ls, unbiased)
                                             : std::numeric_limits<double>::quiet_NaN());
        t.sector0.push_back(zero.size() >= need ? sample_variance(zero, ls, unbiased)
                                                : std::numeric_limits<double>::quiet_NaN());
        t.postselected.push_back(exact_charge_moments(target_state, ls).variance);
    }
    return t;
}

/**
 * Average the summaries of one target taken after successive cycles. Each
 * entry skips the cycles where it is undetermined and stays NaN if all are.
 */
[[nodiscard]] inline TargetSummary time_average(std::span<const TargetSummary> cycles) {
    if (cycles.empty()) {
        throw InsufficientData("time_average: no cycles");
    }
    TargetSummary out;
    out.subsystems = cycles.front().subsystems;
    const std::size_t n = out.subsystems.size();
    const auto mean_of = [&](auto member, std::size_t s) {
        double sum = 0.0;
        std::size_t k = 0;
        for (const auto &c : cycles) {
            const double v = (c.*member)[s];
            if (std::isfinite(v)) {
                sum += v;
                ++k;
            }
        }
        return k ? sum / static_cast<double>(k) : std::numeric_limits<double>::quiet_NaN();
    };
    for (std::size_t s = 0; s < n; ++s) {
        out.raw.push_back(mean_of(&TargetSummary::raw, s));
        out.sector0.push_back(mean_of(&TargetSummary::sector0, s));
        out.postselected.push_back(mean_of(&TargetSummary::postselected, s));
    }
    for (const auto &c : cycles) {
        if (c.subsystems != out.subsystems) {
            throw InvalidArgument("time_average: cycles disagree on subsystem lengths");
        }
        out.shots += c.shots;
        out.sector0_shots += c.sector0_shots;
    }
    return out;
}

struct CurveRow {
    int num_qubits = 0;
    double rate = 0.0;
    int subsystem = 0;
    Estimate raw;
    Estimate sector0;
    Estimate postselected;
    double success_fraction = 0.0;
};

/**
 * Average per-target summaries into one row per subsystem length. Targets
 * without a usable sector-zero variance are skipped for every column so all
 * columns describe the same target set.
 */
[[nodiscard]] inline std::vector<CurveRow> build_curve(int num_qubits, double rate,
                                                       std::span<const TargetSummary> targets) {
    if (targets.empty()) {
        throw InsufficientData("build_curve: no targets");
    }
    const auto &subsystems = targets.front().subsystems;
    std::vector<const TargetSummary *> usable;
    double success = 0.0;
    for (const auto &t : targets) {
        success += t.shots ? static_cast<double>(t.sector0_shots) / static_cast<double>(t.shots) : 0.0;
        const bool ok = std::all_of(t.sector0.begin(), t.sector0.end(),
                                    [](double v) { return std::isfinite(v); });
        if (ok) {
            usable.push_back(&t);
        }
    }
    if (usable.empty()) {
        throw InsufficientData("build_curve: no target has enough sector-zero shots");
    }
    std::vector<CurveRow> rows;
    for (std::size_t s = 0; s < subsystems.size(); ++s) {
        std::vector<double> raw, sec, post;
        for (const auto *t : usable) {
            raw.push_back(t->raw[s]);
            sec.push_back(t->sector0[s]);
            post.push_back(t->postselected[s]);
        }
        CurveRow row;
        row.num_qubits = num_qubits;
        row.rate = rate;
        row.subsystem = subsystems[s];
        row.raw = average_over_targets(raw);
        row.sector0 = average_over_targets(sec);
        row.postselected = average_over_targets(post);
        row.success_fraction = success / static_cast<double>(targets.size());
        rows.push_back(row);
    }
    return rows;
}

/// Trajectory-averaged half-chain values of one system size at one rate.
struct HalfChainPoint {
    Estimate sector0;
    Estimate postselected;
};

struct CorrectedPoint {
    int num_qubits = 0;
    Estimate sector0;
    Estimate cv;
    Estimate corrected;
    Estimate effective;
    Estimate postselected;
};

/**
 * c_V, corrected and effective half-chain values of size L at one rate.
 * Different sizes come from independent targets, so each output is a linear
 * combination of independent estimates and its error adds in quadrature.
 */
[[nodiscard]] inline CorrectedPoint correct_half_chain(double rate,
                                                       const std::map<int, HalfChainPoint> &by_size,
                                                       int num_qubits, const CvPair &pair,
                                                       double p_c, double nu) {
    for (int L : {num_qubits, pair.upper, pair.lower}) {
        if (!by_size.contains(L)) {
            throw InvalidArgument("correct_half_chain: no half-chain values for L=" +
                                  std::to_string(L));
        }
    }
    const double inv = 1.0 / static_cast<double>(pair.j + 1);
    // value and error of sum_L coef_L * sector0_L
    const auto combine = [&](const std::map<int, double> &coef) {
        Estimate e;
        double var = 0.0;
        e.count = std::numeric_limits<std::size_t>::max();
        for (const auto &[L, c] : coef) {
            const auto &x = by_size.at(L).sector0;
            e.mean += c * x.mean;
            var += c * c * x.stderr_ * x.stderr_;
            e.count = std::min(e.count, x.count);
        }
        e.stderr_ = std::sqrt(var);
        return e;
    };
    const double w = static_cast<double>(num_qubits / 2 - 2);
    const double g = step_weight(rate, p_c, nu, num_qubits);
    std::map<int, double> cor{{num_qubits, 1.0}}, eff{{num_qubits, 1.0}};
    cor[pair.upper] -= w * inv;
    cor[pair.lower] += w * inv;
    eff[pair.upper] -= g * w * inv;
    eff[pair.lower] += g * w * inv;
    CorrectedPoint c;
    c.num_qubits = num_qubits;
    c.sector0 = by_size.at(num_qubits).sector0;
    c.cv = combine({{pair.upper, inv}, {pair.lower, -inv}});
    c.corrected = combine(cor);
    c.effective = combine(eff);
    c.postselected = by_size.at(num_qubits).postselected;
    return c;
}

} // namespace steerq
