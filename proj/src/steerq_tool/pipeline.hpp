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
 * @file pipeline.hpp
 * The four data-producing commands. Layout under <output>/<name>/:
 *
 *   L<L>/p<p>/targets.jsonl      one stored target per line
 *   L<L>/p<p>/reference.csv      exact postselected curve of the targets
 *   L<L>/p<p>/shots/target_<j>.jsonl
 *   L<L>/p<p>/curve.csv          steered estimators per subsystem length
 *   analysis/                    effective, entropy, collapse outputs
 *   timeevo.csv
 *
 * Realization, target and run seeds depend on (L, target index) only, so the
 * same seed produces nested measurement sets across the rate grid.
 */

#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "steerq/steerq.hpp"
#include "steerq_tool/config.hpp"
#include "steerq_tool/io.hpp"

namespace steerq::tool {

namespace fs = std::filesystem;

struct RunContext {
    ExperimentConfig config;
    std::ostream *log = &std::cerr;

    [[nodiscard]] fs::path root() const { return fs::path(config.output) / config.name; }
    [[nodiscard]] fs::path point_dir(int L, double p) const {
        char buf[32];
        std::snprintf(buf, sizeof buf, "p%.4f", p);
        return root() / ("L" + std::to_string(L)) / buf;
    }
    [[nodiscard]] Provenance provenance(const std::string &command) const {
        return {config_hash(config), config.seed, command};
    }
    void note(const std::string &msg) const {
        if (log) {
            *log << msg << '\n';
        }
    }
};

[[nodiscard]] inline std::uint64_t realization_seed(std::uint64_t master, int L, std::size_t j) {
    return derive_key(master, "realization/L" + std::to_string(L), j);
}
[[nodiscard]] inline std::uint64_t target_seed(std::uint64_t master, int L, std::size_t j) {
    return derive_key(master, "target/L" + std::to_string(L), j);
}
[[nodiscard]] inline std::uint64_t runs_seed(std::uint64_t master, int L, std::size_t j) {
    return derive_key(master, "runs/L" + std::to_string(L), j);
}

// ---------------------------------------------------------------------------
// simulate

struct ReferenceRow {
    int subsystem = 0;
    Estimate variance;
    Estimate entropy_vn; // half chain
    Estimate entropy_renyi2;
};

namespace pipeline_detail {

// Per-target value of one series column under the averaging mode.
inline double target_value(const TargetRecord &t, Averaging mode,
                           const std::function<double(const SeriesPoint &)> &get,
                           double final_value) {
    if (mode == Averaging::Trajectory) {
        return final_value;
    }
    if (t.series.empty()) {
        throw InsufficientData("time averaging needs cycles > burn_in");
    }
    double s = 0.0;
    for (const auto &pt : t.series) {
        s += get(pt);
    }
    return s / static_cast<double>(t.series.size());
}

// Mean and standard error of a time series of one trajectory.
inline Estimate series_estimate(const TargetRecord &t,
                                const std::function<double(const SeriesPoint &)> &get) {
    if (t.series.empty()) {
        throw InsufficientData("time averaging needs cycles > burn_in");
    }
    std::vector<double> v;
    for (const auto &pt : t.series) {
        v.push_back(get(pt));
    }
    return average_over_targets(v);
}

} // namespace pipeline_detail

/**
 * Reference curve from stored targets and their final states.
 * trajectory: final-cycle values averaged over targets.
 * time: cycle average after burn-in of the first target alone.
 * both: cycle average per target, then averaged over targets.
 */
[[nodiscard]] inline std::vector<ReferenceRow>
reference_curve(const std::vector<TargetRecord> &targets, const std::vector<StateVector> &finals,
                const std::vector<int> &subsystems, Averaging mode) {
    using pipeline_detail::target_value;
    if (targets.empty()) {
        throw InsufficientData("reference: no targets");
    }
    const int L = targets.front().num_qubits;
    std::vector<ReferenceRow> rows;
    for (std::size_t s = 0; s < subsystems.size(); ++s) {
        const int ls = subsystems[s];
        ReferenceRow row;
        row.subsystem = ls;
        const auto var_of = [&](const SeriesPoint &pt) { return pt.variances.at(s); };
        const auto svn_of = [](const SeriesPoint &pt) { return pt.entropy_vn; };
        const auto s2_of = [](const SeriesPoint &pt) { return pt.entropy_renyi2; };
        if (mode == Averaging::Time) {
            row.variance = pipeline_detail::series_estimate(targets.front(), var_of);
            row.entropy_vn = pipeline_detail::series_estimate(targets.front(), svn_of);
            row.entropy_renyi2 = pipeline_detail::series_estimate(targets.front(), s2_of);
        } else {
            std::vector<double> v, e1, e2;
            for (std::size_t k = 0; k < targets.size(); ++k) {
                const auto &st = finals[k];
                v.push_back(target_value(targets[k], mode, var_of,
                                         exact_charge_moments(st, ls).variance));
                e1.push_back(target_value(targets[k], mode, svn_of,
                                          entanglement_entropy(st, L / 2)));
                e2.push_back(target_value(targets[k], mode, s2_of,
                                          entanglement_entropy(st, L / 2, 2)));
            }
            row.variance = average_over_targets(v);
            row.entropy_vn = average_over_targets(e1);
            row.entropy_renyi2 = average_over_targets(e2);
        }
        rows.push_back(row);
    }
    return rows;
}

inline void simulate_point(const RunContext &ctx, int L, double p) {
    const auto &cfg = ctx.config;
    const auto n = static_cast<std::size_t>(cfg.targets);
    const auto subsystems = cfg.subsystems_for(L);
    if (cfg.averaging != Averaging::Trajectory && cfg.cycles_for(L) <= cfg.burn_in_for(L)) {
        throw ConfigError("time averaging needs cycles > burn_in (L=" + std::to_string(L) + ")");
    }
    TargetOptions opt;
    opt.keep_final_state = true;
    opt.record_series = true;
    opt.entropy_subsystem = L / 2;
    opt.charge_subsystems = subsystems;

    std::vector<TargetRecord> targets(n);
    parallel_for(n, cfg.threads, [&](std::size_t j) {
        const auto c = sample_realization(L, p, cfg.cycles_for(L), cfg.burn_in_for(L),
                                          realization_seed(cfg.seed, L, j));
        targets[j] = run_target(c, target_seed(cfg.seed, L, j), opt);
    });
    std::vector<StateVector> finals;
    for (auto &t : targets) {
        finals.push_back(std::move(*t.final_state));
        t.final_state.reset();
    }
    const auto dir = ctx.point_dir(L, p);
    write_jsonl(dir / "targets.jsonl", targets);
    const auto rows = reference_curve(targets, finals, subsystems, cfg.averaging);
    CsvWriter csv(dir / "reference.csv", ctx.provenance("simulate"),
                  {"L", "p", "subsystem", "variance", "variance_se", "entropy_vn",
                   "entropy_vn_se", "entropy_renyi2", "entropy_renyi2_se", "targets"});
    for (const auto &r : rows) {
        csv.row({fmt(L), fmt(p), fmt(r.subsystem), fmt(r.variance.mean),
                 fmt(r.variance.stderr_), fmt(r.entropy_vn.mean), fmt(r.entropy_vn.stderr_),
                 fmt(r.entropy_renyi2.mean), fmt(r.entropy_renyi2.stderr_), fmt(n)});
    }
}

inline void cmd_simulate(const RunContext &ctx) {
    for (int L : ctx.config.sizes) {
        for (double p : ctx.config.rates) {
            ctx.note("simulate L=" + std::to_string(L) + " p=" + fmt(p) + " targets=" +
                     std::to_string(ctx.config.targets));
            simulate_point(ctx, L, p);
        }
    }
}

// ---------------------------------------------------------------------------
// steer

inline std::vector<CurveRow> steer_point(const RunContext &ctx, int L, double p) {
    const auto &cfg = ctx.config;
    const auto dir = ctx.point_dir(L, p);
    if (!fs::exists(dir / "targets.jsonl")) {
        throw IoError("no stored targets at " + (dir / "targets.jsonl").string() +
                      "; run simulate first");
    }
    const auto targets = read_targets(dir / "targets.jsonl");
    const auto subsystems = cfg.subsystems_for(L);
    std::vector<TargetSummary> summaries;
    for (std::size_t j = 0; j < targets.size(); ++j) {
        const auto &t = targets[j];
        if (t.num_qubits != L || t.rate != p) {
            throw IoError("stored target " + std::to_string(j) + " does not match L/p of " +
                          dir.string());
        }
        const auto c = realization_of(t);
        const auto shots_path = dir / "shots" / ("target_" + std::to_string(j) + ".jsonl");
        if (cfg.averaging == Averaging::Trajectory) {
            const StateVector state = replay_target(c, t.outcomes);
            const auto shots = batch_steer(c, t, static_cast<std::size_t>(cfg.runs),
                                           runs_seed(cfg.seed, L, j), cfg.threads);
            write_jsonl(shots_path, shots);
            summaries.push_back(summarize_target(shots, state, subsystems, cfg.unbiased));
            continue;
        }
        // time averaging: target 0 alone, or every target with its own cycle average
        if (cfg.averaging == Averaging::Time && j > 0) {
            break;
        }
        if (c.num_cycles <= c.burn_in) {
            throw InsufficientData("time averaging needs cycles > burn_in");
        }
        const auto states = replay_target_series(c, t.outcomes);
        const auto per_cycle = batch_steer_series(c, t, static_cast<std::size_t>(cfg.runs),
                                                  runs_seed(cfg.seed, L, j), cfg.threads);
        std::vector<ShotRecord> all;
        std::vector<TargetSummary> cycles;
        for (std::size_t k = 0; k < per_cycle.size(); ++k) {
            all.insert(all.end(), per_cycle[k].begin(), per_cycle[k].end());
            cycles.push_back(
                summarize_target(per_cycle[k], states[k], subsystems, cfg.unbiased));
        }
        write_jsonl(shots_path, all);
        summaries.push_back(time_average(cycles));
    }
    const auto rows = build_curve(L, p, summaries);
    std::size_t used = 0;
    for (const auto &s : summaries) {
        used += std::all_of(s.sector0.begin(), s.sector0.end(),
                            [](double v) { return std::isfinite(v); });
    }
    CsvWriter csv(dir / "curve.csv", ctx.provenance("steer"),
                  {"L", "p", "subsystem", "raw", "raw_se", "sector0", "sector0_se",
                   "postselected", "postselected_se", "success_fraction", "targets_used"});
    for (const auto &r : rows) {
        csv.row({fmt(L), fmt(p), fmt(r.subsystem), fmt(r.raw.mean), fmt(r.raw.stderr_),
                 fmt(r.sector0.mean), fmt(r.sector0.stderr_), fmt(r.postselected.mean),
                 fmt(r.postselected.stderr_), fmt(r.success_fraction), fmt(used)});
    }
    return rows;
}

inline void cmd_steer(const RunContext &ctx) {
    for (int L : ctx.config.sizes) {
        for (double p : ctx.config.rates) {
            ctx.note("steer L=" + std::to_string(L) + " p=" + fmt(p) + " runs/target=" +
                     std::to_string(ctx.config.runs));
            (void)steer_point(ctx, L, p);
        }
    }
}

// ---------------------------------------------------------------------------
// analyze

/// Reconstructed entropy and its propagated error; negative input clamps to 0.
struct Reconstruction {
    double entropy = 0.0;
    double stderr_ = 0.0;
};

[[nodiscard]] inline Reconstruction reconstruct(double fluctuation, double se, double slope) {
    const double v = std::max(0.0, fluctuation);
    const double d = v <= 2.0 ? slope : 2.0 * std::numbers::ln2;
    return {reconstruct_entropy(v, slope), d * se};
}

namespace pipeline_detail {

inline std::size_t half_row(const CsvTable &t, int L) {
    const auto col = t.column("subsystem");
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        if (std::stoi(t.rows[i][col]) == L / 2) {
            return i;
        }
    }
    throw InsufficientData("analyze: no half-chain row for L=" + std::to_string(L));
}

} // namespace pipeline_detail

struct AnalysisSummary {
    bool collapsed = false;
    double best_pc = 0.0;
    double best_nu = 0.0;
    double best_cost = 0.0;
};

inline AnalysisSummary cmd_analyze(const RunContext &ctx) {
    const auto &cfg = ctx.config;
    const auto out = ctx.root() / "analysis";

    // Rows keyed by (L, p) so both files come out size-major.
    std::map<std::pair<int, double>, std::vector<std::string>> eff_rows, ent_rows;
    std::vector<std::vector<double>> ys(cfg.sizes.size()), es(cfg.sizes.size());
    for (double p : cfg.rates) {
        std::map<int, HalfChainPoint> half;
        std::map<int, double> raw, raw_se, s_exact, s_exact_se;
        for (std::size_t k = 0; k < cfg.sizes.size(); ++k) {
            const int L = cfg.sizes[k];
            const auto dir = ctx.point_dir(L, p);
            const bool need_curve = cfg.quantity == "sector0";
            const bool have_curve = fs::exists(dir / "curve.csv");
            if (!have_curve && need_curve) {
                throw IoError("missing " + (dir / "curve.csv").string() + "; run steer first");
            }
            const auto ref = read_csv(dir / "reference.csv");
            const auto rh = pipeline_detail::half_row(ref, L);
            s_exact[L] = ref.number(rh, "entropy_vn");
            s_exact_se[L] = ref.number(rh, "entropy_vn_se");
            if (have_curve) {
                const auto curve = read_csv(dir / "curve.csv");
                const auto ch = pipeline_detail::half_row(curve, L);
                const auto n = static_cast<std::size_t>(curve.number(ch, "targets_used"));
                half[L] = {{curve.number(ch, "sector0"), curve.number(ch, "sector0_se"), n},
                           {curve.number(ch, "postselected"), curve.number(ch, "postselected_se"),
                            n}};
                raw[L] = curve.number(ch, "raw");
                raw_se[L] = curve.number(ch, "raw_se");
                if (need_curve) {
                    ys[k].push_back(curve.number(ch, "sector0"));
                    es[k].push_back(curve.number(ch, "sector0_se"));
                }
            }
            if (cfg.quantity == "postselected") {
                ys[k].push_back(ref.number(rh, "variance"));
                es[k].push_back(ref.number(rh, "variance_se"));
            } else if (cfg.quantity == "entropy") {
                ys[k].push_back(ref.number(rh, "entropy_vn"));
                es[k].push_back(ref.number(rh, "entropy_vn_se"));
            }
        }
        if (half.empty()) {
            continue;
        }
        if (half.size() != cfg.sizes.size()) {
            throw IoError("analyze: steered curves missing for some sizes at p=" + fmt(p) +
                          "; run steer first");
        }
        for (int L : cfg.sizes) {
            const auto pair = select_cv_pair(cfg.sizes, L, cfg.cv_j, cfg.cv_length);
            if (!pair) {
                throw InsufficientData(
                    "analyze: no c_V pair; sizes need some L with L/2 even and L - " +
                    std::to_string(2 * cfg.cv_j) + " present");
            }
            const auto c = correct_half_chain(p, half, L, *pair, cfg.p_c, cfg.nu);
            eff_rows[{L, p}] = {fmt(L), fmt(p), fmt(L / 2), fmt(raw[L]), fmt(raw_se[L]),
                                fmt(c.sector0.mean), fmt(c.sector0.stderr_), fmt(c.cv.mean),
                                fmt(c.cv.stderr_), fmt(c.corrected.mean),
                                fmt(c.corrected.stderr_), fmt(c.effective.mean),
                                fmt(c.effective.stderr_), fmt(c.postselected.mean),
                                fmt(c.postselected.stderr_)};
            const auto rec = reconstruct(c.effective.mean, c.effective.stderr_, cfg.entropy_slope);
            ent_rows[{L, p}] = {fmt(L), fmt(p), fmt(L / 2), fmt(c.effective.mean),
                                fmt(c.effective.stderr_), fmt(rec.entropy), fmt(rec.stderr_),
                                fmt(s_exact[L]), fmt(s_exact_se[L])};
        }
    }
    if (!eff_rows.empty()) {
        CsvWriter eff(out / "effective.csv", ctx.provenance("analyze"),
                      {"L", "p", "subsystem", "raw", "raw_se", "sector0", "sector0_se", "cv",
                       "cv_se", "corrected", "corrected_se", "effective", "effective_se",
                       "postselected", "postselected_se"});
        CsvWriter ent(out / "entropy.csv", ctx.provenance("analyze"),
                      {"L", "p", "subsystem", "effective", "effective_se",
                       "entropy_reconstructed", "entropy_reconstructed_se", "entropy_exact",
                       "entropy_exact_se"});
        for (const auto &[key, row] : eff_rows) {
            eff.row(row);
        }
        for (const auto &[key, row] : ent_rows) {
            ent.row(row);
        }
    }

    // Half-chain curve family for the collapse.
    std::vector<int> family_sizes;
    std::vector<std::vector<double>> family, family_err;
    for (std::size_t k = 0; k < cfg.sizes.size(); ++k) {
        const int L = cfg.sizes[k];
        if (cfg.odd_half_only && (L / 2) % 2 == 0) {
            continue;
        }
        family_sizes.push_back(L);
        family.push_back(std::move(ys[k]));
        family_err.push_back(std::move(es[k]));
    }

    AnalysisSummary summary;
    if (family_sizes.size() < 2) {
        ctx.note("analyze: fewer than two sizes selected; collapse skipped");
        return summary;
    }
    CollapseInput in;
    in.p_grid = cfg.rates;
    in.sizes = family_sizes;
    in.values = family;
    in.errors = family_err;
    in.label = cfg.quantity;
    in.window = cfg.window;
    in.num_x = cfg.num_x;
    in.weighted = cfg.weighted;
    GridSpec grid{cfg.pc_min, cfg.pc_max, cfg.pc_step, cfg.nu_min, cfg.nu_max, cfg.nu_step};
    ctx.note("analyze: collapse over " + std::to_string(family_sizes.size()) + " sizes");
    const auto r = grid_search(in, grid, cfg.threads);

    CsvWriter heat(out / "collapse_heatmap.csv", ctx.provenance("analyze"),
                   {"p_c", "nu", "C", "C_inv"});
    for (std::size_t i = 0; i < r.pc_axis.size(); ++i) {
        for (std::size_t j = 0; j < r.nu_axis.size(); ++j) {
            const double c = r.at(i, j);
            const double inv = std::isfinite(c) && c > 0.0
                                   ? 1.0 / c
                                   : (c == 0.0 ? std::numeric_limits<double>::infinity()
                                               : std::numeric_limits<double>::quiet_NaN());
            heat.row({fmt(r.pc_axis[i]), fmt(r.nu_axis[j]), fmt(c), fmt(inv)});
        }
    }
    CsvWriter scat(out / "collapse_scatter.csv", ctx.provenance("analyze"), {"L", "x", "y"});
    for (const auto &pt : r.scatter) {
        scat.row({fmt(pt.size), fmt(pt.x), fmt(pt.y)});
    }
    CsvWriter opt(out / "collapse_optimum.csv", ctx.provenance("analyze"),
                  {"quantity", "p_c", "nu", "C"});
    opt.row({cfg.quantity, fmt(r.best_pc), fmt(r.best_nu), fmt(r.best_cost)});
    summary.collapsed = true;
    summary.best_pc = r.best_pc;
    summary.best_nu = r.best_nu;
    summary.best_cost = r.best_cost;
    return summary;
}

// ---------------------------------------------------------------------------
// timeevo

inline void cmd_timeevo(const RunContext &ctx) {
    const auto &cfg = ctx.config;
    const int L = cfg.timeevo_size;
    CsvWriter csv(ctx.root() / "timeevo.csv", ctx.provenance("timeevo"),
                  {"initial", "cycle", "entropy", "entropy_se", "variance", "variance_se"});
    const std::uint64_t seed = derive_key(cfg.seed, "timeevo", 0);
    for (const auto init : {InitialState::Neel, InitialState::Mirrored}) {
        const char *name = init == InitialState::Neel ? "neel" : "mirrored";
        ctx.note(std::string("timeevo ") + name + " L=" + std::to_string(L));
        const auto rows = run_time_evolution_experiment(
            L, cfg.timeevo_rate, init, static_cast<std::size_t>(cfg.timeevo_configs),
            cfg.timeevo_cycles, seed, cfg.threads);
        for (const auto &r : rows) {
            csv.row({name, fmt(r.cycle), fmt(r.entropy_mean), fmt(r.entropy_stderr),
                     fmt(r.variance_mean), fmt(r.variance_stderr)});
        }
    }
}

} // namespace steerq::tool
