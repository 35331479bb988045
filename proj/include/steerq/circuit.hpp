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
 * @file circuit.hpp
 * Monitored U(1) brickwork circuits: frozen realizations, target
 * trajectories, steered runs and the batch driver.
 *
 * A realization fixes the gates and the measured (half-cycle, qubit) pairs.
 * A target trajectory draws Born-rule outcomes m for that schedule. A
 * steered run replays the same schedule with its own outcomes and applies
 * Pauli X to the measured qubit whenever its outcome disagrees with m, then
 * reads out every qubit in the Z basis.
 *
 * Randomness comes from labeled substreams: "gates" and "locations" keyed by
 * the realization seed, "outcomes/target" keyed by the target outcome seed,
 * and "outcomes/run_<i>" keyed by the batch master seed.
 */

#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "steerq/errors.hpp"
#include "steerq/observables.hpp"
#include "steerq/parallel.hpp"
#include "steerq/rng.hpp"
#include "steerq/state_vector.hpp"

namespace steerq {

/// Odd half-cycles use links (0,1),(2,3),...; even ones (1,2),(3,4),...
enum class LinkParity { Odd, Even };

struct HalfCycle {
    LinkParity parity = LinkParity::Odd;
    std::vector<GateParams> gates;
    std::vector<int> measured; // strictly ascending

    [[nodiscard]] int first_link() const noexcept { return parity == LinkParity::Odd ? 0 : 1; }
    friend bool operator==(const HalfCycle &, const HalfCycle &) = default;
};

struct CircuitRealization {
    int num_qubits = 0;
    double rate = 0.0;
    int num_cycles = 0;
    int burn_in = 0;
    std::uint64_t seed = 0;
    std::vector<HalfCycle> half_cycles;

    [[nodiscard]] std::size_t num_measurements() const noexcept {
        std::size_t n = 0;
        for (const auto &h : half_cycles) {
            n += h.measured.size();
        }
        return n;
    }
    friend bool operator==(const CircuitRealization &, const CircuitRealization &) = default;
};

/// Default burn-in: twice the ~L cycles it takes averaged observables to saturate.
[[nodiscard]] constexpr int default_burn_in(int num_qubits) noexcept { return 2 * num_qubits; }

/**
 * Draw a realization. Gates come from substream "gates" in execution order;
 * every qubit is independently marked in every half-cycle when its uniform
 * from substream "locations" falls below p, so realizations sharing a seed
 * but differing in p are coupled (nested measurement sets).
 */
[[nodiscard]] inline CircuitRealization sample_realization(int num_qubits, double rate,
                                                           int num_cycles, int burn_in,
                                                           std::uint64_t seed) {
    if (!(rate >= 0.0 && rate <= 1.0)) {
        throw InvalidArgument("sample_realization: p must lie in [0, 1]");
    }
    if (num_cycles < 1) {
        throw InvalidArgument("sample_realization: need at least one cycle");
    }
    if (num_qubits < 2 || num_qubits > kDefaultMaxQubits) {
        throw InvalidArgument("sample_realization: L out of range");
    }
    if (burn_in < 0) {
        throw InvalidArgument("sample_realization: negative burn-in");
    }
    CircuitRealization c;
    c.num_qubits = num_qubits;
    c.rate = rate;
    c.num_cycles = num_cycles;
    c.burn_in = burn_in;
    c.seed = seed;
    Stream gates(seed, "gates");
    Stream locations(seed, "locations");
    c.half_cycles.reserve(static_cast<std::size_t>(2 * num_cycles));
    for (int h = 0; h < 2 * num_cycles; ++h) {
        HalfCycle hc;
        hc.parity = h % 2 == 0 ? LinkParity::Odd : LinkParity::Even;
        for (int n = hc.first_link(); n + 1 < num_qubits; n += 2) {
            hc.gates.push_back(GateParams::sample(gates));
        }
        for (int q = 0; q < num_qubits; ++q) {
            if (locations.uniform() < rate) {
                hc.measured.push_back(q);
            }
        }
        c.half_cycles.push_back(std::move(hc));
    }
    return c;
}

/**
 * Drive `state` through the realization. After the gates of each half-cycle,
 * `on_layer(state, qubits, first_event)` performs the scheduled measurements
 * of that half-cycle (`first_event` counts measurement events in execution
 * order); `on_cycle(t, state)` fires after each full cycle t >= 1.
 */
template <class OnLayer, class OnCycle>
void evolve(const CircuitRealization &c, StateVector &state, OnLayer &&on_layer,
            OnCycle &&on_cycle) {
    if (state.num_qubits() != c.num_qubits) {
        throw InvalidArgument("evolve: state and realization disagree on L");
    }
    std::size_t event = 0;
    std::vector<U1Gate> layer;
    for (std::size_t h = 0; h < c.half_cycles.size(); ++h) {
        const HalfCycle &hc = c.half_cycles[h];
        layer.clear();
        for (const auto &g : hc.gates) {
            layer.emplace_back(g);
        }
        apply_gate_layer(state, layer, hc.first_link());
        if (!hc.measured.empty()) {
            on_layer(state, std::span<const int>(hc.measured), event);
            event += hc.measured.size();
        }
        if (h % 2 == 1) {
            on_cycle(static_cast<int>(h / 2 + 1), state);
        }
    }
}

/// Exact observables sampled at the end of one cycle.
struct SeriesPoint {
    int cycle = 0;
    double entropy_vn = 0.0;
    double entropy_renyi2 = 0.0;
    std::vector<double> variances; // one per TargetOptions::charge_subsystems entry

    friend bool operator==(const SeriesPoint &, const SeriesPoint &) = default;
};

struct TargetOptions {
    bool keep_final_state = true;
    /// Record exact observables once per cycle after burn-in.
    bool record_series = false;
    /// Entropy cut for the series; 0 means L/2.
    int entropy_subsystem = 0;
    /// Subsystem lengths for the series variances; empty means {L/2}.
    std::vector<int> charge_subsystems;
};

struct TargetRecord {
    int num_qubits = 0;
    double rate = 0.0;
    int num_cycles = 0;
    int burn_in = 0;
    std::uint64_t realization_seed = 0;
    std::uint64_t outcome_seed = 0;
    std::vector<int> outcomes; // +1 / -1 in execution order
    std::optional<StateVector> final_state;
    std::vector<int> series_subsystems;
    std::vector<SeriesPoint> series;

    [[nodiscard]] bool belongs_to(const CircuitRealization &c) const noexcept {
        return c.num_qubits == num_qubits && c.rate == rate && c.num_cycles == num_cycles &&
               c.seed == realization_seed && c.num_measurements() == outcomes.size();
    }
};

namespace detail {

inline std::vector<int> resolve_subsystems(const std::vector<int> &requested, int num_qubits) {
    std::vector<int> out = requested.empty() ? std::vector<int>{num_qubits / 2} : requested;
    for (int ls : out) {
        if (ls < 1 || ls >= num_qubits) {
            throw InvalidArgument("subsystem length " + std::to_string(ls) + " outside [1, L-1]");
        }
    }
    return out;
}

inline SeriesPoint sample_series_point(int cycle, const StateVector &s, int entropy_cut,
                                       const std::vector<int> &subsystems) {
    SeriesPoint pt;
    pt.cycle = cycle;
    const auto spectrum = schmidt_spectrum(s, entropy_cut);
    pt.entropy_vn = spectrum_entropy(spectrum, 1.0);
    pt.entropy_renyi2 = spectrum_entropy(spectrum, 2.0);
    pt.variances.reserve(subsystems.size());
    for (int ls : subsystems) {
        pt.variances.push_back(exact_charge_moments(s, ls).variance);
    }
    return pt;
}

} // namespace detail

/// Run a target trajectory from the Neel state with Born-rule outcomes.
[[nodiscard]] inline TargetRecord run_target(const CircuitRealization &c,
                                             std::uint64_t outcome_seed,
                                             const TargetOptions &options = {}) {
    TargetRecord rec;
    rec.num_qubits = c.num_qubits;
    rec.rate = c.rate;
    rec.num_cycles = c.num_cycles;
    rec.burn_in = c.burn_in;
    rec.realization_seed = c.seed;
    rec.outcome_seed = outcome_seed;
    rec.outcomes.reserve(c.num_measurements());

    const int cut = options.entropy_subsystem == 0 ? c.num_qubits / 2 : options.entropy_subsystem;
    if (options.record_series) {
        rec.series_subsystems = detail::resolve_subsystems(options.charge_subsystems, c.num_qubits);
    }

    Stream outcomes(outcome_seed, "outcomes/target");
    StateVector state = init_neel(c.num_qubits);
    evolve(
        c, state,
        [&](StateVector &s, std::span<const int> qubits, std::size_t) {
            measure_layer(s, qubits, [&](std::size_t, double p_up) {
                const int m = outcomes.uniform() < p_up ? 1 : -1;
                rec.outcomes.push_back(m);
                return LayerDecision{m, false};
            });
        },
        [&](int t, const StateVector &s) {
            if (options.record_series && t > c.burn_in) {
                rec.series.push_back(
                    detail::sample_series_point(t, s, cut, rec.series_subsystems));
            }
        });
    if (options.keep_final_state) {
        rec.final_state = std::move(state);
    }
    return rec;
}

/**
 * Rebuild the target's final state from its recorded outcomes by forced
 * projections; lets persisted targets be reused without their amplitudes.
 */
[[nodiscard]] inline StateVector replay_target(const CircuitRealization &c,
                                               const std::vector<int> &outcomes) {
    if (outcomes.size() != c.num_measurements()) {
        throw InvalidArgument("replay_target: outcome count does not match realization");
    }
    StateVector state = init_neel(c.num_qubits);
    evolve(
        c, state,
        [&](StateVector &s, std::span<const int> qubits, std::size_t first) {
            measure_layer(s, qubits, [&](std::size_t j, double) {
                return LayerDecision{outcomes[first + j], false};
            });
        },
        [](int, const StateVector &) {});
    return state;
}

/// One steered run observed through the terminal Z readout.
struct ShotRecord {
    std::size_t run = 0;
    int num_qubits = 0;
    std::uint64_t readout = 0; // bit n = qubit n, 1 means down
    int total_charge = 0;
    int flips = 0;
    int cycle = 0; // cycle after which the readout was taken

    [[nodiscard]] int subsystem_charge(int subsystem_size) const {
        return steerq::subsystem_charge(readout, subsystem_size);
    }
    /// Readout as '0'/'1' characters, qubit 0 leftmost.
    [[nodiscard]] std::string readout_string() const {
        std::string s(static_cast<std::size_t>(num_qubits), '0');
        for (int q = 0; q < num_qubits; ++q) {
            if ((readout >> q) & 1U) {
                s[static_cast<std::size_t>(q)] = '1';
            }
        }
        return s;
    }
    friend bool operator==(const ShotRecord &, const ShotRecord &) = default;
};

/**
 * Sample a full Z-basis readout with a single uniform. Equivalent in
 * distribution to measuring the qubits one at a time.
 */
[[nodiscard]] inline std::uint64_t sample_readout(const StateVector &state, double u) {
    double total = state.norm_squared();
    const double threshold = u * total;
    double acc = 0.0;
    std::uint64_t last_nonzero = 0;
    for (std::uint64_t i = 0; i < state.dim(); ++i) {
        const double w = abs2(state[i]);
        if (w > 0.0) {
            last_nonzero = i;
            acc += w;
            if (threshold < acc) {
                return i;
            }
        }
    }
    return last_nonzero;
}

struct SteerHooks {
    /// Test hook: use the target's outcomes instead of Born sampling.
    bool force_target_outcomes = false;
    /// Called after each half-cycle's measurements and corrections with the
    /// measured qubits and the target outcomes they were steered to.
    std::function<void(const StateVector &, std::span<const int> qubits,
                       std::span<const int> target_outcomes)>
        after_layer;
};

struct SteerResult {
    ShotRecord shot;
    StateVector pre_readout;
};

[[nodiscard]] inline SteerResult run_steered_detailed(const CircuitRealization &c,
                                                      const TargetRecord &target,
                                                      std::uint64_t run_seed,
                                                      std::size_t run_index,
                                                      const SteerHooks &hooks = {}) {
    if (!target.belongs_to(c)) {
        throw InvalidArgument("run_steered: target record does not belong to this realization");
    }
    Stream outcomes(run_seed, "outcomes/run_" + std::to_string(run_index));
    StateVector state = init_neel(c.num_qubits);
    int flips = 0;
    evolve(
        c, state,
        [&](StateVector &s, std::span<const int> qubits, std::size_t first) {
            const std::span<const int> wants(target.outcomes.data() + first, qubits.size());
            measure_layer(s, qubits, [&](std::size_t j, double p_up) {
                const int want = wants[j];
                const int got = hooks.force_target_outcomes
                                    ? want
                                    : (outcomes.uniform() < p_up ? 1 : -1);
                const bool flip = got != want;
                flips += flip ? 1 : 0;
                return LayerDecision{got, flip};
            });
            if (hooks.after_layer) {
                hooks.after_layer(s, qubits, wants);
            }
        },
        [](int, const StateVector &) {});
    ShotRecord shot;
    shot.run = run_index;
    shot.num_qubits = c.num_qubits;
    shot.readout = sample_readout(state, outcomes.uniform());
    shot.total_charge = total_charge(shot.readout, c.num_qubits);
    shot.flips = flips;
    shot.cycle = c.num_cycles;
    return {shot, std::move(state)};
}

[[nodiscard]] inline ShotRecord run_steered(const CircuitRealization &c,
                                            const TargetRecord &target, std::uint64_t run_seed,
                                            std::size_t run_index = 0) {
    return run_steered_detailed(c, target, run_seed, run_index).shot;
}

/// N_s independent steered runs; record i always comes from substream run_i.
[[nodiscard]] inline std::vector<ShotRecord> batch_steer(const CircuitRealization &c,
                                                         const TargetRecord &target,
                                                         std::size_t num_runs,
                                                         std::uint64_t master_seed,
                                                         unsigned threads = 1) {
    if (num_runs < 1) {
        throw InvalidArgument("batch_steer: need at least one run");
    }
    if (!target.belongs_to(c)) {
        throw InvalidArgument("batch_steer: target record does not belong to this realization");
    }
    std::vector<ShotRecord> shots(num_runs);
    parallel_for(num_runs, threads,
                 [&](std::size_t i) { shots[i] = run_steered(c, target, master_seed, i); });
    return shots;
}

/**
 * Readouts of one steered run taken after every cycle t > burn_in, oldest
 * first. Taking a readout does not disturb the run, so this is the numerical
 * time-averaging shortcut rather than an experimental protocol. Intermediate
 * readouts use substream "readouts/run_<i>"; the last one is the shot that
 * run_steered returns.
 */
[[nodiscard]] inline std::vector<ShotRecord> run_steered_series(const CircuitRealization &c,
                                                                const TargetRecord &target,
                                                                std::uint64_t run_seed,
                                                                std::size_t run_index) {
    if (!target.belongs_to(c)) {
        throw InvalidArgument("run_steered: target record does not belong to this realization");
    }
    if (c.num_cycles <= c.burn_in) {
        throw InvalidArgument("run_steered_series: needs cycles > burn_in");
    }
    const std::string suffix = "/run_" + std::to_string(run_index);
    Stream outcomes(run_seed, "outcomes" + suffix);
    Stream readouts(run_seed, "readouts" + suffix);
    StateVector state = init_neel(c.num_qubits);
    int flips = 0;
    std::vector<ShotRecord> out;
    out.reserve(static_cast<std::size_t>(c.num_cycles - c.burn_in));
    evolve(
        c, state,
        [&](StateVector &s, std::span<const int> qubits, std::size_t first) {
            measure_layer(s, qubits, [&](std::size_t j, double p_up) {
                const int want = target.outcomes[first + j];
                const int got = outcomes.uniform() < p_up ? 1 : -1;
                flips += got != want ? 1 : 0;
                return LayerDecision{got, got != want};
            });
        },
        [&](int t, const StateVector &s) {
            if (t <= c.burn_in) {
                return;
            }
            ShotRecord shot;
            shot.run = run_index;
            shot.num_qubits = c.num_qubits;
            shot.readout = sample_readout(
                s, t == c.num_cycles ? outcomes.uniform() : readouts.uniform());
            shot.total_charge = total_charge(shot.readout, c.num_qubits);
            shot.flips = flips;
            shot.cycle = t;
            out.push_back(shot);
        });
    return out;
}

/// batch_steer for every cycle after burn-in: result[k][i] is run i after cycle burn_in + 1 + k.
[[nodiscard]] inline std::vector<std::vector<ShotRecord>>
batch_steer_series(const CircuitRealization &c, const TargetRecord &target,
                   std::size_t num_runs, std::uint64_t master_seed, unsigned threads = 1) {
    if (num_runs < 1) {
        throw InvalidArgument("batch_steer: need at least one run");
    }
    std::vector<std::vector<ShotRecord>> per_run(num_runs);
    parallel_for(num_runs, threads, [&](std::size_t i) {
        per_run[i] = run_steered_series(c, target, master_seed, i);
    });
    std::vector<std::vector<ShotRecord>> out(per_run.front().size(),
                                             std::vector<ShotRecord>(num_runs));
    for (std::size_t i = 0; i < num_runs; ++i) {
        for (std::size_t k = 0; k < out.size(); ++k) {
            out[k][i] = per_run[i][k];
        }
    }
    return out;
}

/// Target states after every cycle t > burn_in, rebuilt from the outcomes.
[[nodiscard]] inline std::vector<StateVector> replay_target_series(const CircuitRealization &c,
                                                                   const std::vector<int> &outcomes) {
    if (outcomes.size() != c.num_measurements()) {
        throw InvalidArgument("replay_target: outcome count does not match realization");
    }
    std::vector<StateVector> out;
    StateVector state = init_neel(c.num_qubits);
    evolve(
        c, state,
        [&](StateVector &s, std::span<const int> qubits, std::size_t first) {
            measure_layer(s, qubits, [&](std::size_t j, double) {
                return LayerDecision{outcomes[first + j], false};
            });
        },
        [&](int t, const StateVector &s) {
            if (t > c.burn_in) {
                out.push_back(s);
            }
        });
    return out;
}

enum class InitialState { Neel, Mirrored };

struct TimePoint {
    int cycle = 0;
    double entropy_mean = 0.0;
    double entropy_stderr = 0.0;
    double variance_mean = 0.0;
    double variance_stderr = 0.0;
};

/**
 * Half-chain entropy and charge variance averaged over independent
 * realizations, sampled at t = 0 and after every cycle up to num_cycles.
 */
[[nodiscard]] inline std::vector<TimePoint>
run_time_evolution_experiment(int num_qubits, double rate, InitialState initial,
                              std::size_t num_configs, int num_cycles, std::uint64_t seed,
                              unsigned threads = 1) {
    if (initial == InitialState::Mirrored && num_qubits % 4 != 0) {
        throw InvalidArgument("time evolution: mirrored start needs L divisible by 4");
    }
    if (num_configs < 1) {
        throw InvalidArgument("time evolution: need at least one configuration");
    }
    const int half = num_qubits / 2;
    const auto slots = static_cast<std::size_t>(num_cycles) + 1;
    std::vector<std::vector<double>> ent(num_configs, std::vector<double>(slots));
    std::vector<std::vector<double>> var(num_configs, std::vector<double>(slots));
    parallel_for(num_configs, threads, [&](std::size_t k) {
        const auto c = sample_realization(num_qubits, rate, num_cycles, 0,
                                          derive_key(seed, "timeevo/realization", k));
        Stream outcomes(derive_key(seed, "timeevo/outcomes", k), "outcomes/target");
        StateVector s = initial == InitialState::Neel ? init_neel(num_qubits)
                                                      : init_mirrored_zero_charge(num_qubits);
        ent[k][0] = entanglement_entropy(s, half);
        var[k][0] = exact_charge_moments(s, half).variance;
        evolve(
            c, s,
            [&](StateVector &st, std::span<const int> qubits, std::size_t) {
                measure_layer(st, qubits, [&](std::size_t, double p_up) {
                    return LayerDecision{outcomes.uniform() < p_up ? 1 : -1, false};
                });
            },
            [&](int t, const StateVector &st) {
                ent[k][static_cast<std::size_t>(t)] = entanglement_entropy(st, half);
                var[k][static_cast<std::size_t>(t)] = exact_charge_moments(st, half).variance;
            });
    });
    std::vector<TimePoint> out(slots);
    const double n = static_cast<double>(num_configs);
    for (std::size_t t = 0; t < slots; ++t) {
        double se = 0, se2 = 0, sv = 0, sv2 = 0;
        for (std::size_t k = 0; k < num_configs; ++k) {
            se += ent[k][t];
            se2 += ent[k][t] * ent[k][t];
            sv += var[k][t];
            sv2 += var[k][t] * var[k][t];
        }
        TimePoint &pt = out[t];
        pt.cycle = static_cast<int>(t);
        pt.entropy_mean = se / n;
        pt.variance_mean = sv / n;
        if (num_configs > 1) {
            pt.entropy_stderr =
                std::sqrt(std::max(0.0, (se2 - se * se / n) / (n - 1.0)) / n);
            pt.variance_stderr =
                std::sqrt(std::max(0.0, (sv2 - sv * sv / n) / (n - 1.0)) / n);
        }
    }
    return out;
}

} // namespace steerq
