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
 * @file state_vector.hpp
 * Dense statevector of an open qubit chain together with the handful of
 * operations a monitored U(1) brickwork circuit needs: charge-conserving
 * two-qubit gates on neighbouring qubits, projective Z measurements and
 * Pauli-X corrections.
 *
 * Basis convention: bit n of a basis index is the Z eigenvalue of qubit n,
 * with bit 0 meaning sigma = +1 ("up") and bit 1 meaning sigma = -1 ("down").
 * Qubit 0 is the least significant bit.
 */

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#if defined(__BMI2__)
#include <immintrin.h>
#endif

#include "steerq/errors.hpp"
#include "steerq/rng.hpp"

namespace steerq {

using cplx = std::complex<double>;

inline constexpr int kDefaultMaxQubits = 24;

/// Tolerance of the unit-norm invariant for states handed back to callers.
inline constexpr double kNormTolerance = 1e-10;

/// |a|^2 without the hypot round trip std::norm takes in libstdc++.
[[nodiscard]] inline double abs2(const cplx &a) noexcept {
    return a.real() * a.real() + a.imag() * a.imag();
}

class StateVector {
  public:
    /// All-up product state |00...0> on `num_qubits` qubits.
    explicit StateVector(int num_qubits, int max_qubits = kDefaultMaxQubits)
        : num_qubits_(num_qubits) {
        if (num_qubits < 2 || num_qubits > max_qubits) {
            throw InvalidArgument("StateVector: number of qubits " +
                                  std::to_string(num_qubits) + " outside [2, " +
                                  std::to_string(max_qubits) + "]");
        }
        amps_.assign(std::size_t{1} << num_qubits, cplx{0.0, 0.0});
        amps_[0] = 1.0;
    }

    static StateVector basis_state(int num_qubits, std::uint64_t index) {
        StateVector s(num_qubits);
        if (index >= s.dim()) {
            throw InvalidArgument("basis_state: index out of range");
        }
        s.amps_[0] = 0.0;
        s.amps_[index] = 1.0;
        return s;
    }

    /// Wrap an amplitude array; it is normalized on entry.
    static StateVector from_amplitudes(int num_qubits, std::vector<cplx> amps) {
        StateVector s(num_qubits);
        if (amps.size() != s.dim()) {
            throw InvalidArgument("from_amplitudes: expected 2^L amplitudes");
        }
        s.amps_ = std::move(amps);
        const double n2 = s.norm_squared();
        if (!(n2 > 0.0) || !std::isfinite(n2)) {
            throw NumericalCorruption("from_amplitudes: zero or non-finite norm");
        }
        s.scale(1.0 / std::sqrt(n2));
        return s;
    }

    [[nodiscard]] int num_qubits() const noexcept { return num_qubits_; }
    [[nodiscard]] std::size_t dim() const noexcept { return amps_.size(); }

    [[nodiscard]] std::span<const cplx> amplitudes() const noexcept { return amps_; }
    [[nodiscard]] std::span<cplx> amplitudes() noexcept { return amps_; }
    [[nodiscard]] const cplx *data() const noexcept { return amps_.data(); }
    [[nodiscard]] cplx *data() noexcept { return amps_.data(); }

    cplx &operator[](std::size_t i) noexcept { return amps_[i]; }
    const cplx &operator[](std::size_t i) const noexcept { return amps_[i]; }

    [[nodiscard]] double norm_squared() const noexcept {
        double acc = 0.0;
        for (const auto &a : amps_) {
            acc += a.real() * a.real() + a.imag() * a.imag();
        }
        return acc;
    }

    void scale(double factor) noexcept {
        for (auto &a : amps_) {
            a = cplx{a.real() * factor, a.imag() * factor};
        }
    }

    void check_qubit(int n, const char *who) const {
        if (n < 0 || n >= num_qubits_) {
            throw InvalidArgument(std::string(who) + ": qubit index " + std::to_string(n) +
                                  " out of range for L=" + std::to_string(num_qubits_));
        }
    }

    friend bool operator==(const StateVector &, const StateVector &) = default;

  private:
    int num_qubits_;
    std::vector<cplx> amps_;
};

/// Random phases of one charge-conserving two-qubit gate, radians in [0, 2pi).
struct GateParams {
    double phi00 = 0.0;
    double phi11 = 0.0;
    double phi1 = 0.0;
    double phi2 = 0.0;
    double phi3 = 0.0;
    double theta = 0.0;

    /// Six independent uniform phases; draw order is the field order.
    static GateParams sample(Stream &rng) {
        constexpr double two_pi = 2.0 * std::numbers::pi;
        GateParams g;
        g.phi00 = two_pi * rng.uniform();
        g.phi11 = two_pi * rng.uniform();
        g.phi1 = two_pi * rng.uniform();
        g.phi2 = two_pi * rng.uniform();
        g.phi3 = two_pi * rng.uniform();
        g.theta = two_pi * rng.uniform();
        return g;
    }

    friend bool operator==(const GateParams &, const GateParams &) = default;
};

/**
 * Gate entries assembled from GateParams. In the ordered two-qubit basis
 * {|00>, |11>, |01>, |10>} (first label = qubit n, second = qubit n+1) the gate
 * is diag(e^{i phi00}, e^{i phi11}) (+) block, with
 *   block = e^{i phi3} [[ e^{i phi1} cos t, e^{i phi2} sin t],
 *                       [-e^{-i phi2} sin t, e^{-i phi1} cos t]].
 */
struct U1Gate {
    cplx d00;
    cplx d11;
    std::array<cplx, 4> block; // row-major, acting on (|01>, |10>)

    explicit U1Gate(const GateParams &g) {
        d00 = std::polar(1.0, g.phi00);
        d11 = std::polar(1.0, g.phi11);
        const double c = std::cos(g.theta);
        const double s = std::sin(g.theta);
        const cplx global = std::polar(1.0, g.phi3);
        block[0] = global * std::polar(c, g.phi1);
        block[1] = global * std::polar(1.0, g.phi2) * s;
        block[2] = -global * std::polar(1.0, -g.phi2) * s;
        block[3] = global * std::polar(c, -g.phi1);
    }

    /// Full 4x4 matrix, row-major, basis order {|00>, |11>, |01>, |10>}.
    [[nodiscard]] std::array<cplx, 16> matrix() const {
        std::array<cplx, 16> m{};
        m[0 * 4 + 0] = d00;
        m[1 * 4 + 1] = d11;
        m[2 * 4 + 2] = block[0];
        m[2 * 4 + 3] = block[1];
        m[3 * 4 + 2] = block[2];
        m[3 * 4 + 3] = block[3];
        return m;
    }
};

namespace kernel {

// Gate on qubits (n, n+1) over the amplitude range [v, v + len), where len is
// a multiple of 4 * 2^n. Works on interleaved doubles through restrict
// pointers so the inner loop vectorizes. LO > 0 fixes 2^n at compile time
// for the short inner loops of the lowest links.
template <std::size_t LO>
inline void u1_gate_range(cplx *amps, std::size_t len, const U1Gate &g, int n) noexcept {
    double *v = reinterpret_cast<double *>(amps);
    const std::size_t lo = LO != 0 ? LO : std::size_t{1} << n;
    const std::size_t stride = lo << 2;
    const double d0r = g.d00.real(), d0i = g.d00.imag();
    const double d1r = g.d11.real(), d1i = g.d11.imag();
    const double ar = g.block[0].real(), ai = g.block[0].imag();
    const double br = g.block[1].real(), bi = g.block[1].imag();
    const double cr = g.block[2].real(), ci = g.block[2].imag();
    const double dr = g.block[3].real(), di = g.block[3].imag();
    for (std::size_t base = 0; base < len; base += stride) {
        double *__restrict p00 = v + 2 * base;
        double *__restrict p10 = v + 2 * (base + lo);     // qubit n down
        double *__restrict p01 = v + 2 * (base + 2 * lo); // qubit n+1 down
        double *__restrict p11 = v + 2 * (base + 3 * lo);
        for (std::size_t j = 0; j < 2 * lo; j += 2) {
            const double xr = p01[j], xi = p01[j + 1];
            const double yr = p10[j], yi = p10[j + 1];
            const double er = p00[j], ei = p00[j + 1];
            const double fr = p11[j], fi = p11[j + 1];
            p00[j] = d0r * er - d0i * ei;
            p00[j + 1] = d0r * ei + d0i * er;
            p11[j] = d1r * fr - d1i * fi;
            p11[j + 1] = d1r * fi + d1i * fr;
            p01[j] = ar * xr - ai * xi + br * yr - bi * yi;
            p01[j + 1] = ar * xi + ai * xr + br * yi + bi * yr;
            p10[j] = cr * xr - ci * xi + dr * yr - di * yi;
            p10[j + 1] = cr * xi + ci * xr + dr * yi + di * yr;
        }
    }
}

inline void u1_gate_dispatch(cplx *amps, std::size_t len, const U1Gate &g, int n) noexcept {
    switch (n) {
    case 0:
        u1_gate_range<1>(amps, len, g, n);
        break;
    case 1:
        u1_gate_range<2>(amps, len, g, n);
        break;
    case 2:
        u1_gate_range<4>(amps, len, g, n);
        break;
    default:
        u1_gate_range<0>(amps, len, g, n);
        break;
    }
}

/// Amplitude blocks of 2^kBlockBits complex numbers (64 KiB) stay cache resident.
inline constexpr int kBlockBits = 12;

#if defined(__BMI2__)
inline std::uint64_t extract_bits(std::uint64_t x, std::uint64_t mask) noexcept {
    return _pext_u64(x, mask);
}
inline std::uint64_t deposit_bits(std::uint64_t x, std::uint64_t mask) noexcept {
    return _pdep_u64(x, mask);
}
#else
inline std::uint64_t extract_bits(std::uint64_t x, std::uint64_t mask) noexcept {
    std::uint64_t out = 0;
    for (std::uint64_t bit = 1; mask != 0; bit <<= 1) {
        const std::uint64_t low = mask & (~mask + 1);
        if (x & low) {
            out |= bit;
        }
        mask ^= low;
    }
    return out;
}
inline std::uint64_t deposit_bits(std::uint64_t x, std::uint64_t mask) noexcept {
    std::uint64_t out = 0;
    for (std::uint64_t bit = 1; mask != 0; bit <<= 1) {
        const std::uint64_t low = mask & (~mask + 1);
        if (x & bit) {
            out |= low;
        }
        mask ^= low;
    }
    return out;
}
#endif

} // namespace kernel

/// Apply a U(1) gate to qubits (n, n+1) in place.
inline void apply_u1_gate(StateVector &state, const U1Gate &gate, int n) {
    if (n < 0 || n + 1 >= state.num_qubits()) {
        throw InvalidArgument("apply_u1_gate: link (" + std::to_string(n) + "," +
                              std::to_string(n + 1) + ") out of range for L=" +
                              std::to_string(state.num_qubits()));
    }
    kernel::u1_gate_dispatch(state.data(), state.dim(), gate, n);
}

inline void apply_u1_gate(StateVector &state, const GateParams &params, int n) {
    apply_u1_gate(state, U1Gate(params), n);
}

/**
 * One brickwork layer: gates[k] acts on link (first_link + 2k). Gates whose
 * support fits in a cache block are applied block by block in a single sweep;
 * the remaining high links get one sweep each. Gates in a layer act on
 * disjoint qubits, so the result equals applying them one after another.
 */
inline void apply_gate_layer(StateVector &state, std::span<const U1Gate> gates, int first_link) {
    const int L = state.num_qubits();
    const int last_link = first_link + 2 * (static_cast<int>(gates.size()) - 1);
    if (first_link < 0 || (!gates.empty() && last_link + 1 >= L)) {
        throw InvalidArgument("apply_gate_layer: layer does not fit on the chain");
    }
    const int block_bits = std::min(L, kernel::kBlockBits);
    const std::size_t block = std::size_t{1} << block_bits;
    std::size_t local = 0;
    while (local < gates.size() && first_link + 2 * static_cast<int>(local) + 2 <= block_bits) {
        ++local;
    }
    cplx *v = state.data();
    if (local > 0) {
        for (std::size_t off = 0; off < state.dim(); off += block) {
            for (std::size_t k = 0; k < local; ++k) {
                kernel::u1_gate_dispatch(v + off, block, gates[k],
                                         first_link + 2 * static_cast<int>(k));
            }
        }
    }
    for (std::size_t k = local; k < gates.size(); ++k) {
        kernel::u1_gate_dispatch(v, state.dim(), gates[k], first_link + 2 * static_cast<int>(k));
    }
}

/// Probability that measuring Z on qubit n yields +1.
[[nodiscard]] inline double probability_up(const StateVector &state, int n) {
    state.check_qubit(n, "probability_up");
    const std::size_t bit = std::size_t{1} << n;
    const cplx *v = state.data();
    double up = 0.0, down = 0.0;
    for (std::size_t base = 0; base < state.dim(); base += bit << 1) {
        for (std::size_t j = 0; j < bit; ++j) {
            up += abs2(v[base + j]);
            down += abs2(v[base + j + bit]);
        }
    }
    return up / (up + down);
}

/// Replace the state by its normalized projection onto Z_n = outcome.
inline void project_qubit(StateVector &state, int n, int outcome) {
    state.check_qubit(n, "project_qubit");
    if (outcome != 1 && outcome != -1) {
        throw InvalidArgument("project_qubit: outcome must be +1 or -1");
    }
    const std::size_t bit = std::size_t{1} << n;
    cplx *v = state.data();
    const std::size_t keep = outcome == 1 ? 0 : bit;
    const std::size_t kill = outcome == 1 ? bit : 0;
    double kept = 0.0;
    for (std::size_t base = 0; base < state.dim(); base += bit << 1) {
        for (std::size_t j = 0; j < bit; ++j) {
            kept += abs2(v[base + j + keep]);
            v[base + j + kill] = 0.0;
        }
    }
    if (kept < 1e-300) {
        throw NumericalCorruption("project_qubit: projection onto a zero-weight outcome");
    }
    const double f = 1.0 / std::sqrt(kept);
    for (std::size_t base = 0; base < state.dim(); base += bit << 1) {
        for (std::size_t j = 0; j < bit; ++j) {
            v[base + j + keep] *= f;
        }
    }
}

/**
 * Born-rule Z measurement of qubit n driven by a caller-supplied uniform
 * u in [0, 1): the outcome is +1 iff u < p_up. The state collapses and is
 * renormalized. Returns the outcome.
 */
inline int measure_qubit(StateVector &state, int n, double u) {
    state.check_qubit(n, "measure_qubit");
    const std::size_t bit = std::size_t{1} << n;
    const cplx *v = state.data();
    double up = 0.0, down = 0.0;
    for (std::size_t base = 0; base < state.dim(); base += bit << 1) {
        for (std::size_t j = 0; j < bit; ++j) {
            up += abs2(v[base + j]);
            down += abs2(v[base + j + bit]);
        }
    }
    if (up < 1e-14 && down < 1e-14) {
        throw NumericalCorruption("measure_qubit: both projections vanish");
    }
    const int outcome = u < up / (up + down) ? 1 : -1;
    project_qubit(state, n, outcome);
    return outcome;
}

/// What to do with one qubit of a measurement layer.
struct LayerDecision {
    int outcome = 1;   // Born outcome kept for this qubit
    bool flip = false; // apply Pauli X to the qubit after collapse
};

/**
 * Measure the distinct, ascending `qubits` one after another and optionally
 * flip some of them, in two sweeps over the state. The first sweep builds
 * the joint distribution of the measured bits; `decide(j, p_up)` is then
 * called for j = 0, 1, ... with the probability of +1 for qubit j
 * conditioned on the outcomes already chosen, exactly as a sequence of
 * single-qubit measurements would see it (X on an already measured qubit
 * does not change the statistics of the others). The second sweep projects,
 * applies the flips as an index permutation and renormalizes.
 */
template <class Decide>
void measure_layer(StateVector &state, std::span<const int> qubits, Decide &&decide) {
    const std::size_t k = qubits.size();
    if (k == 0) {
        return;
    }
    std::uint64_t mask = 0;
    for (std::size_t j = 0; j < k; ++j) {
        state.check_qubit(qubits[j], "measure_layer");
        if (j > 0 && qubits[j] <= qubits[j - 1]) {
            throw InvalidArgument("measure_layer: qubits must be strictly ascending");
        }
        mask |= std::uint64_t{1} << qubits[j];
    }
    cplx *v = state.data();
    const std::size_t dim = state.dim();

    std::vector<double> joint(std::size_t{1} << k, 0.0);
    for (std::uint64_t i = 0; i < dim; ++i) {
        joint[kernel::extract_bits(i, mask)] += abs2(v[i]);
    }

    // prefix holds bits 0..j-1 of the chosen pattern (1 = down).
    std::uint64_t prefix = 0;
    std::uint64_t flips = 0;
    for (std::size_t j = 0; j < k; ++j) {
        double up = 0.0, down = 0.0;
        const std::uint64_t rest = std::uint64_t{1} << (k - j - 1);
        for (std::uint64_t r = 0; r < rest; ++r) {
            const std::uint64_t base = prefix | (r << (j + 1));
            up += joint[base];
            down += joint[base | (std::uint64_t{1} << j)];
        }
        if (up < 1e-300 && down < 1e-300) {
            throw NumericalCorruption("measure_layer: both projections vanish");
        }
        const LayerDecision d = decide(j, up / (up + down));
        if (d.outcome == -1) {
            prefix |= std::uint64_t{1} << j;
        } else if (d.outcome != 1) {
            throw InvalidArgument("measure_layer: outcome must be +1 or -1");
        }
        if (d.flip) {
            flips |= std::uint64_t{1} << qubits[j];
        }
    }
    const double kept = joint[prefix];
    if (!(kept > 1e-300)) {
        throw NumericalCorruption("measure_layer: projection onto a zero-weight outcome");
    }
    const double f = 1.0 / std::sqrt(kept);
    const std::uint64_t source = kernel::deposit_bits(prefix, mask);
    const std::uint64_t dest = source ^ flips;
    for (std::uint64_t i = 0; i < dim; ++i) {
        const std::uint64_t pattern = i & mask;
        if (pattern == source) {
            v[i ^ flips] = v[i] * f;
        }
        if (pattern != dest) {
            v[i] = 0.0;
        }
    }
}

/// Pauli X on qubit n: flips bit n of every basis index.
inline void apply_pauli_x(StateVector &state, int n) {
    state.check_qubit(n, "apply_pauli_x");
    const std::size_t bit = std::size_t{1} << n;
    cplx *v = state.data();
    for (std::size_t base = 0; base < state.dim(); base += bit << 1) {
        for (std::size_t j = 0; j < bit; ++j) {
            std::swap(v[base + j], v[base + j + bit]);
        }
    }
}

/// Neel state |up down up down ...>: qubit n is down iff n is odd.
inline StateVector init_neel(int num_qubits, int max_qubits = kDefaultMaxQubits) {
    if (num_qubits % 2 != 0) {
        throw InvalidArgument("init_neel: L must be even, got " + std::to_string(num_qubits));
    }
    StateVector s(num_qubits, max_qubits);
    std::uint64_t index = 0;
    for (int q = 1; q < num_qubits; q += 2) {
        index |= std::uint64_t{1} << q;
    }
    s[0] = 0.0;
    s[index] = 1.0;
    return s;
}

/**
 * Equal superposition over left-half patterns k with zero half-chain charge,
 * each paired with its mirror image on the right half (qubit L/2+i copies
 * qubit L/2-1-i). Both halves carry zero charge in every branch, so the
 * half-chain charge does not fluctuate while the Schmidt spectrum is flat
 * with C(L/2, L/4) entries.
 */
inline StateVector init_mirrored_zero_charge(int num_qubits,
                                             int max_qubits = kDefaultMaxQubits) {
    if (num_qubits % 4 != 0) {
        throw InvalidArgument("init_mirrored_zero_charge: L must be divisible by 4, got " +
                              std::to_string(num_qubits));
    }
    StateVector s(num_qubits, max_qubits);
    s[0] = 0.0;
    const int half = num_qubits / 2;
    std::vector<std::uint64_t> branches;
    for (std::uint64_t k = 0; k < (std::uint64_t{1} << half); ++k) {
        if (std::popcount(k) != half / 2) {
            continue;
        }
        std::uint64_t mirror = 0;
        for (int i = 0; i < half; ++i) {
            if ((k >> (half - 1 - i)) & 1U) {
                mirror |= std::uint64_t{1} << i;
            }
        }
        branches.push_back(k | (mirror << half));
    }
    const double amp = 1.0 / std::sqrt(static_cast<double>(branches.size()));
    for (auto idx : branches) {
        s[idx] = amp;
    }
    return s;
}

} // namespace steerq
