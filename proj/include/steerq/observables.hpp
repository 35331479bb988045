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
 * @file observables.hpp
 * Exact observables of a pure state: Schmidt spectra, von Neumann and Renyi
 * entropies of the left block [0, L_s), subsystem charge moments and the
 * total- and subsystem-charge distributions.
 */

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "steerq/errors.hpp"
#include "steerq/state_vector.hpp"

namespace steerq {

/// Charge of the left block [0, L_s) in basis state `index`: sum of sigma_n.
[[nodiscard]] inline int subsystem_charge(std::uint64_t index, int subsystem_size) {
    const std::uint64_t mask = (std::uint64_t{1} << subsystem_size) - 1;
    return subsystem_size - 2 * std::popcount(index & mask);
}

/// Total charge Z_L of basis state `index` on L qubits.
[[nodiscard]] inline int total_charge(std::uint64_t index, int num_qubits) {
    return subsystem_charge(index, num_qubits);
}

struct ChargeMoments {
    double mean = 0.0;
    double variance = 0.0;
};

inline void check_subsystem(const StateVector &state, int subsystem_size, const char *who) {
    if (subsystem_size < 1 || subsystem_size > state.num_qubits() - 1) {
        throw InvalidArgument(std::string(who) + ": subsystem length " +
                              std::to_string(subsystem_size) + " outside [1, L-1]");
    }
}

/// Mean and variance of Z_{L_s} read off the diagonal weights.
[[nodiscard]] inline ChargeMoments exact_charge_moments(const StateVector &state,
                                                        int subsystem_size) {
    check_subsystem(state, subsystem_size, "exact_charge_moments");
    // Accumulate the histogram first; the moments then cost O(L_s).
    std::vector<double> weight(static_cast<std::size_t>(subsystem_size) + 1, 0.0);
    const std::uint64_t mask = (std::uint64_t{1} << subsystem_size) - 1;
    const cplx *v = state.data();
    for (std::uint64_t i = 0; i < state.dim(); ++i) {
        weight[static_cast<std::size_t>(std::popcount(i & mask))] += abs2(v[i]);
    }
    double m1 = 0.0, m2 = 0.0, total = 0.0;
    for (int k = 0; k <= subsystem_size; ++k) {
        const double z = subsystem_size - 2 * k;
        m1 += weight[k] * z;
        m2 += weight[k] * z * z;
        total += weight[k];
    }
    m1 /= total;
    m2 /= total;
    ChargeMoments out{m1, m2 - m1 * m1};
    if (out.variance < 0.0) {
        out.variance = 0.0;
    }
    return out;
}

/// Distribution of Z_L over even sectors; sectors below 1e-14 are omitted.
[[nodiscard]] inline std::map<int, double> total_charge_distribution(const StateVector &state) {
    const int L = state.num_qubits();
    std::vector<double> weight(static_cast<std::size_t>(L) + 1, 0.0);
    const cplx *v = state.data();
    for (std::uint64_t i = 0; i < state.dim(); ++i) {
        weight[static_cast<std::size_t>(std::popcount(i))] += abs2(v[i]);
    }
    std::map<int, double> out;
    for (int k = 0; k <= L; ++k) {
        if (weight[k] >= 1e-14) {
            out[L - 2 * k] = weight[k];
        }
    }
    return out;
}

/// Distribution of z_{L_s} on {-L_s, -L_s+2, ..., L_s}; index k holds z = -L_s + 2k.
[[nodiscard]] inline std::vector<double> exact_subsystem_histogram(const StateVector &state,
                                                                   int subsystem_size) {
    check_subsystem(state, subsystem_size, "exact_subsystem_histogram");
    std::vector<double> hist(static_cast<std::size_t>(subsystem_size) + 1, 0.0);
    const std::uint64_t mask = (std::uint64_t{1} << subsystem_size) - 1;
    const cplx *v = state.data();
    double total = 0.0;
    for (std::uint64_t i = 0; i < state.dim(); ++i) {
        const double w = abs2(v[i]);
        // popcount k of the block gives z = L_s - 2k, i.e. bin L_s - k.
        hist[static_cast<std::size_t>(subsystem_size - std::popcount(i & mask))] += w;
        total += w;
    }
    for (auto &h : hist) {
        h /= total;
    }
    return hist;
}

namespace detail {

inline std::vector<std::uint64_t> patterns_with_popcount(int bits, int ones) {
    std::vector<std::uint64_t> out;
    if (ones < 0 || ones > bits) {
        return out;
    }
    for (std::uint64_t k = 0; k < (std::uint64_t{1} << bits); ++k) {
        if (std::popcount(k) == ones) {
            out.push_back(k);
        }
    }
    return out;
}

inline void append_gram_eigenvalues(const Eigen::MatrixXcd &m, std::vector<double> &out) {
    if (m.size() == 0) {
        return;
    }
    Eigen::MatrixXcd gram = m.rows() <= m.cols() ? Eigen::MatrixXcd(m * m.adjoint())
                                                 : Eigen::MatrixXcd(m.adjoint() * m);
    if (gram.rows() == 1) {
        out.push_back(gram(0, 0).real());
        return;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram, Eigen::EigenvaluesOnly);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        out.push_back(es.eigenvalues()[i]);
    }
}

// Index of the dominant popcount sector and the weight outside it.
inline std::pair<int, double> dominant_sector(const StateVector &state) {
    std::vector<double> w(static_cast<std::size_t>(state.num_qubits()) + 1, 0.0);
    for (std::uint64_t i = 0; i < state.dim(); ++i) {
        w[static_cast<std::size_t>(std::popcount(i))] += abs2(state[i]);
    }
    const auto it = std::max_element(w.begin(), w.end());
    double total = 0.0;
    for (double x : w) {
        total += x;
    }
    return {static_cast<int>(it - w.begin()), total - *it};
}

} // namespace detail

/**
 * Eigenvalues of the reduced density matrix of the block [0, L_s), sorted in
 * decreasing order and clamped at zero. States confined to one total-charge
 * sector use the block-diagonal structure of rho_s (one small Gram matrix per
 * block charge); anything else falls back to the dense Gram matrix of the
 * L_s | L - L_s reshaping.
 */
[[nodiscard]] inline std::vector<double> schmidt_spectrum(const StateVector &state,
                                                          int subsystem_size) {
    check_subsystem(state, subsystem_size, "schmidt_spectrum");
    const int L = state.num_qubits();
    const int ls = subsystem_size;
    const int lb = L - ls;
    std::vector<double> eig;

    const auto [ones, leak] = detail::dominant_sector(state);
    if (leak <= 1e-20) {
        for (int qa = std::max(0, ones - lb); qa <= std::min(ls, ones); ++qa) {
            const auto rows = detail::patterns_with_popcount(ls, qa);
            const auto cols = detail::patterns_with_popcount(lb, ones - qa);
            Eigen::MatrixXcd m(static_cast<Eigen::Index>(rows.size()),
                               static_cast<Eigen::Index>(cols.size()));
            for (std::size_t c = 0; c < cols.size(); ++c) {
                for (std::size_t r = 0; r < rows.size(); ++r) {
                    m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                        state[rows[r] | (cols[c] << ls)];
                }
            }
            detail::append_gram_eigenvalues(m, eig);
        }
    } else {
        const Eigen::Map<const Eigen::MatrixXcd> m(state.data(), Eigen::Index{1} << ls,
                                                   Eigen::Index{1} << lb);
        detail::append_gram_eigenvalues(m, eig);
    }
    for (auto &x : eig) {
        x = std::max(x, 0.0);
    }
    std::sort(eig.begin(), eig.end(), std::greater<>());
    return eig;
}

/// Eigenvalues below this are dropped from -sum x ln x.
inline constexpr double kEntropyCutoff = 1e-12;

/// Renyi entropy of order n >= 1 of a spectrum; n == 1 is von Neumann. Nats.
[[nodiscard]] inline double spectrum_entropy(const std::vector<double> &spectrum,
                                             double renyi_index) {
    if (!(renyi_index >= 1.0)) {
        throw InvalidArgument("entropy: Renyi index must be >= 1");
    }
    if (renyi_index == 1.0) {
        double s = 0.0;
        for (double x : spectrum) {
            if (x > kEntropyCutoff) {
                s -= x * std::log(x);
            }
        }
        return s;
    }
    double tr = 0.0;
    for (double x : spectrum) {
        tr += std::pow(x, renyi_index);
    }
    return std::log(tr) / (1.0 - renyi_index);
}

[[nodiscard]] inline double entanglement_entropy(const StateVector &state, int subsystem_size,
                                                 double renyi_index = 1.0) {
    return spectrum_entropy(schmidt_spectrum(state, subsystem_size), renyi_index);
}

} // namespace steerq
