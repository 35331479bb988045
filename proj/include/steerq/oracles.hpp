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
 * @file oracles.hpp
 * Closed-form references used to check simulations: the weak-measurement
 * spectrum of a half-chain in the zero-charge sector, its entropies and
 * charge variance, sample-budget estimates for the steering protocol,
 * chi-squared lemma checks, and a dense brute-force reference for tiny
 * states.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "steerq/errors.hpp"
#include "steerq/observables.hpp"
#include "steerq/rng.hpp"
#include "steerq/state_vector.hpp"

namespace steerq {

/// Exact binomial coefficient; exact for every n <= 62.
[[nodiscard]] constexpr std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) {
        return 0;
    }
    if (n > 62) {
        throw InvalidArgument("binomial: n > 62 would overflow");
    }
    k = k < n - k ? k : n - k;
    std::uint64_t r = 1;
    // r * (n - k + i) / i stays integral at every step.
    for (int i = 1; i <= k; ++i) {
        r = r / static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n - k + i) +
            r % static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n - k + i) /
                static_cast<std::uint64_t>(i);
    }
    return r;
}

struct SpectrumBlock {
    int charge = 0; // number of down spins in the half
    std::uint64_t dimension = 0;
    std::uint64_t numerator = 0; // eigenvalue = numerator / denominator
    double eigenvalue = 0.0;
};

struct AnalyticSpectrum {
    int num_qubits = 0;
    std::uint64_t denominator = 0;
    std::vector<SpectrumBlock> blocks;
    /// sum of dimension * numerator == denominator, checked in integers.
    bool trace_exact = false;

    [[nodiscard]] double trace() const {
        double t = 0.0;
        for (const auto &b : blocks) {
            t += static_cast<double>(b.dimension) * b.eigenvalue;
        }
        return t;
    }
};

inline void check_even_size(int num_qubits, const char *who) {
    if (num_qubits < 2 || num_qubits % 2 != 0) {
        throw InvalidArgument(std::string(who) + ": L must be even and >= 2");
    }
    if (num_qubits > 60) {
        throw InvalidArgument(std::string(who) + ": L above 60 not supported");
    }
}

/**
 * Half-chain reduced density matrix of a random zero-charge state with all
 * amplitudes of equal weight: block Q has dimension C(L/2, Q) and the
 * degenerate eigenvalue C(L/2, L/2 - Q) / C(L, L/2).
 */
[[nodiscard]] inline AnalyticSpectrum oracle_spectrum(int num_qubits) {
    check_even_size(num_qubits, "oracle_spectrum");
    const int half = num_qubits / 2;
    AnalyticSpectrum s;
    s.num_qubits = num_qubits;
    s.denominator = binomial(num_qubits, half);
    std::uint64_t sum = 0;
    for (int q = 0; q <= half; ++q) {
        SpectrumBlock b;
        b.charge = q;
        b.dimension = binomial(half, q);
        b.numerator = binomial(half, half - q);
        b.eigenvalue = static_cast<double>(b.numerator) / static_cast<double>(s.denominator);
        sum += b.dimension * b.numerator;
        s.blocks.push_back(b);
    }
    s.trace_exact = sum == s.denominator;
    return s;
}

struct OracleEntropy {
    double exact = 0.0;
    double leading = 0.0; // (1/2) ln C(L, L/2)
};

[[nodiscard]] inline OracleEntropy oracle_entropy(int num_qubits, double renyi_index = 1.0) {
    if (!(renyi_index >= 1.0)) {
        throw InvalidArgument("oracle_entropy: Renyi index must be >= 1");
    }
    const auto s = oracle_spectrum(num_qubits);
    OracleEntropy out;
    out.leading = 0.5 * std::log(static_cast<double>(s.denominator));
    if (renyi_index == 1.0) {
        for (const auto &b : s.blocks) {
            out.exact -= static_cast<double>(b.dimension) * b.eigenvalue * std::log(b.eigenvalue);
        }
    } else {
        double tr = 0.0;
        for (const auto &b : s.blocks) {
            tr += static_cast<double>(b.dimension) * std::pow(b.eigenvalue, renyi_index);
        }
        out.exact = std::log(tr) / (1.0 - renyi_index);
    }
    return out;
}

/// Half-chain charge variance L^2 / (4 (L - 1)) of the random zero-charge state.
[[nodiscard]] inline double oracle_variance(int num_qubits) {
    if (num_qubits < 4 || num_qubits % 2 != 0) {
        throw InvalidArgument("oracle_variance: L must be even and >= 4");
    }
    const double l = num_qubits;
    return 0.25 * l * l / (l - 1.0);
}

struct Overhead {
    double saturated_variance = 0.0;
    std::uint64_t sector0_shots = 0;
    std::uint64_t total_shots = 0;
};

/**
 * Shots needed to pin the sector-zero variance to relative precision eps:
 * N_0 = ceil(2 v^2 / eps), and N_s = ceil(N_0 sqrt(L) / c) once the
 * sector-zero success fraction c / sqrt(L) is folded in.
 */
[[nodiscard]] inline Overhead overhead_estimate(int num_qubits, double eps,
                                                std::optional<double> saturated_variance = {},
                                                double success_constant = 1.0) {
    if (!(eps > 0.0)) {
        throw InvalidArgument("overhead_estimate: eps must be positive");
    }
    if (!(success_constant > 0.0)) {
        throw InvalidArgument("overhead_estimate: success constant must be positive");
    }
    Overhead o;
    o.saturated_variance = saturated_variance.value_or(oracle_variance(num_qubits));
    const double v = o.saturated_variance;
    o.sector0_shots = static_cast<std::uint64_t>(std::ceil(2.0 * v * v / eps));
    o.total_shots = static_cast<std::uint64_t>(
        std::ceil(static_cast<double>(o.sector0_shots) * std::sqrt(static_cast<double>(num_qubits)) /
                  success_constant));
    return o;
}

/// Variance of a sample variance from N Gaussian draws: 2 v^2 / N.
[[nodiscard]] inline double variance_of_variance(std::uint64_t samples, double variance) {
    if (samples < 2) {
        throw InvalidArgument("variance_of_variance: need N >= 2");
    }
    return 2.0 * variance * variance / static_cast<double>(samples);
}

// ---------------------------------------------------------------------------

struct LemmaCheck {
    std::string name;
    double estimate = 0.0;
    double expected = 0.0;
    double stderr_ = 0.0;
    bool pass = false;
};

struct LemmaReport {
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
    std::vector<LemmaCheck> checks;

    [[nodiscard]] bool passed() const {
        for (const auto &c : checks) {
            if (!c.pass) {
                return false;
            }
        }
        return !checks.empty();
    }

    /// One `key = value` line per quantity.
    [[nodiscard]] std::string to_text() const {
        std::ostringstream os;
        os.precision(10);
        os << "samples = " << samples << "\nseed = " << seed << '\n';
        for (const auto &c : checks) {
            os << c.name << ".estimate = " << c.estimate << '\n'
               << c.name << ".expected = " << c.expected << '\n'
               << c.name << ".stderr = " << c.stderr_ << '\n'
               << c.name << ".result = " << (c.pass ? "PASS" : "FAIL") << '\n';
        }
        os << "overall = " << (passed() ? "PASS" : "FAIL") << '\n';
        return os.str();
    }
};

namespace detail {

struct MomentSummary {
    double mean = 0.0;
    double variance = 0.0;
    double se_mean = 0.0;
    double se_variance = 0.0;
};

// Sample mean and variance with large-sample standard errors; the variance
// error uses the empirical fourth central moment.
inline MomentSummary summarize(const std::vector<double> &v) {
    const double n = static_cast<double>(v.size());
    MomentSummary s;
    for (double x : v) {
        s.mean += x;
    }
    s.mean /= n;
    double m2 = 0.0, m4 = 0.0;
    for (double x : v) {
        const double d = (x - s.mean) * (x - s.mean);
        m2 += d;
        m4 += d * d;
    }
    m2 /= n;
    m4 /= n;
    s.variance = m2 * n / (n - 1.0);
    s.se_mean = std::sqrt(m2 / n);
    s.se_variance = std::sqrt(std::max(m4 - m2 * m2, 0.0) / n);
    return s;
}

inline LemmaCheck make_check(std::string name, double est, double expected, double se) {
    return {std::move(name), est, expected, se, std::abs(est - expected) <= 5.0 * se};
}

} // namespace detail

/**
 * Monte Carlo checks of the chi-squared facts behind the variance-of-variance
 * estimate, each within five standard errors:
 *   y = x^2 for standard normal x has mean 1 and variance 2;
 *   a sum of k independent copies has mean k and variance 2k;
 *   Y = sum_{i<=n} x_i^2 - x_{n+1}^2 with x_{n+1} = sqrt(n) xbar (the
 *   sample-mean term of the same draw) has variance 2(n - 1).
 */
[[nodiscard]] inline LemmaReport lemma_checks(std::uint64_t samples, std::uint64_t seed = 0,
                                              int k = 3, int n = 5) {
    if (samples < 10000) {
        throw InvalidArgument("lemma_checks: need at least 10^4 samples");
    }
    if (k < 1 || n < 2) {
        throw InvalidArgument("lemma_checks: need k >= 1 and n >= 2");
    }
    LemmaReport rep;
    rep.samples = samples;
    rep.seed = seed;
    std::normal_distribution<double> normal;

    Stream single(seed, "lemmas/single");
    std::vector<double> y(samples);
    for (auto &v : y) {
        const double x = normal(single);
        v = x * x;
    }
    const auto s1 = detail::summarize(y);
    rep.checks.push_back(detail::make_check("chi2_1.mean", s1.mean, 1.0, s1.se_mean));
    rep.checks.push_back(detail::make_check("chi2_1.variance", s1.variance, 2.0, s1.se_variance));

    Stream summed(seed, "lemmas/sum");
    for (auto &v : y) {
        v = 0.0;
        for (int i = 0; i < k; ++i) {
            const double x = normal(summed);
            v += x * x;
        }
    }
    const auto s2 = detail::summarize(y);
    rep.checks.push_back(detail::make_check("sum_k.mean", s2.mean, k, s2.se_mean));
    rep.checks.push_back(detail::make_check("sum_k.variance", s2.variance, 2.0 * k, s2.se_variance));

    Stream centred(seed, "lemmas/centred");
    std::vector<double> x(static_cast<std::size_t>(n));
    for (auto &v : y) {
        double sum = 0.0, sq = 0.0;
        for (auto &xi : x) {
            xi = normal(centred);
            sum += xi;
            sq += xi * xi;
        }
        const double last = sum / std::sqrt(static_cast<double>(n));
        v = sq - last * last;
    }
    const auto s3 = detail::summarize(y);
    rep.checks.push_back(detail::make_check("centred.mean", s3.mean, n - 1.0, s3.se_mean));
    rep.checks.push_back(
        detail::make_check("centred.variance", s3.variance, 2.0 * (n - 1.0), s3.se_variance));
    return rep;
}

// ---------------------------------------------------------------------------

struct BruteForceResult {
    std::vector<double> spectrum; // descending
    double entropy = 0.0;
    double mean = 0.0;
    double variance = 0.0;
};

/**
 * Dense reference for L <= 6: full density matrix, explicit partial trace
 * over [L_s, L), eigen-decomposition, and charge moments from dense operator
 * products Tr(rho Z) and Tr(rho Z^2).
 */
[[nodiscard]] inline BruteForceResult brute_force_reference(const StateVector &state,
                                                            int subsystem_size) {
    const int L = state.num_qubits();
    if (L > 6) {
        throw InvalidArgument("brute_force_reference: L must be <= 6");
    }
    check_subsystem(state, subsystem_size, "brute_force_reference");
    const Eigen::Index dim = Eigen::Index{1} << L;
    const Eigen::Index da = Eigen::Index{1} << subsystem_size;
    const Eigen::Index db = dim / da;
    const Eigen::Map<const Eigen::VectorXcd> psi(state.data(), dim);
    const Eigen::MatrixXcd rho = psi * psi.adjoint();

    Eigen::MatrixXcd rho_a = Eigen::MatrixXcd::Zero(da, da);
    for (Eigen::Index a = 0; a < da; ++a) {
        for (Eigen::Index a2 = 0; a2 < da; ++a2) {
            for (Eigen::Index b = 0; b < db; ++b) {
                rho_a(a, a2) += rho(a + b * da, a2 + b * da);
            }
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho_a, Eigen::EigenvaluesOnly);
    BruteForceResult out;
    for (Eigen::Index i = 0; i < da; ++i) {
        out.spectrum.push_back(std::max(es.eigenvalues()[i], 0.0));
    }
    std::sort(out.spectrum.begin(), out.spectrum.end(), std::greater<>());
    out.entropy = spectrum_entropy(out.spectrum, 1.0);

    // Z_{L_s} = sum_{n < L_s} sigma^z_n as a dense operator.
    Eigen::MatrixXcd z = Eigen::MatrixXcd::Zero(dim, dim);
    for (int q = 0; q < subsystem_size; ++q) {
        for (Eigen::Index i = 0; i < dim; ++i) {
            z(i, i) += ((i >> q) & 1) ? -1.0 : 1.0;
        }
    }
    const double norm = rho.trace().real();
    out.mean = (rho * z).trace().real() / norm;
    out.variance = (rho * z * z).trace().real() / norm - out.mean * out.mean;
    return out;
}

} // namespace steerq
