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


#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "steerq/estimators.hpp"
#include "steerq/oracles.hpp"

TEST(BinomialTest, ExactValues) {
    EXPECT_EQ(steerq::binomial(4, 2), 6U);
    EXPECT_EQ(steerq::binomial(40, 20), 137846528820ULL);
    EXPECT_EQ(steerq::binomial(62, 31), 465428353255261088ULL);
    EXPECT_EQ(steerq::binomial(5, 7), 0U);
    EXPECT_THROW((void)steerq::binomial(63, 3), steerq::InvalidArgument);
}

TEST(OracleSpectrumTest, FourQubits) {
    const auto s = steerq::oracle_spectrum(4);
    ASSERT_EQ(s.blocks.size(), 3U);
    EXPECT_EQ(s.blocks[0].dimension, 1U);
    EXPECT_NEAR(s.blocks[0].eigenvalue, 1.0 / 6, 1e-15);
    EXPECT_EQ(s.blocks[1].dimension, 2U);
    EXPECT_NEAR(s.blocks[1].eigenvalue, 1.0 / 3, 1e-15);
    EXPECT_EQ(s.blocks[2].dimension, 1U);
    EXPECT_NEAR(s.blocks[2].eigenvalue, 1.0 / 6, 1e-15);
    EXPECT_TRUE(s.trace_exact);
    EXPECT_NEAR(s.trace(), 1.0, 1e-15);
}

TEST(OracleSpectrumTest, TwoQubits) {
    const auto s = steerq::oracle_spectrum(2);
    ASSERT_EQ(s.blocks.size(), 2U);
    for (const auto &b : s.blocks) {
        EXPECT_EQ(b.dimension, 1U);
        EXPECT_DOUBLE_EQ(b.eigenvalue, 0.5);
    }
    EXPECT_TRUE(s.trace_exact);
}

TEST(OracleSpectrumTest, TraceExactUpToForty) {
    for (int L = 2; L <= 40; L += 2) {
        const auto s = steerq::oracle_spectrum(L);
        EXPECT_TRUE(s.trace_exact) << L;
        EXPECT_NEAR(s.trace(), 1.0, 1e-12) << L;
    }
    EXPECT_THROW((void)steerq::oracle_spectrum(5), steerq::InvalidArgument);
}

TEST(OracleEntropyTest, FourQubits) {
    const auto e = steerq::oracle_entropy(4);
    EXPECT_NEAR(e.exact, std::log(6.0) / 3 + 2 * std::log(3.0) / 3, 1e-12);
    EXPECT_NEAR(e.exact, 1.3297, 1e-4);
    EXPECT_NEAR(e.leading, 0.5 * std::log(6.0), 1e-12);
    EXPECT_NEAR(e.leading, 0.8959, 1e-4);
    EXPECT_THROW((void)steerq::oracle_entropy(7), steerq::InvalidArgument);
    EXPECT_THROW((void)steerq::oracle_entropy(4, 0.5), steerq::InvalidArgument);
}

TEST(OracleEntropyTest, NonIncreasingInRenyiIndex) {
    for (int L = 2; L <= 40; L += 2) {
        double prev = steerq::oracle_entropy(L, 1.0).exact;
        for (double n : {1.5, 2.0, 3.0, 5.0}) {
            const double s = steerq::oracle_entropy(L, n).exact;
            EXPECT_LE(s, prev + 1e-12) << L << " " << n;
            prev = s;
        }
    }
}

TEST(OracleEntropyTest, LargeSizeBehaviour) {
    // Both values approach (L/2) ln 2 to leading order; their gap grows
    // like ln L.
    for (int L : {20, 40, 60}) {
        const auto e = steerq::oracle_entropy(L);
        const double volume = 0.5 * L * std::numbers::ln2;
        EXPECT_NEAR(e.exact / volume, 1.0, 0.12) << L;
        EXPECT_NEAR(e.leading / volume, 1.0, 0.15) << L;
        const double gap = e.exact - e.leading;
        EXPECT_GT(gap, 0.1 * std::log(L));
        EXPECT_LT(gap, 0.5 * std::log(L));
    }
}

TEST(OracleEntropyTest, RatioToVarianceApproachesTwoLnTwo) {
    double prev_gap = 1.0;
    for (int L = 8; L <= 60; L += 4) {
        const double ratio = steerq::oracle_entropy(L).exact / steerq::oracle_variance(L);
        const double gap = 2 * std::numbers::ln2 - ratio;
        EXPECT_GT(gap, 0.0);
        EXPECT_LT(gap, prev_gap) << L;
        prev_gap = gap;
    }
    EXPECT_LT(prev_gap / (2 * std::numbers::ln2), 0.03);
}

TEST(OracleVarianceTest, Values) {
    EXPECT_NEAR(steerq::oracle_variance(4), 4.0 / 3, 1e-15);
    EXPECT_NEAR(steerq::oracle_variance(8), 16.0 / 7, 1e-15);
    EXPECT_NEAR(steerq::oracle_variance(100000) / 100000, 0.25, 1e-5);
    EXPECT_THROW((void)steerq::oracle_variance(2), steerq::InvalidArgument);
    EXPECT_THROW((void)steerq::oracle_variance(9), steerq::InvalidArgument);
}

TEST(OracleVarianceTest, EqualsHypergeometricVarianceOfUniformSector) {
    // A zero-charge state with uniform weights gives z_{L/2} the
    // hypergeometric distribution; its variance is the oracle value.
    for (int L : {4, 8, 12}) {
        std::vector<steerq::cplx> a(std::size_t{1} << L);
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (std::popcount(i) == L / 2) {
                a[i] = 1.0;
            }
        }
        const auto s = steerq::StateVector::from_amplitudes(L, a);
        EXPECT_NEAR(steerq::exact_charge_moments(s, L / 2).variance, steerq::oracle_variance(L),
                    1e-12);
    }
}

TEST(OverheadTest, SixteenQubits) {
    const auto o = steerq::overhead_estimate(16, 0.01);
    EXPECT_NEAR(o.saturated_variance, 256.0 / 60, 1e-12);
    // 2 (256/60)^2 / 0.01 = 3640.89
    EXPECT_EQ(o.sector0_shots, 3641U);
    EXPECT_EQ(o.total_shots, 14564U);
    EXPECT_THROW((void)steerq::overhead_estimate(16, 0.0), steerq::InvalidArgument);
}

TEST(OverheadTest, ScalingAndLinearity) {
    const double r = static_cast<double>(steerq::overhead_estimate(40000, 0.01).total_shots) /
                     static_cast<double>(steerq::overhead_estimate(20000, 0.01).total_shots);
    EXPECT_NEAR(r, std::pow(2.0, 2.5), 1e-3);
    for (int L : {8, 12, 16}) {
        const auto a = steerq::overhead_estimate(L, 0.02);
        const auto b = steerq::overhead_estimate(L, 0.01);
        EXPECT_LE(std::llabs(static_cast<long long>(b.sector0_shots) -
                             2 * static_cast<long long>(a.sector0_shots)),
                  1);
        EXPECT_NEAR(static_cast<double>(b.total_shots) / static_cast<double>(a.total_shots), 2.0,
                    0.01);
    }
    const auto c = steerq::overhead_estimate(16, 0.01, 4.0, 0.5);
    EXPECT_EQ(c.sector0_shots, 3200U);
    EXPECT_EQ(c.total_shots, 25600U);
}

TEST(VarianceOfVarianceTest, Formula) {
    EXPECT_NEAR(steerq::variance_of_variance(1000, 4.0), 0.032, 1e-15);
    EXPECT_NEAR(steerq::variance_of_variance(2000, 4.0), 0.016, 1e-15);
    EXPECT_THROW((void)steerq::variance_of_variance(1, 4.0), steerq::InvalidArgument);
}

TEST(VarianceOfVarianceTest, GaussianBatches) {
    steerq::Stream rng(8, "test/varvar");
    std::normal_distribution<double> g(0.0, 2.0);
    const std::size_t n = 500, batches = 2000;
    std::vector<double> vars;
    std::vector<double> batch(n);
    for (std::size_t b = 0; b < batches; ++b) {
        for (auto &x : batch) {
            x = g(rng);
        }
        vars.push_back(steerq::sample_variance(batch, true));
    }
    const double spread = steerq::sample_variance(vars, true);
    EXPECT_NEAR(spread, steerq::variance_of_variance(n, 4.0),
                0.2 * steerq::variance_of_variance(n, 4.0));
}

TEST(LemmaTest, ReportPasses) {
    const auto rep = steerq::lemma_checks(100000, 1);
    EXPECT_TRUE(rep.passed()) << rep.to_text();
    EXPECT_EQ(rep.checks.size(), 6U);
    const auto text = rep.to_text();
    EXPECT_NE(text.find("chi2_1.variance.expected = 2"), std::string::npos);
    EXPECT_NE(text.find("centred.variance.expected = 8"), std::string::npos);
    EXPECT_NE(text.find("overall = PASS"), std::string::npos);
    EXPECT_THROW((void)steerq::lemma_checks(100), steerq::InvalidArgument);
}

TEST(LemmaTest, IndependentExtraDrawWouldFail) {
    // With x_{n+1} drawn independently Y has variance 2(n+1), not 2(n-1).
    steerq::Stream rng(2, "test/lemma");
    std::normal_distribution<double> g;
    const int n = 5;
    std::vector<double> y(100000);
    for (auto &v : y) {
        double sq = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = g(rng);
            sq += x * x;
        }
        const double extra = g(rng);
        v = sq - extra * extra;
    }
    EXPECT_NEAR(steerq::sample_variance(y, true), 2.0 * (n + 1), 0.3);
}

TEST(BruteForceTest, SimpleStates) {
    std::vector<steerq::cplx> bell(4);
    bell[1] = bell[2] = 1.0;
    const auto b = steerq::brute_force_reference(steerq::StateVector::from_amplitudes(2, bell), 1);
    EXPECT_NEAR(b.entropy, std::numbers::ln2, 1e-12);
    const auto n = steerq::brute_force_reference(steerq::init_neel(4), 2);
    EXPECT_NEAR(n.entropy, 0.0, 1e-12);
    EXPECT_NEAR(n.variance, 0.0, 1e-12);
    EXPECT_THROW((void)steerq::brute_force_reference(steerq::init_neel(8), 4),
                 steerq::InvalidArgument);
}
