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
#include <map>
#include <numbers>
#include <random>
#include <vector>

#include "steerq/estimators.hpp"
#include "steerq/oracles.hpp"

namespace {

// Shot whose left block of length ls has z = ls - 2*down, on L qubits.
steerq::ShotRecord shot_with(std::uint64_t readout, int L, std::size_t run = 0) {
    steerq::ShotRecord s;
    s.run = run;
    s.num_qubits = L;
    s.readout = readout;
    s.total_charge = steerq::total_charge(readout, L);
    return s;
}

// Readout on L=4 whose first two qubits carry charge z in {-2, 0, 2}.
std::uint64_t two_site_pattern(int z) {
    switch (z) {
    case 2:
        return 0b1100; // left block up up
    case 0:
        return 0b1001;
    default:
        return 0b0011;
    }
}

std::vector<steerq::ShotRecord> shots_from_z(const std::vector<int> &zs) {
    std::vector<steerq::ShotRecord> out;
    for (std::size_t i = 0; i < zs.size(); ++i) {
        out.push_back(shot_with(two_site_pattern(zs[i]), 4, i));
    }
    return out;
}

} // namespace

TEST(FilterSectorTest, KeepsMatchingShotsInOrder) {
    // Total charges 0, 4, 0 on L=4.
    const std::vector<steerq::ShotRecord> shots{shot_with(0b0101, 4, 0), shot_with(0b0000, 4, 1),
                                                shot_with(0b0011, 4, 2)};
    const auto zero = steerq::filter_sector(shots, 0);
    ASSERT_EQ(zero.size(), 2U);
    EXPECT_EQ(zero[0].run, 0U);
    EXPECT_EQ(zero[1].run, 2U);
    EXPECT_TRUE(steerq::filter_sector(shots, 1).empty());
    std::size_t total = 0;
    for (int q = -4; q <= 4; q += 2) {
        total += steerq::filter_sector(shots, q).size();
    }
    EXPECT_EQ(total, shots.size());
}

TEST(SampleVarianceTest, Arithmetic) {
    const std::vector<double> z{0, 2, -2, 0};
    EXPECT_DOUBLE_EQ(steerq::sample_variance(z, false), 2.0);
    EXPECT_DOUBLE_EQ(steerq::sample_variance(z, true), 8.0 / 3.0);
    const auto shots = shots_from_z({0, 2, -2, 0});
    EXPECT_DOUBLE_EQ(steerq::sample_variance(shots, 2, true), 8.0 / 3.0);
    const std::vector<double> same{1.5, 1.5, 1.5};
    EXPECT_DOUBLE_EQ(steerq::sample_variance(same, true), 0.0);
    const std::vector<double> one{1.0};
    EXPECT_THROW((void)steerq::sample_variance(one, true), steerq::InsufficientData);
    EXPECT_DOUBLE_EQ(steerq::sample_variance(one, false), 0.0);
    EXPECT_THROW((void)steerq::sample_variance(std::vector<double>{}, false),
                 steerq::InsufficientData);
}

TEST(SampleVarianceTest, ConvergesToExactMoments) {
    // Mirrored L=8 state evolved a little: a generic zero-charge state.
    auto c = steerq::sample_realization(8, 0.0, 4, 0, 3);
    const auto t = steerq::run_target(c, 1);
    const auto &state = *t.final_state;
    const auto exact = steerq::exact_charge_moments(state, 3);
    steerq::Stream u(4, "test/readout");
    const std::size_t n = 100000;
    std::vector<double> z(n);
    for (auto &v : z) {
        v = steerq::subsystem_charge(steerq::sample_readout(state, u.uniform()), 3);
    }
    const double var = steerq::sample_variance(z, true);
    // Standard error of a sample variance from the fourth central moment.
    double mean = 0, m4 = 0;
    for (double v : z) {
        mean += v;
    }
    mean /= n;
    for (double v : z) {
        m4 += std::pow(v - mean, 4);
    }
    m4 /= n;
    const double se = std::sqrt((m4 - var * var) / n);
    EXPECT_NEAR(var, exact.variance, 3.0 * se);
}

TEST(SectorStatsTest, CountsPartitionShots) {
    const std::vector<steerq::ShotRecord> shots{shot_with(0b0101, 4), shot_with(0b0000, 4),
                                                shot_with(0b0011, 4), shot_with(0b0110, 4)};
    const std::vector<int> ls{1, 2};
    const auto stats = steerq::sector_statistics(shots, ls, true);
    std::size_t total = 0;
    for (const auto &s : stats) {
        total += s.count;
        for (double v : s.variances) {
            EXPECT_GE(v, 0.0);
        }
    }
    EXPECT_EQ(total, shots.size());
    EXPECT_EQ(stats.front().sector, 0);
    EXPECT_EQ(stats.front().count, 3U);
}

TEST(AverageTest, MeanAndError) {
    const std::vector<double> same{0.7, 0.7, 0.7};
    const auto a = steerq::average_over_targets(same);
    EXPECT_DOUBLE_EQ(a.mean, 0.7);
    EXPECT_DOUBLE_EQ(a.stderr_, 0.0);
    const std::vector<double> two{1.0, 3.0};
    const auto b = steerq::average_over_targets(two);
    EXPECT_DOUBLE_EQ(b.mean, 2.0);
    EXPECT_DOUBLE_EQ(b.stderr_, 1.0);
    EXPECT_THROW((void)steerq::average_over_targets(std::vector<double>{}),
                 steerq::InsufficientData);
}

TEST(AverageTest, PoolingDiffersFromPerTargetAverage) {
    // Two targets with the same spread but different means: pooling adds the
    // spread of the means.
    const std::vector<std::vector<steerq::ShotRecord>> targets{shots_from_z({0, 2, 0, 2}),
                                                               shots_from_z({0, -2, 0, -2})};
    std::vector<double> per;
    for (const auto &t : targets) {
        per.push_back(steerq::sample_variance(t, 2, false));
    }
    const double averaged = steerq::average_over_targets(per).mean;
    const double pooled = steerq::pooled_variance(targets, 2, false);
    EXPECT_DOUBLE_EQ(averaged, 1.0);
    EXPECT_DOUBLE_EQ(pooled, 2.0);
    EXPECT_GT(pooled, averaged);
}

TEST(CvTest, Arithmetic) {
    EXPECT_NEAR(steerq::extract_cv(1.5, 1.3, 1), 0.1, 1e-15);
    EXPECT_NEAR(steerq::extract_cv(1.5, 1.1, 3), 0.1, 1e-15);
    const std::map<int, double> curve{{3, 1.1}, {5, 1.3}, {6, 1.5}};
    EXPECT_NEAR(steerq::extract_cv(curve, 6), 0.1, 1e-15);
    EXPECT_NEAR(steerq::extract_cv(curve, 6, 3), 0.1, 1e-15);
    EXPECT_THROW((void)steerq::extract_cv(curve, 4), steerq::InvalidArgument);
    EXPECT_THROW((void)steerq::extract_cv(curve, 6, 2), steerq::InvalidArgument);
    EXPECT_THROW((void)steerq::extract_cv(curve, 6, 5), steerq::InvalidArgument);
}

TEST(CvTest, PairSelection) {
    const std::vector<int> sizes{6, 8, 10, 12, 14, 16};
    const auto at = [&](int L, int j = 1, int h = 0) {
        const auto p = steerq::select_cv_pair(sizes, L, j, h);
        return p ? std::pair{p->upper, p->lower} : std::pair{0, 0};
    };
    EXPECT_EQ(at(16), (std::pair{16, 14}));
    EXPECT_EQ(at(14), (std::pair{12, 10}));
    EXPECT_EQ(at(12), (std::pair{12, 10}));
    EXPECT_EQ(at(10), (std::pair{8, 6}));
    EXPECT_EQ(at(8), (std::pair{8, 6}));
    EXPECT_EQ(at(16, 3), (std::pair{16, 10}));
    EXPECT_EQ(at(12, 3), (std::pair{12, 6}));
    EXPECT_EQ(at(16, 1, 4), (std::pair{8, 6}));
    // missing own partner: fall back to the largest available pair
    const std::vector<int> gap{8, 10, 12, 16};
    const auto fb = steerq::select_cv_pair(gap, 16);
    ASSERT_TRUE(fb.has_value());
    EXPECT_EQ(fb->upper, 12);
    EXPECT_EQ(fb->lower, 10);
    const std::vector<int> even_only{8, 12, 16};
    EXPECT_FALSE(steerq::select_cv_pair(even_only, 12).has_value());
    EXPECT_THROW((void)steerq::select_cv_pair(sizes, 12, 2), steerq::InvalidArgument);
}

TEST(CvTest, CrossSizeCorrection) {
    std::map<int, steerq::HalfChainPoint> by_size;
    by_size[8].sector0 = {0.5, 0.03, 10};
    by_size[10].sector0 = {0.5, 0.04, 10};
    by_size[12].sector0 = {0.7, 0.05, 10};
    for (auto &[L, pt] : by_size) {
        pt.postselected = {0.1, 0.01, 10};
    }
    const steerq::CvPair pair{12, 10, 1};
    const auto c8 = steerq::correct_half_chain(0.5, by_size, 8, pair, 0.14, 1.3);
    EXPECT_NEAR(c8.cv.mean, 0.1, 1e-12);
    EXPECT_NEAR(c8.cv.stderr_, std::hypot(0.05, 0.04) / 2, 1e-12);
    // L=8: 0.5 - 0.1 * 2, independent of the pair members.
    EXPECT_NEAR(c8.corrected.mean, 0.3, 1e-12);
    EXPECT_NEAR(c8.corrected.stderr_, std::sqrt(0.03 * 0.03 + 0.05 * 0.05 + 0.04 * 0.04),
                1e-12);
    // L=12 is itself the upper member: 0.7 - 4 (0.7 - 0.5) / 2 = -0.7 + 2 * 0.5.
    const auto c12 = steerq::correct_half_chain(0.5, by_size, 12, pair, 0.14, 1.3);
    EXPECT_NEAR(c12.corrected.mean, 0.3, 1e-12);
    EXPECT_NEAR(c12.corrected.stderr_, std::hypot(0.05, 2 * 0.04), 1e-12);
    const double g = steerq::step_weight(0.5, 0.14, 1.3, 12);
    EXPECT_NEAR(c12.effective.mean, 0.7 - g * 0.1 * 4, 1e-12);
    EXPECT_NEAR(c12.postselected.mean, 0.1, 1e-15);
    const auto c10 = steerq::correct_half_chain(0.5, by_size, 10, pair, 0.14, 1.3);
    EXPECT_NEAR(c10.corrected.mean, 0.5 - 0.1 * 3, 1e-12);
    EXPECT_THROW((void)steerq::correct_half_chain(0.5, by_size, 14, pair, 0.14, 1.3),
                 steerq::InvalidArgument);
}

TEST(CorrectionTest, Arithmetic) {
    EXPECT_DOUBLE_EQ(steerq::corrected_fluctuation(1.234, 0.9, 2), 1.234);
    EXPECT_NEAR(steerq::corrected_fluctuation(1.0, 0.05, 8), 0.7, 1e-15);
}

TEST(EffectiveTest, StepLimits) {
    EXPECT_DOUBLE_EQ(steerq::step_weight(0.14, 0.14, 1.3, 12), 0.5);
    const double raw = 2.0, cv = 0.08;
    const int ls = 6, L = 12;
    const double shift = 5.0 / std::pow(L, 1.0 / 1.3);
    EXPECT_NEAR(steerq::effective_fluctuation(raw, cv, ls, 0.14 - shift, 0.14, 1.3, L), raw,
                0.01 * raw);
    const double corr = steerq::corrected_fluctuation(raw, cv, ls);
    EXPECT_NEAR(steerq::effective_fluctuation(raw, cv, ls, 0.14 + shift, 0.14, 1.3, L), corr,
                0.01 * corr);
    EXPECT_NEAR(steerq::effective_fluctuation(raw, cv, ls, -100, 0.14, 1.3, L), raw, 1e-12);
    EXPECT_NEAR(steerq::effective_fluctuation(raw, cv, ls, 100, 0.14, 1.3, L), corr, 1e-12);
    EXPECT_THROW((void)steerq::step_weight(0.1, 0.14, 0.0, 12), steerq::InvalidArgument);
}

TEST(ReconstructTest, BranchesAndContinuity) {
    EXPECT_NEAR(steerq::reconstruct_entropy(2.0), 1.84, 1e-12);
    EXPECT_NEAR(steerq::reconstruct_entropy(2.0 + 1e-12), 1.84, 1e-10);
    EXPECT_NEAR(steerq::reconstruct_entropy(1.0), 0.92, 1e-12);
    EXPECT_NEAR(steerq::reconstruct_entropy(3.0), 2 * std::numbers::ln2 + 1.84, 1e-12);
    EXPECT_NEAR(steerq::reconstruct_entropy(3.0), 3.2263, 1e-4);
    EXPECT_THROW((void)steerq::reconstruct_entropy(-0.1), steerq::InvalidArgument);
    double prev = -1.0;
    for (double v = 0.0; v < 6.0; v += 0.01) {
        const double s = steerq::reconstruct_entropy(v, 0.5);
        EXPECT_GT(s, prev);
        prev = s;
    }
}

TEST(EntropyFitTest, RecoversExactLaw) {
    std::vector<std::pair<double, double>> pts;
    for (double v = 0.1; v < 5.0; v += 0.2) {
        pts.emplace_back(v, steerq::reconstruct_entropy(v, 0.92));
    }
    const auto fit = steerq::fit_entropy_fluctuation_relation(pts);
    EXPECT_NEAR(fit.slope_low, 0.92, 1e-10);
    EXPECT_NEAR(fit.slope_high, 2 * std::numbers::ln2, 1e-10);
    EXPECT_NEAR(fit.intercept_high, 1.84 - 4 * std::numbers::ln2, 1e-10);
}

TEST(EntropyFitTest, DegenerateInputs) {
    std::vector<std::pair<double, double>> few{{1, 1}, {3, 3}};
    EXPECT_THROW((void)steerq::fit_entropy_fluctuation_relation(few), steerq::FitDegenerate);
    std::vector<std::pair<double, double>> one_side;
    for (int i = 0; i < 12; ++i) {
        one_side.emplace_back(0.1 * (i + 1), 0.09 * (i + 1));
    }
    EXPECT_THROW((void)steerq::fit_entropy_fluctuation_relation(one_side), steerq::FitDegenerate);
}

TEST(HistogramTest, ExactAndSampled) {
    const auto neel = steerq::init_neel(8);
    const auto h = steerq::exact_subsystem_histogram(neel, 2);
    EXPECT_DOUBLE_EQ(h[1], 1.0);
    const auto shots = shots_from_z({0, 2, -2, 0, 0});
    const auto hs = steerq::subsystem_charge_histogram(shots, 2);
    ASSERT_EQ(hs.size(), 3U);
    EXPECT_DOUBLE_EQ(hs[0] + hs[1] + hs[2], 1.0);
    EXPECT_DOUBLE_EQ(hs[1], 0.6);
    EXPECT_DOUBLE_EQ(steerq::total_variation_distance(hs, hs), 0.0);
    const std::vector<double> a{1, 0, 0}, b{0, 0, 1};
    EXPECT_DOUBLE_EQ(steerq::total_variation_distance(a, b), 1.0);
}

TEST(HistogramTest, SteeredSectorZeroTracksItsOwnTarget) {
    // Single-target distance fluctuates from target to target, so compare the
    // average distance to the own target with the average distance to the
    // other targets' exact distributions.
    const int L = 10, targets = 8;
    std::vector<std::vector<double>> sampled, exact;
    for (int j = 0; j < targets; ++j) {
        const auto c = steerq::sample_realization(L, 0.05, 3 * L, 0, 41 + j);
        const auto t = steerq::run_target(c, 3 + j);
        const auto shots = steerq::filter_sector(steerq::batch_steer(c, t, 2000, 9 + j), 0);
        ASSERT_GT(shots.size(), 100U);
        sampled.push_back(steerq::subsystem_charge_histogram(shots, L / 2));
        exact.push_back(steerq::exact_subsystem_histogram(*t.final_state, L / 2));
    }
    double own = 0.0, cross = 0.0;
    for (int j = 0; j < targets; ++j) {
        own += steerq::total_variation_distance(sampled[j], exact[j]);
        for (int k = 0; k < targets; ++k) {
            if (k != j) {
                cross += steerq::total_variation_distance(sampled[j], exact[k]);
            }
        }
    }
    own /= targets;
    cross /= targets * (targets - 1);
    RecordProperty("mean_own_tvd", std::to_string(own));
    RecordProperty("mean_cross_tvd", std::to_string(cross));
    EXPECT_LT(own, 0.2);
    EXPECT_LT(own, 0.6 * cross);
}

TEST(BootstrapTest, MatchesAnalyticErrorOfMean) {
    steerq::Stream rng(3, "test/boot");
    std::normal_distribution<double> g;
    std::vector<double> x(400);
    for (auto &v : x) {
        v = g(rng);
    }
    const double se = steerq::bootstrap_stderr(x.size(), [&](std::span<const std::size_t> idx) {
        double m = 0;
        for (auto i : idx) {
            m += x[i];
        }
        return m / static_cast<double>(idx.size());
    });
    const double analytic = steerq::average_over_targets(x).stderr_;
    EXPECT_NEAR(se, analytic, 0.15 * analytic);
}

TEST(CurveTest, AveragesAndSkips) {
    steerq::TargetSummary a, b, bad;
    for (auto *t : {&a, &b, &bad}) {
        t->shots = 100;
        t->sector0_shots = 30;
        t->subsystems = {3, 4, 5, 6};
        t->raw = {1.5, 2.0, 2.5, 3.0};
        t->postselected = {1.0, 1.2, 1.3, 1.4};
    }
    a.sector0 = {1.0, 1.2, 1.3, 1.5};
    b.sector0 = {1.2, 1.4, 1.5, 1.9};
    bad.sector0 = {NAN, 1.0, 1.0, 1.0};
    const std::vector<steerq::TargetSummary> ts{a, b, bad};
    const auto rows = steerq::build_curve(12, 0.5, ts);
    ASSERT_EQ(rows.size(), 4U);
    EXPECT_EQ(rows[0].sector0.count, 2U);
    EXPECT_NEAR(rows[3].sector0.mean, 1.7, 1e-12);
    EXPECT_NEAR(rows[3].raw.mean, 3.0, 1e-12);
    EXPECT_NEAR(rows[3].postselected.mean, 1.4, 1e-12);
    EXPECT_NEAR(rows[0].success_fraction, 0.3, 1e-12);
}

TEST(CurveTest, TimeAverageSkipsUndeterminedCycles) {
    steerq::TargetSummary a, b;
    for (auto *t : {&a, &b}) {
        t->shots = 50;
        t->sector0_shots = 10;
        t->subsystems = {1, 2};
    }
    a.raw = {1.0, 2.0};
    b.raw = {3.0, 4.0};
    a.sector0 = {NAN, 1.0};
    b.sector0 = {0.5, 3.0};
    a.postselected = {0.2, 0.4};
    b.postselected = {0.4, 0.8};
    const std::vector<steerq::TargetSummary> cycles{a, b};
    const auto m = steerq::time_average(cycles);
    EXPECT_EQ(m.shots, 100U);
    EXPECT_EQ(m.sector0_shots, 20U);
    EXPECT_DOUBLE_EQ(m.raw[0], 2.0);
    EXPECT_DOUBLE_EQ(m.sector0[0], 0.5);
    EXPECT_DOUBLE_EQ(m.sector0[1], 2.0);
    EXPECT_NEAR(m.postselected[1], 0.6, 1e-15);
    b.sector0[0] = NAN;
    const std::vector<steerq::TargetSummary> none{a, b};
    EXPECT_TRUE(std::isnan(steerq::time_average(none).sector0[0]));
    b.subsystems = {1, 3};
    const std::vector<steerq::TargetSummary> bad{a, b};
    EXPECT_THROW((void)steerq::time_average(bad), steerq::InvalidArgument);
}
