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
#include <vector>

#include "steerq/scaling.hpp"

namespace {

std::vector<double> p_axis(double lo, double hi, double step) {
    return steerq::grid_axis(lo, hi, step);
}

// y_L(p) = f((p - pc) L^{1/nu}) sampled on `ps` for each size.
template <class F>
steerq::CollapseInput ansatz(const std::vector<int> &sizes, const std::vector<double> &ps,
                             double pc, double nu, F f) {
    steerq::CollapseInput in;
    in.p_grid = ps;
    in.sizes = sizes;
    for (int L : sizes) {
        std::vector<double> y;
        for (double p : ps) {
            y.push_back(f((p - pc) * std::pow(L, 1.0 / nu)));
        }
        in.values.push_back(y);
    }
    return in;
}

} // namespace

TEST(CollapseCostTest, IdenticalCurvesCostNothing) {
    steerq::CollapseInput in;
    in.p_grid = p_axis(0.0, 0.3, 0.01);
    in.sizes = {8, 12, 16};
    // Only a flat family is identical in both p and x for every (p_c, nu).
    in.values.assign(3, std::vector<double>(in.p_grid.size(), 1.0));
    for (double pc : {0.1, 0.15}) {
        for (double nu : {1.0, 1.4}) {
            EXPECT_EQ(steerq::collapse_cost(in, pc, nu), 0.0);
        }
    }
}

TEST(CollapseCostTest, LinearAnsatzVanishesOnlyAtGeneratorNu) {
    const auto in = ansatz({10, 14, 18}, p_axis(0.0, 0.3, 0.01), 0.14, 1.3,
                           [](double x) { return x; });
    EXPECT_LT(steerq::collapse_cost(in, 0.14, 1.3), 1e-20);
    for (double nu : steerq::grid_axis(0.9, 1.8, 0.025)) {
        if (std::abs(nu - 1.3) > 1e-9) {
            EXPECT_GT(steerq::collapse_cost(in, 0.14, nu), 1e-12) << nu;
        }
    }
    // The shift by y(p_c) makes a linear scaling function blind to p_c.
    EXPECT_LT(steerq::collapse_cost(in, 0.17, 1.3), 1e-20);
}

TEST(CollapseCostTest, NonlinearAnsatzPositiveAwayFromGenerator) {
    const auto in = ansatz({10, 14, 18}, p_axis(0.0, 0.3, 0.002), 0.14, 1.3,
                           [](double x) { return std::tanh(x); });
    const double at = steerq::collapse_cost(in, 0.14, 1.3);
    EXPECT_LT(at, 1e-6);
    EXPECT_GT(steerq::collapse_cost(in, 0.16, 1.3), 100 * at);
    EXPECT_GT(steerq::collapse_cost(in, 0.14, 1.6), 100 * at);
}

TEST(CollapseCostTest, DensityNormalizedCostIsStable) {
    auto in = ansatz({10, 14, 18}, p_axis(0.0, 0.3, 0.01), 0.14, 1.3,
                     [](double x) { return std::tanh(x) + 0.3 * x * x; });
    in.num_x = 101;
    const double c1 = steerq::collapse_cost(in, 0.15, 1.2) / 101;
    in.num_x = 201;
    const double c2 = steerq::collapse_cost(in, 0.15, 1.2) / 201;
    EXPECT_NEAR(c2, c1, 0.02 * c1);
}

TEST(CollapseCostTest, InvariantUnderRelabelingAndOffsets) {
    auto in = ansatz({10, 14, 18}, p_axis(0.0, 0.3, 0.01), 0.14, 1.3,
                     [](double x) { return std::tanh(x); });
    // Perturb so the cost is not zero.
    in.values[1][10] += 0.2;
    const double base = steerq::collapse_cost(in, 0.15, 1.2);
    auto swapped = in;
    std::swap(swapped.sizes[0], swapped.sizes[2]);
    std::swap(swapped.values[0], swapped.values[2]);
    EXPECT_NEAR(steerq::collapse_cost(swapped, 0.15, 1.2), base, 1e-12 * (1 + base));
    auto shifted = in;
    for (auto &curve : shifted.values) {
        for (auto &v : curve) {
            v += 3.7;
        }
    }
    EXPECT_NEAR(steerq::collapse_cost(shifted, 0.15, 1.2), base, 1e-9 * (1 + base));
}

TEST(CollapseCostTest, ContinuousInParameters) {
    auto in = ansatz({10, 14, 18}, p_axis(0.0, 0.3, 0.01), 0.13, 1.25,
                     [](double x) { return std::tanh(x) + 0.1 * x; });
    for (double pc = 0.10; pc < 0.2; pc += 0.01) {
        const double a = steerq::collapse_cost(in, pc, 1.3);
        const double b = steerq::collapse_cost(in, pc + 1e-6, 1.3);
        const double c = steerq::collapse_cost(in, pc, 1.3 + 1e-6);
        EXPECT_NEAR(a, b, 1e-3 * (a + 1e-6));
        EXPECT_NEAR(a, c, 1e-3 * (a + 1e-6));
    }
}

TEST(CollapseCostTest, WindowMonotonicity) {
    auto in = ansatz({10, 14, 18}, p_axis(0.0, 0.3, 0.005), 0.14, 1.3,
                     [](double x) { return std::tanh(x); });
    std::vector<std::size_t> prev(3, 0);
    std::size_t prev_terms = 0;
    for (double w : {0.02, 0.05, 0.1, 0.2}) {
        in.window = w;
        const auto d = steerq::collapse_cost_detail(in, 0.14, 1.3);
        EXPECT_GE(d.terms, prev_terms);
        for (std::size_t l = 0; l < 3; ++l) {
            EXPECT_GE(d.points_in_window[l], prev[l]);
        }
        prev = d.points_in_window;
        prev_terms = d.terms;
    }
}

TEST(CollapseCostTest, Errors) {
    auto in = ansatz({10, 14}, {0.0, 0.5, 1.0}, 0.5, 1.3, [](double x) { return x; });
    EXPECT_THROW((void)steerq::collapse_cost(in, 0.25, 1.3), steerq::EmptyWindow);
    EXPECT_THROW((void)steerq::collapse_cost(in, 1.5, 1.3), steerq::InvalidArgument);
    EXPECT_THROW((void)steerq::collapse_cost(in, 0.5, 0.0), steerq::InvalidArgument);
    auto one = in;
    one.sizes = {10};
    one.values.resize(1);
    EXPECT_THROW((void)steerq::collapse_cost(one, 0.5, 1.3), steerq::InvalidArgument);
    auto unsorted = in;
    unsorted.p_grid = {0.0, 1.0, 0.5};
    EXPECT_THROW((void)steerq::collapse_cost(unsorted, 0.5, 1.3), steerq::InvalidArgument);
}

TEST(CollapseCostTest, WeightedVariantReducesToUnweightedForEqualErrors) {
    auto in = ansatz({10, 14, 18}, p_axis(0.0, 0.3, 0.01), 0.14, 1.3,
                     [](double x) { return std::tanh(x); });
    in.values[0][12] += 0.1;
    const double plain = steerq::collapse_cost(in, 0.15, 1.2);
    in.weighted = true;
    in.errors.assign(3, std::vector<double>(in.p_grid.size(), 0.5));
    EXPECT_NEAR(steerq::collapse_cost(in, 0.15, 1.2), plain / 0.25, 1e-9 * plain);
}

TEST(GridSearchTest, RecoversGeneratorWithinOneStep) {
    const steerq::GridSpec grid;
    for (auto [pc, nu] : {std::pair{0.14, 1.3}, std::pair{0.125, 1.1}, std::pair{0.17, 1.55}}) {
        const auto in = ansatz({10, 14, 18}, p_axis(0.0, 0.3, 0.002), pc, nu,
                               [](double x) { return std::tanh(x) + 0.2 * x; });
        const auto r = steerq::grid_search(in, grid, 2);
        EXPECT_LE(std::abs(r.best_pc - pc), grid.pc_step + 1e-12) << pc;
        EXPECT_LE(std::abs(r.best_nu - nu), grid.nu_step + 1e-12) << nu;
        EXPECT_EQ(r.cost.size(), r.pc_axis.size() * r.nu_axis.size());
        for (double c : r.cost) {
            if (std::isfinite(c)) {
                EXPECT_GE(c, r.best_cost);
                EXPECT_GE(c, 0.0);
            }
        }
    }
}

TEST(GridSearchTest, TiesGoToSmallestParameters) {
    steerq::CollapseInput in;
    in.p_grid = p_axis(0.0, 0.3, 0.01);
    in.sizes = {8, 12};
    in.values.assign(2, std::vector<double>(in.p_grid.size(), 2.0));
    const auto r = steerq::grid_search(in);
    EXPECT_DOUBLE_EQ(r.best_pc, 0.10);
    EXPECT_DOUBLE_EQ(r.best_nu, 0.9);
}

TEST(GridSearchTest, DeterministicAcrossThreads) {
    const auto in = ansatz({10, 14, 18}, p_axis(0.0, 0.3, 0.01), 0.14, 1.3,
                           [](double x) { return std::tanh(x); });
    const auto a = steerq::grid_search(in, {}, 1);
    const auto b = steerq::grid_search(in, {}, 3);
    EXPECT_EQ(a.best_pc, b.best_pc);
    EXPECT_EQ(a.best_nu, b.best_nu);
    for (std::size_t k = 0; k < a.cost.size(); ++k) {
        EXPECT_TRUE(a.cost[k] == b.cost[k] || (std::isnan(a.cost[k]) && std::isnan(b.cost[k])));
    }
}

TEST(GridSearchTest, AllPointsFailing) {
    const auto in = ansatz({10, 14}, p_axis(0.3, 0.5, 0.01), 0.4, 1.3,
                           [](double x) { return x; });
    EXPECT_THROW((void)steerq::grid_search(in), steerq::AnalysisFailed);
}

TEST(ScatterTest, ShiftPassesThroughOriginAndCollapses) {
    const auto in = ansatz({10, 14, 18}, p_axis(0.0, 0.3, 0.01), 0.14, 1.3,
                           [](double x) { return x; });
    const auto pts = steerq::collapse_scatter(in, 0.14, 1.3);
    EXPECT_EQ(pts.size(), 3 * in.p_grid.size());
    double spread = 0.0;
    for (const auto &pt : pts) {
        if (std::abs(pt.x) < 1e-12) {
            EXPECT_NEAR(pt.y, 0.0, 1e-12);
        }
        spread = std::max(spread, std::abs(pt.y - pt.x));
    }
    EXPECT_LT(spread, 1e-10);
    // Full range: the scatter is not window restricted.
    EXPECT_NEAR(pts.front().x, -0.14 * std::pow(10.0, 1 / 1.3), 1e-12);
}
