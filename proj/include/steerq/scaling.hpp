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
 * @file scaling.hpp
 * Single-parameter scaling collapse of a family of curves y_L(p).
 *
 * For a trial (p_c, nu) each curve is shifted by its own value at p_c, mapped
 * to x = (p - p_c) L^{1/nu} and resampled on a common x-grid inside the window
 * |x| <= w min_L L^{1/nu}. The cost is the summed squared spread around the
 * cross-size mean at each grid point.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "steerq/errors.hpp"
#include "steerq/parallel.hpp"

namespace steerq {

struct CollapseInput {
    std::vector<double> p_grid;
    std::vector<int> sizes;
    std::vector<std::vector<double>> values; // values[l][i] at p_grid[i]
    std::vector<std::vector<double>> errors; // optional; used when weighted
    std::string label;
    double window = 0.05;
    int num_x = 101;
    bool weighted = false;
};

struct CollapseCost {
    double cost = 0.0;
    double x_min = 0.0;
    double x_max = 0.0;
    std::size_t terms = 0;
    std::vector<std::size_t> points_in_window; // raw p-grid points per size
};

struct ScatterPoint {
    int size = 0;
    double x = 0.0;
    double y = 0.0;
};

/// Piecewise-linear interpolation on an increasing abscissa; clamps outside.
[[nodiscard]] inline double interpolate(std::span<const double> xs, std::span<const double> ys,
                                        double x) {
    if (x <= xs.front()) {
        return ys.front();
    }
    if (x >= xs.back()) {
        return ys.back();
    }
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const auto i = static_cast<std::size_t>(it - xs.begin());
    const double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    return ys[i - 1] + t * (ys[i] - ys[i - 1]);
}

inline void validate(const CollapseInput &in) {
    if (in.sizes.size() < 2) {
        throw InvalidArgument("collapse: need at least two system sizes");
    }
    for (std::size_t a = 0; a < in.sizes.size(); ++a) {
        for (std::size_t b = a + 1; b < in.sizes.size(); ++b) {
            if (in.sizes[a] == in.sizes[b]) {
                throw InvalidArgument("collapse: duplicate system size " +
                                      std::to_string(in.sizes[a]));
            }
        }
    }
    if (in.p_grid.size() < 2) {
        throw InvalidArgument("collapse: p-grid needs at least two points");
    }
    for (std::size_t i = 1; i < in.p_grid.size(); ++i) {
        if (!(in.p_grid[i] > in.p_grid[i - 1])) {
            throw InvalidArgument("collapse: p-grid must be strictly increasing");
        }
    }
    if (in.values.size() != in.sizes.size()) {
        throw InvalidArgument("collapse: one curve per system size required");
    }
    for (const auto &v : in.values) {
        if (v.size() != in.p_grid.size()) {
            throw InvalidArgument("collapse: curve length differs from p-grid");
        }
    }
    if (in.weighted) {
        if (in.errors.size() != in.sizes.size()) {
            throw InvalidArgument("collapse: weighted cost needs one error curve per size");
        }
        for (const auto &e : in.errors) {
            if (e.size() != in.p_grid.size()) {
                throw InvalidArgument("collapse: error curve length differs from p-grid");
            }
        }
    }
    if (!(in.window > 0.0) || in.num_x < 2) {
        throw InvalidArgument("collapse: window must be positive and num_x >= 2");
    }
}

namespace detail {

inline void check_point(const CollapseInput &in, double p_c, double nu) {
    if (!(nu > 0.0)) {
        throw InvalidArgument("collapse: nu must be positive");
    }
    if (p_c < in.p_grid.front() || p_c > in.p_grid.back()) {
        throw InvalidArgument("collapse: p_c outside the p-grid");
    }
}

inline std::vector<double> scaled_x(const CollapseInput &in, std::size_t l, double p_c,
                                    double nu) {
    const double scale = std::pow(static_cast<double>(in.sizes[l]), 1.0 / nu);
    std::vector<double> x(in.p_grid.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = (in.p_grid[i] - p_c) * scale;
    }
    return x;
}

} // namespace detail

/// Cost with diagnostics; see the file comment for the construction.
[[nodiscard]] inline CollapseCost collapse_cost_detail(const CollapseInput &in, double p_c,
                                                       double nu) {
    validate(in);
    detail::check_point(in, p_c, nu);
    const std::size_t nl = in.sizes.size();
    const int min_size = *std::min_element(in.sizes.begin(), in.sizes.end());
    const double half = in.window * std::pow(static_cast<double>(min_size), 1.0 / nu);

    CollapseCost out;
    out.x_min = -half;
    out.x_max = half;
    std::vector<std::vector<double>> xs(nl), ys(nl);
    for (std::size_t l = 0; l < nl; ++l) {
        xs[l] = detail::scaled_x(in, l, p_c, nu);
        const double y0 = interpolate(in.p_grid, in.values[l], p_c);
        ys[l] = in.values[l];
        for (auto &y : ys[l]) {
            y -= y0;
        }
        out.x_min = std::max(out.x_min, xs[l].front());
        out.x_max = std::min(out.x_max, xs[l].back());
    }
    if (!(out.x_max > out.x_min)) {
        throw EmptyWindow("collapse: window has no common support at p_c=" +
                          std::to_string(p_c) + ", nu=" + std::to_string(nu));
    }
    for (std::size_t l = 0; l < nl; ++l) {
        out.points_in_window.push_back(static_cast<std::size_t>(
            std::count_if(xs[l].begin(), xs[l].end(),
                          [&](double x) { return x >= out.x_min && x <= out.x_max; })));
        if (out.points_in_window.back() == 0) {
            throw EmptyWindow("collapse: no data point of L=" + std::to_string(in.sizes[l]) +
                              " inside the window");
        }
    }

    std::vector<double> y(nl), w(nl, 1.0);
    for (int k = 0; k < in.num_x; ++k) {
        const double x =
            out.x_min + (out.x_max - out.x_min) * static_cast<double>(k) / (in.num_x - 1);
        double wsum = 0.0, mu = 0.0;
        for (std::size_t l = 0; l < nl; ++l) {
            y[l] = interpolate(xs[l], ys[l], x);
            if (in.weighted) {
                const double s = interpolate(xs[l], in.errors[l], x);
                w[l] = s > 0.0 ? 1.0 / (s * s) : 0.0;
            }
            mu += w[l] * y[l];
            wsum += w[l];
        }
        if (!(wsum > 0.0)) {
            throw AnalysisFailed("collapse: zero total weight at x=" + std::to_string(x));
        }
        mu /= wsum;
        for (std::size_t l = 0; l < nl; ++l) {
            out.cost += w[l] * (y[l] - mu) * (y[l] - mu);
        }
        out.terms += nl;
    }
    return out;
}

[[nodiscard]] inline double collapse_cost(const CollapseInput &in, double p_c, double nu) {
    return collapse_cost_detail(in, p_c, nu).cost;
}

/// Shifted collapse coordinates over the full p range.
[[nodiscard]] inline std::vector<ScatterPoint> collapse_scatter(const CollapseInput &in,
                                                                double p_c, double nu) {
    validate(in);
    detail::check_point(in, p_c, nu);
    std::vector<ScatterPoint> out;
    for (std::size_t l = 0; l < in.sizes.size(); ++l) {
        const auto xs = detail::scaled_x(in, l, p_c, nu);
        const double y0 = interpolate(in.p_grid, in.values[l], p_c);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            out.push_back({in.sizes[l], xs[i], in.values[l][i] - y0});
        }
    }
    return out;
}

struct GridSpec {
    double pc_min = 0.10;
    double pc_max = 0.20;
    double pc_step = 0.0025;
    double nu_min = 0.9;
    double nu_max = 1.8;
    double nu_step = 0.025;
};

/// min + i step for i = 0 .. round((max - min) / step).
[[nodiscard]] inline std::vector<double> grid_axis(double lo, double hi, double step) {
    if (!(step > 0.0) || hi < lo) {
        throw InvalidArgument("grid: need step > 0 and max >= min");
    }
    const auto n = static_cast<std::size_t>(std::llround((hi - lo) / step)) + 1;
    std::vector<double> axis(n);
    for (std::size_t i = 0; i < n; ++i) {
        axis[i] = lo + static_cast<double>(i) * step;
    }
    return axis;
}

struct CollapseResult {
    std::vector<double> pc_axis;
    std::vector<double> nu_axis;
    std::vector<double> cost; // cost[i * nu_axis.size() + j]; NaN where undefined
    double best_pc = 0.0;
    double best_nu = 0.0;
    double best_cost = 0.0;
    std::vector<ScatterPoint> scatter;

    [[nodiscard]] double at(std::size_t i, std::size_t j) const {
        return cost[i * nu_axis.size() + j];
    }
};

/**
 * Evaluate the cost on the (p_c, nu) grid. Grid points where the cost is
 * undefined are stored as NaN. The minimum is taken in p_c-major order with a
 * strict comparison, so ties go to the smaller p_c and then the smaller nu.
 */
[[nodiscard]] inline CollapseResult grid_search(const CollapseInput &in, const GridSpec &grid = {},
                                                unsigned threads = 1) {
    validate(in);
    CollapseResult r;
    r.pc_axis = grid_axis(grid.pc_min, grid.pc_max, grid.pc_step);
    r.nu_axis = grid_axis(grid.nu_min, grid.nu_max, grid.nu_step);
    const std::size_t nn = r.nu_axis.size();
    r.cost.assign(r.pc_axis.size() * nn, std::numeric_limits<double>::quiet_NaN());
    parallel_for(r.cost.size(), threads, [&](std::size_t k) {
        try {
            r.cost[k] = collapse_cost(in, r.pc_axis[k / nn], r.nu_axis[k % nn]);
        } catch (const InvalidArgument &) {
        } catch (const EmptyWindow &) {
        } catch (const AnalysisFailed &) {
        }
    });
    std::size_t best = r.cost.size();
    for (std::size_t k = 0; k < r.cost.size(); ++k) {
        if (std::isfinite(r.cost[k]) && (best == r.cost.size() || r.cost[k] < r.cost[best])) {
            best = k;
        }
    }
    if (best == r.cost.size()) {
        throw AnalysisFailed("collapse: cost undefined at every grid point");
    }
    r.best_pc = r.pc_axis[best / nn];
    r.best_nu = r.nu_axis[best % nn];
    r.best_cost = r.cost[best];
    r.scatter = collapse_scatter(in, r.best_pc, r.best_nu);
    return r;
}

} // namespace steerq
