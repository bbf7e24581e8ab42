// Copyright 2026 The fidwit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>

namespace fidwit::detail {

template <std::size_t N>
struct SimplexResult {
    std::array<double, N> x;
    double value;
    int iterations;
};

// Standard Nelder-Mead (reflection 1, expansion 2, contraction 1/2,
// shrink 1/2). Deterministic for a given start and step.
template <std::size_t N, class F>
SimplexResult<N> nelder_mead(F &&f, std::array<double, N> start, double step, double f_tol = 1e-15,
                             int max_iter = 4000) {
    using Point = std::array<double, N>;
    std::array<Point, N + 1> pts;
    std::array<double, N + 1> vals;
    pts[0] = start;
    for (std::size_t i = 0; i < N; ++i) {
        pts[i + 1] = start;
        pts[i + 1][i] += step;
    }
    for (std::size_t i = 0; i <= N; ++i) {
        vals[i] = f(pts[i]);
    }

    auto along = [](const Point &from, const Point &to, double t) {
        Point p;
        for (std::size_t k = 0; k < N; ++k) {
            p[k] = from[k] + t * (to[k] - from[k]);
        }
        return p;
    };

    int iter = 0;
    std::array<std::size_t, N + 1> order;
    for (; iter < max_iter; ++iter) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return vals[l] < vals[r]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second_worst = order[N - 1];
        if (std::abs(vals[worst] - vals[best]) <= f_tol) {
            break;
        }

        Point centroid{};
        for (std::size_t i = 0; i <= N; ++i) {
            if (i == worst) {
                continue;
            }
            for (std::size_t k = 0; k < N; ++k) {
                centroid[k] += pts[i][k] / static_cast<double>(N);
            }
        }

        Point reflected = along(pts[worst], centroid, 2.0);
        double fr = f(reflected);
        if (fr < vals[best]) {
            Point expanded = along(pts[worst], centroid, 3.0);
            double fe = f(expanded);
            if (fe < fr) {
                pts[worst] = expanded;
                vals[worst] = fe;
            } else {
                pts[worst] = reflected;
                vals[worst] = fr;
            }
            continue;
        }
        if (fr < vals[second_worst]) {
            pts[worst] = reflected;
            vals[worst] = fr;
            continue;
        }
        Point contracted = fr < vals[worst] ? along(centroid, reflected, 0.5) : along(centroid, pts[worst], 0.5);
        double fc = f(contracted);
        if (fc < std::min(fr, vals[worst])) {
            pts[worst] = contracted;
            vals[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= N; ++i) {
            if (i == best) {
                continue;
            }
            pts[i] = along(pts[best], pts[i], 0.5);
            vals[i] = f(pts[i]);
        }
    }

    std::size_t best = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
    return {pts[best], vals[best], iter};
}

}  // namespace fidwit::detail
