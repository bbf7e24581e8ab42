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

#include <cmath>

#include "fidwit/core.hpp"

namespace fidwit {

struct ThetaMinimum {
    /// Minimizer in [0, 2pi).
    double theta;
    double value;
};

/// Global minimum over theta of
///
///     f(theta) = offset + curvature * (1 - cos theta) + slope * sin theta.
///
/// The stationary condition curvature * sin theta + slope * cos theta = 0
/// has the two roots theta0 and theta0 + pi; the minimizing root is
/// theta* = -atan2(slope, curvature), with f(theta*) = offset + curvature -
/// hypot(curvature, slope). For curvature >= 0 the value is evaluated as
/// offset - slope^2 / (curvature + hypot(...)), which keeps tiny negative
/// minima representable instead of cancelling to zero.
inline ThetaMinimum minimize_shifted_sinusoid(double offset, double curvature, double slope) {
    const double r = std::hypot(curvature, slope);
    if (r == 0.0) {
        return {0.0, offset};
    }
    const double theta = wrap_2pi(-std::atan2(slope, curvature));
    double value;
    if (curvature >= 0.0) {
        value = offset - slope * slope / (curvature + r);
    } else {
        value = offset + curvature - r;
    }
    // theta = 0 is the endpoint candidate; it can only tie.
    if (offset <= value) {
        return {0.0, offset};
    }
    return {theta, value};
}

/// Minimum of offset + a * cos theta + b * sin theta.
inline ThetaMinimum minimize_sinusoid(double offset, double a, double b) {
    return minimize_shifted_sinusoid(offset + a, -a, b);
}

}  // namespace fidwit
