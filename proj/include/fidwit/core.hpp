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
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace fidwit {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

/// Raised whenever an input violates a documented precondition or a value
/// type's invariant.
class ValidationError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

namespace tol {
/// Identities that hold in exact arithmetic (normalization, trace, Hermiticity).
inline constexpr double exact = 1e-12;
/// Decomposition round-trips (SVD, eigensolvers) and PSD checks.
inline constexpr double decomposition = 1e-10;
/// Alpha threshold separating product from weakly entangled pure states.
inline constexpr double product_alpha = 1e-9;
}  // namespace tol

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Wraps an angle into (-pi, pi].
inline double wrap_pm_pi(double angle) {
    double r = std::remainder(angle, two_pi);
    if (r <= -pi) {
        r += two_pi;
    }
    return r;
}

/// Wraps an angle into [0, 2pi).
inline double wrap_2pi(double angle) {
    double r = std::fmod(angle, two_pi);
    if (r < 0) {
        r += two_pi;
    }
    if (r >= two_pi) {
        r = 0.0;
    }
    return r;
}

/// Largest entrywise modulus of a matrix.
inline double max_abs_entry(const CMatrix &m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double hermiticity_defect(const CMatrix &m) {
    return max_abs_entry(m - m.adjoint());
}

/// Kronecker product of two dense complex matrices.
inline CMatrix kron(const CMatrix &a, const CMatrix &b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

inline CVector kron(const CVector &a, const CVector &b) {
    CVector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        out.segment(i * b.size(), b.size()) = a(i) * b;
    }
    return out;
}

}  // namespace fidwit
