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

// Finite-dimensional bipartite states and observables.
//
// Joint-space indices are subsystem-A-major: amplitude (i, j) of
// |i>_A |j>_B lives at position i * dim_b + j. Every type here is an
// immutable value; construction validates the invariants and throws
// ValidationError otherwise.

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fidwit/core.hpp"

namespace fidwit {

/// Local dimensions (d, d') of a bipartite space.
struct Dims {
    Eigen::Index a = 0;
    Eigen::Index b = 0;

    Eigen::Index total() const { return a * b; }
    Eigen::Index smaller() const { return std::min(a, b); }
    bool operator==(const Dims &) const = default;
};

inline std::string to_string(Dims d) { return std::to_string(d.a) + "x" + std::to_string(d.b); }

inline void require_same_dims(Dims lhs, Dims rhs, const char *what) {
    if (lhs != rhs) {
        throw ValidationError(std::string(what) + ": dimension mismatch (" + to_string(lhs) + " vs " +
                              to_string(rhs) + ")");
    }
}

/// Ascending eigenvalues of a Hermitian matrix.
inline Eigen::VectorXd hermitian_eigenvalues(const CMatrix &m) {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(m, Eigen::EigenvaluesOnly);
    return solver.eigenvalues();
}

class PureState {
   public:
    PureState(Dims dims, CVector amplitudes) : dims_(dims), amplitudes_(std::move(amplitudes)) {
        if (dims_.a < 1 || dims_.b < 1) {
            throw ValidationError("PureState: local dimensions must be positive");
        }
        if (amplitudes_.size() != dims_.total()) {
            throw ValidationError("PureState: amplitude count " + std::to_string(amplitudes_.size()) +
                                  " does not match " + to_string(dims_));
        }
        if (!amplitudes_.allFinite()) {
            throw ValidationError("PureState: non-finite amplitude");
        }
        double norm2 = amplitudes_.squaredNorm();
        if (std::abs(norm2 - 1.0) > tol::exact) {
            throw ValidationError("PureState: not normalized (|psi|^2 = " + std::to_string(norm2) + ")");
        }
    }

    /// Builds a state from an unnormalized amplitude vector.
    static PureState normalized(Dims dims, CVector amplitudes) {
        double n = amplitudes.norm();
        if (!(n > 0.0) || !std::isfinite(n)) {
            throw ValidationError("PureState: cannot normalize a zero or non-finite vector");
        }
        return PureState(dims, amplitudes / n);
    }

    static PureState basis(Dims dims, Eigen::Index i, Eigen::Index j) {
        if (i < 0 || i >= dims.a || j < 0 || j >= dims.b) {
            throw ValidationError("PureState::basis: index out of range");
        }
        CVector v = CVector::Zero(dims.total());
        v(i * dims.b + j) = 1.0;
        return PureState(dims, std::move(v));
    }

    Dims dims() const { return dims_; }
    const CVector &amplitudes() const { return amplitudes_; }
    Complex amplitude(Eigen::Index i, Eigen::Index j) const { return amplitudes_(i * dims_.b + j); }

    /// The d x d' matrix C with psi = sum_ij C_ij |i>|j>.
    CMatrix coefficient_matrix() const {
        CMatrix c(dims_.a, dims_.b);
        for (Eigen::Index i = 0; i < dims_.a; ++i) {
            for (Eigen::Index j = 0; j < dims_.b; ++j) {
                c(i, j) = amplitude(i, j);
            }
        }
        return c;
    }

    CMatrix projector() const { return amplitudes_ * amplitudes_.adjoint(); }

   private:
    Dims dims_;
    CVector amplitudes_;
};

class DensityOperator {
   public:
    DensityOperator(Dims dims, const CMatrix &matrix) : dims_(dims) {
        if (dims_.a < 1 || dims_.b < 1) {
            throw ValidationError("DensityOperator: local dimensions must be positive");
        }
        if (matrix.rows() != dims_.total() || matrix.cols() != dims_.total()) {
            throw ValidationError("DensityOperator: matrix shape does not match " + to_string(dims_));
        }
        if (!matrix.allFinite()) {
            throw ValidationError("DensityOperator: non-finite entry");
        }
        if (hermiticity_defect(matrix) > tol::exact) {
            throw ValidationError("DensityOperator: matrix is not Hermitian");
        }
        matrix_ = (matrix + matrix.adjoint()) / 2.0;
        double trace = matrix_.trace().real();
        if (std::abs(trace - 1.0) > tol::exact) {
            throw ValidationError("DensityOperator: trace " + std::to_string(trace) + " != 1");
        }
        if (hermitian_eigenvalues(matrix_).minCoeff() < -tol::decomposition) {
            throw ValidationError("DensityOperator: matrix is not positive semidefinite");
        }
    }

    explicit DensityOperator(const PureState &psi) : DensityOperator(psi.dims(), psi.projector()) {}

    Dims dims() const { return dims_; }
    const CMatrix &matrix() const { return matrix_; }

   private:
    Dims dims_;
    CMatrix matrix_;
};

class HermitianObservable {
   public:
    HermitianObservable(Dims dims, const CMatrix &matrix) : dims_(dims) {
        if (matrix.rows() != dims_.total() || matrix.cols() != dims_.total()) {
            throw ValidationError("HermitianObservable: matrix shape does not match " + to_string(dims_));
        }
        if (!matrix.allFinite()) {
            throw ValidationError("HermitianObservable: non-finite entry");
        }
        if (hermiticity_defect(matrix) > tol::exact) {
            throw ValidationError("HermitianObservable: matrix is not Hermitian");
        }
        matrix_ = (matrix + matrix.adjoint()) / 2.0;
    }

    static HermitianObservable identity(Dims dims) {
        return HermitianObservable(dims, CMatrix::Identity(dims.total(), dims.total()));
    }

    Dims dims() const { return dims_; }
    const CMatrix &matrix() const { return matrix_; }
    double trace() const { return matrix_.trace().real(); }

    /// Ascending spectrum.
    Eigen::VectorXd eigenvalues() const { return hermitian_eigenvalues(matrix_); }

    friend HermitianObservable operator+(const HermitianObservable &l, const HermitianObservable &r) {
        require_same_dims(l.dims_, r.dims_, "HermitianObservable +");
        return HermitianObservable(l.dims_, l.matrix_ + r.matrix_);
    }
    friend HermitianObservable operator-(const HermitianObservable &l, const HermitianObservable &r) {
        require_same_dims(l.dims_, r.dims_, "HermitianObservable -");
        return HermitianObservable(l.dims_, l.matrix_ - r.matrix_);
    }
    friend HermitianObservable operator*(double s, const HermitianObservable &w) {
        return HermitianObservable(w.dims_, s * w.matrix_);
    }

   private:
    Dims dims_;
    CMatrix matrix_;
};

/// psi = sum_k coefficients[k] |basis_a[k]> |basis_b[k]>, with
/// min(d, d') terms. Coefficients are the square roots of the Schmidt
/// probabilities, sorted nonincreasing.
struct SchmidtDecomposition {
    Dims dims;
    std::vector<double> coefficients;
    std::vector<CVector> basis_a;
    std::vector<CVector> basis_b;
    /// True when dim_a > dim_b, i.e. the B side carries the smaller space.
    bool swapped = false;

    std::vector<double> probabilities() const {
        std::vector<double> p;
        p.reserve(coefficients.size());
        for (double c : coefficients) {
            p.push_back(c * c);
        }
        return p;
    }

    std::size_t rank(double p_tol = tol::exact) const {
        return static_cast<std::size_t>(
            std::count_if(coefficients.begin(), coefficients.end(), [&](double c) { return c * c > p_tol; }));
    }

    PureState reconstruct() const {
        CVector v = CVector::Zero(dims.total());
        for (std::size_t k = 0; k < coefficients.size(); ++k) {
            v += coefficients[k] * kron(basis_a[k], basis_b[k]);
        }
        return PureState::normalized(dims, std::move(v));
    }
};

enum class Subsystem { A, B };
enum class ChannelSide { A, B, BothLocal };

class KrausChannel {
   public:
    KrausChannel(std::vector<CMatrix> operators, ChannelSide side)
        : operators_(std::move(operators)), side_(side) {
        if (operators_.empty()) {
            throw ValidationError("KrausChannel: no operators");
        }
        Eigen::Index d = operators_.front().rows();
        CMatrix sum = CMatrix::Zero(d, d);
        for (const auto &k : operators_) {
            if (k.rows() != d || k.cols() != d) {
                throw ValidationError("KrausChannel: operators must share one square shape");
            }
            sum += k.adjoint() * k;
        }
        if (max_abs_entry(sum - CMatrix::Identity(d, d)) > tol::exact) {
            throw ValidationError("KrausChannel: incomplete Kraus set (sum K^dag K != I)");
        }
    }

    /// rho -> (1 - p) rho + p Z rho Z on a single qubit.
    static KrausChannel dephasing(double p, ChannelSide side = ChannelSide::BothLocal) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw ValidationError("KrausChannel::dephasing: p must lie in [0, 1]");
        }
        CMatrix k0 = std::sqrt(1.0 - p) * CMatrix::Identity(2, 2);
        CMatrix k1 = CMatrix::Zero(2, 2);
        k1(0, 0) = std::sqrt(p);
        k1(1, 1) = -std::sqrt(p);
        return KrausChannel({k0, k1}, side);
    }

    const std::vector<CMatrix> &operators() const { return operators_; }
    ChannelSide side() const { return side_; }
    Eigen::Index local_dim() const { return operators_.front().rows(); }

   private:
    std::vector<CMatrix> operators_;
    ChannelSide side_;
};

// ---------------------------------------------------------------------------
// Operations

namespace detail {

inline void require_normalized(const CVector &v, const char *what) {
    if (v.size() == 0 || std::abs(v.squaredNorm() - 1.0) > tol::exact) {
        throw ValidationError(std::string(what) + ": input vector is not normalized");
    }
}

/// Rotates v so that its first entry of modulus above `cutoff` is real and
/// nonnegative; returns the removed phase factor.
inline Complex canonicalize_phase(CVector &v, double cutoff = 1e-8) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) > cutoff) {
            Complex phase = v(i) / std::abs(v(i));
            v /= phase;
            return phase;
        }
    }
    return 1.0;
}

}  // namespace detail

inline PureState tensor_product(const CVector &a, const CVector &b) {
    detail::require_normalized(a, "tensor_product");
    detail::require_normalized(b, "tensor_product");
    return PureState::normalized(Dims{a.size(), b.size()}, kron(a, b));
}

/// |<phi|psi>|^2.
inline double fidelity_pure(const PureState &psi, const PureState &phi) {
    require_same_dims(psi.dims(), phi.dims(), "fidelity_pure");
    return std::norm(phi.amplitudes().dot(psi.amplitudes()));
}

inline SchmidtDecomposition schmidt_decompose(const PureState &psi) {
    const Dims dims = psi.dims();
    Eigen::JacobiSVD<CMatrix> svd(psi.coefficient_matrix(), Eigen::ComputeFullU | Eigen::ComputeFullV);
    const CMatrix &u = svd.matrixU();
    const CMatrix &v = svd.matrixV();
    const Eigen::VectorXd &s = svd.singularValues();

    SchmidtDecomposition out;
    out.dims = dims;
    out.swapped = dims.a > dims.b;
    const Eigen::Index terms = dims.smaller();
    for (Eigen::Index k = 0; k < terms; ++k) {
        CVector a = u.col(k);
        CVector b = v.col(k).conjugate();
        const double c = s(k);
        // The pair's joint phase is fixed by psi; move it all onto B.
        Complex phase = detail::canonicalize_phase(a);
        b *= phase;
        if (c * c <= tol::exact) {
            detail::canonicalize_phase(b);
        }
        out.coefficients.push_back(c);
        out.basis_a.push_back(std::move(a));
        out.basis_b.push_back(std::move(b));
    }
    return out;
}

inline double expectation(const HermitianObservable &w, const PureState &psi) {
    require_same_dims(w.dims(), psi.dims(), "expectation");
    return psi.amplitudes().dot(w.matrix() * psi.amplitudes()).real();
}

inline double expectation(const HermitianObservable &w, const DensityOperator &rho) {
    require_same_dims(w.dims(), rho.dims(), "expectation");
    return (w.matrix() * rho.matrix()).trace().real();
}

/// Reduced density matrix after tracing out `traced`.
inline CMatrix partial_trace(const DensityOperator &rho, Subsystem traced) {
    const Dims d = rho.dims();
    const CMatrix &m = rho.matrix();
    if (traced == Subsystem::B) {
        CMatrix out = CMatrix::Zero(d.a, d.a);
        for (Eigen::Index i = 0; i < d.a; ++i) {
            for (Eigen::Index k = 0; k < d.a; ++k) {
                for (Eigen::Index j = 0; j < d.b; ++j) {
                    out(i, k) += m(i * d.b + j, k * d.b + j);
                }
            }
        }
        return out;
    }
    CMatrix out = CMatrix::Zero(d.b, d.b);
    for (Eigen::Index j = 0; j < d.b; ++j) {
        for (Eigen::Index l = 0; l < d.b; ++l) {
            for (Eigen::Index i = 0; i < d.a; ++i) {
                out(j, l) += m(i * d.b + j, i * d.b + l);
            }
        }
    }
    return out;
}

inline DensityOperator apply_channel(const DensityOperator &rho, const KrausChannel &ch) {
    const Dims d = rho.dims();
    const Eigen::Index k = ch.local_dim();
    const bool on_a = ch.side() != ChannelSide::B;
    const bool on_b = ch.side() != ChannelSide::A;
    if ((on_a && d.a != k) || (on_b && d.b != k)) {
        throw ValidationError("apply_channel: Kraus operator dimension does not match the acted-on subsystem");
    }

    auto apply = [&](const CMatrix &in, bool side_a) {
        CMatrix out = CMatrix::Zero(in.rows(), in.cols());
        for (const auto &op : ch.operators()) {
            CMatrix full = side_a ? kron(op, CMatrix::Identity(d.b, d.b)) : kron(CMatrix::Identity(d.a, d.a), op);
            out += full * in * full.adjoint();
        }
        return out;
    };

    CMatrix m = rho.matrix();
    if (on_a) {
        m = apply(m, true);
    }
    if (on_b) {
        m = apply(m, false);
    }
    return DensityOperator(d, m);
}

/// Partial transpose over subsystem B.
inline CMatrix partial_transpose_b(const DensityOperator &rho) {
    const Dims d = rho.dims();
    const CMatrix &m = rho.matrix();
    CMatrix out(d.total(), d.total());
    for (Eigen::Index i = 0; i < d.a; ++i) {
        for (Eigen::Index j = 0; j < d.b; ++j) {
            for (Eigen::Index k = 0; k < d.a; ++k) {
                for (Eigen::Index l = 0; l < d.b; ++l) {
                    out(i * d.b + j, k * d.b + l) = m(i * d.b + l, k * d.b + j);
                }
            }
        }
    }
    return out;
}

/// PPT is necessary and sufficient for separability only when d * d' <= 6.
inline bool ppt_conclusive(Dims d) { return d.total() <= 6; }

/// True iff the partial transpose has an eigenvalue below -1e-10. For
/// d * d' > 6 a false result is inconclusive (see ppt_conclusive).
inline bool ppt_entangled(const DensityOperator &rho) {
    return hermitian_eigenvalues(partial_transpose_b(rho)).minCoeff() < -tol::decomposition;
}

}  // namespace fidwit
