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

// Fidelity witnesses W = alpha * I - |psi><psi| and the normal form
// W' = alpha * I - rho of a general negative-detecting witness.
//
// A witness here certifies entanglement through a strictly negative
// expectation value. alpha for a pure seed is the largest Schmidt
// probability; the detection volume of a normal form is lambda - alpha,
// lambda being the top eigenvalue of rho.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "fidwit/detail/nelder_mead.hpp"
#include "fidwit/pauli.hpp"
#include "fidwit/state.hpp"

namespace fidwit {

struct FidelityWitness {
    double alpha;
    PureState seed_state;
    /// alpha * I - |seed><seed|.
    HermitianObservable observable;
};

struct WitnessNormalForm {
    double alpha;
    DensityOperator rho;
    /// Largest eigenvalue of the source observable.
    double beta;
    /// Largest eigenvalue of rho.
    double lambda;
    /// beta * delta - Tr W, with delta the joint dimension.
    double scale;

    /// alpha * I - rho.
    HermitianObservable rescaled() const {
        const Eigen::Index n = rho.dims().total();
        return HermitianObservable(rho.dims(), alpha * CMatrix::Identity(n, n) - rho.matrix());
    }

    /// scale * (alpha * I - rho), i.e. the source observable.
    HermitianObservable reconstruct() const { return scale * rescaled(); }
};

/// Closest maximally entangled states to a pure state: all states
/// sum_i e^{i phi_i} / sqrt(d) |a_i>|b_i> on its Schmidt bases, where the
/// phases are pinned to 1 on nonzero Schmidt terms and free elsewhere.
class MaxEntangledFamily {
   public:
    MaxEntangledFamily(Dims dims, std::vector<std::pair<CVector, CVector>> base_terms,
                       std::vector<std::size_t> free_phase_indices)
        : dims_(dims), base_terms_(std::move(base_terms)), free_phase_indices_(std::move(free_phase_indices)) {}

    Dims dims() const { return dims_; }
    const std::vector<std::pair<CVector, CVector>> &base_terms() const { return base_terms_; }
    const std::vector<std::size_t> &free_phase_indices() const { return free_phase_indices_; }
    /// One member up to global phase.
    bool unique() const { return free_phase_indices_.empty(); }

    /// free_phases[k] is the phase (radians) of term free_phase_indices()[k].
    /// Missing entries default to 0 unless `strict`.
    PureState representative(const std::vector<double> &free_phases = {}, bool strict = false) const {
        if (free_phases.size() > free_phase_indices_.size()) {
            throw ValidationError("MaxEntangledFamily: more phases than free indices");
        }
        if (strict && free_phases.size() < free_phase_indices_.size()) {
            throw ValidationError("MaxEntangledFamily: missing phase for free index " +
                                  std::to_string(free_phase_indices_[free_phases.size()]));
        }
        std::vector<double> phase(base_terms_.size(), 0.0);
        for (std::size_t k = 0; k < free_phases.size(); ++k) {
            phase[free_phase_indices_[k]] = free_phases[k];
        }
        const double amp = 1.0 / std::sqrt(static_cast<double>(base_terms_.size()));
        CVector v = CVector::Zero(dims_.total());
        for (std::size_t i = 0; i < base_terms_.size(); ++i) {
            v += amp * std::polar(1.0, phase[i]) * kron(base_terms_[i].first, base_terms_[i].second);
        }
        return PureState::normalized(dims_, std::move(v));
    }

   private:
    Dims dims_;
    std::vector<std::pair<CVector, CVector>> base_terms_;
    std::vector<std::size_t> free_phase_indices_;
};

struct WitnessReport {
    double min_product_expectation;
    double min_eigenvalue;
    bool is_witness;
    /// Set when the product-state search is heuristic (dims other than 2x2).
    bool approximate;
};

// ---------------------------------------------------------------------------

/// Maximal squared overlap with a product state: the largest Schmidt
/// probability.
inline double alpha_from_state(const PureState &psi) {
    const double top = schmidt_decompose(psi).coefficients.front();
    return top * top;
}

/// alpha * I - |psi><psi| without checking that it is a witness.
inline FidelityWitness fidelity_witness(const PureState &psi, double alpha) {
    const Eigen::Index n = psi.dims().total();
    return FidelityWitness{alpha, psi,
                           HermitianObservable(psi.dims(), alpha * CMatrix::Identity(n, n) - psi.projector())};
}

inline FidelityWitness build_fidelity_witness(const PureState &psi) {
    const double alpha = alpha_from_state(psi);
    if (alpha >= 1.0 - tol::product_alpha) {
        throw ValidationError(
            "build_fidelity_witness: seed is a product state (alpha = 1); alpha*I - |psi><psi| is positive "
            "semidefinite and cannot witness entanglement");
    }
    return fidelity_witness(psi, alpha);
}

inline WitnessNormalForm normal_form(const HermitianObservable &w) {
    const Dims dims = w.dims();
    const Eigen::Index n = dims.total();
    const double delta = static_cast<double>(n);
    const double trace = w.trace();
    const CMatrix identity = CMatrix::Identity(n, n);
    if (max_abs_entry(w.matrix() - (trace / delta) * identity) <= tol::decomposition) {
        throw ValidationError("normal_form: observable is proportional to the identity and cannot be an "
                              "entanglement witness");
    }
    const double beta = w.eigenvalues().maxCoeff();
    const double scale = beta * delta - trace;
    DensityOperator rho(dims, (beta * identity - w.matrix()) / scale);
    const double lambda = hermitian_eigenvalues(rho.matrix()).maxCoeff();
    return WitnessNormalForm{beta / scale, std::move(rho), beta, lambda, scale};
}

inline double detection_volume(const WitnessNormalForm &nf) { return nf.lambda - nf.alpha; }

inline MaxEntangledFamily closest_max_entangled(const PureState &psi) {
    const SchmidtDecomposition sd = schmidt_decompose(psi);
    std::vector<std::pair<CVector, CVector>> terms;
    std::vector<std::size_t> free;
    for (std::size_t i = 0; i < sd.coefficients.size(); ++i) {
        terms.emplace_back(sd.basis_a[i], sd.basis_b[i]);
        if (sd.coefficients[i] * sd.coefficients[i] <= tol::exact) {
            free.push_back(i);
        }
    }
    return MaxEntangledFamily(psi.dims(), std::move(terms), std::move(free));
}

/// Fidelity witness (1/d) I - |theta><theta| on the selected closest
/// maximally entangled state. Free phases default to 0.
inline FidelityWitness optimal_witness(const PureState &psi, const std::vector<double> &free_phases = {},
                                       bool strict = false) {
    const Eigen::Index d = psi.dims().smaller();
    if (d < 2) {
        throw ValidationError("optimal_witness: a local dimension of 1 admits no entanglement");
    }
    PureState theta = closest_max_entangled(psi).representative(free_phases, strict);
    return fidelity_witness(theta, 1.0 / static_cast<double>(d));
}

/// <W_theta>_psi = -(1/d) sum_{i != j} sqrt(p_i p_j).
inline double expectation_gap(const PureState &psi) {
    const SchmidtDecomposition sd = schmidt_decompose(psi);
    const double d = static_cast<double>(psi.dims().smaller());
    double sum = 0.0;
    double sum_sq = 0.0;
    for (double c : sd.coefficients) {
        sum += c;
        sum_sq += c * c;
    }
    // sum_{i != j} c_i c_j = (sum c)^2 - sum c^2
    return -(sum * sum - sum_sq) / d;
}

// ---------------------------------------------------------------------------
// Witness verification

namespace detail {

inline std::array<double, 4> bloch4(double polar, double azimuth) {
    return {1.0, std::sin(polar) * std::cos(azimuth), std::sin(polar) * std::sin(azimuth), std::cos(polar)};
}

inline CVector qubit_from_bloch(double polar, double azimuth) {
    CVector v(2);
    v(0) = std::cos(polar / 2.0);
    v(1) = std::polar(std::sin(polar / 2.0), azimuth);
    return v;
}

/// min over product qubit pairs of <a|<b|W|a>|b>, W given by Pauli
/// coefficients, via a seed grid and Nelder-Mead polish of the best seeds.
inline double min_product_expectation_qubits(const PauliCoefficients &c, int grid = 64, int polished = 8) {
    std::array<std::array<double, 4>, 4> coeff;
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
            coeff[a][b] = c.values()[4 * a + b];
        }
    }
    auto objective = [&](const std::array<double, 4> &x) {
        auto r = bloch4(x[0], x[1]);
        auto s = bloch4(x[2], x[3]);
        double f = 0.0;
        for (int a = 0; a < 4; ++a) {
            double row = 0.0;
            for (int b = 0; b < 4; ++b) {
                row += coeff[a][b] * s[b];
            }
            f += r[a] * row;
        }
        return f;
    };

    const int cells = grid * grid;
    std::vector<std::array<double, 4>> bloch(cells);
    std::vector<std::array<double, 2>> angles(cells);
    for (int i = 0; i < grid; ++i) {
        for (int j = 0; j < grid; ++j) {
            const double polar = (i + 0.5) * pi / grid;
            const double azimuth = (j + 0.5) * two_pi / grid;
            bloch[i * grid + j] = bloch4(polar, azimuth);
            angles[i * grid + j] = {polar, azimuth};
        }
    }

    // Best seed per A-side cell; B side scanned exhaustively.
    std::vector<std::pair<double, std::array<int, 2>>> seeds;
    seeds.reserve(cells);
    for (int ia = 0; ia < cells; ++ia) {
        std::array<double, 4> t{};
        for (int b = 0; b < 4; ++b) {
            for (int a = 0; a < 4; ++a) {
                t[b] += bloch[ia][a] * coeff[a][b];
            }
        }
        double best = std::numeric_limits<double>::infinity();
        int best_b = 0;
        for (int ib = 0; ib < cells; ++ib) {
            const auto &s = bloch[ib];
            double f = t[0] * s[0] + t[1] * s[1] + t[2] * s[2] + t[3] * s[3];
            if (f < best) {
                best = f;
                best_b = ib;
            }
        }
        seeds.push_back({best, {ia, best_b}});
    }
    const int keep = std::min(polished, cells);
    std::partial_sort(seeds.begin(), seeds.begin() + keep, seeds.end(), [](const auto &l, const auto &r) {
        return l.first < r.first || (l.first == r.first && l.second < r.second);
    });

    double result = seeds.front().first;
    const double step = pi / grid;
    for (int k = 0; k < keep; ++k) {
        const auto [ia, ib] = seeds[k].second;
        std::array<double, 4> start{angles[ia][0], angles[ia][1], angles[ib][0], angles[ib][1]};
        auto polished_min = nelder_mead<4>(objective, start, step);
        result = std::min(result, polished_min.value);
    }
    return result;
}

/// Alternating exact minimization over local factors for general d x d'.
inline double min_product_expectation_general(const HermitianObservable &w, int starts = 64, int sweeps = 200) {
    const Dims d = w.dims();
    const CMatrix &m = w.matrix();
    std::mt19937_64 rng(0x5eedf1d0ULL);
    std::normal_distribution<double> gauss;
    auto random_unit = [&](Eigen::Index n) {
        CVector v(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            v(i) = Complex(gauss(rng), gauss(rng));
        }
        return CVector(v / v.norm());
    };
    auto lowest = [](const CMatrix &h) {
        Eigen::SelfAdjointEigenSolver<CMatrix> solver(h);
        return std::make_pair(solver.eigenvalues()(0), CVector(solver.eigenvectors().col(0)));
    };

    double best = std::numeric_limits<double>::infinity();
    for (int s = 0; s < starts; ++s) {
        CVector b = random_unit(d.b);
        double value = std::numeric_limits<double>::infinity();
        for (int sweep = 0; sweep < sweeps; ++sweep) {
            CMatrix reduced_a = CMatrix::Zero(d.a, d.a);
            for (Eigen::Index i = 0; i < d.a; ++i) {
                for (Eigen::Index k = 0; k < d.a; ++k) {
                    reduced_a(i, k) = b.dot(m.block(i * d.b, k * d.b, d.b, d.b) * b);
                }
            }
            auto [va, a] = lowest((reduced_a + reduced_a.adjoint()) / 2.0);
            CMatrix reduced_b = CMatrix::Zero(d.b, d.b);
            for (Eigen::Index i = 0; i < d.a; ++i) {
                for (Eigen::Index k = 0; k < d.a; ++k) {
                    reduced_b += std::conj(a(i)) * a(k) * m.block(i * d.b, k * d.b, d.b, d.b);
                }
            }
            auto [vb, bnew] = lowest((reduced_b + reduced_b.adjoint()) / 2.0);
            b = bnew;
            const bool converged = value - vb < 1e-15;
            value = vb;
            if (converged) {
                break;
            }
        }
        best = std::min(best, value);
    }
    return best;
}

}  // namespace detail

/// Checks nonnegativity on product states and the presence of a negative
/// eigenvalue. The product search is exact-grid plus polish for qubits and
/// a multi-start heuristic (flagged approximate) otherwise.
inline WitnessReport verify_witness(const HermitianObservable &w) {
    const double min_eig = w.eigenvalues().minCoeff();
    const bool qubits = w.dims() == two_qubits;
    const double min_prod = qubits ? detail::min_product_expectation_qubits(pauli_decompose(w))
                                   : detail::min_product_expectation_general(w);
    const bool is_witness = min_prod >= -tol::product_alpha && min_eig < -tol::product_alpha;
    return WitnessReport{min_prod, min_eig, is_witness, !qubits};
}

}  // namespace fidwit
