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

#include <array>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "fidwit/state.hpp"

namespace fidwit {

enum class Pauli { I = 0, X = 1, Y = 2, Z = 3 };

inline constexpr std::array<Pauli, 4> all_paulis = {Pauli::I, Pauli::X, Pauli::Y, Pauli::Z};

inline char pauli_char(Pauli p) { return "IXYZ"[static_cast<int>(p)]; }

inline std::optional<Pauli> pauli_from_char(char c) {
    switch (c) {
        case 'I': case 'i': return Pauli::I;
        case 'X': case 'x': return Pauli::X;
        case 'Y': case 'y': return Pauli::Y;
        case 'Z': case 'z': return Pauli::Z;
        default: return std::nullopt;
    }
}

inline CMatrix pauli_matrix(Pauli p) {
    CMatrix m = CMatrix::Zero(2, 2);
    switch (p) {
        case Pauli::I:
            m(0, 0) = 1.0;
            m(1, 1) = 1.0;
            break;
        case Pauli::X:
            m(0, 1) = 1.0;
            m(1, 0) = 1.0;
            break;
        case Pauli::Y:
            m(0, 1) = Complex(0.0, -1.0);
            m(1, 0) = Complex(0.0, 1.0);
            break;
        case Pauli::Z:
            m(0, 0) = 1.0;
            m(1, 1) = -1.0;
            break;
    }
    return m;
}

/// A two-qubit Pauli product sigma_a (x) sigma_b.
struct PauliPair {
    Pauli a = Pauli::I;
    Pauli b = Pauli::I;

    int index() const { return 4 * static_cast<int>(a) + static_cast<int>(b); }
    std::string label() const { return {pauli_char(a), pauli_char(b)}; }
    CMatrix matrix() const { return kron(pauli_matrix(a), pauli_matrix(b)); }
    bool operator==(const PauliPair &) const = default;

    static PauliPair from_index(int idx) { return {static_cast<Pauli>(idx / 4), static_cast<Pauli>(idx % 4)}; }

    static std::optional<PauliPair> parse(std::string_view s) {
        if (s.size() != 2) {
            return std::nullopt;
        }
        auto a = pauli_from_char(s[0]);
        auto b = pauli_from_char(s[1]);
        if (!a || !b) {
            return std::nullopt;
        }
        return PauliPair{*a, *b};
    }
};

inline constexpr Dims two_qubits{2, 2};

/// Real coefficients c_ab of W = sum_ab c_ab sigma_a (x) sigma_b.
class PauliCoefficients {
   public:
    PauliCoefficients() { values_.fill(0.0); }
    PauliCoefficients(std::initializer_list<std::pair<const char *, double>> terms) : PauliCoefficients() {
        for (const auto &[label, value] : terms) {
            auto p = PauliPair::parse(label);
            if (!p) {
                throw ValidationError(std::string("PauliCoefficients: bad label ") + label);
            }
            values_[p->index()] += value;
        }
    }

    double &operator[](PauliPair p) { return values_[p.index()]; }
    double operator[](PauliPair p) const { return values_[p.index()]; }
    double at(std::string_view label) const {
        auto p = PauliPair::parse(label);
        if (!p) {
            throw ValidationError("PauliCoefficients: bad label " + std::string(label));
        }
        return values_[p->index()];
    }
    const std::array<double, 16> &values() const { return values_; }

    double max_abs_difference(const PauliCoefficients &o) const {
        double m = 0.0;
        for (int i = 0; i < 16; ++i) {
            m = std::max(m, std::abs(values_[i] - o.values_[i]));
        }
        return m;
    }

   private:
    std::array<double, 16> values_;
};

inline PauliCoefficients pauli_decompose(const HermitianObservable &w) {
    if (w.dims() != two_qubits) {
        throw ValidationError("pauli_decompose: requires a 2x2 observable, got " + to_string(w.dims()));
    }
    PauliCoefficients c;
    for (int idx = 0; idx < 16; ++idx) {
        PauliPair p = PauliPair::from_index(idx);
        c[p] = (w.matrix() * p.matrix()).trace().real() / 4.0;
    }
    return c;
}

inline HermitianObservable pauli_compose(const PauliCoefficients &c) {
    CMatrix m = CMatrix::Zero(4, 4);
    for (int idx = 0; idx < 16; ++idx) {
        PauliPair p = PauliPair::from_index(idx);
        if (c[p] != 0.0) {
            m += c[p] * p.matrix();
        }
    }
    return HermitianObservable(two_qubits, m);
}

}  // namespace fidwit
