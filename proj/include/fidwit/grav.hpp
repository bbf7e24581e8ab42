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

// Two masses in spatial superposition, entangled by their Newtonian
// interaction:
//
//     psi(phi1, phi2) = (|LL> + e^{i phi1} |LR> + e^{i phi2} |RL> + |RR>) / 2
//
// with |L> = |0>, |R> = |1> and subsystem order (m, M). The witness family
// W_G(theta) = I/2 - |theta><theta| is built on the closest maximally
// entangled states of psi(0, 0); its Pauli form carries a factor 1/4.

#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "fidwit/pauli.hpp"
#include "fidwit/state.hpp"
#include "fidwit/trig_min.hpp"

namespace fidwit::grav {

struct PhasePair {
    double phi1 = 0.0;
    double phi2 = 0.0;

    PhasePair() = default;
    PhasePair(double p1, double p2) : phi1(p1), phi2(p2) {
        if (!std::isfinite(p1) || !std::isfinite(p2)) {
            throw ValidationError("PhasePair: phases must be finite");
        }
    }
};

/// SI units. G and hbar default to CODATA 2018.
struct ExperimentParams {
    double mass_m = 0.0;
    double mass_M = 0.0;
    double tau = 0.0;
    double ell = 0.0;
    double delta_x = 0.0;
    double G = 6.67430e-11;
    double hbar = 1.054571817e-34;
};

class DephasingParam {
   public:
    explicit DephasingParam(double gamma = 0.0) : gamma_(gamma) {
        if (std::isnan(gamma) || gamma < 0.0) {
            throw ValidationError("DephasingParam: gamma must be >= 0");
        }
        p_ = -0.5 * std::expm1(-gamma);
    }
    double gamma() const { return gamma_; }
    /// Z-flip probability (1 - e^{-gamma}) / 2.
    double p() const { return p_; }
    /// Per-qubit coherence factor 1 - 2p = e^{-gamma}.
    double coherence() const { return std::exp(-gamma_); }

   private:
    double gamma_;
    double p_;
};

class WitnessFamilyParam {
   public:
    explicit WitnessFamilyParam(double theta) : theta_(wrap_2pi(theta)) {
        if (!std::isfinite(theta)) {
            throw ValidationError("WitnessFamilyParam: theta must be finite");
        }
    }
    double theta() const { return theta_; }

   private:
    double theta_;
};

enum class CatalogWitness { W1, W1p, W1pp, W2, W3, W4 };

inline constexpr std::array<CatalogWitness, 6> all_catalog_witnesses = {
    CatalogWitness::W1, CatalogWitness::W1p, CatalogWitness::W1pp,
    CatalogWitness::W2, CatalogWitness::W3,  CatalogWitness::W4};

inline std::string_view catalog_name(CatalogWitness w) {
    switch (w) {
        case CatalogWitness::W1: return "W1";
        case CatalogWitness::W1p: return "W1p";
        case CatalogWitness::W1pp: return "W1pp";
        case CatalogWitness::W2: return "W2";
        case CatalogWitness::W3: return "W3";
        case CatalogWitness::W4: return "W4";
    }
    return "?";
}

inline std::optional<CatalogWitness> parse_catalog_name(std::string_view name) {
    for (auto w : all_catalog_witnesses) {
        if (catalog_name(w) == name) {
            return w;
        }
    }
    return std::nullopt;
}

/// Integer-coefficient Pauli forms.
inline PauliCoefficients catalog_pauli(CatalogWitness w) {
    switch (w) {
        case CatalogWitness::W1: return {{"XZ", 1}, {"YY", 1}};
        case CatalogWitness::W1p: return {{"II", 1}, {"XZ", 1}, {"YY", 1}};
        case CatalogWitness::W1pp: return {{"II", 1}, {"XZ", -1}, {"YY", -1}};
        case CatalogWitness::W2: return {{"II", 1}, {"XZ", 1}, {"ZX", -1}, {"YY", 1}};
        case CatalogWitness::W3: return {{"II", 1}, {"XX", -1}, {"YZ", -1}, {"ZY", -1}};
        case CatalogWitness::W4: return {{"II", 1}, {"XX", -1}, {"YZ", 1}, {"ZY", 1}};
    }
    throw ValidationError("catalog: unknown witness");
}

inline HermitianObservable catalog(CatalogWitness w) { return pauli_compose(catalog_pauli(w)); }

inline HermitianObservable catalog(std::string_view name) {
    auto w = parse_catalog_name(name);
    if (!w) {
        throw ValidationError("catalog: unknown witness '" + std::string(name) + "'");
    }
    return catalog(*w);
}

/// Factor taking the integer form to I/2 - |chi><chi| for the catalog
/// entries that are fidelity witnesses of a maximally entangled state.
inline std::optional<double> catalog_fidelity_scale(CatalogWitness w) {
    switch (w) {
        case CatalogWitness::W2:
        case CatalogWitness::W3:
        case CatalogWitness::W4: return 0.25;
        default: return std::nullopt;
    }
}

// ---------------------------------------------------------------------------

inline PureState grav_state(PhasePair phases) {
    CVector v(4);
    v << 0.5, 0.5 * std::polar(1.0, phases.phi1), 0.5 * std::polar(1.0, phases.phi2), 0.5;
    return PureState::normalized(two_qubits, std::move(v));
}

inline PhasePair phases_from_params(const ExperimentParams &p) {
    for (double v : {p.mass_m, p.mass_M, p.ell, p.delta_x, p.G, p.hbar}) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ValidationError("phases_from_params: masses, distances, G and hbar must be positive");
        }
    }
    if (!(p.tau >= 0.0) || !std::isfinite(p.tau)) {
        throw ValidationError("phases_from_params: tau must be >= 0");
    }
    if (p.ell == p.delta_x) {
        throw ValidationError("phases_from_params: ell == delta_x makes phi2 diverge");
    }
    const double coupling = p.G * p.mass_M * p.mass_m * p.tau / p.hbar;
    return PhasePair(coupling * (1.0 / (p.ell + p.delta_x) - 1.0 / p.ell),
                     coupling * (1.0 / (p.ell - p.delta_x) - 1.0 / p.ell));
}

inline PauliCoefficients wg_pauli(double theta) {
    const double c = 0.25 * std::cos(theta);
    const double s = 0.25 * std::sin(theta);
    return {{"II", 0.25}, {"XX", -0.25}, {"YY", c}, {"ZZ", -c}, {"YZ", s}, {"ZY", s}};
}

inline HermitianObservable wg_observable(WitnessFamilyParam param) { return pauli_compose(wg_pauli(param.theta())); }

/// (1/4)[2 sin^2((phi1-phi2)/2) sin^2(theta/2) + sin theta (sin phi1 + sin phi2)].
inline double wg_expectation_analytic(double theta, PhasePair phases) {
    const double sd = std::sin((phases.phi1 - phases.phi2) / 2.0);
    const double st = std::sin(theta / 2.0);
    return 0.25 * (2.0 * (sd * sd) * (st * st) + std::sin(theta) * (std::sin(phases.phi1) + std::sin(phases.phi2)));
}

/// (1/4)[1 + e^{-g} sin theta (sin phi1 + sin phi2)
///        - e^{-2g} (1 - 2 sin^2(theta/2) sin^2((phi1-phi2)/2))].
inline double dephased_expectation_analytic(double theta, PhasePair phases, DephasingParam deph) {
    const double e1 = deph.coherence();
    const double e2 = e1 * e1;
    const double sd = std::sin((phases.phi1 - phases.phi2) / 2.0);
    const double st = std::sin(theta / 2.0);
    // 1 - e^{-2g} via expm1 so that gamma = 0 reproduces the closed-system
    // formula bit for bit.
    const double floor = -std::expm1(-2.0 * deph.gamma());
    return 0.25 * ((floor + e2 * (2.0 * (sd * sd) * (st * st))) +
                   e1 * (std::sin(theta) * (std::sin(phases.phi1) + std::sin(phases.phi2))));
}

/// |sin phi1 + sin phi2| at or below this counts as zero when minimizing.
inline constexpr double measure_zero_tolerance = 1e-10;

inline ThetaMinimum minimize_over_theta(PhasePair phases, DephasingParam deph = DephasingParam(0.0)) {
    const double sd = std::sin((phases.phi1 - phases.phi2) / 2.0);
    const double a = 2.0 * sd * sd;
    double b = std::sin(phases.phi1) + std::sin(phases.phi2);
    if (std::abs(b) <= measure_zero_tolerance) {
        b = 0.0;
    }
    const double e1 = deph.coherence();
    const double offset = -0.25 * std::expm1(-2.0 * deph.gamma());
    return minimize_shifted_sinusoid(offset, 0.25 * e1 * e1 * a / 2.0, 0.25 * e1 * b);
}

struct SmallTauPrediction {
    double w3_linear;
    double w4_linear;
};

/// First-order expectations of the integer-form W3 and W4 for small phases.
inline SmallTauPrediction small_tau_check(PhasePair phases) {
    const double sum = phases.phi1 + phases.phi2;
    return {-sum, sum};
}

inline DensityOperator dephased_state(PhasePair phases, DephasingParam deph) {
    return apply_channel(DensityOperator(grav_state(phases)), KrausChannel::dephasing(deph.p()));
}

/// Same matrix as dephased_state without validation: local Z dephasing
/// scales |j><k| by e^{-gamma} per qubit on which j and k differ.
inline CMatrix dephased_density_matrix(PhasePair phases, double coherence) {
    const std::array<Complex, 4> v = {0.5, 0.5 * std::polar(1.0, phases.phi1), 0.5 * std::polar(1.0, phases.phi2),
                                      0.5};
    const std::array<double, 3> factor = {1.0, coherence, coherence * coherence};
    CMatrix rho(4, 4);
    for (unsigned j = 0; j < 4; ++j) {
        for (unsigned k = 0; k < 4; ++k) {
            rho(j, k) = v[j] * std::conj(v[k]) * factor[std::popcount(j ^ k)];
        }
    }
    return rho;
}

struct EntanglementTruth {
    bool entangled;
    bool maximally_entangled;
};

/// Product iff phi1 + phi2 = 2n pi; maximal iff phi1 + phi2 = (2n+1) pi.
inline EntanglementTruth entangled_ground_truth(PhasePair phases) {
    const double w = wrap_pm_pi(phases.phi1 + phases.phi2);
    return {std::abs(w) > tol::exact, std::abs(std::abs(w) - pi) <= tol::exact};
}

}  // namespace fidwit::grav
