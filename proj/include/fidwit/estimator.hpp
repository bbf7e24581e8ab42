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

// Finite-shot estimation of two-qubit witness expectations from local
// Pauli-product measurements.
//
// Each setting sigma_a (x) sigma_b is measured N times; the four joint
// outcomes are drawn from their exact Born probabilities as multinomial
// counts. Every (seed, setting, half) triple owns its own RNG stream, so
// results do not depend on evaluation order.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fidwit/grav.hpp"
#include "fidwit/pauli.hpp"
#include "fidwit/state.hpp"
#include "fidwit/trig_min.hpp"

namespace fidwit::estimator {

/// The five non-identity settings that determine W_G(theta) for all theta.
inline std::vector<PauliPair> wg_settings() {
    return {{Pauli::X, Pauli::X}, {Pauli::Y, Pauli::Y}, {Pauli::Z, Pauli::Z}, {Pauli::Y, Pauli::Z}, {Pauli::Z, Pauli::Y}};
}

struct ShotPlan {
    std::uint64_t shots_per_setting = 1;
    std::vector<PauliPair> settings = wg_settings();
    std::uint64_t seed = 0;

    void validate() const {
        if (shots_per_setting < 1) {
            throw ValidationError("ShotPlan: shots_per_setting must be >= 1");
        }
        if (settings.empty()) {
            throw ValidationError("ShotPlan: no settings");
        }
        for (std::size_t i = 0; i < settings.size(); ++i) {
            for (std::size_t j = i + 1; j < settings.size(); ++j) {
                if (settings[i] == settings[j]) {
                    throw ValidationError("ShotPlan: duplicate setting " + settings[i].label());
                }
            }
        }
    }
};

struct SettingEstimate {
    PauliPair setting;
    /// 0 marks exact (infinite-shot) values.
    std::uint64_t shots = 0;
    double mean = 0.0;
    double standard_error = 0.0;
};

/// Per-setting sample means from one batch of shots.
struct ShotData {
    std::vector<SettingEstimate> settings;

    const SettingEstimate *find(PauliPair p) const {
        for (const auto &s : settings) {
            if (s.setting == p) {
                return &s;
            }
        }
        return nullptr;
    }
};

struct EstimateReport {
    std::vector<SettingEstimate> settings;
    double witness_estimate = 0.0;
    double witness_stderr = 0.0;
    std::optional<double> theta_used;
    /// theta was chosen on the same shots it was evaluated on.
    bool optimistic_minimum = false;
    bool split_sample = false;
};

// ---------------------------------------------------------------------------

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x51ed270b7a3c44d5ULL));
}

inline void require_two_qubits(Dims d, const char *what) {
    if (d != two_qubits) {
        throw ValidationError(std::string(what) + ": requires a two-qubit state");
    }
}

/// Born probabilities of the outcome pairs (+,+), (+,-), (-,+), (-,-).
inline std::array<double, 4> outcome_probabilities(const DensityOperator &rho, PauliPair setting) {
    auto projector = [](Pauli p, int sign) -> CMatrix {
        if (p == Pauli::I) {
            return sign > 0 ? CMatrix(CMatrix::Identity(2, 2)) : CMatrix(CMatrix::Zero(2, 2));
        }
        return (CMatrix::Identity(2, 2) + static_cast<double>(sign) * pauli_matrix(p)) / 2.0;
    };
    std::array<double, 4> probs{};
    double total = 0.0;
    int k = 0;
    for (int sa : {1, -1}) {
        for (int sb : {1, -1}) {
            const CMatrix proj = kron(projector(setting.a, sa), projector(setting.b, sb));
            double p = (rho.matrix() * proj).trace().real();
            if (p < 1e-15) {
                p = 0.0;
            }
            probs[k++] = p;
            total += p;
        }
    }
    for (double &p : probs) {
        p /= total;
    }
    return probs;
}

}  // namespace detail

/// Draws n outcome pairs for one setting; `stream` selects an independent
/// RNG stream under the same seed.
inline SettingEstimate sample_pauli_pair(const DensityOperator &rho, PauliPair setting, std::uint64_t n,
                                         std::uint64_t seed, std::uint64_t stream = 0) {
    detail::require_two_qubits(rho.dims(), "sample_pauli_pair");
    if (n < 1) {
        throw ValidationError("sample_pauli_pair: need at least one shot");
    }
    const auto probs = detail::outcome_probabilities(rho, setting);
    std::mt19937_64 rng(detail::stream_seed(seed, (stream << 4) | static_cast<std::uint64_t>(setting.index())));

    // Multinomial counts as a chain of conditional binomials.
    std::array<std::uint64_t, 4> counts{};
    std::uint64_t remaining = n;
    double mass = 1.0;
    for (int k = 0; k < 3 && remaining > 0; ++k) {
        const double q = mass > 0.0 ? std::clamp(probs[k] / mass, 0.0, 1.0) : 0.0;
        std::binomial_distribution<std::uint64_t> draw(remaining, q);
        counts[k] = q >= 1.0 ? remaining : (q <= 0.0 ? 0 : draw(rng));
        remaining -= counts[k];
        mass -= probs[k];
    }
    counts[3] = remaining;

    // Products: (+,+) -> +1, (+,-) -> -1, (-,+) -> -1, (-,-) -> +1.
    const double plus = static_cast<double>(counts[0] + counts[3]);
    const double minus = static_cast<double>(counts[1] + counts[2]);
    const double mean = (plus - minus) / static_cast<double>(n);
    return SettingEstimate{setting, n, mean, std::sqrt(std::max(0.0, 1.0 - mean * mean) / static_cast<double>(n))};
}

inline ShotData collect_shots(const DensityOperator &rho, const ShotPlan &plan, std::uint64_t stream = 0) {
    plan.validate();
    ShotData data;
    for (const auto &s : plan.settings) {
        data.settings.push_back(sample_pauli_pair(rho, s, plan.shots_per_setting, plan.seed, stream));
    }
    return data;
}

/// Exact expectation values in place of sample means (infinite shots).
inline ShotData exact_shot_data(const DensityOperator &rho, const std::vector<PauliPair> &settings) {
    detail::require_two_qubits(rho.dims(), "exact_shot_data");
    ShotData data;
    for (const auto &s : settings) {
        data.settings.push_back({s, 0, (rho.matrix() * s.matrix()).trace().real(), 0.0});
    }
    return data;
}

struct LinearEstimate {
    double value;
    double standard_error;
};

/// sum_ab c_ab <sigma_a sigma_b> with the II term taken as exactly 1.
/// Errors are propagated assuming independent settings.
inline LinearEstimate combine(const ShotData &data, const PauliCoefficients &coeffs) {
    double value = 0.0;
    double variance = 0.0;
    for (int idx = 0; idx < 16; ++idx) {
        const PauliPair p = PauliPair::from_index(idx);
        const double c = coeffs[p];
        if (idx == 0) {
            value += c;
            continue;
        }
        if (c == 0.0) {
            continue;
        }
        const SettingEstimate *s = data.find(p);
        if (s == nullptr) {
            throw ValidationError("combine: shot data lacks setting " + p.label());
        }
        value += c * s->mean;
        variance += c * c * s->standard_error * s->standard_error;
    }
    return {value, std::sqrt(variance)};
}

inline LinearEstimate observable_estimate(const ShotData &data, const HermitianObservable &w) {
    PauliCoefficients c = pauli_decompose(w);
    // Round-off from the trace projection must not demand absent settings.
    for (int idx = 0; idx < 16; ++idx) {
        PauliPair p = PauliPair::from_index(idx);
        if (std::abs(c[p]) < 1e-14) {
            c[p] = 0.0;
        }
    }
    return combine(data, c);
}

inline void require_wg_settings(const ShotData &data) {
    for (const auto &p : wg_settings()) {
        if (data.find(p) == nullptr) {
            throw ValidationError("W_G estimate: shot data lacks setting " + p.label());
        }
    }
}

/// Recombines one data set into W_G(theta) for any theta without new shots.
inline LinearEstimate wg_estimate(const ShotData &data, double theta) {
    require_wg_settings(data);
    return combine(data, grav::wg_pauli(theta));
}

/// theta minimizing the W_G estimate on this data.
inline ThetaMinimum wg_min_theta(const ShotData &data) {
    require_wg_settings(data);
    auto mean = [&](Pauli a, Pauli b) { return data.find({a, b})->mean; };
    const double offset = 0.25 * (1.0 - mean(Pauli::X, Pauli::X));
    const double cos_amp = 0.25 * (mean(Pauli::Y, Pauli::Y) - mean(Pauli::Z, Pauli::Z));
    const double sin_amp = 0.25 * (mean(Pauli::Y, Pauli::Z) + mean(Pauli::Z, Pauli::Y));
    return minimize_sinusoid(offset, cos_amp, sin_amp);
}

/// W_G estimate at a fixed theta, or minimized over theta when theta is
/// empty. With split_sample the minimizing theta is chosen on one half of
/// the shots and the reported estimate comes from the other half.
inline EstimateReport estimate_witness(const DensityOperator &rho, std::optional<double> theta, const ShotPlan &plan,
                                       bool split_sample = false) {
    plan.validate();
    detail::require_two_qubits(rho.dims(), "estimate_witness");
    EstimateReport report;
    if (theta) {
        ShotData data = collect_shots(rho, plan);
        const LinearEstimate e = wg_estimate(data, *theta);
        report = EstimateReport{std::move(data.settings), e.value, e.standard_error, wrap_2pi(*theta), false, false};
        return report;
    }
    if (!split_sample) {
        ShotData data = collect_shots(rho, plan);
        const double t = wg_min_theta(data).theta;
        const LinearEstimate e = wg_estimate(data, t);
        return EstimateReport{std::move(data.settings), e.value, e.standard_error, t, true, false};
    }
    if (plan.shots_per_setting < 2) {
        throw ValidationError("estimate_witness: split-sample mode needs at least two shots per setting");
    }
    ShotPlan select = plan;
    select.shots_per_setting = plan.shots_per_setting / 2;
    ShotPlan evaluate = plan;
    evaluate.shots_per_setting = plan.shots_per_setting - select.shots_per_setting;
    const double t = wg_min_theta(collect_shots(rho, select, 1)).theta;
    ShotData data = collect_shots(rho, evaluate, 2);
    const LinearEstimate e = wg_estimate(data, t);
    return EstimateReport{std::move(data.settings), e.value, e.standard_error, t, false, true};
}

inline nlohmann::json to_json(const EstimateReport &r) {
    nlohmann::json settings = nlohmann::json::array();
    for (const auto &s : r.settings) {
        settings.push_back({{"setting", s.setting.label()}, {"shots", s.shots}, {"mean", s.mean}, {"stderr", s.standard_error}});
    }
    nlohmann::json j{{"settings", settings},
                     {"witness_estimate", r.witness_estimate},
                     {"witness_stderr", r.witness_stderr},
                     {"optimistic_minimum", r.optimistic_minimum},
                     {"split_sample", r.split_sample}};
    j["theta_used"] = r.theta_used ? nlohmann::json(*r.theta_used) : nlohmann::json(nullptr);
    return j;
}

}  // namespace fidwit::estimator
