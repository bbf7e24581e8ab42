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

// Witness expectation values over a rectangle of (phi1, phi2) space.
//
// Cells are sampled at their centers (midpoint rule). On [0, 2pi]^2 the
// cell centers with i + j = resolution - 1 sit on the product line
// phi1 + phi2 = 2pi; detection rules are strict (< 0, |v| > 1), so those
// zero-valued cells never count as detecting.

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "fidwit/detail/parallel.hpp"
#include "fidwit/grav.hpp"

namespace fidwit::scan {

using grav::CatalogWitness;
using grav::DephasingParam;
using grav::PhasePair;

struct Interval {
    double lo = 0.0;
    double hi = two_pi;

    double width() const { return hi - lo; }
    bool operator==(const Interval &) const = default;
};

/// W_G(theta) at a fixed theta.
struct WgFixed {
    double theta = 0.0;
    bool operator==(const WgFixed &) const = default;
};

/// min over theta of W_G(theta), cell by cell.
struct WgMinTheta {
    bool operator==(const WgMinTheta &) const = default;
};

using WitnessSelector = std::variant<CatalogWitness, WgFixed, WgMinTheta>;

enum class DetectionRule { Negative, AbsGreaterOne };

struct ScanSpec {
    Interval phi1_range{};
    Interval phi2_range{};
    int resolution = 2001;
    WitnessSelector witness = WgMinTheta{};
    DephasingParam gamma{};
    DetectionRule rule = DetectionRule::Negative;

    void validate() const {
        if (resolution < 2) {
            throw ValidationError("ScanSpec: resolution must be >= 2");
        }
        for (const Interval &r : {phi1_range, phi2_range}) {
            if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || !(r.hi > r.lo)) {
                throw ValidationError("ScanSpec: ranges must be finite and nonempty");
            }
        }
        if (rule == DetectionRule::AbsGreaterOne) {
            const auto *w = std::get_if<CatalogWitness>(&witness);
            if (w == nullptr || *w != CatalogWitness::W1) {
                throw ValidationError("ScanSpec: the |value| > 1 rule applies only to the raw W1 witness");
            }
        }
    }

    double phi1_at(int i) const { return phi1_range.lo + (i + 0.5) * phi1_range.width() / resolution; }
    double phi2_at(int j) const { return phi2_range.lo + (j + 0.5) * phi2_range.width() / resolution; }
};

/// Row-major values: row i is phi1 cell i, column j is phi2 cell j.
struct PhaseGrid {
    ScanSpec spec;
    std::vector<double> values;

    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * spec.resolution + j]; }
};

struct LabelGrid {
    int resolution = 0;
    Interval phi1_range{};
    Interval phi2_range{};
    /// Index of the first detecting spec per cell, or -1.
    std::vector<int> labels;

    int at(int i, int j) const { return labels[static_cast<std::size_t>(i) * resolution + j]; }
};

inline std::string selector_label(const WitnessSelector &w) {
    if (const auto *c = std::get_if<CatalogWitness>(&w)) {
        return std::string(grav::catalog_name(*c));
    }
    if (std::holds_alternative<WgFixed>(w)) {
        return "wg";
    }
    return "wg-min-theta";
}

inline std::string_view rule_label(DetectionRule r) {
    return r == DetectionRule::Negative ? "negative" : "abs-greater-one";
}

inline bool detects(double value, DetectionRule rule) {
    return rule == DetectionRule::Negative ? value < 0.0 : std::abs(value) > 1.0;
}

// ---------------------------------------------------------------------------

namespace detail {

/// Per-cell evaluator for one spec; closed forms where available.
class CellEvaluator {
   public:
    explicit CellEvaluator(const ScanSpec &spec) : spec_(spec), coherence_(spec.gamma.coherence()) {
        if (const auto *c = std::get_if<CatalogWitness>(&spec.witness)) {
            catalog_ = *c;
            if (*c != CatalogWitness::W3 && *c != CatalogWitness::W4) {
                // <W> = sum_jk conj(v_k) W_kj v_j f(j, k), with f the dephasing
                // factor of |j><k|.
                const CMatrix w = grav::catalog(*c).matrix();
                const std::array<double, 3> f = {1.0, coherence_, coherence_ * coherence_};
                for (unsigned k = 0; k < 4; ++k) {
                    for (unsigned j = 0; j < 4; ++j) {
                        weighted_[k][j] = w(k, j) * f[std::popcount(j ^ k)];
                    }
                }
            }
        }
    }

    double operator()(PhasePair phases) const {
        if (const auto *fixed = std::get_if<WgFixed>(&spec_.witness)) {
            return grav::dephased_expectation_analytic(fixed->theta, phases, spec_.gamma);
        }
        if (std::holds_alternative<WgMinTheta>(spec_.witness)) {
            return grav::minimize_over_theta(phases, spec_.gamma).value;
        }
        if (catalog_ == CatalogWitness::W3 || catalog_ == CatalogWitness::W4) {
            // 4 W_G(3pi/2) and 4 W_G(pi/2): (1 - e^{-2g}) + e^{-2g} sd^2 -/+ e^{-g} b.
            const double sd = std::sin((phases.phi1 - phases.phi2) / 2.0);
            const double b = std::sin(phases.phi1) + std::sin(phases.phi2);
            const double floor = -std::expm1(-2.0 * spec_.gamma.gamma());
            const double sign = catalog_ == CatalogWitness::W3 ? -1.0 : 1.0;
            return floor + coherence_ * coherence_ * (sd * sd) + sign * coherence_ * b;
        }
        const std::array<Complex, 4> v = {0.5, 0.5 * std::polar(1.0, phases.phi1), 0.5 * std::polar(1.0, phases.phi2),
                                          0.5};
        double sum = 0.0;
        for (unsigned k = 0; k < 4; ++k) {
            Complex row = 0.0;
            for (unsigned j = 0; j < 4; ++j) {
                row += weighted_[k][j] * v[j];
            }
            sum += (std::conj(v[k]) * row).real();
        }
        return sum;
    }

   private:
    const ScanSpec &spec_;
    double coherence_;
    std::optional<CatalogWitness> catalog_;
    std::array<std::array<Complex, 4>, 4> weighted_{};
};

}  // namespace detail

/// Evaluates the selected witness at every cell center. threads = 0 uses
/// all hardware threads; the result does not depend on the thread count.
inline PhaseGrid grid_scan(const ScanSpec &spec, unsigned threads = 0) {
    spec.validate();
    PhaseGrid grid{spec, std::vector<double>(static_cast<std::size_t>(spec.resolution) * spec.resolution)};
    const detail::CellEvaluator eval(grid.spec);
    const int n = spec.resolution;
    fidwit::detail::parallel_rows(static_cast<std::size_t>(n), threads, [&](std::size_t row) {
        const int i = static_cast<int>(row);
        const double phi1 = spec.phi1_at(i);
        double *out = grid.values.data() + row * n;
        for (int j = 0; j < n; ++j) {
            out[j] = eval(PhasePair(phi1, spec.phi2_at(j)));
        }
    });
    for (double v : grid.values) {
        if (!std::isfinite(v)) {
            throw ValidationError("grid_scan: non-finite witness value");
        }
    }
    return grid;
}

inline double detection_area_fraction(const PhaseGrid &grid) {
    std::size_t hits = 0;
    for (double v : grid.values) {
        hits += detects(v, grid.spec.rule) ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(grid.values.size());
}

struct TailFractions {
    double below_minus_one;
    double above_one;
};

/// Separate fractions for the two tails of a |value| > 1 detection set.
inline TailFractions tail_fractions(const PhaseGrid &grid) {
    std::size_t lo = 0;
    std::size_t hi = 0;
    for (double v : grid.values) {
        lo += v < -1.0 ? 1 : 0;
        hi += v > 1.0 ? 1 : 0;
    }
    const double n = static_cast<double>(grid.values.size());
    return {lo / n, hi / n};
}

inline LabelGrid combined_region(const std::vector<ScanSpec> &specs, unsigned threads = 0) {
    if (specs.empty()) {
        throw ValidationError("combined_region: no specs");
    }
    for (const auto &s : specs) {
        if (s.resolution != specs.front().resolution || s.phi1_range != specs.front().phi1_range ||
            s.phi2_range != specs.front().phi2_range) {
            throw ValidationError("combined_region: specs must share ranges and resolution");
        }
    }
    const auto &first = specs.front();
    LabelGrid out{first.resolution, first.phi1_range, first.phi2_range,
                  std::vector<int>(static_cast<std::size_t>(first.resolution) * first.resolution, -1)};
    for (std::size_t k = 0; k < specs.size(); ++k) {
        const PhaseGrid grid = grid_scan(specs[k], threads);
        for (std::size_t c = 0; c < grid.values.size(); ++c) {
            if (out.labels[c] < 0 && detects(grid.values[c], specs[k].rule)) {
                out.labels[c] = static_cast<int>(k);
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Output

enum class GridFormat { Csv, Json, Pgm };

inline std::optional<GridFormat> parse_grid_format(std::string_view s) {
    if (s == "csv") return GridFormat::Csv;
    if (s == "json") return GridFormat::Json;
    if (s == "pgm") return GridFormat::Pgm;
    return std::nullopt;
}

inline nlohmann::json spec_to_json(const ScanSpec &spec) {
    nlohmann::json j;
    j["phi1_range"] = {spec.phi1_range.lo, spec.phi1_range.hi};
    j["phi2_range"] = {spec.phi2_range.lo, spec.phi2_range.hi};
    j["resolution"] = spec.resolution;
    j["witness"] = selector_label(spec.witness);
    if (const auto *fixed = std::get_if<WgFixed>(&spec.witness)) {
        j["theta"] = fixed->theta;
    }
    j["gamma"] = spec.gamma.gamma();
    j["rule"] = rule_label(spec.rule);
    return j;
}

inline std::string format_g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// 0 -> 128, most negative -> 0, most positive -> 255, linear on each side.
inline std::uint8_t heatmap_level(double v, double most_negative, double most_positive) {
    if (v < 0.0 && most_negative < 0.0) {
        return static_cast<std::uint8_t>(std::lround(128.0 - 128.0 * (v / most_negative)));
    }
    if (v > 0.0 && most_positive > 0.0) {
        return static_cast<std::uint8_t>(std::lround(128.0 + 127.0 * (v / most_positive)));
    }
    return 128;
}

/// csv: "phi1,phi2,value" header and one row per cell (row-major).
/// json: {"spec": ..., "values": [row-major]}.
/// pgm: binary P5, x = phi1, y = phi2 increasing upward.
inline void emit_grid(const PhaseGrid &grid, GridFormat format, std::ostream &out) {
    const int n = grid.spec.resolution;
    switch (format) {
        case GridFormat::Csv: {
            out << "phi1,phi2,value\n";
            for (int i = 0; i < n; ++i) {
                const std::string phi1 = format_g17(grid.spec.phi1_at(i));
                for (int j = 0; j < n; ++j) {
                    out << phi1 << ',' << format_g17(grid.spec.phi2_at(j)) << ',' << format_g17(grid.at(i, j)) << '\n';
                }
            }
            break;
        }
        case GridFormat::Json: {
            nlohmann::json j;
            j["spec"] = spec_to_json(grid.spec);
            j["values"] = grid.values;
            out << j.dump() << '\n';
            break;
        }
        case GridFormat::Pgm: {
            const auto [lo, hi] = std::minmax_element(grid.values.begin(), grid.values.end());
            out << "P5\n" << n << ' ' << n << "\n255\n";
            std::vector<char> row(static_cast<std::size_t>(n));
            for (int y = n - 1; y >= 0; --y) {
                for (int x = 0; x < n; ++x) {
                    row[x] = static_cast<char>(heatmap_level(grid.at(x, y), *lo, *hi));
                }
                out.write(row.data(), n);
            }
            break;
        }
    }
    if (!out) {
        throw std::runtime_error("emit_grid: write failed");
    }
}

/// Writes via a sibling temporary file and renames, so a failed write
/// leaves no partial output behind.
inline void write_grid_file(const PhaseGrid &grid, GridFormat format, const std::filesystem::path &path) {
    std::filesystem::path tmp = path;
    tmp += ".partial";
    try {
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) {
                throw std::runtime_error("cannot open " + tmp.string() + " for writing");
            }
            emit_grid(grid, format, out);
            out.close();
            if (!out) {
                throw std::runtime_error("failed writing " + tmp.string());
            }
        }
        std::filesystem::rename(tmp, path);
    } catch (...) {
        std::error_code ec;
        std::filesystem::remove(tmp, ec);
        throw;
    }
}

}  // namespace fidwit::scan
