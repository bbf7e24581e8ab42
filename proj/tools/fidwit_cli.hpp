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

// The fidwit command line: witness analysis, phase-space scans, the
// detection-area table and finite-shot estimates.
//
// run() holds all of the logic so tests can drive it without a process.
// Exit codes: 0 success, 1 invalid input or runtime failure, 2 usage error.
// Every failure prints exactly one diagnostic line to the error stream.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <ostream>
#include <regex>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "fidwit/fidwit.hpp"

namespace fidwit::cli {

using grav::DephasingParam;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Value parsing

inline double parse_number(std::string_view s, const std::string &what) {
    double v = 0.0;
    const char *end = s.data() + s.size();
    if (!s.empty() && s.front() == '+') {
        s.remove_prefix(1);
    }
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (s.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
        throw ValidationError("invalid " + what + " '" + std::string(s) + "'");
    }
    return v;
}

/// Radians, with pi literals: "0.3", "pi", "-pi/2", "3pi/2", "2*pi", "1.5pi".
inline double parse_angle(const std::string &text) {
    static const std::regex pattern(R"(^\s*([+-]?)((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*(\*?\s*pi)?\s*(?:/\s*((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?))?\s*$)");
    std::smatch m;
    if (!std::regex_match(text, m, pattern) || (!m[2].matched && !m[3].matched) ||
        (m[3].matched && m[3].str().front() == '*' && !m[2].matched)) {
        throw ValidationError("invalid angle '" + text + "'");
    }
    double v = m[2].matched ? parse_number(m[2].str(), "angle") : 1.0;
    if (m[3].matched) {
        v *= pi;
    }
    if (m[4].matched) {
        const double d = parse_number(m[4].str(), "angle");
        if (d == 0.0) {
            throw ValidationError("invalid angle '" + text + "': division by zero");
        }
        v /= d;
    }
    if (m[1].str() == "-") {
        v = -v;
    }
    return v;
}

inline std::vector<std::string> split(const std::string &s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) {
        parts.push_back(cur);
    }
    if (!s.empty() && s.back() == sep) {
        parts.emplace_back();
    }
    return parts;
}

inline std::vector<double> parse_number_list(const std::string &s, const std::string &what) {
    std::vector<double> out;
    for (const auto &p : split(s, ',')) {
        const auto b = p.find_first_not_of(" \t");
        const auto e = p.find_last_not_of(" \t");
        if (b == std::string::npos) {
            throw ValidationError("empty entry in " + what);
        }
        out.push_back(parse_number(std::string_view(p).substr(b, e - b + 1), what));
    }
    return out;
}

/// "AxB".
inline Dims parse_dims(const std::string &s) {
    const auto x = s.find('x');
    if (x == std::string::npos) {
        throw ValidationError("invalid dims '" + s + "': expected AxB");
    }
    const double a = parse_number(s.substr(0, x), "dims");
    const double b = parse_number(s.substr(x + 1), "dims");
    if (a < 1 || b < 1 || a != std::floor(a) || b != std::floor(b)) {
        throw ValidationError("invalid dims '" + s + "'");
    }
    return Dims{static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)};
}

/// Square-root split of a total dimension when no dims were given.
inline Dims infer_dims(Eigen::Index total, const std::optional<Dims> &given) {
    if (given) {
        if (given->total() != total) {
            throw ValidationError("dims " + to_string(*given) + " do not match " + std::to_string(total) + " entries");
        }
        return *given;
    }
    const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(total))));
    if (d * d != total || d < 1) {
        throw ValidationError("cannot infer dims for dimension " + std::to_string(total) + "; pass --dims");
    }
    return Dims{d, d};
}

/// Comma-separated (re, im) pairs.
inline CVector parse_complex_list(const std::string &s, const std::string &what) {
    const auto nums = parse_number_list(s, what);
    if (nums.empty() || nums.size() % 2 != 0) {
        throw ValidationError(what + " needs an even number of entries (re,im pairs)");
    }
    CVector v(static_cast<Eigen::Index>(nums.size() / 2));
    for (std::size_t k = 0; k < nums.size() / 2; ++k) {
        v(static_cast<Eigen::Index>(k)) = Complex(nums[2 * k], nums[2 * k + 1]);
    }
    return v;
}

/// "bell", "grav:phi1,phi2", or raw amplitudes as (re, im) pairs, which
/// are normalized.
inline PureState parse_state(const std::string &spec, const std::optional<Dims> &dims) {
    const bool preset = spec == "bell" || spec.rfind("grav:", 0) == 0;
    if (preset && dims && *dims != two_qubits) {
        throw ValidationError("state '" + spec + "' is two-qubit but --dims is " + to_string(*dims));
    }
    if (spec == "bell") {
        CVector v = CVector::Zero(4);
        v(0) = v(3) = 1.0 / std::sqrt(2.0);
        return PureState(two_qubits, v);
    }
    if (spec.rfind("grav:", 0) == 0) {
        const auto parts = split(spec.substr(5), ',');
        if (parts.size() != 2) {
            throw ValidationError("invalid state '" + spec + "': expected grav:phi1,phi2");
        }
        return grav::grav_state(grav::PhasePair(parse_angle(parts[0]), parse_angle(parts[1])));
    }
    CVector v = parse_complex_list(spec, "state amplitudes");
    if (v.norm() == 0.0) {
        throw ValidationError("state amplitudes are all zero");
    }
    const Dims d = infer_dims(v.size(), dims);
    return PureState::normalized(d, std::move(v));
}

/// Flattened row-major (re, im) pairs.
inline HermitianObservable parse_matrix(const std::string &spec, const std::optional<Dims> &dims) {
    CVector flat = parse_complex_list(spec, "matrix");
    const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(flat.size()))));
    if (n * n != flat.size()) {
        throw ValidationError("matrix has " + std::to_string(flat.size()) + " entries, not a square count");
    }
    CMatrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            m(i, j) = flat(i * n + j);
        }
    }
    return HermitianObservable(infer_dims(n, dims), m);
}

inline scan::Interval parse_interval(const std::string &s) {
    const auto c = s.find(':');
    if (c == std::string::npos) {
        throw ValidationError("invalid range '" + s + "': expected LO:HI");
    }
    return scan::Interval{parse_angle(s.substr(0, c)), parse_angle(s.substr(c + 1))};
}

// ---------------------------------------------------------------------------
// Output helpers

inline std::string fmt(double v, int digits = 10) {
    std::ostringstream s;
    s << std::setprecision(digits) << v;
    return s.str();
}

inline json complex_to_json(Complex c) { return json::array({c.real(), c.imag()}); }

inline json matrix_to_json(const CMatrix &m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            row.push_back(complex_to_json(m(i, j)));
        }
        rows.push_back(row);
    }
    return rows;
}

inline json vector_to_json(const CVector &v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(complex_to_json(v(i)));
    }
    return out;
}

inline std::string complex_str(Complex c) {
    const double re = std::abs(c.real()) < 1e-15 ? 0.0 : c.real();
    const double im = std::abs(c.imag()) < 1e-15 ? 0.0 : c.imag();
    if (im == 0.0) {
        return fmt(re, 6);
    }
    std::ostringstream s;
    s << fmt(re, 6) << (im < 0 ? "-" : "+") << fmt(std::abs(im), 6) << "i";
    return s.str();
}

inline void print_matrix(std::ostream &out, const CMatrix &m, const std::string &indent) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out << indent;
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            out << std::setw(16) << complex_str(m(i, j));
        }
        out << '\n';
    }
}

/// Nonzero Pauli coefficients, or null beyond two qubits.
inline json pauli_json(const HermitianObservable &w) {
    if (w.dims() != two_qubits) {
        return nullptr;
    }
    json out = json::object();
    const PauliCoefficients c = pauli_decompose(w);
    for (int idx = 0; idx < 16; ++idx) {
        const PauliPair p = PauliPair::from_index(idx);
        if (std::abs(c[p]) > 1e-12) {
            out[p.label()] = c[p];
        }
    }
    return out;
}

inline std::string pauli_str(const json &p) {
    std::string s;
    for (const auto &[k, v] : p.items()) {
        s += (s.empty() ? "" : " ") + k + ":" + fmt(v.get<double>(), 8);
    }
    return s.empty() ? "0" : s;
}

inline void row(std::ostream &out, const std::string &key, const std::string &value) {
    out << std::left << std::setw(22) << key << value << '\n';
}

// ---------------------------------------------------------------------------
// Subcommand state

struct WitnessArgs {
    std::string state;
    std::string matrix;
    std::string catalog;
    std::string theta;
    std::string dims;
    std::string phases;
    bool json = false;
};

struct ScanArgs {
    std::string witness;
    std::string theta;
    bool min_theta = false;
    double gamma = 0.0;
    int resolution = 2001;
    std::string range;
    std::string out;
    std::string format;
    std::string rule = "negative";
    bool json = false;
};

struct Table1Args {
    int resolution = 4001;
    bool json = false;
};

struct EstimateArgs {
    std::string phi1 = "0";
    std::string phi2 = "0";
    double gamma = 0.0;
    std::uint64_t shots = 1000000;
    std::uint64_t seed = 0;
    std::string theta;
    bool min_theta = false;
    bool split_sample = false;
    bool json = false;
};

inline std::optional<Dims> optional_dims(const std::string &s) {
    return s.empty() ? std::nullopt : std::optional<Dims>(parse_dims(s));
}

/// The observable selected by --matrix, --catalog or --theta.
inline HermitianObservable select_observable(const WitnessArgs &a, json &config) {
    const int given = (a.matrix.empty() ? 0 : 1) + (a.catalog.empty() ? 0 : 1) + (a.theta.empty() ? 0 : 1);
    if (given != 1) {
        throw ValidationError("give exactly one of --matrix, --catalog, --theta");
    }
    if (!a.catalog.empty()) {
        config["catalog"] = a.catalog;
        return grav::catalog(a.catalog);
    }
    if (!a.theta.empty()) {
        const double t = parse_angle(a.theta);
        config["theta"] = t;
        return grav::wg_observable(grav::WitnessFamilyParam(t));
    }
    config["matrix"] = a.matrix;
    return parse_matrix(a.matrix, optional_dims(a.dims));
}

inline const PureState require_state(const WitnessArgs &a, json &config) {
    if (a.state.empty()) {
        throw ValidationError("--state is required");
    }
    config["state"] = a.state;
    return parse_state(a.state, optional_dims(a.dims));
}

inline void emit(std::ostream &out, const std::string &command, const json &config, const json &result) {
    out << json{{"command", command}, {"config", config}, {"result", result}}.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// witness

inline void cmd_witness_build(const WitnessArgs &a, std::ostream &out) {
    json config;
    const PureState psi = require_state(a, config);
    const FidelityWitness w = build_fidelity_witness(psi);
    json result{{"dims", to_string(psi.dims())},
                {"alpha", w.alpha},
                {"min_eigenvalue", w.observable.eigenvalues()(0)},
                {"pauli", pauli_json(w.observable)},
                {"matrix", matrix_to_json(w.observable.matrix())}};
    if (a.json) {
        emit(out, "witness build", config, result);
        return;
    }
    row(out, "seed state", a.state + " (" + to_string(psi.dims()) + ")");
    row(out, "alpha", fmt(w.alpha));
    row(out, "min eigenvalue", fmt(result["min_eigenvalue"].get<double>()));
    if (!result["pauli"].is_null()) {
        row(out, "Pauli form", pauli_str(result["pauli"]));
    }
    out << "W = alpha I - |psi><psi|:\n";
    print_matrix(out, w.observable.matrix(), "  ");
}

inline void cmd_witness_normal_form(const WitnessArgs &a, std::ostream &out) {
    json config;
    const HermitianObservable w = select_observable(a, config);
    const WitnessNormalForm nf = normal_form(w);
    json result{{"alpha", nf.alpha},
                {"beta", nf.beta},
                {"scale", nf.scale},
                {"lambda", nf.lambda},
                {"detection_volume", detection_volume(nf)},
                {"rho", matrix_to_json(nf.rho.matrix())}};
    if (a.json) {
        emit(out, "witness normal-form", config, result);
        return;
    }
    row(out, "alpha", fmt(nf.alpha));
    row(out, "beta", fmt(nf.beta));
    row(out, "scale", fmt(nf.scale));
    row(out, "lambda", fmt(nf.lambda));
    row(out, "detection volume", fmt(detection_volume(nf)));
    out << "rho:\n";
    print_matrix(out, nf.rho.matrix(), "  ");
}

inline void cmd_witness_verify(const WitnessArgs &a, std::ostream &out) {
    json config;
    const HermitianObservable w = select_observable(a, config);
    const WitnessReport r = verify_witness(w);
    json result{{"is_witness", r.is_witness},
                {"min_product_expectation", r.min_product_expectation},
                {"min_eigenvalue", r.min_eigenvalue},
                {"approximate", r.approximate}};
    if (a.json) {
        emit(out, "witness verify", config, result);
        return;
    }
    row(out, "is_witness", r.is_witness ? "true" : "false");
    row(out, "min product value", fmt(r.min_product_expectation));
    row(out, "min eigenvalue", fmt(r.min_eigenvalue));
    row(out, "product search", r.approximate ? "heuristic (approximate)" : "exhaustive grid + polish");
}

inline void cmd_witness_closest(const WitnessArgs &a, std::ostream &out) {
    json config;
    const PureState psi = require_state(a, config);
    const MaxEntangledFamily fam = closest_max_entangled(psi);
    std::vector<double> phases;
    if (!a.phases.empty()) {
        for (const auto &p : split(a.phases, ',')) {
            phases.push_back(parse_angle(p));
        }
        config["phases"] = phases;
    }
    const PureState rep = fam.representative(phases, !a.phases.empty());
    const FidelityWitness w = optimal_witness(psi, phases, !a.phases.empty());
    json result{{"unique", fam.unique()},
                {"free_phases", fam.free_phase_indices().size()},
                {"representative", vector_to_json(rep.amplitudes())},
                {"fidelity", fidelity_pure(rep, psi)},
                {"witness_alpha", w.alpha},
                {"witness_expectation", expectation(w.observable, psi)},
                {"witness_pauli", pauli_json(w.observable)}};
    if (a.json) {
        emit(out, "witness closest", config, result);
        return;
    }
    row(out, "family", fam.unique() ? "unique" : std::to_string(fam.free_phase_indices().size()) +
                                                       "-parameter (free phases)");
    std::string amps;
    for (Eigen::Index i = 0; i < rep.amplitudes().size(); ++i) {
        amps += (i ? ", " : "") + complex_str(rep.amplitudes()(i));
    }
    row(out, "representative", "(" + amps + ")");
    row(out, "fidelity", fmt(result["fidelity"].get<double>()));
    row(out, "witness alpha", fmt(w.alpha));
    row(out, "<W> on seed", fmt(result["witness_expectation"].get<double>()));
    if (!result["witness_pauli"].is_null()) {
        row(out, "witness Pauli form", pauli_str(result["witness_pauli"]));
    }
}

// ---------------------------------------------------------------------------
// scan

inline scan::ScanSpec build_scan_spec(const ScanArgs &a) {
    scan::ScanSpec spec;
    spec.resolution = a.resolution;
    spec.gamma = DephasingParam(a.gamma);
    if (!a.range.empty()) {
        const auto parts = split(a.range, ',');
        if (parts.size() == 1) {
            spec.phi1_range = spec.phi2_range = parse_interval(parts[0]);
        } else if (parts.size() == 2) {
            spec.phi1_range = parse_interval(parts[0]);
            spec.phi2_range = parse_interval(parts[1]);
        } else {
            throw ValidationError("invalid --range '" + a.range + "'");
        }
    }
    const bool named = !a.witness.empty() && a.witness != "wg";
    if (a.min_theta && (named || !a.theta.empty())) {
        throw ValidationError("--min-theta excludes --theta and catalog witnesses");
    }
    if (named) {
        const auto c = grav::parse_catalog_name(a.witness);
        if (!c) {
            throw ValidationError("unknown witness '" + a.witness + "'");
        }
        if (!a.theta.empty()) {
            throw ValidationError("--theta applies only to --witness wg");
        }
        spec.witness = *c;
    } else if (!a.theta.empty()) {
        spec.witness = scan::WgFixed{parse_angle(a.theta)};
    } else if (a.witness == "wg") {
        throw ValidationError("--witness wg needs --theta");
    } else {
        spec.witness = scan::WgMinTheta{};
    }
    if (a.rule == "abs") {
        spec.rule = scan::DetectionRule::AbsGreaterOne;
    } else if (a.rule != "negative") {
        throw ValidationError("unknown rule '" + a.rule + "'");
    }
    spec.validate();
    return spec;
}

inline void cmd_scan(const ScanArgs &a, unsigned threads, std::ostream &out) {
    const scan::ScanSpec spec = build_scan_spec(a);
    std::optional<scan::GridFormat> format;
    if (!a.format.empty()) {
        format = scan::parse_grid_format(a.format);
        if (!format) {
            throw ValidationError("unknown format '" + a.format + "'");
        }
    } else if (!a.out.empty()) {
        const std::string ext = std::filesystem::path(a.out).extension().string();
        format = scan::parse_grid_format(ext.empty() ? "csv" : ext.substr(1));
        if (!format) {
            format = scan::GridFormat::Csv;
        }
    }
    if (format && a.out.empty()) {
        throw ValidationError("--format needs --out");
    }

    const scan::PhaseGrid grid = scan::grid_scan(spec, threads);
    const double fraction = scan::detection_area_fraction(grid);
    if (!a.out.empty()) {
        scan::write_grid_file(grid, *format, a.out);
    }
    json result{{"fraction", fraction}, {"cells", grid.values.size()}};
    if (spec.rule == scan::DetectionRule::AbsGreaterOne) {
        const auto t = scan::tail_fractions(grid);
        result["below_minus_one"] = t.below_minus_one;
        result["above_one"] = t.above_one;
    }
    if (!a.out.empty()) {
        result["out"] = a.out;
    }
    if (a.json) {
        emit(out, "scan", scan::spec_to_json(spec), result);
        return;
    }
    row(out, "witness", scan::selector_label(spec.witness));
    row(out, "rule", std::string(scan::rule_label(spec.rule)));
    row(out, "gamma", fmt(spec.gamma.gamma()));
    row(out, "resolution", std::to_string(spec.resolution));
    row(out, "fraction", fmt(fraction, 8) + " (" + fmt(100.0 * fraction, 6) + " %)");
    if (result.contains("above_one")) {
        row(out, "tail <W> < -1", fmt(result["below_minus_one"].get<double>(), 8));
        row(out, "tail <W> > 1", fmt(result["above_one"].get<double>(), 8));
    }
    if (!a.out.empty()) {
        row(out, "wrote", a.out);
    }
}

// ---------------------------------------------------------------------------
// table1

struct TableRow {
    grav::CatalogWitness witness;
    scan::DetectionRule rule;
    double reference_percent;
};

inline const std::vector<TableRow> &table1_rows() {
    static const std::vector<TableRow> rows = {
        {grav::CatalogWitness::W1, scan::DetectionRule::AbsGreaterOne, 22.6272},
        {grav::CatalogWitness::W2, scan::DetectionRule::Negative, 29.5392},
        {grav::CatalogWitness::W3, scan::DetectionRule::Negative, 29.5528},
    };
    return rows;
}

inline void cmd_table1(const Table1Args &a, unsigned threads, std::ostream &out) {
    json rows = json::array();
    std::optional<scan::TailFractions> w1_tails;
    for (const auto &r : table1_rows()) {
        scan::ScanSpec spec;
        spec.witness = r.witness;
        spec.rule = r.rule;
        spec.resolution = a.resolution;
        const scan::PhaseGrid grid = scan::grid_scan(spec, threads);
        const double pct = 100.0 * scan::detection_area_fraction(grid);
        json j{{"witness", grav::catalog_name(r.witness)},
               {"rule", scan::rule_label(r.rule)},
               {"percent", pct},
               {"reference_percent", r.reference_percent},
               {"delta_pp", pct - r.reference_percent}};
        if (r.rule == scan::DetectionRule::AbsGreaterOne) {
            w1_tails = scan::tail_fractions(grid);
            j["below_minus_one_percent"] = 100.0 * w1_tails->below_minus_one;
            j["above_one_percent"] = 100.0 * w1_tails->above_one;
        }
        rows.push_back(j);
    }
    if (a.json) {
        emit(out, "table1", json{{"resolution", a.resolution}}, json{{"rows", rows}});
        return;
    }
    out << "Detected area over [0, 2pi]^2, resolution " << a.resolution << " per axis\n";
    out << std::left << std::setw(8) << "witness" << std::setw(18) << "rule" << std::right << std::setw(12)
        << "computed %" << std::setw(13) << "reference %" << std::setw(11) << "delta pp" << '\n';
    for (const auto &r : rows) {
        out << std::left << std::setw(8) << r["witness"].get<std::string>() << std::setw(18)
            << r["rule"].get<std::string>() << std::right << std::fixed << std::setprecision(4) << std::setw(12)
            << r["percent"].get<double>() << std::setw(13) << r["reference_percent"].get<double>() << std::setw(11)
            << r["delta_pp"].get<double>() << '\n';
        out.unsetf(std::ios::fixed);
        out << std::setprecision(6);
    }
    if (w1_tails) {
        out << "W1 tails: <W1> < -1 " << fmt(100.0 * w1_tails->below_minus_one, 6) << " %, <W1> > 1 "
            << fmt(100.0 * w1_tails->above_one, 6) << " %\n";
    }
    const double c2 = rows[1]["percent"].get<double>();
    const double c3 = rows[2]["percent"].get<double>();
    out << "reference ordering: W2 < W3 (29.5392 < 29.5528); computed: W2 " << (c2 < c3 ? "<" : (c2 > c3 ? ">" : "="))
        << " W3 (W3 - W2 = " << fmt(c3 - c2, 3) << " pp)\n";
}

// ---------------------------------------------------------------------------
// estimate

inline void cmd_estimate(const EstimateArgs &a, std::ostream &out) {
    if (!a.theta.empty() && a.min_theta) {
        throw ValidationError("--theta and --min-theta are exclusive");
    }
    if (a.split_sample && !a.theta.empty()) {
        throw ValidationError("--split-sample applies only to --min-theta");
    }
    const grav::PhasePair phases(parse_angle(a.phi1), parse_angle(a.phi2));
    const DephasingParam deph(a.gamma);
    std::optional<double> theta;
    if (!a.theta.empty()) {
        theta = parse_angle(a.theta);
    }
    estimator::ShotPlan plan;
    plan.shots_per_setting = a.shots;
    plan.seed = a.seed;
    const DensityOperator rho(two_qubits, grav::dephased_density_matrix(phases, deph.coherence()));
    const estimator::EstimateReport r = estimator::estimate_witness(rho, theta, plan, a.split_sample);

    const double exact_at_theta = grav::dephased_expectation_analytic(*r.theta_used, phases, deph);
    const double exact_min = grav::minimize_over_theta(phases, deph).value;
    json config{{"phi1", phases.phi1},  {"phi2", phases.phi2}, {"gamma", a.gamma},
                {"shots", a.shots},     {"seed", a.seed},      {"theta", theta ? json(*theta) : json(nullptr)},
                {"split_sample", a.split_sample}};
    json result = estimator::to_json(r);
    result["exact_at_theta"] = exact_at_theta;
    result["exact_minimum"] = exact_min;
    if (a.json) {
        emit(out, "estimate", config, result);
        return;
    }
    row(out, "phases", "(" + fmt(phases.phi1) + ", " + fmt(phases.phi2) + "), gamma " + fmt(a.gamma));
    row(out, "shots per setting", std::to_string(a.shots) + ", seed " + std::to_string(a.seed));
    out << std::left << std::setw(10) << "setting" << std::setw(10) << "shots" << std::setw(16) << "mean"
        << "stderr\n";
    for (const auto &s : r.settings) {
        out << std::left << std::setw(10) << s.setting.label() << std::setw(10) << s.shots << std::setw(16)
            << fmt(s.mean, 8) << fmt(s.standard_error, 4) << '\n';
    }
    std::string mode = theta ? "fixed" : (r.split_sample ? "minimized, split sample" : "minimized, optimistic");
    row(out, "theta", fmt(*r.theta_used) + " (" + mode + ")");
    row(out, "estimate", fmt(r.witness_estimate, 8) + " +/- " + fmt(r.witness_stderr, 4));
    row(out, "exact at theta", fmt(exact_at_theta, 8));
    row(out, "exact minimum", fmt(exact_min, 8));
}

// ---------------------------------------------------------------------------
// Dispatch

/// key = value config files. Bare keys belong to the subcommand being run,
/// so a file mirrors that subcommand's flags.
class SubcommandConfig : public CLI::ConfigTOML {
   public:
    explicit SubcommandConfig(const CLI::App *root) : root_(root) {}

    std::vector<CLI::ConfigItem> from_config(std::istream &input) const override {
        std::vector<std::string> path;
        for (const CLI::App *app = root_;;) {
            const auto subs = app->get_subcommands();
            if (subs.empty()) {
                break;
            }
            app = subs.front();
            path.push_back(app->get_name());
        }
        auto items = CLI::ConfigTOML::from_config(input);
        for (auto &item : items) {
            if (item.parents.empty() && item.name != "++" && item.name != "--") {
                item.parents = path;
            }
        }
        return items;
    }

   private:
    const CLI::App *root_;
};

inline void add_witness_options(CLI::App *sub, WitnessArgs &a, bool wants_state, bool wants_observable) {
    if (wants_state) {
        sub->add_option("--state", a.state, "bell | grav:PHI1,PHI2 | re,im,re,im,...");
    }
    if (wants_observable) {
        sub->add_option("--matrix", a.matrix, "row-major re,im pairs");
        sub->add_option("--catalog", a.catalog, "W1 W1p W1pp W2 W3 W4");
        sub->add_option("--theta", a.theta, "W_G(theta) family member");
    }
    sub->add_option("--dims", a.dims, "subsystem dims AxB (default: square)");
    sub->add_flag("--json", a.json, "machine-readable output");
}

/// Runs one command line (args excludes the program name).
inline int run(std::vector<std::string> args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Fidelity entanglement witnesses and phase-space scans", "fidwit"};
    app.require_subcommand(1);
    app.fallthrough();
    unsigned threads = 0;
    app.add_option("--threads", threads, "worker threads for scans (0 = all)")->envname("FIDWIT_THREADS");
    app.set_config("--config", "", "key = value file mirroring the subcommand's flags");
    app.config_formatter(std::make_shared<SubcommandConfig>(&app));
    app.allow_config_extras(false);

    WitnessArgs wa;
    auto *witness = app.add_subcommand("witness", "fidelity witness analysis");
    witness->require_subcommand(1);
    auto *w_build = witness->add_subcommand("build", "fidelity witness of a state");
    add_witness_options(w_build, wa, true, false);
    auto *w_nf = witness->add_subcommand("normal-form", "normal form and detection volume");
    add_witness_options(w_nf, wa, false, true);
    auto *w_verify = witness->add_subcommand("verify", "check the witness property");
    add_witness_options(w_verify, wa, false, true);
    auto *w_closest = witness->add_subcommand("closest", "closest maximally entangled state");
    add_witness_options(w_closest, wa, true, false);
    w_closest->add_option("--phases", wa.phases, "values for the free phases, comma-separated");

    ScanArgs sa;
    auto *sc = app.add_subcommand("scan", "phase-space grid scan");
    sc->add_option("--witness", sa.witness, "W1 W1p W1pp W2 W3 W4 | wg");
    sc->add_option("--theta", sa.theta, "fixed W_G angle");
    sc->add_flag("--min-theta", sa.min_theta, "minimize W_G over theta per cell (default)");
    sc->add_option("--gamma", sa.gamma, "dephasing gamma >= 0");
    sc->add_option("--resolution", sa.resolution, "cells per axis");
    sc->add_option("--range", sa.range, "LO:HI for both axes, or LO:HI,LO:HI");
    sc->add_option("--out", sa.out, "grid output file");
    sc->add_option("--format", sa.format, "csv | json | pgm (default from --out extension)");
    sc->add_option("--rule", sa.rule, "negative | abs (|<W1>| > 1)");
    sc->add_flag("--json", sa.json, "machine-readable output");

    Table1Args ta;
    auto *t1 = app.add_subcommand("table1", "detection-area table");
    t1->add_option("--resolution", ta.resolution, "cells per axis");
    t1->add_flag("--json", ta.json, "machine-readable output");

    EstimateArgs ea;
    auto *est = app.add_subcommand("estimate", "finite-shot W_G estimate");
    est->add_option("--phi1", ea.phi1, "phase phi1");
    est->add_option("--phi2", ea.phi2, "phase phi2");
    est->add_option("--gamma", ea.gamma, "dephasing gamma >= 0");
    est->add_option("--shots", ea.shots, "shots per setting")->check(CLI::PositiveNumber);
    est->add_option("--seed", ea.seed, "RNG seed");
    est->add_option("--theta", ea.theta, "fixed W_G angle");
    est->add_flag("--min-theta", ea.min_theta, "minimize over theta (default)");
    est->add_flag("--split-sample", ea.split_sample, "choose theta on half the shots");
    est->add_flag("--json", ea.json, "machine-readable output");

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp &) {
        // help() follows the parsed subcommand chain.
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp &) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError &e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        err << "fidwit: error: " << msg << '\n';
        return 2;
    }

    try {
        if (w_build->parsed()) {
            cmd_witness_build(wa, out);
        } else if (w_nf->parsed()) {
            cmd_witness_normal_form(wa, out);
        } else if (w_verify->parsed()) {
            cmd_witness_verify(wa, out);
        } else if (w_closest->parsed()) {
            cmd_witness_closest(wa, out);
        } else if (sc->parsed()) {
            cmd_scan(sa, threads, out);
        } else if (t1->parsed()) {
            if (ta.resolution < 2) {
                throw ValidationError("--resolution must be >= 2");
            }
            cmd_table1(ta, threads, out);
        } else if (est->parsed()) {
            cmd_estimate(ea, out);
        }
    } catch (const std::exception &e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        err << "fidwit: error: " << msg << '\n';
        return 1;
    }
    return 0;
}

}  // namespace fidwit::cli
