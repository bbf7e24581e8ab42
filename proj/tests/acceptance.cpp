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

// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. AC8 runs the unit suites given on the command line and
// times them together with this binary.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fidwit/fidwit.hpp"

using namespace fidwit;
using grav::CatalogWitness;
using grav::DephasingParam;
using grav::PhasePair;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
    bool pass;
    std::string detail;
};

std::string g(double v, int digits = 6) {
    std::ostringstream s;
    s.precision(digits);
    s << v;
    return s.str();
}

// ---------------------------------------------------------------------------

Verdict ac1_table() {
    const auto t0 = Clock::now();
    struct Row {
        CatalogWitness w;
        scan::DetectionRule rule;
        double reference;
    };
    const Row rows[] = {{CatalogWitness::W1, scan::DetectionRule::AbsGreaterOne, 0.226272},
                        {CatalogWitness::W2, scan::DetectionRule::Negative, 0.295392},
                        {CatalogWitness::W3, scan::DetectionRule::Negative, 0.295528}};
    bool pass = true;
    std::string detail;
    for (const auto &r : rows) {
        scan::ScanSpec spec;
        spec.resolution = 4001;
        spec.witness = r.w;
        spec.rule = r.rule;
        const auto grid = scan::grid_scan(spec, 1);
        const double f = scan::detection_area_fraction(grid);
        pass = pass && std::abs(f - r.reference) <= 5e-4;
        detail += std::string(grav::catalog_name(r.w)) + "=" + g(f) + " (ref " + g(r.reference) + ") ";
        if (r.rule == scan::DetectionRule::AbsGreaterOne) {
            const auto t = scan::tail_fractions(grid);
            detail += "[W1 tails: lower " + g(t.below_minus_one) + ", upper " + g(t.above_one) + "] ";
        }
    }
    const double elapsed = seconds_since(t0);
    pass = pass && elapsed <= 60.0;
    return {pass, detail + "single-core " + g(elapsed, 3) + " s"};
}

Verdict ac2_normal_form() {
    const auto nf = normal_form(grav::catalog(CatalogWitness::W1p));
    const double vol = detection_volume(nf);
    bool pass = std::abs(nf.beta - 3) <= 1e-12 && std::abs(nf.scale - 8) <= 1e-12 &&
                std::abs(nf.alpha - 0.375) <= 1e-12 && std::abs(nf.lambda - 0.5) <= 1e-12 &&
                std::abs(vol - 0.125) <= 1e-12;
    const auto n3 = normal_form(grav::catalog(CatalogWitness::W3));
    const CVector target = grav::grav_state(PhasePair(pi / 2, pi / 2)).amplitudes();
    const double fid = target.dot(n3.rho.matrix() * target).real();
    pass = pass && fid >= 1 - 1e-10 && std::abs(n3.alpha - 0.5) <= 1e-12;
    return {pass, "W1p: beta=" + g(nf.beta, 17) + " scale=" + g(nf.scale, 17) + " alpha=" + g(nf.alpha, 17) +
                      " lambda=" + g(nf.lambda, 17) + " volume=" + g(vol, 17) + "; W3: fidelity=" + g(fid, 17) +
                      " alpha=" + g(n3.alpha, 17)};
}

Verdict ac3_closest_state() {
    const double overlap = fidelity_pure(grav::grav_state(PhasePair(pi / 2, pi / 2)), grav::grav_state(PhasePair(0, 0)));
    const double d3 = max_abs_entry(grav::wg_observable(grav::WitnessFamilyParam(3 * pi / 2)).matrix() -
                                    0.25 * grav::catalog(CatalogWitness::W3).matrix());
    const double d4 = max_abs_entry(grav::wg_observable(grav::WitnessFamilyParam(pi / 2)).matrix() -
                                    0.25 * grav::catalog(CatalogWitness::W4).matrix());
    const bool pass = std::abs(overlap - 0.5) <= 1e-12 && d3 <= 1e-12 && d4 <= 1e-12;
    return {pass, "overlap=" + g(overlap, 17) + " |W_G(3pi/2)-W3/4|=" + g(d3) + " |W_G(pi/2)-W4/4|=" + g(d4)};
}

Verdict ac4_analytic_numeric() {
    double closed = 0.0;
    const int n = 50;
    for (int a = 0; a < n; ++a) {
        const double theta = two_pi * a / n;
        const auto w = grav::wg_observable(grav::WitnessFamilyParam(theta));
        for (int b = 0; b < n; ++b) {
            for (int c = 0; c < n; ++c) {
                const PhasePair p(two_pi * b / n, two_pi * c / n);
                closed = std::max(closed,
                                  std::abs(grav::wg_expectation_analytic(theta, p) - expectation(w, grav::grav_state(p))));
            }
        }
    }
    double open = 0.0;
    const int m = 20;
    std::vector<CMatrix> ws;
    for (int a = 0; a < m; ++a) {
        ws.push_back(grav::wg_observable(grav::WitnessFamilyParam(two_pi * a / m)).matrix());
    }
    for (int d = 0; d < m; ++d) {
        const DephasingParam gamma(2.0 * d / (m - 1));
        for (int b = 0; b < m; ++b) {
            for (int c = 0; c < m; ++c) {
                const PhasePair p(two_pi * b / m, two_pi * c / m);
                const CMatrix rho = grav::dephased_state(p, gamma).matrix();
                for (int a = 0; a < m; ++a) {
                    const double numeric = (ws[a] * rho).trace().real();
                    open = std::max(open,
                                    std::abs(grav::dephased_expectation_analytic(two_pi * a / m, p, gamma) - numeric));
                }
            }
        }
    }
    return {closed <= 1e-12 && open <= 1e-12,
            "max error 50^3 closed=" + g(closed, 3) + ", 20^4 dephased=" + g(open, 3)};
}

Verdict ac5_completeness() {
    const int n = 1001;
    long mismatches = 0;
    long unsound = 0;
    long negative = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const PhasePair p(two_pi * (i + 0.5) / n, two_pi * (j + 0.5) / n);
            const double b = std::sin(p.phi1) + std::sin(p.phi2);
            const bool neg = grav::minimize_over_theta(p).value < 0.0;
            mismatches += neg != (std::abs(b) > grav::measure_zero_tolerance) ? 1 : 0;
            if (neg) {
                ++negative;
                unsound += ppt_entangled(DensityOperator(grav::grav_state(p))) ? 0 : 1;
            }
        }
    }
    return {mismatches == 0 && unsound == 0, "1001^2 cells: negative=" + std::to_string(negative) +
                                                 " mismatches=" + std::to_string(mismatches) +
                                                 " non-PPT-entangled detections=" + std::to_string(unsound)};
}

Verdict ac6_small_tau() {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-1e-3, 1e-3);
    const auto w3 = grav::catalog(CatalogWitness::W3);
    double worst_ratio = 0.0;
    int sign_failures = 0;
    for (int k = 0; k < 100; ++k) {
        const PhasePair p(u(rng), u(rng));
        const double e3 = expectation(w3, grav::grav_state(p));
        const double bound = 5.0 * std::pow(std::abs(p.phi1) + std::abs(p.phi2), 2);
        const auto lin = grav::small_tau_check(p);
        worst_ratio = std::max(worst_ratio, std::abs(e3 - lin.w3_linear) / bound);
        const double sum = p.phi1 + p.phi2;
        if (sum != 0.0 && !(std::signbit(lin.w4_linear) != std::signbit(lin.w3_linear) &&
                            std::abs(e3 + sum) <= bound)) {
            ++sign_failures;
        }
    }
    return {worst_ratio <= 1.0 && sign_failures == 0,
            "worst remainder/bound=" + g(worst_ratio, 3) + " sign failures=" + std::to_string(sign_failures)};
}

Verdict ac7_dephasing() {
    const double gammas[] = {0.005, 0.05, 0.5};
    std::vector<scan::PhaseGrid> grids;
    for (double gm : gammas) {
        scan::ScanSpec spec;
        spec.resolution = 500;
        spec.witness = scan::WgMinTheta{};
        spec.gamma = DephasingParam(gm);
        grids.push_back(scan::grid_scan(spec));
    }
    bool nested = true;
    bool strict = true;
    for (std::size_t k = 1; k < grids.size(); ++k) {
        long lost = 0;
        for (std::size_t c = 0; c < grids[k].values.size(); ++c) {
            const bool now = grids[k].values[c] < 0.0;
            const bool before = grids[k - 1].values[c] < 0.0;
            nested = nested && (!now || before);
            lost += (before && !now) ? 1 : 0;
        }
        strict = strict && lost > 0;
    }
    const double f0 = scan::detection_area_fraction(grids[0]);
    const double f2 = scan::detection_area_fraction(grids[2]);
    return {nested && strict && f2 < 0.6 * f0, "fractions " + g(f0) + " > " +
                                                   g(scan::detection_area_fraction(grids[1])) + " > " + g(f2) +
                                                   (nested ? ", nested" : ", NOT nested") +
                                                   (strict ? ", strict" : ", not strict")};
}

Verdict ac9_estimator() {
    const DensityOperator rho = grav::dephased_state(PhasePair(-0.15, -0.15), DephasingParam(0.0));
    const double exact = -0.25 * 2.0 * std::sin(0.15);
    int negative = 0;
    int within = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        estimator::ShotPlan plan;
        plan.shots_per_setting = 1000000;
        plan.seed = seed;
        const auto r = estimator::estimate_witness(rho, std::nullopt, plan, true);
        negative += r.witness_estimate < 0.0 ? 1 : 0;
        within += std::abs(r.witness_estimate - exact) <= 5.0 * r.witness_stderr ? 1 : 0;
    }
    return {negative >= 99 && within >= 99, "100 seeds x 1e6 shots, split sample: negative=" +
                                                std::to_string(negative) + " within 5 sigma=" + std::to_string(within)};
}

Verdict ac8_suites(const std::vector<std::string> &suites, double own_seconds) {
    const auto t0 = Clock::now();
    std::string failed;
    for (const auto &s : suites) {
        const std::string cmd = "\"" + s + "\" > /dev/null 2>&1";
        if (std::system(cmd.c_str()) != 0) {
            failed += " " + s.substr(s.find_last_of('/') + 1);
        }
    }
    const double total = seconds_since(t0) + own_seconds;
    return {!suites.empty() && failed.empty() && total <= 300.0,
            std::to_string(suites.size()) + " suites" + (failed.empty() ? ", all passed" : ", failed:" + failed) +
                ", total " + g(total, 3) + " s (limit 300 s)"};
}

}  // namespace

int main(int argc, char **argv) {
    const std::vector<std::string> suites(argv + 1, argv + argc);
    const auto start = Clock::now();
    struct Criterion {
        const char *id;
        const char *name;
        std::function<Verdict()> check;
    };
    const std::vector<Criterion> criteria = {
        {"AC1", "detection-area table", ac1_table},
        {"AC2", "normal-form constants", ac2_normal_form},
        {"AC3", "closest-state identity", ac3_closest_state},
        {"AC4", "analytic-numeric agreement", ac4_analytic_numeric},
        {"AC5", "post-processing completeness", ac5_completeness},
        {"AC6", "small-phase behavior", ac6_small_tau},
        {"AC7", "dephasing suppression", ac7_dephasing},
        {"AC9", "estimator statistics", ac9_estimator},
    };
    int failures = 0;
    auto report = [&](const char *id, const char *name, const Verdict &v) {
        std::printf("%s %s  %s: %s\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str());
        std::fflush(stdout);
        failures += v.pass ? 0 : 1;
    };
    for (const auto &c : criteria) {
        Verdict v;
        try {
            v = c.check();
        } catch (const std::exception &e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        report(c.id, c.name, v);
    }
    report("AC8", "property suites and runtime", ac8_suites(suites, seconds_since(start)));
    std::printf("%d of 9 criteria passed\n", 9 - failures);
    return failures == 0 ? 0 : 1;
}
