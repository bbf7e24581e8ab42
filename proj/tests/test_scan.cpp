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

#include "fidwit/scan.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

#include "gtest/gtest.h"

#include "oracles.hpp"

using namespace fidwit;
using namespace fidwit::scan;
using grav::CatalogWitness;

namespace {

ScanSpec spec_for(WitnessSelector w, int resolution, double gamma = 0.0,
                  DetectionRule rule = DetectionRule::Negative) {
    ScanSpec s;
    s.witness = w;
    s.resolution = resolution;
    s.gamma = DephasingParam(gamma);
    s.rule = rule;
    return s;
}

std::filesystem::path scratch_dir() {
    auto dir = std::filesystem::temp_directory_path() / ("fidwit_scan_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

// ---------------------------------------------------------------------------
// grid_scan

TEST(scan, w3_resolution_three_example) {
    auto g = grid_scan(spec_for(CatalogWitness::W3, 3));
    ASSERT_EQ(g.values.size(), 9u);
    const HermitianObservable w3 = grav::catalog(CatalogWitness::W3);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const double p1 = two_pi * (i + 0.5) / 3;
            const double p2 = two_pi * (j + 0.5) / 3;
            const double sd = std::sin((p1 - p2) / 2.0);
            EXPECT_NEAR(g.at(i, j), sd * sd - (std::sin(p1) + std::sin(p2)), 1e-14);
            EXPECT_NEAR(g.at(i, j), expectation(w3, grav::grav_state(PhasePair(p1, p2))), 1e-12);
        }
    }
}

TEST(scan, catalog_cells_match_matrix_expectation) {
    for (auto w : grav::all_catalog_witnesses) {
        for (double gamma : {0.0, 0.3}) {
            auto g = grid_scan(spec_for(w, 9, gamma));
            const CMatrix m = grav::catalog(w).matrix();
            for (int i = 0; i < 9; ++i) {
                for (int j = 0; j < 9; ++j) {
                    PhasePair p(g.spec.phi1_at(i), g.spec.phi2_at(j));
                    const auto rho = grav::dephased_state(p, DephasingParam(gamma));
                    const double expected = (m * rho.matrix()).trace().real();
                    ASSERT_NEAR(g.at(i, j), expected, 1e-12) << grav::catalog_name(w) << " gamma " << gamma;
                }
            }
        }
    }
}

TEST(scan, wg_fixed_and_min_theta_cells) {
    auto fixed = grid_scan(spec_for(WgFixed{1.1}, 11, 0.2));
    auto minimized = grid_scan(spec_for(WgMinTheta{}, 11, 0.2));
    for (int i = 0; i < 11; ++i) {
        for (int j = 0; j < 11; ++j) {
            PhasePair p(fixed.spec.phi1_at(i), fixed.spec.phi2_at(j));
            ASSERT_EQ(fixed.at(i, j), grav::dephased_expectation_analytic(1.1, p, DephasingParam(0.2)));
            ASSERT_EQ(minimized.at(i, j), grav::minimize_over_theta(p, DephasingParam(0.2)).value);
            ASSERT_LE(minimized.at(i, j), fixed.at(i, j) + 1e-15);
        }
    }
}

TEST(scan, wg_min_theta_is_nonpositive) {
    for (int res : {2, 3, 64, 257}) {
        auto g = grid_scan(spec_for(WgMinTheta{}, res));
        for (double v : g.values) {
            ASSERT_LE(v, 0.0);
        }
    }
}

TEST(scan, grid_scan_is_deterministic_and_thread_independent) {
    for (auto w : {WitnessSelector{CatalogWitness::W1}, WitnessSelector{WgMinTheta{}}, WitnessSelector{WgFixed{2.0}}}) {
        auto spec = spec_for(w, 301, 0.05);
        auto a = grid_scan(spec, 1);
        auto b = grid_scan(spec, 1);
        auto c = grid_scan(spec, 4);
        auto d = grid_scan(spec, 7);
        ASSERT_EQ(a.values, b.values);
        ASSERT_EQ(a.values, c.values);
        ASSERT_EQ(a.values, d.values);
    }
}

TEST(scan, spec_validation) {
    EXPECT_THROW(grid_scan(spec_for(CatalogWitness::W3, 1)), ValidationError);
    auto s = spec_for(CatalogWitness::W3, 4);
    s.phi1_range = Interval{1.0, 1.0};
    EXPECT_THROW(grid_scan(s), ValidationError);
    EXPECT_THROW(grid_scan(spec_for(CatalogWitness::W3, 4, 0.0, DetectionRule::AbsGreaterOne)), ValidationError);
    EXPECT_THROW(grid_scan(spec_for(WgMinTheta{}, 4, 0.0, DetectionRule::AbsGreaterOne)), ValidationError);
    EXPECT_NO_THROW(grid_scan(spec_for(CatalogWitness::W1, 4, 0.0, DetectionRule::AbsGreaterOne)));
}

TEST(scan, periodicity) {
    auto base = spec_for(CatalogWitness::W2, 97, 0.1);
    base.phi1_range = Interval{-1.0, 2.5};
    base.phi2_range = Interval{0.5, 4.0};
    for (auto w : {WitnessSelector{CatalogWitness::W2}, WitnessSelector{CatalogWitness::W3},
                   WitnessSelector{WgMinTheta{}}, WitnessSelector{WgFixed{0.8}}}) {
        base.witness = w;
        auto shifted1 = base;
        shifted1.phi1_range = Interval{base.phi1_range.lo + two_pi, base.phi1_range.hi + two_pi};
        auto shifted2 = base;
        shifted2.phi2_range = Interval{base.phi2_range.lo - two_pi, base.phi2_range.hi - two_pi};
        auto a = grid_scan(base);
        auto b = grid_scan(shifted1);
        auto c = grid_scan(shifted2);
        for (std::size_t k = 0; k < a.values.size(); ++k) {
            ASSERT_NEAR(a.values[k], b.values[k], 1e-12);
            ASSERT_NEAR(a.values[k], c.values[k], 1e-12);
        }
    }
}

// ---------------------------------------------------------------------------
// Detection areas

TEST(scan, detection_area_fraction_examples) {
    PhaseGrid g{spec_for(CatalogWitness::W3, 2), {-1.0, 0.0, 0.5, -1e-300}};
    EXPECT_DOUBLE_EQ(detection_area_fraction(g), 0.5);
    PhaseGrid h{spec_for(CatalogWitness::W1, 2, 0.0, DetectionRule::AbsGreaterOne), {-1.5, 1.0, -1.0, 1.01}};
    EXPECT_DOUBLE_EQ(detection_area_fraction(h), 0.5);
    auto t = tail_fractions(h);
    EXPECT_DOUBLE_EQ(t.below_minus_one, 0.25);
    EXPECT_DOUBLE_EQ(t.above_one, 0.25);
}

TEST(scan, table_rows_match_reference_values) {
    auto w1 = grid_scan(spec_for(CatalogWitness::W1, 4001, 0.0, DetectionRule::AbsGreaterOne));
    auto w2 = grid_scan(spec_for(CatalogWitness::W2, 4001));
    auto w3 = grid_scan(spec_for(CatalogWitness::W3, 4001));
    EXPECT_NEAR(detection_area_fraction(w1), 0.226272, 5e-4);
    EXPECT_NEAR(detection_area_fraction(w2), 0.295392, 5e-4);
    EXPECT_NEAR(detection_area_fraction(w3), 0.295528, 5e-4);

    // Independent arc-length integral of the fidelity > 1/2 region.
    const double exact = oracle::fidelity_half_area_fraction();
    EXPECT_NEAR(detection_area_fraction(w2), exact, 5e-5);
    EXPECT_NEAR(detection_area_fraction(w3), exact, 5e-5);

    // Both tails of the W1 set agree with the single lower tail.
    auto tails = tail_fractions(w1);
    EXPECT_EQ(tails.above_one, 0.0);
    EXPECT_DOUBLE_EQ(tails.below_minus_one, detection_area_fraction(w1));
}

TEST(scan, area_fractions_converge) {
    const std::vector<ScanSpec> rows = {spec_for(CatalogWitness::W1, 0, 0.0, DetectionRule::AbsGreaterOne),
                                        spec_for(CatalogWitness::W2, 0), spec_for(CatalogWitness::W3, 0)};
    for (auto spec : rows) {
        spec.resolution = 2001;
        const double coarse = detection_area_fraction(grid_scan(spec));
        spec.resolution = 4001;
        const double fine = detection_area_fraction(grid_scan(spec));
        EXPECT_LE(std::abs(coarse - fine), 5e-4) << selector_label(spec.witness);
    }
}

TEST(scan, min_theta_nonnegative_cells_lie_on_zero_lines) {
    const int n = 1001;
    auto g = grid_scan(spec_for(WgMinTheta{}, n));
    const double cell = two_pi / n;
    auto near_line = [&](double d) { return std::abs(wrap_pm_pi(d)) <= cell * std::sqrt(2.0); };
    long nonnegative = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (g.at(i, j) >= 0.0) {
                ++nonnegative;
                const double p1 = g.spec.phi1_at(i);
                const double p2 = g.spec.phi2_at(j);
                ASSERT_TRUE(near_line(p1 + p2) || near_line(p1 - p2 - pi)) << i << "," << j;
            }
        }
    }
    EXPECT_GT(nonnegative, 0);
    EXPECT_LT(nonnegative, 8 * n);
}

TEST(scan, dephasing_masks_are_nested) {
    const std::vector<double> gammas = {0.005, 0.05, 0.5};
    std::vector<PhaseGrid> grids;
    for (double g : gammas) {
        grids.push_back(grid_scan(spec_for(WgMinTheta{}, 500, g)));
    }
    for (std::size_t k = 1; k < grids.size(); ++k) {
        long lost = 0;
        for (std::size_t c = 0; c < grids[k].values.size(); ++c) {
            if (grids[k].values[c] < 0.0) {
                ASSERT_LT(grids[k - 1].values[c], 0.0) << "gamma " << gammas[k] << " cell " << c;
            } else if (grids[k - 1].values[c] < 0.0) {
                ++lost;
            }
        }
        EXPECT_GT(lost, 0);
    }
    EXPECT_LT(detection_area_fraction(grids[2]), 0.6 * detection_area_fraction(grids[0]));
}

// ---------------------------------------------------------------------------
// combined_region

TEST(scan, w3_w4_regions_are_disjoint) {
    const int n = 801;
    auto labels = combined_region({spec_for(CatalogWitness::W3, n), spec_for(CatalogWitness::W4, n)});
    auto w3 = grid_scan(spec_for(CatalogWitness::W3, n));
    auto w4 = grid_scan(spec_for(CatalogWitness::W4, n));
    long union_count = 0;
    for (std::size_t c = 0; c < w3.values.size(); ++c) {
        ASSERT_FALSE(w3.values[c] < 0.0 && w4.values[c] < 0.0) << c;
        const int expected = w3.values[c] < 0.0 ? 0 : (w4.values[c] < 0.0 ? 1 : -1);
        ASSERT_EQ(labels.labels[c], expected);
        union_count += labels.labels[c] >= 0 ? 1 : 0;
    }
    const double frac = static_cast<double>(union_count) / static_cast<double>(w3.values.size());
    EXPECT_NEAR(frac, 2 * 0.2955, 1e-3);
}

TEST(scan, single_spec_combined_region_is_detection_mask) {
    auto spec = spec_for(WgFixed{0.4}, 77, 0.1);
    auto labels = combined_region({spec});
    auto grid = grid_scan(spec);
    for (std::size_t c = 0; c < grid.values.size(); ++c) {
        ASSERT_EQ(labels.labels[c], grid.values[c] < 0.0 ? 0 : -1);
    }
}

TEST(scan, combined_region_rejects_mismatched_specs) {
    EXPECT_THROW(combined_region({}), ValidationError);
    EXPECT_THROW(combined_region({spec_for(CatalogWitness::W3, 10), spec_for(CatalogWitness::W4, 11)}), ValidationError);
}

// ---------------------------------------------------------------------------
// Output formats

TEST(scan, emit_csv) {
    auto g = grid_scan(spec_for(CatalogWitness::W3, 2));
    std::ostringstream out;
    emit_grid(g, GridFormat::Csv, out);
    std::istringstream in(out.str());
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line)) {
        lines.push_back(line);
    }
    ASSERT_EQ(lines.size(), 5u);
    EXPECT_EQ(lines[0], "phi1,phi2,value");
    // Values survive the 17-digit round trip exactly.
    for (int k = 0; k < 4; ++k) {
        const std::string &l = lines[k + 1];
        const double v = std::stod(l.substr(l.rfind(',') + 1));
        EXPECT_EQ(v, g.values[k]);
    }
}

TEST(scan, emit_pgm) {
    PhaseGrid zero{spec_for(CatalogWitness::W3, 3), std::vector<double>(9, 0.0)};
    std::ostringstream out;
    emit_grid(zero, GridFormat::Pgm, out);
    const std::string s = out.str();
    const std::string header = "P5\n3 3\n255\n";
    ASSERT_EQ(s.substr(0, header.size()), header);
    ASSERT_EQ(s.size(), header.size() + 9);
    for (std::size_t k = header.size(); k < s.size(); ++k) {
        EXPECT_EQ(static_cast<unsigned char>(s[k]), 128);
    }

    // Extremes map to 0 and 255; rows run top (largest phi2) to bottom.
    PhaseGrid ramp{spec_for(CatalogWitness::W3, 2), {-2.0, 1.0, -1.0, 4.0}};
    std::ostringstream out2;
    emit_grid(ramp, GridFormat::Pgm, out2);
    const std::string px = out2.str().substr(std::string("P5\n2 2\n255\n").size());
    ASSERT_EQ(px.size(), 4u);
    // Top row is phi2 cell 1: (i=0,j=1) = 1.0, (i=1,j=1) = 4.0.
    EXPECT_EQ(static_cast<unsigned char>(px[0]), heatmap_level(1.0, -2.0, 4.0));
    EXPECT_EQ(static_cast<unsigned char>(px[1]), 255);
    EXPECT_EQ(static_cast<unsigned char>(px[2]), 0);
    EXPECT_EQ(static_cast<unsigned char>(px[3]), 64);
}

TEST(scan, emit_json_round_trips) {
    auto spec = spec_for(WgFixed{0.25}, 4, 0.5);
    auto g = grid_scan(spec);
    std::ostringstream out;
    emit_grid(g, GridFormat::Json, out);
    auto j = nlohmann::json::parse(out.str());
    EXPECT_EQ(j["spec"]["resolution"], 4);
    EXPECT_EQ(j["spec"]["witness"], "wg");
    EXPECT_EQ(j["spec"]["theta"], 0.25);
    EXPECT_EQ(j["spec"]["gamma"], 0.5);
    EXPECT_EQ(j["spec"]["rule"], "negative");
    EXPECT_EQ(j["values"].get<std::vector<double>>(), g.values);
}

TEST(scan, parse_grid_format) {
    EXPECT_EQ(parse_grid_format("csv"), GridFormat::Csv);
    EXPECT_EQ(parse_grid_format("pgm"), GridFormat::Pgm);
    EXPECT_FALSE(parse_grid_format("png").has_value());
}

TEST(scan, write_grid_file_leaves_no_partial_output) {
    const auto dir = scratch_dir();
    auto g = grid_scan(spec_for(CatalogWitness::W3, 5));
    const auto good = dir / "w3.csv";
    write_grid_file(g, GridFormat::Csv, good);
    EXPECT_TRUE(std::filesystem::exists(good));
    EXPECT_FALSE(std::filesystem::exists(dir / "w3.csv.partial"));

    const auto bad = dir / "missing" / "w3.csv";
    EXPECT_ANY_THROW(write_grid_file(g, GridFormat::Csv, bad));
    EXPECT_FALSE(std::filesystem::exists(bad));
    EXPECT_FALSE(std::filesystem::exists(dir / "missing"));
    std::filesystem::remove_all(dir);
}
