// SPDX-License-Identifier: Apache-2.0
//
// isac-uav: OFDM radar sensing chain and link-budget toolkit
// Copyright (C) 2026 The isac-uav authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "oracles.hpp"

#include "isac/detect.hpp"
#include "isac/dsp.hpp"
#include "isac/scene.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

using namespace isac;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

PeriodogramAxes axes_of(std::size_t n, std::size_t m) {
    PeriodogramAxes a;
    a.subcarriers = n;
    a.symbols = m;
    a.pad_range = 2;
    a.pad_doppler = 2;
    a.subcarrier_spacing_hz = 120e3;
    a.symbol_duration_s = (1.0 + 1.0 / 14.0) / 120e3;
    a.carrier_hz = 27e9;
    return a;
}

Periodogram white_periodogram(std::size_t rows, std::size_t cols, double mean, std::uint64_t seed) {
    Periodogram p;
    p.axes = axes_of(rows / 2, cols / 2);
    p.power = oracle::exponential_cells(rows, cols, mean, seed);
    return p;
}

std::size_t count_hits(const Matrix<std::uint8_t>& m) {
    std::size_t n = 0;
    for (auto v : m.flat()) n += v;
    return n;
}

/// Noisy channel estimate with point targets {range, velocity, amplitude}.
Periodogram scene_periodogram(std::size_t n_sc, const DlMask& mask,
                              const std::vector<std::tuple<double, double, double>>& targets, double noise_power,
                              std::uint64_t seed) {
    auto axes = axes_of(n_sc, mask.size());
    axes.mask_period_symbols = mask_period(mask);
    ChannelEstimate ch;
    ch.grid = oracle::noise_grid(n_sc, mask.size(), noise_power, seed);
    ch.dl_mask = mask;
    for (const auto& [r, v, a] : targets) {
        const auto g = oracle::point_channel(n_sc, mask, r, v, axes.subcarrier_spacing_hz, axes.symbol_duration_s,
                                             axes.carrier_hz, a);
        for (std::size_t i = 0; i < g.size(); ++i) ch.grid.flat()[i] += g.flat()[i];
    }
    for (std::size_t n = 0; n < n_sc; ++n)
        for (std::size_t m = 0; m < mask.size(); ++m)
            if (!mask[m]) ch.grid(n, m) = Complex{};
    return periodogram(ch, axes);
}

double wrap(double x, double span) {
    x = std::fmod(x, span);
    if (x >= span / 2) x -= span;
    if (x < -span / 2) x += span;
    return x;
}

} // namespace

TEST_CASE("CFAR threshold factor", "[detect]") {
    CfarConfig cfg;
    cfg.training = {8, 8};
    cfg.guard = {4, 4};
    CHECK(cfg.training_cell_count() == 25u * 25u - 9u * 9u);
    const double n = 544.0;
    for (double pfa : {1e-2, 1e-4, 1e-6}) {
        cfg.pfa = pfa;
        CHECK_THAT(cfg.threshold_factor(), WithinRel(n * (std::pow(pfa, -1.0 / n) - 1.0), 1e-12));
        // Exponential-cell false-alarm probability of CA-CFAR.
        CHECK_THAT(std::pow(1.0 + cfg.threshold_factor() / n, -n), WithinRel(pfa, 1e-9));
    }
    cfg.pfa = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.pfa = 1e-4;
    cfg.training = {0, 0};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("CFAR false-alarm rate on white cells", "[detect][property]") {
    for (double pfa : {1e-3, 1e-4}) {
        CfarConfig cfg;
        cfg.pfa = pfa;
        cfg.training = {6, 4};
        cfg.guard = {2, 2};
        std::size_t hits = 0, cells = 0;
        for (std::uint64_t seed = 1; seed <= 4; ++seed) {
            const auto p = white_periodogram(1024, 512, 2.0, seed);
            hits += count_hits(cfar_hits(p, cfg));
            cells += p.power.size();
        }
        const double rate = static_cast<double>(hits) / static_cast<double>(cells);
        CAPTURE(pfa, rate);
        CHECK(rate > 0.75 * pfa);
        CHECK(rate < 1.3 * pfa);
    }
}

TEST_CASE("CFAR is invariant to the noise level", "[detect][property]") {
    auto p = white_periodogram(256, 128, 1.0, 3);
    CfarConfig cfg;
    cfg.pfa = 1e-2;
    const auto a = cfar_hits(p, cfg);
    for (auto& v : p.power.flat()) v *= 1024.0;
    CHECK(cfar_hits(p, cfg) == a);
    CHECK(count_hits(a) > 0);
}

TEST_CASE("CFAR window must fit the periodogram", "[detect]") {
    const auto p = white_periodogram(16, 16, 1.0, 1);
    CHECK_THROWS_AS(cfar_detect(p), ConfigError);
    CfarConfig small;
    small.training = {2, 2};
    small.guard = {1, 1};
    CHECK_NOTHROW(cfar_detect(p, small));
}

TEST_CASE("log-parabolic interpolation is exact on a Gaussian", "[detect]") {
    for (double delta : {-0.5, -0.31, 0.0, 0.12, 0.49}) {
        auto g = [&](double x) { return 7.0 * std::exp(-0.8 * (x - delta) * (x - delta)); };
        const auto [off, peak] = interpolate_peak(g(-1.0), g(0.0), g(1.0));
        CHECK_THAT(off, WithinAbs(delta, 1e-12));
        CHECK_THAT(peak, WithinRel(7.0, 1e-12));
    }
    const auto [off, peak] = interpolate_peak(1.0, 1.0, 1.0);
    CHECK(off == 0.0);
    CHECK(peak == 1.0);
}

TEST_CASE("a single target gives one detection at the right place", "[detect]") {
    const auto mask = make_dl_mask("14D", 56);
    for (double r : {450.37, 123.4, 301.0}) {
        for (double v : {7.3, -12.1}) {
            const auto p = scene_periodogram(1584, mask, {{r, v, 1.0}}, 1.0, 17);
            CfarConfig cfg;
            cfg.pfa = 1e-6;
            const auto dets = cfar_detect(p, cfg);
            REQUIRE(dets.size() == 1);
            CAPTURE(r, v, dets[0].range_m, dets[0].velocity_mps);
            CHECK(std::abs(dets[0].range_m - r) < 0.15);
            CHECK(std::abs(dets[0].velocity_mps - v) < 0.25 * p.velocity_bin_mps());
            CHECK(std::abs(dets[0].range_offset) <= 0.5);
            CHECK(std::abs(dets[0].doppler_offset) <= 0.5);
        }
    }
}

TEST_CASE("interpolated range is unbiased across the bin", "[detect][property]") {
    const auto mask = make_dl_mask("14D", 28);
    const auto axes = axes_of(256, 28);
    const double bin = axes.range_bin_m();
    double sum = 0.0, worst = 0.0;
    int n = 0;
    for (double frac = 0.0; frac < 1.0; frac += 0.05) {
        const double r = (200.0 + frac) * bin;
        const auto p = scene_periodogram(256, mask, {{r, 3.0 * axes.velocity_bin_mps(), 1.0}}, 1e-9, 5);
        CfarConfig cfg;
        cfg.training = {6, 3};
        cfg.guard = {2, 2};
        const auto dets = cfar_detect(p, cfg);
        REQUIRE(dets.size() == 1);
        const double err = (dets[0].range_m - r) / bin;
        sum += err;
        worst = std::max(worst, std::abs(err));
        ++n;
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(worst < 0.1);
}

TEST_CASE("two separated targets are both found", "[detect]") {
    const auto mask = make_dl_mask("14D", 56);
    const auto p = scene_periodogram(512, mask, {{200.0, 5.0, 1.0}, {420.0, -9.0, 0.3}}, 1.0, 23);
    const auto dets = cfar_detect(p);
    REQUIRE(dets.size() == 2);
    const auto near = std::min_element(dets.begin(), dets.end(), [](auto& a, auto& b) { return a.range_m < b.range_m; });
    CHECK_THAT(near->range_m, WithinAbs(200.0, 0.5));
}

TEST_CASE("mask periodicity", "[detect]") {
    const double t0 = (1.0 + 1.0 / 14.0) / 120e3;
    const auto g = analyze_mask(default_dl_mask(), t0, 27e9);
    CHECK(g.has_gaps);
    CHECK(g.period_symbols == 70);
    CHECK_THAT(g.gap_frequency_hz, WithinRel(1.0 / (70.0 * t0), 1e-12));
    CHECK_THAT(g.gap_velocity_mps, WithinRel(g.gap_frequency_hz * oracle::c0 / (2.0 * 27e9), 1e-12));
    CHECK_FALSE(analyze_mask(make_dl_mask("14D", 28), t0, 27e9).has_gaps);
    const auto aperiodic = analyze_mask(make_dl_mask("9D1U", 10), t0, 27e9);
    CHECK_FALSE(aperiodic.has_gaps);
    CHECK(analyze_mask(make_dl_mask("5D2U", 112), t0, 27e9).period_symbols == 7);
}

TEST_CASE("TDD replicas sit at multiples of the gap frequency and are suppressed", "[detect][property]") {
    const auto mask = make_dl_mask("5D2U", 112);
    auto axes = axes_of(64, 112);
    axes.mask_period_symbols = mask_period(mask);
    const auto gaps = analyze_mask(mask, axes.symbol_duration_s, axes.carrier_hz);
    REQUIRE(gaps.has_gaps);
    const double span = 1.0 / axes.symbol_duration_s;
    std::mt19937_64 eng(2024);
    std::uniform_real_distribution<double> ur(60.0, 900.0), uv(-250.0, 250.0);
    int replica_frames = 0;
    std::size_t false_alarms = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const double r = ur(eng), v = uv(eng);
        CAPTURE(trial, r, v);
        const auto p = scene_periodogram(64, mask, {{r, v, 1.0}}, 1.0, 100 + trial);
        const auto dets = cfar_detect(p);
        REQUIRE_FALSE(dets.empty());
        const auto primary = *std::max_element(dets.begin(), dets.end(),
                                               [](auto& a, auto& b) { return a.peak_power < b.peak_power; });
        CHECK(std::abs(primary.range_m - r) < axes.range_bin_m());
        CHECK(std::abs(wrap(primary.velocity_mps - v, span * oracle::c0 / (2 * axes.carrier_hz))) <
              axes.velocity_bin_mps());
        std::size_t same_range = 0;
        for (const auto& d : dets) {
            if (d.peak_power == primary.peak_power) continue;
            // Anything off the target's range is a noise false alarm.
            if (std::abs(d.range_m - primary.range_m) >= axes.range_bin_m()) {
                ++false_alarms;
                continue;
            }
            ++same_range;
            const double k = wrap(d.doppler_hz - primary.doppler_hz, span) / gaps.gap_frequency_hz;
            CHECK(std::abs(k - std::round(k)) * gaps.gap_frequency_hz < axes.doppler_bin_hz());
            CHECK(std::round(k) != 0.0);
        }
        if (same_range > 0) ++replica_frames;
        std::vector<Detection> dropped;
        const auto kept = suppress_tdd_replicas(dets, gaps, axes, {}, &dropped);
        CHECK(dropped.size() == same_range);
        CHECK(std::count_if(kept.begin(), kept.end(), [&](const Detection& d) {
                  return d.peak_power == primary.peak_power;
              }) == 1);
        for (const auto& d : kept)
            if (d.peak_power != primary.peak_power) CHECK(std::abs(d.range_m - primary.range_m) >= axes.range_bin_m());
        for (const auto& d : dropped) CHECK(d.flags.replica_suppressed);
    }
    // pfa 1e-6 over 100 x 28672 cells.
    CHECK(false_alarms <= 12);
    CHECK(replica_frames >= 90);
}

TEST_CASE("replica suppression leaves gap-free masks and unrelated targets alone", "[detect]") {
    const auto axes = axes_of(64, 112);
    const auto mask = make_dl_mask("5D2U", 112);
    const auto gaps = analyze_mask(mask, axes.symbol_duration_s, axes.carrier_hz);
    Detection a, b;
    a.range_m = 300.0;
    a.doppler_hz = 1000.0;
    a.peak_power = 10.0;
    b = a;
    b.doppler_hz += gaps.gap_frequency_hz;
    b.peak_power = 1.0;
    CHECK(suppress_tdd_replicas({a, b}, MaskGaps{}, axes).size() == 2);
    CHECK(suppress_tdd_replicas({a, b}, gaps, axes).size() == 1);
    b.range_m += 3.0 * axes.range_bin_m();
    CHECK(suppress_tdd_replicas({a, b}, gaps, axes).size() == 2);
    b.range_m = a.range_m;
    b.doppler_hz = a.doppler_hz + 0.5 * gaps.gap_frequency_hz;
    CHECK(suppress_tdd_replicas({a, b}, gaps, axes).size() == 2);
    // Stronger replica candidate than the "primary": the strongest always stays.
    b.doppler_hz = a.doppler_hz - 2.0 * gaps.gap_frequency_hz;
    b.peak_power = 20.0;
    const auto kept = suppress_tdd_replicas({a, b}, gaps, axes);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].peak_power == 20.0);
}

TEST_CASE("range-rate consistency", "[detect]") {
    std::vector<double> t, r, v, replica;
    for (int i = 0; i < 10; ++i) {
        t.push_back(0.01 * i);
        r.push_back(400.0 - 12.0 * 0.01 * i);
        v.push_back(12.0);
        replica.push_back(12.0 + 8.7);
    }
    CHECK(range_rate_consistent(t, r, v) == true);
    CHECK(range_rate_consistent(t, r, replica) == false);
    std::vector<double> neg(10, -12.0);
    CHECK(range_rate_consistent(t, r, neg) == false);
    std::vector<double> same(10, 0.0);
    CHECK_FALSE(range_rate_consistent(same, r, v).has_value());
    CHECK(range_rate_consistent(t, r, std::vector<double>(10, 13.9)) == true);
    CHECK(range_rate_consistent(t, r, std::vector<double>(10, 14.1)) == false);
}

TEST_CASE("SINR annotation and clutter bands", "[detect]") {
    Periodogram p;
    Detection d;
    d.peak_power = 100.0;
    d.range_m = 260.0;
    std::vector<Detection> dets{d};
    CHECK_THROWS_AS(annotate_sinr(dets, p), ConfigError);
    p.noise_floor_estimate = 0.0;
    CHECK_THROWS_AS(annotate_sinr(dets, p), ConfigError);
    p.noise_floor_estimate = 100.0;
    annotate_sinr(dets, p);
    CHECK(dets[0].sinr_db == 0.0);
    p.noise_floor_estimate = 1.0;
    annotate_sinr(dets, p);
    CHECK_THAT(dets[0].sinr_db, WithinAbs(20.0, 1e-12));
    flag_clutter_bands(dets, {{250.0, 300.0}});
    CHECK(dets[0].flags.clutter_band);
    flag_clutter_bands(dets, {{270.0, 300.0}});
    CHECK_FALSE(dets[0].flags.clutter_band);
}
