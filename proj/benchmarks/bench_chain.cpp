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

// Throughput of the per-frame stages at the reference numerology.

#include "isac/detect.hpp"
#include "isac/dsp.hpp"
#include "isac/scene.hpp"

#include <benchmark/benchmark.h>

namespace {

isac::Scenario bench_scenario() {
    isac::Scenario sc;
    isac::Target t;
    t.id = 1;
    t.rcs_m2 = 1.0;
    t.trajectory = isac::Trajectory(std::vector<isac::Waypoint>{{0.0, {300.0, 0.0, 0.0}}, {10.0, {250.0, 0.0, 0.0}}});
    sc.targets = {t};
    sc.acquisition_frames = 0;
    return sc;
}

const isac::ChannelEstimate& bench_channel() {
    static const isac::ChannelEstimate ch = [] {
        const auto sc = bench_scenario();
        const auto f = isac::synthesize_frame(sc, 0);
        return isac::estimate_channel(f.tx, f.rx);
    }();
    return ch;
}

void BM_Synthesize(benchmark::State& state) {
    const auto sc = bench_scenario();
    std::int64_t k = 0;
    for (auto _ : state) benchmark::DoNotOptimize(isac::synthesize_frame(sc, k++));
}
BENCHMARK(BM_Synthesize)->Unit(benchmark::kMillisecond);

void BM_EcaC(benchmark::State& state) {
    const auto& ch = bench_channel();
    const isac::EcaConfig cfg{1, static_cast<int>(state.range(0))};
    for (auto _ : state) benchmark::DoNotOptimize(isac::eca_c_remove(ch, cfg));
}
BENCHMARK(BM_EcaC)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_Periodogram(benchmark::State& state) {
    const auto sc = bench_scenario();
    const auto& ch = bench_channel();
    const auto axes = isac::axes_for(sc);
    isac::PeriodogramEngine engine(axes.subcarriers, axes.symbols);
    isac::Periodogram out;
    for (auto _ : state) {
        engine.compute(ch, axes, out);
        benchmark::ClobberMemory();
    }
}
BENCHMARK(BM_Periodogram)->Unit(benchmark::kMillisecond);

void BM_CfarDetect(benchmark::State& state) {
    const auto sc = bench_scenario();
    auto p = isac::periodogram(bench_channel(), isac::axes_for(sc));
    for (auto _ : state) benchmark::DoNotOptimize(isac::cfar_detect(p));
}
BENCHMARK(BM_CfarDetect)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
