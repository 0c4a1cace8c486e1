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

// Small scenarios with the reference numerology but few subcarriers and
// symbols, so synthesis-based tests stay fast.

#pragma once

#include "isac/scene.hpp"

#include <cmath>
#include <string>

namespace fixture {

inline isac::Scenario small_scenario(int subcarriers = 64, const std::string& pattern = "14D", int symbols = 112) {
    isac::Scenario sc;
    sc.params = isac::LinkBudgetParams::reference();
    sc.params.subcarriers = subcarriers;
    sc.symbols_per_frame = symbols;
    sc.dl_mask = isac::make_dl_mask(pattern, symbols);
    sc.params.symbols = static_cast<int>(isac::count_dl(sc.dl_mask));
    sc.frame_duration_s = symbols * sc.params.symbol_with_cp_s();
    sc.duration_s = 200 * sc.frame_duration_s;
    isac::BeamDwell dwell;
    dwell.dwell_s = 5 * sc.frame_duration_s;
    sc.beams = {dwell};
    sc.synthesis = {false, false, false, true};
    sc.acquisition_frames = 4;
    return sc;
}

/// Target moving radially along +x: starts at `range_m`, positive velocity approaches.
inline isac::Target radial_target(int id, double range_m, double velocity_mps, double rcs_m2,
                                  double az_deg = 0.0, double span_s = 100.0) {
    const double a = az_deg * 3.14159265358979323846 / 180.0;
    const double r1 = range_m - velocity_mps * span_s;
    isac::Target t;
    t.id = id;
    t.rcs_m2 = rcs_m2;
    t.trajectory = isac::Trajectory({{0.0, {range_m * std::cos(a), range_m * std::sin(a), 0.0}},
                                     {span_s, {r1 * std::cos(a), r1 * std::sin(a), 0.0}}});
    return t;
}

} // namespace fixture
