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

// Scene description and frequency-domain frame synthesis.
//
// The radar sits at the origin, x pointing along azimuth 0 and z up.
// Radial velocities follow the Doppler sign: positive while the target
// approaches (range decreasing).

#pragma once

#include "isac/common.hpp"
#include "isac/linkbudget.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace isac {

class KeyValueDocument;

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

struct Waypoint {
    double time_s;
    Vec3 position;
};

/// Piecewise-linear position over time, held constant before the first and
/// after the last waypoint.
class Trajectory {
public:
    Trajectory() = default;
    explicit Trajectory(std::vector<Waypoint> points);

    Vec3 position(double t) const;
    Vec3 velocity(double t) const;
    const std::vector<Waypoint>& points() const noexcept { return points_; }
    double start_time() const { return points_.front().time_s; }
    double end_time() const { return points_.back().time_s; }

private:
    std::vector<Waypoint> points_;
};

enum class RcsModel { constant, exponential_fading };

struct Target {
    int id = 0;
    Trajectory trajectory;
    double rcs_m2 = 0.0;
    RcsModel rcs_model = RcsModel::constant;
};

struct ClutterObject {
    double range_m = 0.0;
    double coupling_loss = 1.0;    ///< linear; combines as 1/C_total = sum 1/C_i
    double doppler_hz = 0.0;
    double phase_jitter_std = 0.0; ///< rad, drawn independently per frame
};

/// 1 / sum(1/C_i). Returns +inf for an empty list.
double combined_coupling_loss(const std::vector<ClutterObject>& clutter);

struct Beam {
    double azimuth_deg = 0.0;
    double elevation_deg = 0.0;
    double hpbw_az_deg = 14.0;
    double hpbw_el_deg = 6.4;
    double gain = 1.0; ///< boresight gain, linear
};

/// Separable Gaussian pattern, -3 dB at half the HPBW in each plane.
double beam_gain(const Beam& beam, double az_offset_deg, double el_offset_deg);
/// beam_gain normalised to 1 at boresight.
double beam_pattern(const Beam& beam, double az_offset_deg, double el_offset_deg);

struct BeamDwell {
    Beam beam;
    double dwell_s = 0.05;
};

struct RadioFrame {
    ComplexGrid grid; ///< subcarriers x symbols
    DlMask dl_mask;
    std::int64_t frame_index = 0;
    double timestamp_s = 0.0;
};

struct TruthRecord {
    std::int64_t frame_index;
    double time_s;
    int target_id;
    double range_m;
    double radial_velocity_mps;
    double az_offset_deg;
    double el_offset_deg;
};

/// Builds a mask of `symbols` entries from a repeating run-length pattern
/// such as "52D18U". Throws ConfigError if the pattern does not tile the frame.
DlMask make_dl_mask(const std::string& pattern, int symbols);

/// 16 repetitions of 52 DL + 18 UL symbols: 832 DL / 288 UL per 1120-symbol frame.
DlMask default_dl_mask();

struct SynthesisOptions {
    bool noise = true;
    bool leakage = true;
    bool clutter = true;
    bool targets = true;
};

struct Scenario {
    LinkBudgetParams params = LinkBudgetParams::reference();
    double frame_duration_s = 0.01;
    int symbols_per_frame = 1120;
    DlMask dl_mask = default_dl_mask();
    std::vector<Target> targets;
    std::vector<ClutterObject> clutter;
    std::vector<BeamDwell> beams{BeamDwell{}};
    double duration_s = 1.0;
    std::uint64_t rng_seed = 1;
    SynthesisOptions synthesis;
    /// Frames synthesised before t = 0 per beam for clutter acquisition.
    int acquisition_frames = 100;
    /// Range bands flagged as known clutter in detection bookkeeping.
    std::vector<std::pair<double, double>> clutter_bands;

    void validate() const;
    std::int64_t frame_count() const;
    double sweep_period_s() const;
    /// Index into `beams` of the beam active at the given frame (pre-roll frames included).
    std::size_t beam_index_at(std::int64_t frame_index) const;
    double symbol_duration_s() const { return params.symbol_with_cp_s(); }
};

struct SynthesizedFrame {
    RadioFrame tx;
    RadioFrame rx;
    std::vector<TruthRecord> truth;
};

/// Synthesises the transmitted and received grids for one frame.
///
/// rx[n,m] = sum_k alpha_k w(r_k) tx[n,m] exp(-j2pi n df 2r_k/c) exp(+j2pi f_D,k m T0)
///           + leakage + noise,
/// with UL symbols zeroed afterwards. Negative frame indices are pre-roll
/// (clutter acquisition) frames; `beam_override` pins the beam for them.
SynthesizedFrame synthesize_frame(const Scenario& scenario, std::int64_t frame_index,
                                  std::optional<std::size_t> beam_override = std::nullopt);

/// Truth for all targets at a frame without synthesising the grids.
std::vector<TruthRecord> ground_truth(const Scenario& scenario, std::int64_t frame_index,
                                      std::optional<std::size_t> beam_override = std::nullopt);

/// Per-subcarrier amplitude |alpha| (sqrt W) of a point target on boresight,
/// before beam pattern and receive-window overlap.
double target_amplitude(const LinkBudgetParams& params, double range_m, double rcs_m2);

/// Closed route within 90 m swept by six beams at 50 ms each (300 ms sweep).
Scenario make_experiment1_scenario();
/// Single fixed beam, approach/depart/approach between 250 and 500 m, strong
/// clutter at 30 m and a building band at 250-300 m, C_total = 85 dB.
Scenario make_experiment2_scenario();

Scenario read_scenario(const KeyValueDocument& doc);
Scenario load_scenario(const std::string& path);
std::string format_scenario(const Scenario& scenario);

} // namespace isac
