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

// CA-CFAR detection, sub-bin peak interpolation and TDD replica handling.

#pragma once

#include "isac/common.hpp"
#include "isac/dsp.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace isac {

/// Cell counts along (range, Doppler), in periodogram cells (after padding).
struct CellPair {
    int range = 0;
    int doppler = 0;
};

struct CfarConfig {
    double pfa = 1e-6;
    CellPair training{8, 8}; ///< per side
    CellPair guard{4, 4};    ///< per side
    /// A hit must be the maximum of the (2r+1) x (2d+1) neighbourhood around
    /// it. {2, 2} spans 3 x 3 native bins at the default x2 padding.
    CellPair cluster_radius{2, 2};
    /// Drops a peak lying less than this many dB above the Dirichlet-kernel sidelobe
    /// envelope of a stronger peak in the same frame. nullopt disables.
    std::optional<double> sidelobe_margin_db = 6.0;

    void validate() const;
    /// Number of training cells in the ring.
    std::size_t training_cell_count() const;
    /// alpha = Ntrain (pfa^(-1/Ntrain) - 1), exponential cell statistics.
    double threshold_factor() const;
};

struct DetectionFlags {
    bool replica_suppressed = false;
    bool clutter_band = false;
};

struct Detection {
    std::int64_t frame_index = 0;
    double time_s = 0.0;
    double range_m = 0.0;     ///< interpolated
    double velocity_mps = 0.0;///< interpolated, positive when approaching
    double doppler_hz = 0.0;
    double peak_power = 0.0;  ///< interpolated peak in periodogram units
    double sinr_db = 0.0;     ///< valid once annotate_sinr has run
    std::size_t range_bin = 0;   ///< periodogram cell of the local maximum
    std::size_t doppler_bin = 0;
    double range_offset = 0.0;   ///< sub-cell offset in [-0.5, 0.5]
    double doppler_offset = 0.0;
    DetectionFlags flags;
};

/// Log-domain parabolic fit through three equally spaced samples around a
/// maximum. Returns the offset of the vertex in [-0.5, 0.5] and the
/// interpolated peak value.
std::pair<double, double> interpolate_peak(double left, double centre, double right);

/// CA-CFAR over the full periodogram with toroidal training windows, local
/// maximum clustering and sidelobe rejection. Throws ConfigError if the
/// training window does not fit inside the periodogram.
std::vector<Detection> cfar_detect(const Periodogram& p, const CfarConfig& cfg = {});

/// Raw CFAR hit mask (before clustering): 1 where power > alpha * training mean.
Matrix<std::uint8_t> cfar_hits(const Periodogram& p, const CfarConfig& cfg = {});

// ---- TDD gaps -------------------------------------------------------------

/// Periodicity of the DL mask. The UL gaps repeat every `period_symbols`
/// symbols, so a moving target leaves replicas at multiples of
/// gap_frequency_hz in Doppler.
struct MaskGaps {
    bool has_gaps = false;
    std::size_t period_symbols = 0;
    double gap_frequency_hz = 0.0;
    double gap_velocity_mps = 0.0;
};

/// Smallest period P dividing the frame such that the mask repeats every P
/// symbols. Masks without UL symbols or without a shorter period have no
/// replica structure.
MaskGaps analyze_mask(const DlMask& mask, double symbol_duration_s, double carrier_hz);

struct ReplicaConfig {
    double range_tolerance_bins = 1.0;   ///< native range bins
    double doppler_tolerance_bins = 1.0; ///< native Doppler bins
};

/// Flags and drops detections that sit at the range of a stronger detection
/// and at a Doppler offset of k * gap frequency (k != 0, wrapped). Returns
/// the retained detections; flagged ones are appended to `suppressed` if given.
std::vector<Detection> suppress_tdd_replicas(std::vector<Detection> dets, const MaskGaps& gaps,
                                             const PeriodogramAxes& axes, const ReplicaConfig& cfg = {},
                                             std::vector<Detection>* suppressed = nullptr);

/// Range-rate check over a window of measurements: true iff the
/// least-squares slope of range over time, negated, agrees with the mean
/// measured velocity within `threshold_mps`. nullopt with fewer than two
/// distinct times.
std::optional<bool> range_rate_consistent(std::span<const double> times_s, std::span<const double> ranges_m,
                                          std::span<const double> velocities_mps, double threshold_mps = 2.0);

/// sinr_db = 10 log10(peak_power / noise floor). Throws ConfigError when the
/// periodogram has no positive noise floor estimate.
void annotate_sinr(std::vector<Detection>& dets, const Periodogram& p);

/// Sets flags.clutter_band for detections inside any [lo, hi] range band.
void flag_clutter_bands(std::vector<Detection>& dets, const std::vector<std::pair<double, double>>& bands);

} // namespace isac
