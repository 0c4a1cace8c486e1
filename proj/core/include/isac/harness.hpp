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

// Frame-by-frame sensing chain, scenario replay and run metrics.

#pragma once

#include "isac/detect.hpp"
#include "isac/dsp.hpp"
#include "isac/linkbudget.hpp"
#include "isac/scene.hpp"
#include "isac/track.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace isac {

class KeyValueDocument;

enum class ClutterRemoval { none, eca_c, crap };

std::string to_string(ClutterRemoval c);
/// Accepts "none", "eca-c", "crap". Throws ConfigError otherwise.
ClutterRemoval parse_clutter_removal(const std::string& text);

struct NoiseFloorConfig {
    /// Doppler ridge |v| <= this is left out (static clutter and its residue).
    double zero_doppler_halfwidth_mps = 1.5;
    /// Box around every detection left out of the estimate.
    double detection_halfwidth_m = 5.0;
    double detection_halfwidth_mps = 3.0;
};

struct ChainConfig {
    ClutterRemoval clutter = ClutterRemoval::eca_c;
    /// Half-bin subspace sampling: slow targets (|v| <= 0.5 m/s at the reference
    /// numerology) are cancelled along with the static scene.
    EcaConfig eca{1, 2};
    std::int64_t clutter_map_stale_after = 18000;
    PeriodogramConfig periodogram;
    CfarConfig cfar;
    NoiseFloorConfig noise_floor;
    bool replica_suppression = true;
    ReplicaConfig replica;
    TrackerConfig tracker;
    double truth_gate_m = 5.0;
    /// Stop after this many frames (desk runs and tests); nullopt runs the scenario.
    std::optional<std::int64_t> max_frames;

    void validate() const;
};

/// Settings used for the two experiment replicas.
ChainConfig experiment1_chain();
ChainConfig experiment2_chain();

/// Reads an optional [chain] section: clutter, eca_doppler_bins, eca_oversample, pad_range,
/// pad_doppler, window, pfa, train, guard, cluster, sidelobe_margin,
/// replica_suppression, gate_range, gate_velocity, validation_frames,
/// max_misses, consistency_window, consistency_threshold, max_frames.
ChainConfig read_chain_config(const KeyValueDocument& doc, ChainConfig base = {});

/// Output of the per-frame chain.
struct FrameOutput {
    std::vector<Detection> detections; ///< retained, SINR annotated
    std::vector<Detection> replicas;   ///< flagged by replica suppression
    double noise_floor = 0.0;
    bool stale_clutter_map = false;
};

/// Clutter removal -> periodogram -> CFAR -> noise floor -> SINR ->
/// replica suppression -> clutter band flags, on one channel estimate.
class FrameProcessor {
public:
    FrameProcessor(const Scenario& scenario, ChainConfig cfg);

    void set_clutter_map(std::size_t beam, ClutterMap map);
    bool has_clutter_map(std::size_t beam) const { return maps_.count(beam) != 0; }

    FrameOutput process(const ChannelEstimate& ch, std::size_t beam);

    const Periodogram& last_periodogram() const noexcept { return periodogram_; }
    const PeriodogramAxes& axes() const noexcept { return axes_; }
    const MaskGaps& mask_gaps() const noexcept { return gaps_; }
    const ChainConfig& config() const noexcept { return cfg_; }

private:
    ChainConfig cfg_;
    PeriodogramAxes axes_;
    MaskGaps gaps_;
    std::vector<std::pair<double, double>> clutter_bands_;
    PeriodogramEngine engine_;
    Periodogram periodogram_;
    std::map<std::size_t, ClutterMap> maps_;
};

/// Noise-floor exclusion region for a frame: the zero-Doppler ridge plus a
/// box around each detection.
NoiseRegion noise_region_for(const std::vector<Detection>& dets, const NoiseFloorConfig& cfg,
                             const PeriodogramAxes& axes);

// ---- metrics --------------------------------------------------------------

struct Quantiles {
    double q50 = 0.0;
    double q95 = 0.0;
};

/// Linear-interpolation quantile (type 7) of unsorted values. NaN if empty.
double quantile(std::vector<double> values, double q);

struct SinrPoint {
    std::int64_t frame_index;
    double range_m;          ///< truth range
    double measured_sinr_db;
    double model_sinr_db;    ///< windowed link-budget model on boresight
    double pattern_loss_db;  ///< two-way beam-pattern loss at the truth offset
};

struct MatchedDetection {
    std::int64_t frame_index;
    int target_id;
    int track_id;
    double truth_range_m;
    double truth_velocity_mps;
    double range_m;
    double velocity_mps;
    double sinr_db;
};

struct TimingStats {
    std::size_t frames = 0;
    double mean_ms = 0.0;
    double p50_ms = 0.0;
    double p95_ms = 0.0;
    double max_ms = 0.0;
};

struct RunMetrics {
    std::size_t frames_processed = 0;
    std::size_t truth_frames = 0;    ///< frames with a target inside the beam and the receive window
    std::size_t matched_frames = 0;
    double detection_rate = 0.0;
    double range_bias_m = 0.0;       ///< median offset removed before the quantiles
    Quantiles range_error;           ///< |error - bias|
    Quantiles velocity_error;
    std::vector<SinrPoint> sinr_curve;
    std::size_t detections = 0;
    std::size_t replicas_suppressed = 0;
    std::size_t valid_tracks = 0;
    std::size_t false_track_count = 0;
    double min_valid_sinr_db = 0.0;  ///< over all detections feeding valid tracks
    double min_matched_sinr_db = 0.0;///< over valid-track detections matched to truth
    std::size_t stale_map_frames = 0;
};

struct ReplayResult {
    RunMetrics metrics;
    TimingStats timing;
    std::vector<TruthRecord> truth;
    std::vector<Detection> detections;         ///< retained detections, all frames
    std::vector<int> detection_track;          ///< track id per retained detection
    std::vector<std::uint8_t> detection_valid; ///< 1 if that track was valid after the update
    std::vector<double> frame_ms;              ///< chain time per frame, synthesis excluded
    std::vector<Detection> replicas;
    std::vector<MatchedDetection> matches;
    std::vector<Track> tracks;
};

/// Per-frame hook for progress reports or artifact streaming.
using FrameCallback = std::function<void(std::int64_t frame_index, const FrameOutput&, const FrameProcessor&)>;

/// synthesize -> estimate_channel -> chain -> tracker, frame by frame. With
/// CRAP, each beam is acquired from scenario.acquisition_frames pre-roll
/// frames first.
ReplayResult replay(const Scenario& scenario, const ChainConfig& cfg, const FrameCallback& on_frame = {});

/// Truth matching and metric aggregation over a finished run.
RunMetrics compute_metrics(const Scenario& scenario, const ChainConfig& cfg, ReplayResult& run);

struct AcceptanceThresholds {
    std::optional<double> max_q50_m;
    std::optional<double> max_q95_m;
    std::optional<double> min_matched_sinr_db;
    std::optional<double> min_detection_rate;
};

/// Violated thresholds as readable messages; empty when all hold.
std::vector<std::string> check_metrics(const RunMetrics& m, const AcceptanceThresholds& t);

// ---- model report ---------------------------------------------------------

struct ModelReport {
    LinkBudgetParams params;
    InterferencePsd psd;
    double snr0;
    MaxRange range;
};

ModelReport model_report(const LinkBudgetParams& params);
std::string format_model_report(const ModelReport& report);

} // namespace isac
