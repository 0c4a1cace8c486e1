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

// Frame-to-frame association and the candidate / valid / retired life cycle.

#pragma once

#include "isac/detect.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace isac {

enum class TrackState { candidate, valid, retired };
enum class RetireReason { none, missed, inconsistent };

std::string to_string(TrackState s);
std::string to_string(RetireReason r);

struct TrackPoint {
    std::int64_t frame_index = 0;
    double time_s = 0.0;
    double range_m = 0.0;
    double velocity_mps = 0.0;
    double sinr_db = 0.0;
    TrackState state = TrackState::candidate; ///< state right after this update
};

struct Track {
    int id = 0;
    TrackState state = TrackState::candidate;
    std::vector<TrackPoint> history; ///< associated measurements only
    int consecutive_hits = 0;
    int consecutive_misses = 0;
    std::int64_t created_frame = 0;
    std::optional<std::int64_t> validated_frame;
    std::optional<std::int64_t> retired_frame;
    RetireReason retire_reason = RetireReason::none;
    std::int64_t hits_since_check = 0;

    bool active() const { return state != TrackState::retired; }
    /// range - velocity * dt from the last measurement (positive velocity closes).
    double predicted_range(double time_s) const;
};

struct TrackerConfig {
    double gate_range_m = 3.0;
    double gate_velocity_mps = 3.0;
    int validation_frames = 10;
    /// Retire once consecutive misses exceed this count (13th miss with 12).
    int max_misses = 12;
    bool consistency_check = true;
    int consistency_window = 10;
    double consistency_threshold_mps = 2.0;
    /// Valid tracks are rechecked after this many further hits.
    int consistency_interval = 10;
    /// Keep retired tracks that never validated (noise and replica candidates)
    /// in Tracker::tracks(). Off by default: at pfa 1e-4 they number hundreds per frame.
    bool keep_unconfirmed = false;

    void validate() const;
};

/// -slope vs mean velocity over the last `window` history points, see
/// range_rate_consistent. nullopt with insufficient history.
std::optional<bool> range_rate_consistency(const Track& track, int window, double threshold_mps = 2.0);

/// One tracker step. Greedy global nearest neighbour on the gate-normalised
/// distance; ties go to the smaller range residual, then the lower track id.
/// Returns, per detection, the id of the track it fed (new candidates
/// included). Retired tracks stay in `tracks` and are never associated.
std::vector<int> associate_and_update(std::vector<Track>& tracks, const std::vector<Detection>& dets,
                                      std::int64_t frame_index, double time_s, const TrackerConfig& cfg,
                                      int& next_id);

class Tracker {
public:
    explicit Tracker(TrackerConfig cfg = {});

    std::vector<int> update(const std::vector<Detection>& dets, std::int64_t frame_index, double time_s);
    const std::vector<Track>& tracks() const noexcept { return tracks_; }
    const Track* find(int id) const;
    const TrackerConfig& config() const noexcept { return cfg_; }
    /// Retired, never validated tracks dropped so far (keep_unconfirmed off).
    std::size_t discarded_candidates() const noexcept { return discarded_; }

private:
    TrackerConfig cfg_;
    std::vector<Track> tracks_;
    int next_id_ = 1;
    std::size_t discarded_ = 0;
};

struct TrackSummary {
    int id;
    TrackState state;
    RetireReason retire_reason;
    std::int64_t created_frame;
    std::optional<std::int64_t> validated_frame;
    std::optional<std::int64_t> retired_frame;
    std::int64_t validation_latency_frames; ///< -1 if never validated
    std::int64_t lifetime_frames;           ///< first to last hit, inclusive
    std::size_t hits;
};

std::vector<TrackSummary> summarize(const std::vector<Track>& tracks);

/// track_id,state,frame_index,range_m,velocity_mps,sinr_db
void write_tracks_csv(std::ostream& os, const std::vector<Track>& tracks);
void write_track_summary_csv(std::ostream& os, const std::vector<TrackSummary>& summary);

} // namespace isac
