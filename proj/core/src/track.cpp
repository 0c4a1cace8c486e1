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

#include "isac/track.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <tuple>

namespace isac {

std::string to_string(TrackState s) {
    switch (s) {
    case TrackState::candidate: return "candidate";
    case TrackState::valid: return "valid";
    case TrackState::retired: return "retired";
    }
    return "?";
}

std::string to_string(RetireReason r) {
    switch (r) {
    case RetireReason::none: return "none";
    case RetireReason::missed: return "missed";
    case RetireReason::inconsistent: return "inconsistent";
    }
    return "?";
}

double Track::predicted_range(double time_s) const {
    const auto& last = history.back();
    return last.range_m - last.velocity_mps * (time_s - last.time_s);
}

void TrackerConfig::validate() const {
    if (!(gate_range_m > 0.0) || !(gate_velocity_mps > 0.0)) throw ConfigError("tracker gates must be positive");
    if (validation_frames < 1) throw ConfigError("tracker validation_frames must be >= 1");
    if (max_misses < 0) throw ConfigError("tracker max_misses must be >= 0");
    if (consistency_window < 2) throw ConfigError("tracker consistency_window must be >= 2");
    if (consistency_interval < 1) throw ConfigError("tracker consistency_interval must be >= 1");
}

std::optional<bool> range_rate_consistency(const Track& track, int window, double threshold_mps) {
    if (window < 2 || track.history.size() < static_cast<std::size_t>(window)) return std::nullopt;
    std::vector<double> t, r, v;
    for (auto it = track.history.end() - window; it != track.history.end(); ++it) {
        t.push_back(it->time_s);
        r.push_back(it->range_m);
        v.push_back(it->velocity_mps);
    }
    return range_rate_consistent(t, r, v, threshold_mps);
}

namespace {

void retire(Track& t, std::int64_t frame_index, RetireReason why) {
    t.state = TrackState::retired;
    t.retired_frame = frame_index;
    t.retire_reason = why;
}

/// Applies the consistency rule; returns false if the track was retired.
bool check_consistency(Track& t, std::int64_t frame_index, const TrackerConfig& cfg) {
    if (!cfg.consistency_check) return true;
    const auto ok = range_rate_consistency(t, cfg.consistency_window, cfg.consistency_threshold_mps);
    t.hits_since_check = 0;
    if (ok.has_value() && !*ok) {
        retire(t, frame_index, RetireReason::inconsistent);
        return false;
    }
    return true;
}

} // namespace

std::vector<int> associate_and_update(std::vector<Track>& tracks, const std::vector<Detection>& dets,
                                      std::int64_t frame_index, double time_s, const TrackerConfig& cfg,
                                      int& next_id) {
    cfg.validate();
    struct Pair {
        double distance;
        double range_residual;
        int track_id;
        std::size_t track;
        std::size_t det;
    };
    // Detections by range so each track only scans its range gate.
    std::vector<std::size_t> by_range(dets.size());
    for (std::size_t i = 0; i < by_range.size(); ++i) by_range[i] = i;
    std::sort(by_range.begin(), by_range.end(), [&](std::size_t a, std::size_t b) {
        return dets[a].range_m != dets[b].range_m ? dets[a].range_m < dets[b].range_m : a < b;
    });

    std::vector<Pair> pairs;
    for (std::size_t ti = 0; ti < tracks.size(); ++ti) {
        const auto& t = tracks[ti];
        if (!t.active() || t.history.empty()) continue;
        const double pred = t.predicted_range(time_s);
        const double vel = t.history.back().velocity_mps;
        auto it = std::lower_bound(by_range.begin(), by_range.end(), pred - cfg.gate_range_m,
                                   [&](std::size_t i, double v) { return dets[i].range_m < v; });
        for (; it != by_range.end() && dets[*it].range_m <= pred + cfg.gate_range_m; ++it) {
            const std::size_t di = *it;
            const double dr = std::abs(dets[di].range_m - pred);
            const double dv = std::abs(dets[di].velocity_mps - vel);
            if (dr > cfg.gate_range_m || dv > cfg.gate_velocity_mps) continue;
            const double nr = dr / cfg.gate_range_m;
            const double nv = dv / cfg.gate_velocity_mps;
            pairs.push_back({nr * nr + nv * nv, dr, t.id, ti, di});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        return std::tie(a.distance, a.range_residual, a.track_id, a.det) <
               std::tie(b.distance, b.range_residual, b.track_id, b.det);
    });

    std::vector<int> assigned(dets.size(), -1);
    std::vector<std::ptrdiff_t> track_det(tracks.size(), -1);
    for (const auto& p : pairs) {
        if (track_det[p.track] >= 0 || assigned[p.det] >= 0) continue;
        track_det[p.track] = static_cast<std::ptrdiff_t>(p.det);
        assigned[p.det] = p.track_id;
    }

    for (std::size_t ti = 0; ti < tracks.size(); ++ti) {
        auto& t = tracks[ti];
        if (!t.active()) continue;
        if (track_det[ti] < 0) {
            t.consecutive_hits = 0;
            ++t.consecutive_misses;
            if (t.consecutive_misses > cfg.max_misses) retire(t, frame_index, RetireReason::missed);
            continue;
        }
        const auto& d = dets[static_cast<std::size_t>(track_det[ti])];
        ++t.consecutive_hits;
        t.consecutive_misses = 0;
        ++t.hits_since_check;
        t.history.push_back({frame_index, time_s, d.range_m, d.velocity_mps, d.sinr_db, t.state});
        if (t.state == TrackState::candidate && t.consecutive_hits >= cfg.validation_frames) {
            if (check_consistency(t, frame_index, cfg)) {
                t.state = TrackState::valid;
                t.validated_frame = frame_index;
            }
        } else if (t.state == TrackState::valid && t.hits_since_check >= cfg.consistency_interval) {
            check_consistency(t, frame_index, cfg);
        }
        t.history.back().state = t.state;
    }

    for (std::size_t di = 0; di < dets.size(); ++di) {
        if (assigned[di] >= 0) continue;
        Track t;
        t.id = next_id++;
        t.created_frame = frame_index;
        t.consecutive_hits = 1;
        t.hits_since_check = 1;
        const auto& d = dets[di];
        t.history.push_back({frame_index, time_s, d.range_m, d.velocity_mps, d.sinr_db, TrackState::candidate});
        if (cfg.validation_frames <= 1 && check_consistency(t, frame_index, cfg)) {
            t.state = TrackState::valid;
            t.validated_frame = frame_index;
            t.history.back().state = t.state;
        }
        assigned[di] = t.id;
        tracks.push_back(std::move(t));
    }
    return assigned;
}

Tracker::Tracker(TrackerConfig cfg) : cfg_(cfg) { cfg_.validate(); }

std::vector<int> Tracker::update(const std::vector<Detection>& dets, std::int64_t frame_index, double time_s) {
    auto ids = associate_and_update(tracks_, dets, frame_index, time_s, cfg_, next_id_);
    if (!cfg_.keep_unconfirmed) {
        const auto before = tracks_.size();
        std::erase_if(tracks_, [](const Track& t) { return !t.active() && !t.validated_frame; });
        discarded_ += before - tracks_.size();
    }
    return ids;
}

const Track* Tracker::find(int id) const {
    // Ids are assigned in creation order, so the list is sorted by id.
    auto it = std::lower_bound(tracks_.begin(), tracks_.end(), id,
                               [](const Track& t, int v) { return t.id < v; });
    return it != tracks_.end() && it->id == id ? &*it : nullptr;
}

std::vector<TrackSummary> summarize(const std::vector<Track>& tracks) {
    std::vector<TrackSummary> out;
    for (const auto& t : tracks) {
        TrackSummary s{t.id, t.state, t.retire_reason, t.created_frame, t.validated_frame, t.retired_frame,
                       -1, 0, t.history.size()};
        if (t.validated_frame) s.validation_latency_frames = *t.validated_frame - t.created_frame + 1;
        if (!t.history.empty()) s.lifetime_frames = t.history.back().frame_index - t.created_frame + 1;
        out.push_back(s);
    }
    return out;
}

void write_tracks_csv(std::ostream& os, const std::vector<Track>& tracks) {
    os << "track_id,state,frame_index,range_m,velocity_mps,sinr_db\n";
    for (const auto& t : tracks)
        for (const auto& p : t.history)
            os << t.id << ',' << to_string(p.state) << ',' << p.frame_index << ',' << p.range_m << ','
               << p.velocity_mps << ',' << p.sinr_db << '\n';
}

void write_track_summary_csv(std::ostream& os, const std::vector<TrackSummary>& summary) {
    os << "track_id,final_state,retire_reason,created_frame,validated_frame,retired_frame,"
          "validation_latency_frames,lifetime_frames,hits\n";
    for (const auto& s : summary) {
        os << s.id << ',' << to_string(s.state) << ',' << to_string(s.retire_reason) << ',' << s.created_frame
           << ',';
        if (s.validated_frame) os << *s.validated_frame;
        os << ',';
        if (s.retired_frame) os << *s.retired_frame;
        os << ',' << s.validation_latency_frames << ',' << s.lifetime_frames << ',' << s.hits << '\n';
    }
}

} // namespace isac
