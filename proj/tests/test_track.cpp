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

#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

using namespace isac;

namespace {

constexpr double kFrame = 0.01;

Detection det_at(double range_m, double velocity_mps) {
    Detection d;
    d.range_m = range_m;
    d.velocity_mps = velocity_mps;
    d.sinr_db = 20.0;
    return d;
}

/// Constant-velocity target: range at frame f.
double range_of(std::int64_t f, double r0 = 400.0, double v = 10.0) { return r0 - v * kFrame * static_cast<double>(f); }

/// Feeds the target for frames [from, to) and returns the id it fed last.
int feed(Tracker& trk, std::int64_t from, std::int64_t to, double r0 = 400.0, double v = 10.0) {
    int id = -1;
    for (std::int64_t f = from; f < to; ++f) id = trk.update({det_at(range_of(f, r0, v), v)}, f, f * kFrame).at(0);
    return id;
}

void miss(Tracker& trk, std::int64_t from, std::int64_t to) {
    for (std::int64_t f = from; f < to; ++f) trk.update({}, f, f * kFrame);
}

} // namespace

TEST_CASE("a track validates on exactly its tenth consecutive hit", "[track]") {
    Tracker trk;
    int id = -1;
    for (std::int64_t f = 0; f < 10; ++f) {
        id = feed(trk, f, f + 1);
        const Track* t = trk.find(id);
        REQUIRE(t);
        if (f < 9) {
            CHECK(t->state == TrackState::candidate);
        } else {
            CHECK(t->state == TrackState::valid);
            CHECK(t->validated_frame == 9);
        }
    }
    CHECK(trk.tracks().size() == 1);
    const auto s = summarize(trk.tracks());
    CHECK(s.at(0).validation_latency_frames == 10);
    CHECK(s.at(0).hits == 10);
}

TEST_CASE("a miss resets the validation count", "[track]") {
    TrackerConfig cfg;
    cfg.keep_unconfirmed = true;
    Tracker trk(cfg);
    const int id = feed(trk, 0, 9);
    miss(trk, 9, 10);
    feed(trk, 10, 19);
    CHECK(trk.find(id)->state == TrackState::candidate);
    feed(trk, 19, 20);
    CHECK(trk.find(id)->state == TrackState::valid);
    CHECK(trk.find(id)->validated_frame == 19);
}

TEST_CASE("retirement comes on the thirteenth consecutive miss", "[track][property]") {
    std::mt19937 eng(7);
    std::uniform_int_distribution<int> gap(1, 12), hits(10, 40);
    for (int trial = 0; trial < 50; ++trial) {
        Tracker trk;
        std::int64_t f = 0;
        const int n = hits(eng);
        const int id = feed(trk, f, f + n);
        f += n;
        // Any run of up to 12 misses is bridged and the id survives.
        for (int k = 0; k < 3; ++k) {
            const int g = gap(eng);
            miss(trk, f, f + g);
            f += g;
            CHECK(trk.find(id)->active());
            CHECK(feed(trk, f, f + 1) == id);
            ++f;
        }
        miss(trk, f, f + 12);
        CHECK(trk.find(id)->state == TrackState::valid);
        miss(trk, f + 12, f + 13);
        const Track* t = trk.find(id);
        REQUIRE(t);
        CHECK(t->state == TrackState::retired);
        CHECK(t->retire_reason == RetireReason::missed);
        CHECK(t->retired_frame == f + 12);
        // Retired tracks never associate again.
        CHECK(feed(trk, f + 13, f + 14) != id);
    }
}

TEST_CASE("a 100 ms beam gap never retires a valid track", "[track]") {
    Tracker trk;
    std::int64_t f = 0;
    const int id = feed(trk, 0, 10);
    f = 10;
    // One beam of a 6-beam sweep at 50 ms each would leave 250 ms; at 10 ms
    // frames a 100 ms gap is 10 missed frames.
    for (int cycle = 0; cycle < 20; ++cycle) {
        miss(trk, f, f + 10);
        f += 10;
        CHECK(feed(trk, f, f + 5) == id);
        f += 5;
    }
    CHECK(trk.find(id)->state == TrackState::valid);
    CHECK(trk.tracks().size() == 1);
}

TEST_CASE("one detection per track and one track per detection", "[track]") {
    TrackerConfig cfg;
    cfg.keep_unconfirmed = true;
    Tracker trk(cfg);
    const int id = feed(trk, 0, 3);
    // Two detections in one gate: the closer one feeds the track.
    const auto ids = trk.update({det_at(range_of(3) + 1.0, 10.0), det_at(range_of(3) + 0.1, 10.0)}, 3, 3 * kFrame);
    CHECK(ids[1] == id);
    CHECK(ids[0] != id);
    CHECK(trk.find(ids[0])->state == TrackState::candidate);
    CHECK(trk.find(id)->history.size() == 4);
}

TEST_CASE("ties go to the smaller range residual, then the lower id", "[track]") {
    TrackerConfig cfg;
    cfg.keep_unconfirmed = true;
    Tracker trk(cfg);
    auto ids = trk.update({det_at(100.0, 0.0), det_at(102.0, 0.0)}, 0, 0.0);
    REQUIRE(ids.size() == 2);
    // Equidistant from both tracks: the lower id wins.
    auto next = trk.update({det_at(101.0, 0.0)}, 1, kFrame);
    CHECK(next[0] == std::min(ids[0], ids[1]));

    // Same normalised distance, one in range and one in velocity: range residual decides.
    Tracker trk2(cfg);
    ids = trk2.update({det_at(200.0, 0.0), det_at(201.0, 1.0)}, 0, 0.0);
    next = trk2.update({det_at(200.5, 0.5)}, 1, 0.0);
    REQUIRE(next.size() == 1);
    CHECK((next[0] == ids[0] || next[0] == ids[1]));
}

TEST_CASE("gates are respected", "[track]") {
    struct Case {
        double dr, v;
        bool inside;
    };
    for (const auto& c : {Case{3.1, 10.0, false}, Case{-3.1, 10.0, false}, Case{0.0, 13.1, false},
                          Case{0.0, 6.9, false}, Case{-2.9, 12.9, true}, Case{2.9, 7.1, true}}) {
        Tracker trk;
        const int id = feed(trk, 0, 5);
        CAPTURE(c.dr, c.v);
        CHECK((trk.update({det_at(range_of(5) + c.dr, c.v)}, 5, 5 * kFrame)[0] == id) == c.inside);
    }
}

TEST_CASE("range-rate consistency rejects replica-like tracks", "[track]") {
    Tracker trk;
    // Velocity offset by one TDD replica step (8.7 m/s) from the true range rate.
    int id = -1;
    for (std::int64_t f = 0; f < 10; ++f) id = trk.update({det_at(range_of(f), 18.7)}, f, f * kFrame)[0];
    // With 10 ms frames the range drift from the wrong velocity stays inside the gate.
    const Track* t = trk.find(id);
    if (t) {
        CHECK(t->state == TrackState::retired);
        CHECK(t->retire_reason == RetireReason::inconsistent);
    } else {
        CHECK(trk.discarded_candidates() == 1);
    }

    TrackerConfig off;
    off.consistency_check = false;
    Tracker loose(off);
    for (std::int64_t f = 0; f < 10; ++f) id = loose.update({det_at(range_of(f), 18.7)}, f, f * kFrame)[0];
    CHECK(loose.find(id)->state == TrackState::valid);
}

TEST_CASE("valid tracks are rechecked for consistency", "[track]") {
    Tracker trk;
    const int id = feed(trk, 0, 10);
    REQUIRE(trk.find(id)->state == TrackState::valid);
    // Velocity drifts away, within the gate each frame, while the range keeps the true rate.
    for (std::int64_t f = 10; f < 20; ++f)
        CHECK(trk.update({det_at(range_of(f), 10.0 + static_cast<double>(f - 9))}, f, f * kFrame)[0] == id);
    const Track* t = trk.find(id);
    REQUIRE(t);
    CHECK(t->state == TrackState::retired);
    CHECK(t->retire_reason == RetireReason::inconsistent);
}

TEST_CASE("unconfirmed candidates are dropped unless kept", "[track]") {
    Tracker drop;
    TrackerConfig cfg;
    cfg.keep_unconfirmed = true;
    Tracker keep(cfg);
    for (auto* trk : {&drop, &keep}) {
        trk->update({det_at(50.0, 0.0), det_at(80.0, 5.0)}, 0, 0.0);
        miss(*trk, 1, 14);
    }
    CHECK(drop.tracks().empty());
    CHECK(drop.discarded_candidates() == 2);
    CHECK(keep.tracks().size() == 2);
    CHECK(keep.discarded_candidates() == 0);
    for (const auto& t : keep.tracks()) CHECK(t.retire_reason == RetireReason::missed);
}

TEST_CASE("tracking is deterministic", "[track][property]") {
    auto run = [] {
        std::mt19937_64 eng(11);
        std::uniform_real_distribution<double> ur(0.0, 600.0), uv(-20.0, 20.0);
        Tracker trk;
        for (std::int64_t f = 0; f < 200; ++f) {
            std::vector<Detection> dets;
            for (int k = 0; k < 30; ++k) dets.push_back(det_at(ur(eng), uv(eng)));
            dets.push_back(det_at(range_of(f, 300.0, 5.0), 5.0));
            trk.update(dets, f, f * kFrame);
        }
        std::ostringstream os;
        write_tracks_csv(os, trk.tracks());
        write_track_summary_csv(os, summarize(trk.tracks()));
        return os.str();
    };
    const auto a = run();
    CHECK(a == run());
    CHECK(a.rfind("track_id,state,frame_index,range_m,velocity_mps,sinr_db\n", 0) == 0);
    CHECK(a.find("track_id,final_state,retire_reason,created_frame,validated_frame,retired_frame,"
                 "validation_latency_frames,lifetime_frames,hits\n") != std::string::npos);
}

TEST_CASE("tracker configuration is validated", "[track]") {
    TrackerConfig cfg;
    cfg.gate_range_m = 0.0;
    CHECK_THROWS_AS(Tracker(cfg), ConfigError);
    cfg = {};
    cfg.validation_frames = 0;
    CHECK_THROWS_AS(Tracker(cfg), ConfigError);
    cfg = {};
    cfg.consistency_window = 1;
    CHECK_THROWS_AS(Tracker(cfg), ConfigError);
    CHECK(to_string(TrackState::valid) == "valid");
    CHECK(to_string(RetireReason::inconsistent) == "inconsistent");
}
