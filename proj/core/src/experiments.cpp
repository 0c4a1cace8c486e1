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

// Desk-scale replicas of the two flight experiments. Numerology, N, M and the
// hardware link budget stay at their reference values so that bin sizes and
// expected SINR match the full-scale system; only flight duration shrinks.

#include "isac/scene.hpp"

#include <cmath>

namespace isac {
namespace {

constexpr double kDeg = kPi / 180.0;

Vec3 polar_xy(double range_m, double az_deg) {
    return {range_m * std::cos(az_deg * kDeg), range_m * std::sin(az_deg * kDeg), 0.0};
}

/// Motion along the straight line a -> b with piecewise constant acceleration.
/// Each leg runs for `duration` seconds and ramps the signed speed along the
/// line linearly from its start value to `speed_end`.
class LineMotion {
public:
    LineMotion(Vec3 a, Vec3 b, double start_offset_m, double start_speed)
        : a_(a), u_(start_offset_m), v_(start_speed) {
        const double dx = b.x - a.x, dy = b.y - a.y, dz = b.z - a.z;
        length_ = std::sqrt(dx * dx + dy * dy + dz * dz);
        dir_ = {dx / length_, dy / length_, dz / length_};
        emit();
    }

    double length() const { return length_; }
    double offset() const { return u_; }
    double speed() const { return v_; }

    void leg(double duration, double speed_end, double step = 0.05) {
        const int steps = std::max(1, static_cast<int>(std::ceil(duration / step - 1e-9)));
        const double dt = duration / steps;
        const double acc = (speed_end - v_) / duration;
        for (int i = 0; i < steps; ++i) {
            u_ += v_ * dt + 0.5 * acc * dt * dt;
            v_ += acc * dt;
            t_ += dt;
            emit();
        }
    }

    /// Constant-speed leg until the offset reaches `u_end`.
    void cruise_to(double u_end, double step = 0.05) {
        const double duration = (u_end - u_) / v_;
        leg(duration, v_, step);
    }

    /// Decelerates to rest exactly at `u_end` (constant deceleration).
    void stop_at(double u_end, double step = 0.05) {
        const double duration = 2.0 * (u_end - u_) / v_;
        leg(duration, 0.0, step);
    }

    Trajectory trajectory() const { return Trajectory(points_); }

private:
    void emit() {
        points_.push_back({t_, {a_.x + u_ * dir_.x, a_.y + u_ * dir_.y, a_.z + u_ * dir_.z}});
    }

    Vec3 a_;
    Vec3 dir_{};
    double length_ = 0.0;
    double u_;
    double v_;
    double t_ = 0.0;
    std::vector<Waypoint> points_;
};

} // namespace

Scenario make_experiment1_scenario() {
    Scenario sc;
    sc.params = LinkBudgetParams::reference();
    sc.rng_seed = 41;
    sc.duration_s = 6.0;
    sc.acquisition_frames = 100;

    // Six beams 12 deg apart, 50 ms each.
    sc.beams.clear();
    for (int i = 0; i < 6; ++i) {
        BeamDwell bd;
        bd.beam.azimuth_deg = -30.0 + 12.0 * i;
        bd.beam.gain = sc.params.tx_gain;
        bd.dwell_s = 0.05;
        sc.beams.push_back(bd);
    }

    // Inner-city clutter with mild per-frame phase jitter.
    const double jitter = kPi / 50.0;
    sc.clutter = {
        {40.0, db_to_linear(88.0), 0.0, jitter},
        {115.0, db_to_linear(95.0), 0.0, jitter},
        {190.0, db_to_linear(100.0), 0.0, jitter},
    };
    sc.params.coupling_loss_total = combined_coupling_loss(sc.clutter);

    // Closed loop: ellipse centred 55 m out, ranges between ~25 m and ~85 m.
    // The UAV hovers at the start point during clutter acquisition.
    Target uav;
    uav.id = 1;
    uav.rcs_m2 = db_to_linear(-17.0);
    std::vector<Waypoint> pts;
    const double period = 16.0;
    for (int i = 0; i <= 160; ++i) {
        const double t = period * i / 160.0;
        const double phi = 2.0 * kPi * t / period;
        pts.push_back({t, {55.0 + 30.0 * std::cos(phi), 25.0 * std::sin(phi), 0.0}});
    }
    uav.trajectory = Trajectory(std::move(pts));
    sc.targets.push_back(std::move(uav));
    sc.validate();
    return sc;
}

Scenario make_experiment2_scenario() {
    Scenario sc;
    sc.params = LinkBudgetParams::reference();
    sc.rng_seed = 42;
    sc.acquisition_frames = 100;

    BeamDwell fixed;
    fixed.beam.azimuth_deg = 0.0;
    fixed.beam.gain = sc.params.tx_gain;
    fixed.dwell_s = 0.05;
    sc.beams = {fixed};

    // Building band at 250-300 m plus the dominant reflector at 30 m; the
    // dominant loss is solved so that the total stays at 85 dB.
    const double total = db_to_linear(85.0);
    std::vector<ClutterObject> band;
    for (double r : {255.0, 266.0, 278.0, 289.0, 297.0}) band.push_back({r, db_to_linear(105.0), 0.0, 0.0});
    double inv = 1.0 / total;
    for (const auto& b : band) inv -= 1.0 / b.coupling_loss;
    sc.clutter.push_back({30.0, 1.0 / inv, 0.0, 0.0});
    sc.clutter.insert(sc.clutter.end(), band.begin(), band.end());
    sc.params.coupling_loss_total = combined_coupling_loss(sc.clutter);
    sc.clutter_bands = {{250.0, 300.0}};

    // Straight route from 250 m (7 deg off boresight, the beam edge) to 500 m
    // on boresight: approach, turn, depart, turn, approach.
    const Vec3 near_end = polar_xy(250.0, 7.0);
    const Vec3 far_end = polar_xy(500.0, 0.0);
    const double accel = 6.0;
    const double v_in = 12.0;
    const double v_out = 20.0;
    LineMotion m(near_end, far_end, 20.0, -v_in);
    m.cruise_to(v_in * v_in / (2.0 * accel));
    m.stop_at(0.0);
    m.leg(v_out / accel, v_out);
    m.cruise_to(m.length() - v_out * v_out / (2.0 * accel));
    m.stop_at(m.length());
    m.leg(v_in / accel, -v_in);

    Target uav;
    uav.id = 1;
    uav.rcs_m2 = db_to_linear(-17.0);
    uav.trajectory = m.trajectory();
    sc.duration_s = std::floor(uav.trajectory.end_time() / sc.frame_duration_s) * sc.frame_duration_s;
    sc.targets.push_back(std::move(uav));
    sc.validate();
    return sc;
}

} // namespace isac
