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

#include "isac/keyvalue.hpp"
#include "isac/scene.hpp"

#include <iomanip>
#include <sstream>

namespace isac {
namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

bool blank(const std::string& s) { return s.find_first_not_of(" \t") == std::string::npos; }

Trajectory parse_waypoints(const std::string& text) {
    std::vector<Waypoint> pts;
    for (const auto& item : split(text, ';')) {
        if (blank(item)) continue;
        auto f = split(item, ',');
        if (f.size() != 4) throw ParseError("waypoint must be 't,x,y,z': '" + item + "'");
        pts.push_back({parse_number(f[0]), {parse_number(f[1]), parse_number(f[2]), parse_number(f[3])}});
    }
    return Trajectory(std::move(pts));
}

std::string mask_pattern(const DlMask& mask) {
    std::ostringstream os;
    std::size_t i = 0;
    while (i < mask.size()) {
        std::size_t j = i;
        while (j < mask.size() && mask[j] == mask[i]) ++j;
        os << (j - i) << (mask[i] ? 'D' : 'U');
        i = j;
    }
    return os.str();
}

} // namespace

Scenario read_scenario(const KeyValueDocument& doc) {
    Scenario sc;
    if (const auto* lb = doc.first("linkbudget")) sc.params = read_link_budget(*lb);

    if (const auto* s = doc.first("scenario")) {
        sc.frame_duration_s = s->quantity_or("frame_duration", Dimension::time, sc.frame_duration_s);
        sc.symbols_per_frame = static_cast<int>(s->integer_or("symbols_per_frame", sc.symbols_per_frame));
        if (auto pat = s->find("dl_pattern")) sc.dl_mask = make_dl_mask(*pat, sc.symbols_per_frame);
        sc.duration_s = s->quantity_or("duration", Dimension::time, sc.duration_s);
        sc.rng_seed = static_cast<std::uint64_t>(s->integer_or("seed", static_cast<long long>(sc.rng_seed)));
        sc.acquisition_frames = static_cast<int>(s->integer_or("acquisition_frames", sc.acquisition_frames));
        sc.synthesis.noise = s->boolean_or("noise", true);
        sc.synthesis.leakage = s->boolean_or("leakage", true);
        sc.synthesis.clutter = s->boolean_or("clutter", true);
        sc.synthesis.targets = s->boolean_or("targets", true);
        if (auto bands = s->find("clutter_bands")) {
            for (const auto& b : split(*bands, ',')) {
                if (blank(b)) continue;
                auto lim = split(b, ':');
                if (lim.size() != 2) throw ParseError("clutter band must be 'lo:hi': '" + b + "'");
                sc.clutter_bands.emplace_back(parse_number(lim[0]), parse_number(lim[1]));
            }
        }
    }

    for (const auto* t : doc.all("target")) {
        Target target;
        target.id = static_cast<int>(t->integer("id"));
        target.rcs_m2 = t->quantity_or("rcs", Dimension::area, sc.params.rcs_m2);
        const auto model = t->find("rcs_model").value_or("constant");
        if (model == "constant") target.rcs_model = RcsModel::constant;
        else if (model == "exponential") target.rcs_model = RcsModel::exponential_fading;
        else throw ParseError("unknown rcs_model '" + model + "'");
        target.trajectory = parse_waypoints(t->text("waypoints"));
        sc.targets.push_back(std::move(target));
    }
    for (const auto* c : doc.all("clutter")) {
        ClutterObject obj;
        obj.range_m = c->quantity("range", Dimension::length);
        obj.coupling_loss = c->quantity("coupling_loss", Dimension::ratio);
        obj.doppler_hz = c->quantity_or("doppler", Dimension::frequency, 0.0);
        obj.phase_jitter_std = c->quantity_or("phase_jitter_std", Dimension::ratio, 0.0);
        sc.clutter.push_back(obj);
    }
    const auto beams = doc.all("beam");
    if (!beams.empty()) sc.beams.clear();
    for (const auto* b : beams) {
        BeamDwell bd;
        bd.beam.azimuth_deg = b->quantity_or("azimuth", Dimension::angle, 0.0);
        bd.beam.elevation_deg = b->quantity_or("elevation", Dimension::angle, 0.0);
        bd.beam.hpbw_az_deg = b->quantity_or("hpbw_az", Dimension::angle, bd.beam.hpbw_az_deg);
        bd.beam.hpbw_el_deg = b->quantity_or("hpbw_el", Dimension::angle, bd.beam.hpbw_el_deg);
        bd.beam.gain = b->quantity_or("gain", Dimension::ratio, sc.params.tx_gain);
        bd.dwell_s = b->quantity_or("dwell", Dimension::time, bd.dwell_s);
        sc.beams.push_back(bd);
    }
    if (beams.empty()) sc.beams.front().beam.gain = sc.params.tx_gain;
    sc.validate();
    return sc;
}

Scenario load_scenario(const std::string& path) { return read_scenario(KeyValueDocument::load(path)); }

std::string format_scenario(const Scenario& sc) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "[scenario]\n"
       << "frame_duration = " << sc.frame_duration_s << " s\n"
       << "symbols_per_frame = " << sc.symbols_per_frame << "\n"
       << "dl_pattern = " << mask_pattern(sc.dl_mask) << "\n"
       << "duration = " << sc.duration_s << " s\n"
       << "seed = " << sc.rng_seed << "\n"
       << "acquisition_frames = " << sc.acquisition_frames << "\n"
       << "noise = " << (sc.synthesis.noise ? "true" : "false") << "\n"
       << "leakage = " << (sc.synthesis.leakage ? "true" : "false") << "\n"
       << "clutter = " << (sc.synthesis.clutter ? "true" : "false") << "\n"
       << "targets = " << (sc.synthesis.targets ? "true" : "false") << "\n";
    if (!sc.clutter_bands.empty()) {
        os << "clutter_bands = ";
        for (std::size_t i = 0; i < sc.clutter_bands.size(); ++i)
            os << (i ? ", " : "") << sc.clutter_bands[i].first << ":" << sc.clutter_bands[i].second;
        os << "\n";
    }
    os << "\n[linkbudget]\n" << format_link_budget(sc.params);
    for (const auto& b : sc.beams) {
        os << "\n[beam]\n"
           << "azimuth = " << b.beam.azimuth_deg << " deg\n"
           << "elevation = " << b.beam.elevation_deg << " deg\n"
           << "hpbw_az = " << b.beam.hpbw_az_deg << " deg\n"
           << "hpbw_el = " << b.beam.hpbw_el_deg << " deg\n"
           << "gain = " << linear_to_db(b.beam.gain) << " dB\n"
           << "dwell = " << b.dwell_s << " s\n";
    }
    for (const auto& c : sc.clutter) {
        os << "\n[clutter]\n"
           << "range = " << c.range_m << " m\n"
           << "coupling_loss = " << linear_to_db(c.coupling_loss) << " dB\n"
           << "doppler = " << c.doppler_hz << " Hz\n"
           << "phase_jitter_std = " << c.phase_jitter_std << "\n";
    }
    for (const auto& t : sc.targets) {
        os << "\n[target]\n"
           << "id = " << t.id << "\n"
           << "rcs = " << linear_to_db(t.rcs_m2) << " dBsm\n"
           << "rcs_model = " << (t.rcs_model == RcsModel::constant ? "constant" : "exponential") << "\n"
           << "waypoints = ";
        for (std::size_t i = 0; i < t.trajectory.points().size(); ++i) {
            const auto& w = t.trajectory.points()[i];
            os << (i ? "; " : "") << w.time_s << "," << w.position.x << "," << w.position.y << ","
               << w.position.z;
        }
        os << "\n";
    }
    return os.str();
}

} // namespace isac
