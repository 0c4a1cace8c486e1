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

#include "isac/harness.hpp"
#include "isac/keyvalue.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace isac {

std::string to_string(ClutterRemoval c) {
    switch (c) {
    case ClutterRemoval::none: return "none";
    case ClutterRemoval::eca_c: return "eca-c";
    case ClutterRemoval::crap: return "crap";
    }
    return "?";
}

ClutterRemoval parse_clutter_removal(const std::string& text) {
    if (text == "none") return ClutterRemoval::none;
    if (text == "eca-c" || text == "eca_c" || text == "ecac") return ClutterRemoval::eca_c;
    if (text == "crap") return ClutterRemoval::crap;
    throw ConfigError("unknown clutter removal '" + text + "' (expected none, eca-c or crap)");
}

void ChainConfig::validate() const {
    if (eca.doppler_bins < 0) throw ConfigError("chain: eca doppler_bins must be >= 0");
    if (eca.oversample < 1) throw ConfigError("chain: eca oversample must be >= 1");
    if (periodogram.pad_range < 1 || periodogram.pad_doppler < 1)
        throw ConfigError("chain: pad factors must be >= 1");
    cfar.validate();
    tracker.validate();
    if (!(truth_gate_m > 0.0)) throw ConfigError("chain: truth gate must be positive");
    if (max_frames && *max_frames < 0) throw ConfigError("chain: max_frames must be >= 0");
    if (clutter_map_stale_after < 0) throw ConfigError("chain: stale_after must be >= 0");
}

ChainConfig experiment1_chain() {
    ChainConfig c;
    c.clutter = ClutterRemoval::crap;
    c.cfar.pfa = 1e-6;
    return c;
}

ChainConfig experiment2_chain() {
    ChainConfig c;
    c.clutter = ClutterRemoval::eca_c;
    c.cfar.pfa = 1e-4; // long-range preset
    return c;
}

namespace {

CellPair parse_cell_pair(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos) {
        const int v = static_cast<int>(parse_number(text));
        return {v, v};
    }
    return {static_cast<int>(parse_number(text.substr(0, comma))),
            static_cast<int>(parse_number(text.substr(comma + 1)))};
}

} // namespace

ChainConfig read_chain_config(const KeyValueDocument& doc, ChainConfig c) {
    const auto* s = doc.first("chain");
    if (!s) return c;
    if (auto v = s->find("clutter")) c.clutter = parse_clutter_removal(*v);
    c.eca.doppler_bins = static_cast<int>(s->integer_or("eca_doppler_bins", c.eca.doppler_bins));
    c.eca.oversample = static_cast<int>(s->integer_or("eca_oversample", c.eca.oversample));
    c.clutter_map_stale_after = s->integer_or("stale_after", c.clutter_map_stale_after);
    c.periodogram.pad_range = static_cast<int>(s->integer_or("pad_range", c.periodogram.pad_range));
    c.periodogram.pad_doppler = static_cast<int>(s->integer_or("pad_doppler", c.periodogram.pad_doppler));
    if (auto v = s->find("window")) {
        if (*v == "rect") c.periodogram.window = Window::rect;
        else if (*v == "hann") c.periodogram.window = Window::hann;
        else throw ConfigError("chain: unknown window '" + *v + "'");
    }
    c.cfar.pfa = s->quantity_or("pfa", Dimension::ratio, c.cfar.pfa);
    if (auto v = s->find("train")) c.cfar.training = parse_cell_pair(*v);
    if (auto v = s->find("guard")) c.cfar.guard = parse_cell_pair(*v);
    if (auto v = s->find("cluster")) c.cfar.cluster_radius = parse_cell_pair(*v);
    if (auto v = s->find("sidelobe_margin")) {
        if (*v == "off") c.cfar.sidelobe_margin_db.reset();
        else c.cfar.sidelobe_margin_db = parse_number(*v);
    }
    c.replica_suppression = s->boolean_or("replica_suppression", c.replica_suppression);
    c.tracker.gate_range_m = s->quantity_or("gate_range", Dimension::length, c.tracker.gate_range_m);
    c.tracker.gate_velocity_mps = s->quantity_or("gate_velocity", Dimension::velocity, c.tracker.gate_velocity_mps);
    c.tracker.validation_frames = static_cast<int>(s->integer_or("validation_frames", c.tracker.validation_frames));
    c.tracker.max_misses = static_cast<int>(s->integer_or("max_misses", c.tracker.max_misses));
    c.tracker.consistency_window =
        static_cast<int>(s->integer_or("consistency_window", c.tracker.consistency_window));
    c.tracker.consistency_threshold_mps =
        s->quantity_or("consistency_threshold", Dimension::velocity, c.tracker.consistency_threshold_mps);
    if (s->has("max_frames")) c.max_frames = s->integer("max_frames");
    c.validate();
    return c;
}

// ---- frame processor ------------------------------------------------------

NoiseRegion noise_region_for(const std::vector<Detection>& dets, const NoiseFloorConfig& cfg,
                             const PeriodogramAxes& /*axes*/) {
    NoiseRegion region;
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (cfg.zero_doppler_halfwidth_mps > 0.0)
        region.exclude.push_back({-inf, inf, -cfg.zero_doppler_halfwidth_mps, cfg.zero_doppler_halfwidth_mps});
    for (const auto& d : dets)
        region.exclude.push_back({d.range_m - cfg.detection_halfwidth_m, d.range_m + cfg.detection_halfwidth_m,
                                  d.velocity_mps - cfg.detection_halfwidth_mps,
                                  d.velocity_mps + cfg.detection_halfwidth_mps});
    return region;
}

FrameProcessor::FrameProcessor(const Scenario& sc, ChainConfig cfg)
    : cfg_(std::move(cfg)),
      axes_(axes_for(sc, cfg_.periodogram)),
      gaps_(analyze_mask(sc.dl_mask, sc.symbol_duration_s(), sc.params.carrier_hz)),
      clutter_bands_(sc.clutter_bands),
      engine_(static_cast<std::size_t>(sc.params.subcarriers), static_cast<std::size_t>(sc.symbols_per_frame),
              cfg_.periodogram) {
    cfg_.validate();
}

void FrameProcessor::set_clutter_map(std::size_t beam, ClutterMap map) { maps_[beam] = std::move(map); }

FrameOutput FrameProcessor::process(const ChannelEstimate& ch, std::size_t beam) {
    FrameOutput out;
    ChannelEstimate cleaned;
    const ChannelEstimate* input = &ch;
    switch (cfg_.clutter) {
    case ClutterRemoval::none:
        break;
    case ClutterRemoval::eca_c:
        cleaned = eca_c_remove(ch, cfg_.eca);
        input = &cleaned;
        break;
    case ClutterRemoval::crap: {
        auto it = maps_.find(beam);
        if (it == maps_.end()) throw ConfigError("no clutter map acquired for beam " + std::to_string(beam));
        auto res = crap_remove(ch, it->second);
        out.stale_clutter_map = res.stale;
        cleaned = std::move(res.channel);
        input = &cleaned;
        break;
    }
    }

    engine_.compute(*input, axes_, periodogram_);
    auto dets = cfar_detect(periodogram_, cfg_.cfar);
    out.noise_floor = estimate_noise_floor(periodogram_, noise_region_for(dets, cfg_.noise_floor, axes_));
    if (out.noise_floor > 0.0) {
        annotate_sinr(dets, periodogram_);
    } else {
        // Noise-free synthesis: every peak is infinitely above the floor.
        for (auto& d : dets) d.sinr_db = std::numeric_limits<double>::infinity();
    }
    if (cfg_.replica_suppression) dets = suppress_tdd_replicas(std::move(dets), gaps_, axes_, cfg_.replica, &out.replicas);
    flag_clutter_bands(dets, clutter_bands_);
    flag_clutter_bands(out.replicas, clutter_bands_);
    out.detections = std::move(dets);
    return out;
}

// ---- replay ---------------------------------------------------------------

double quantile(std::vector<double> v, double q) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

ReplayResult replay(const Scenario& sc, const ChainConfig& cfg, const FrameCallback& on_frame) {
    sc.validate();
    cfg.validate();
    FrameProcessor proc(sc, cfg);

    if (cfg.clutter == ClutterRemoval::crap) {
        if (sc.acquisition_frames < 1) throw ConfigError("CRAP needs at least one acquisition frame per beam");
        const auto acq = static_cast<std::int64_t>(sc.acquisition_frames);
        const auto beams = static_cast<std::int64_t>(sc.beams.size());
        for (std::int64_t b = 0; b < beams; ++b) {
            ClutterAccumulator acc;
            for (std::int64_t i = 0; i < acq; ++i) {
                const std::int64_t idx = -beams * acq + b * acq + i;
                const auto fr = synthesize_frame(sc, idx, static_cast<std::size_t>(b));
                acc.add(estimate_channel(fr.tx, fr.rx));
            }
            proc.set_clutter_map(static_cast<std::size_t>(b), acc.finish(cfg.clutter_map_stale_after));
        }
    }

    ReplayResult run;
    Tracker tracker(cfg.tracker);
    std::int64_t frames = sc.frame_count();
    if (cfg.max_frames) frames = std::min(frames, *cfg.max_frames);
    for (std::int64_t f = 0; f < frames; ++f) {
        const auto fr = synthesize_frame(sc, f);
        const auto t0 = std::chrono::steady_clock::now();
        const auto ch = estimate_channel(fr.tx, fr.rx);
        auto out = proc.process(ch, sc.beam_index_at(f));
        const auto ids = tracker.update(out.detections, f, fr.rx.timestamp_s);
        const auto t1 = std::chrono::steady_clock::now();
        run.frame_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());

        run.truth.insert(run.truth.end(), fr.truth.begin(), fr.truth.end());
        for (std::size_t i = 0; i < out.detections.size(); ++i) {
            const Track* t = tracker.find(ids[i]);
            run.detections.push_back(out.detections[i]);
            run.detection_track.push_back(ids[i]);
            run.detection_valid.push_back(t && t->history.back().state == TrackState::valid ? 1 : 0);
        }
        run.replicas.insert(run.replicas.end(), out.replicas.begin(), out.replicas.end());
        if (out.stale_clutter_map) ++run.metrics.stale_map_frames;
        if (on_frame) on_frame(f, out, proc);
    }
    run.tracks = tracker.tracks();

    run.timing.frames = run.frame_ms.size();
    if (!run.frame_ms.empty()) {
        double sum = 0.0;
        for (double v : run.frame_ms) sum += v;
        run.timing.mean_ms = sum / static_cast<double>(run.frame_ms.size());
        run.timing.p50_ms = quantile(run.frame_ms, 0.5);
        run.timing.p95_ms = quantile(run.frame_ms, 0.95);
        run.timing.max_ms = *std::max_element(run.frame_ms.begin(), run.frame_ms.end());
    }
    const auto stale = run.metrics.stale_map_frames;
    run.metrics = compute_metrics(sc, cfg, run);
    run.metrics.stale_map_frames = stale;
    return run;
}

// ---- metrics --------------------------------------------------------------

namespace {

bool illuminated(const Scenario& sc, const TruthRecord& t, const RangeWindowModel& window) {
    const Beam& beam = sc.beams[sc.beam_index_at(t.frame_index)].beam;
    return std::abs(t.az_offset_deg) <= beam.hpbw_az_deg / 2.0 &&
           std::abs(t.el_offset_deg) <= beam.hpbw_el_deg / 2.0 && t.range_m > window.r_low_clamped() &&
           t.range_m < window.r_limit;
}

} // namespace

RunMetrics compute_metrics(const Scenario& sc, const ChainConfig& cfg, ReplayResult& run) {
    RunMetrics m;
    const auto window = range_window(sc.params);
    const double gate = cfg.truth_gate_m;
    const double vnorm = cfg.tracker.gate_velocity_mps;

    std::int64_t frames = 0;
    for (const auto& t : run.truth) frames = std::max(frames, t.frame_index + 1);
    for (const auto& d : run.detections) frames = std::max(frames, d.frame_index + 1);
    m.frames_processed = static_cast<std::size_t>(frames);

    // Index ranges per frame (both lists are in frame order).
    std::vector<std::size_t> det_begin(static_cast<std::size_t>(frames) + 1, run.detections.size());
    for (std::size_t i = run.detections.size(); i-- > 0;)
        det_begin[static_cast<std::size_t>(run.detections[i].frame_index)] = i;
    for (std::size_t f = static_cast<std::size_t>(frames); f-- > 0;)
        det_begin[f] = std::min(det_begin[f], det_begin[f + 1]);
    std::vector<std::vector<const TruthRecord*>> truth_at(static_cast<std::size_t>(frames));
    for (const auto& t : run.truth) truth_at[static_cast<std::size_t>(t.frame_index)].push_back(&t);

    run.matches.clear();
    for (const auto& t : run.truth) {
        if (!illuminated(sc, t, window)) continue;
        ++m.truth_frames;
        const auto f = static_cast<std::size_t>(t.frame_index);
        std::optional<std::size_t> best;
        double best_d = 0.0;
        for (std::size_t i = det_begin[f]; i < det_begin[f + 1]; ++i) {
            if (!run.detection_valid[i]) continue;
            const auto& d = run.detections[i];
            const double dr = std::abs(d.range_m - t.range_m);
            if (dr > gate) continue;
            const double dv = (d.velocity_mps - t.radial_velocity_mps) / vnorm;
            const double dist = (dr / gate) * (dr / gate) + dv * dv;
            if (!best || dist < best_d) {
                best = i;
                best_d = dist;
            }
        }
        if (!best) continue;
        const auto& d = run.detections[*best];
        run.matches.push_back({t.frame_index, t.target_id, run.detection_track[*best], t.range_m,
                               t.radial_velocity_mps, d.range_m, d.velocity_mps, d.sinr_db});
    }
    m.matched_frames = run.matches.size();
    m.detection_rate = m.truth_frames ? static_cast<double>(m.matched_frames) / m.truth_frames : 0.0;

    std::vector<double> err, verr;
    for (const auto& x : run.matches) {
        err.push_back(x.range_m - x.truth_range_m);
        verr.push_back(std::abs(x.velocity_mps - x.truth_velocity_mps));
    }
    if (!err.empty()) {
        m.range_bias_m = quantile(err, 0.5);
        std::vector<double> abs_err;
        for (double e : err) abs_err.push_back(std::abs(e - m.range_bias_m));
        m.range_error = {quantile(abs_err, 0.5), quantile(abs_err, 0.95)};
        m.velocity_error = {quantile(verr, 0.5), quantile(verr, 0.95)};
    }

    // SINR against the boresight model, corrected for the target's RCS.
    for (const auto& x : run.matches) {
        const TruthRecord* truth = nullptr;
        for (const auto* t : truth_at[static_cast<std::size_t>(x.frame_index)])
            if (t->target_id == x.target_id) truth = t;
        const Target* target = nullptr;
        for (const auto& tg : sc.targets)
            if (tg.id == x.target_id) target = &tg;
        if (!truth || !target) continue;
        try {
            const double model = expected_sinr_db(sc.params, truth->range_m, SinrModel::windowed) +
                                 linear_to_db(target->rcs_m2 / sc.params.rcs_m2);
            const Beam& beam = sc.beams[sc.beam_index_at(x.frame_index)].beam;
            const double pattern = beam_pattern(beam, truth->az_offset_deg, truth->el_offset_deg);
            m.sinr_curve.push_back({x.frame_index, truth->range_m, x.sinr_db, model, -2.0 * linear_to_db(pattern)});
        } catch (const OutOfWindowError&) {
        }
    }

    m.detections = run.detections.size();
    m.replicas_suppressed = run.replicas.size();
    double min_valid = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < run.detections.size(); ++i)
        if (run.detection_valid[i]) min_valid = std::min(min_valid, run.detections[i].sinr_db);
    m.min_valid_sinr_db = std::isfinite(min_valid) ? min_valid : 0.0;
    double min_matched = std::numeric_limits<double>::infinity();
    for (const auto& x : run.matches) min_matched = std::min(min_matched, x.sinr_db);
    m.min_matched_sinr_db = std::isfinite(min_matched) ? min_matched : 0.0;

    for (const auto& t : run.tracks) {
        if (!t.validated_frame) continue;
        ++m.valid_tracks;
        bool on_truth = false;
        for (const auto& p : t.history) {
            if (p.frame_index < 0 || p.frame_index >= frames) continue;
            for (const auto* tr : truth_at[static_cast<std::size_t>(p.frame_index)])
                if (std::abs(p.range_m - tr->range_m) <= gate) on_truth = true;
            if (on_truth) break;
        }
        if (!on_truth) ++m.false_track_count;
    }
    return m;
}

std::vector<std::string> check_metrics(const RunMetrics& m, const AcceptanceThresholds& t) {
    std::vector<std::string> out;
    auto fmt = [](double v) {
        std::ostringstream os;
        os << std::setprecision(4) << v;
        return os.str();
    };
    if (t.max_q50_m && !(m.range_error.q50 <= *t.max_q50_m))
        out.push_back("range error q50 " + fmt(m.range_error.q50) + " m > " + fmt(*t.max_q50_m) + " m");
    if (t.max_q95_m && !(m.range_error.q95 <= *t.max_q95_m))
        out.push_back("range error q95 " + fmt(m.range_error.q95) + " m > " + fmt(*t.max_q95_m) + " m");
    if (t.min_matched_sinr_db && !(m.min_matched_sinr_db >= *t.min_matched_sinr_db))
        out.push_back("lowest validated SINR " + fmt(m.min_matched_sinr_db) + " dB < " +
                      fmt(*t.min_matched_sinr_db) + " dB");
    if (t.min_detection_rate && !(m.detection_rate >= *t.min_detection_rate))
        out.push_back("detection rate " + fmt(m.detection_rate) + " < " + fmt(*t.min_detection_rate));
    if (m.matched_frames == 0 && (t.max_q50_m || t.max_q95_m || t.min_matched_sinr_db))
        out.push_back("no detection matched the ground truth");
    return out;
}

// ---- model report ---------------------------------------------------------

ModelReport model_report(const LinkBudgetParams& p) {
    p.validate();
    return {p, interference_psd(p), snr_at_unit_range(p), max_range(p)};
}

std::string format_model_report(const ModelReport& r) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(3);
    const auto& w = r.range.window;
    os << "r_star = " << r.range.r_star << " m\n"
       << "r_max = " << r.range.r_max << " m\n"
       << "branch = " << to_string(r.range.branch) << "\n"
       << "in_window = " << (r.range.in_window ? "true" : "false") << "\n"
       << "a = " << r.range.a << " m\n"
       << "r_sym = " << w.r_sym << " m\n"
       << "r_0 = " << w.r_0 << " m\n"
       << "r_cp = " << w.r_cp << " m\n"
       << "r_rx = " << w.r_rx << " m\n"
       << "r_low = " << w.r_low_clamped() << " m\n"
       << "r_limit = " << w.r_limit << " m\n"
       << "snr0 = " << linear_to_db(r.snr0) << " dB\n"
       << "psd_total = " << watts_to_dbm(r.psd.total) << " dBm/Hz\n"
       << "psd_thermal = " << watts_to_dbm(r.psd.thermal) << " dBm/Hz\n"
       << "psd_s3_tx = " << watts_to_dbm(r.psd.tx_intermod) << " dBm/Hz\n"
       << "psd_s3_rx = " << watts_to_dbm(r.psd.rx_intermod) << " dBm/Hz\n";
    return os.str();
}

} // namespace isac
