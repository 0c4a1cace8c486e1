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

// isac_cli: link budget, synthesis, per-frame processing and scenario replay.

#include "isac/artifacts.hpp"
#include "isac/harness.hpp"
#include "isac/keyvalue.hpp"

#include <CLI11.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace isac;

namespace {

struct Common {
    std::string config;
    int experiment = 0;
    std::optional<std::uint64_t> seed;
    std::string clutter;
    std::string out = ".";
    bool check = false;
};

struct DetectOptions {
    std::optional<double> pfa;
    std::string train;
    std::string guard;
    bool no_replica_suppression = false;
};

CellPair parse_pair(const std::string& text, const char* what) {
    const auto comma = text.find(',');
    if (comma == std::string::npos) throw ConfigError(std::string(what) + " expects 'range,doppler', got '" + text + "'");
    return {static_cast<int>(parse_number(text.substr(0, comma))),
            static_cast<int>(parse_number(text.substr(comma + 1)))};
}

void add_common(CLI::App* app, Common& c, bool with_check = true) {
    app->add_option("--config", c.config, "Key-value configuration file");
    app->add_option("--experiment", c.experiment, "Built-in scenario (1 or 2) used as the base")
        ->check(CLI::IsMember({1, 2}));
    app->add_option("--seed", c.seed, "Override the scenario RNG seed");
    app->add_option("--clutter", c.clutter, "Clutter removal: eca-c, crap or none")
        ->check(CLI::IsMember({"eca-c", "crap", "none"}));
    app->add_option("--out", c.out, "Output directory");
    if (with_check) app->add_flag("--check", c.check, "Exit nonzero when an acceptance threshold is violated");
}

void add_detect(CLI::App* app, DetectOptions& d) {
    app->add_option("--pfa", d.pfa, "CFAR false-alarm probability");
    app->add_option("--train", d.train, "CFAR training cells per side, 'range,doppler'");
    app->add_option("--guard", d.guard, "CFAR guard cells per side, 'range,doppler'");
    app->add_flag("--no-replica-suppression", d.no_replica_suppression, "Keep TDD Doppler replicas");
}

std::optional<KeyValueDocument> load_doc(const Common& c) {
    if (c.config.empty()) return std::nullopt;
    return KeyValueDocument::load(c.config);
}

Scenario scenario_for(const Common& c, const std::optional<KeyValueDocument>& doc) {
    Scenario sc;
    if (doc) sc = read_scenario(*doc);
    else if (c.experiment == 1) sc = make_experiment1_scenario();
    else if (c.experiment == 2) sc = make_experiment2_scenario();
    if (c.seed) sc.rng_seed = *c.seed;
    sc.validate();
    return sc;
}

ChainConfig chain_for(const Common& c, const DetectOptions& d, const std::optional<KeyValueDocument>& doc) {
    ChainConfig cfg = c.experiment == 1 ? experiment1_chain() : c.experiment == 2 ? experiment2_chain() : ChainConfig{};
    if (doc) cfg = read_chain_config(*doc, cfg);
    if (!c.clutter.empty()) cfg.clutter = parse_clutter_removal(c.clutter);
    if (d.pfa) cfg.cfar.pfa = *d.pfa;
    if (!d.train.empty()) cfg.cfar.training = parse_pair(d.train, "--train");
    if (!d.guard.empty()) cfg.cfar.guard = parse_pair(d.guard, "--guard");
    if (d.no_replica_suppression) cfg.replica_suppression = false;
    cfg.validate();
    return cfg;
}

LinkBudgetParams params_for(const Common& c, const std::optional<KeyValueDocument>& doc) {
    if (doc) {
        if (const auto* s = doc->first("linkbudget")) return read_link_budget(*s);
        if (const auto* s = doc->first("")) return read_link_budget(*s);
    }
    if (c.experiment) return scenario_for(c, doc).params;
    return LinkBudgetParams::reference();
}

std::ofstream open_out(const Common& c, const std::string& name) {
    fs::create_directories(c.out);
    const auto path = fs::path(c.out) / name;
    std::ofstream os(path);
    if (!os) throw Error("cannot write '" + path.string() + "'");
    return os;
}

/// "start:stop:step" in metres.
std::array<double, 3> parse_sweep(const std::string& text) {
    std::array<double, 3> v{};
    std::size_t pos = 0;
    for (int i = 0; i < 3; ++i) {
        const auto next = text.find(':', pos);
        if ((i < 2) != (next != std::string::npos)) throw ConfigError("--sweep-range expects start:stop:step");
        v[static_cast<std::size_t>(i)] = parse_quantity(text.substr(pos, next - pos), Dimension::length);
        pos = next + 1;
    }
    return v;
}

// ---- subcommands ----------------------------------------------------------

int run_linkbudget(const Common& c) {
    const auto doc = load_doc(c);
    const auto p = params_for(c, doc);
    const auto r = max_range(p);
    std::cout << format_link_budget(p) << "\n";
    std::cout << "r_max = " << r.r_max << " m (" << to_string(r.branch) << ")\n";
    if (c.check && !r.in_window) {
        std::cerr << "check failed: r_max lies outside the receive window\n";
        return 2;
    }
    return 0;
}

int run_report(const Common& c, const std::string& sweep) {
    const auto doc = load_doc(c);
    const auto report = model_report(params_for(c, doc));
    std::cout << format_model_report(report);
    const auto [start, stop, step] = parse_sweep(sweep.empty() ? "1:1400:1" : sweep);
    auto os = open_out(c, "sinr_curves.csv");
    write_sinr_curves_csv(os, report.params, start, stop, step);
    std::cout << "curves = " << (fs::path(c.out) / "sinr_curves.csv").string() << "\n";
    if (c.check && !report.range.in_window) return 2;
    return 0;
}

int run_simulate(const Common& c, std::int64_t frames, bool preroll) {
    const auto doc = load_doc(c);
    const auto sc = scenario_for(c, doc);
    fs::create_directories(c.out);
    FrameDumpWriter dump((fs::path(c.out) / "frames.isacfrm").string(), dump_header_for(sc));
    std::vector<TruthRecord> truth;
    if (preroll) {
        const auto beams = static_cast<std::int64_t>(sc.beams.size());
        const std::int64_t acq = sc.acquisition_frames;
        for (std::int64_t b = 0; b < beams; ++b)
            for (std::int64_t i = 0; i < acq; ++i) {
                const std::int64_t f = -beams * acq + b * acq + i;
                const auto fr = synthesize_frame(sc, f, static_cast<std::size_t>(b));
                dump.write(f, static_cast<std::uint32_t>(b), fr.tx, fr.rx);
            }
    }
    frames = std::min(frames, sc.frame_count());
    for (std::int64_t f = 0; f < frames; ++f) {
        const auto fr = synthesize_frame(sc, f);
        dump.write(f, static_cast<std::uint32_t>(sc.beam_index_at(f)), fr.tx, fr.rx);
        truth.insert(truth.end(), fr.truth.begin(), fr.truth.end());
    }
    auto os = open_out(c, "truth.csv");
    write_truth_csv(os, truth);
    auto sos = open_out(c, "scenario.conf");
    sos << format_scenario(sc);
    std::cout << "wrote " << frames << " frames to " << (fs::path(c.out) / "frames.isacfrm").string() << "\n";
    return 0;
}

/// Scenario carrying the numerology of a frame dump (for axes and masks).
Scenario scenario_from_dump(const FrameDumpHeader& h, const Scenario& base) {
    Scenario sc = base;
    sc.params.subcarriers = static_cast<int>(h.subcarriers);
    sc.params.carrier_hz = h.carrier_hz;
    sc.params.subcarrier_spacing_hz = h.subcarrier_spacing_hz;
    sc.params.cp_fraction = h.cp_fraction;
    sc.symbols_per_frame = static_cast<int>(h.symbols);
    sc.dl_mask = h.dl_mask;
    sc.params.symbols = static_cast<int>(count_dl(h.dl_mask));
    return sc;
}

/// process: periodograms and noise floors; detect: adds CFAR and replica
/// suppression. Pre-roll records (negative frame index) feed CRAP maps.
int run_dump(const Common& c, const DetectOptions& d, const std::string& input, bool detect,
             std::optional<double> max_range_m) {
    const auto doc = load_doc(c);
    auto cfg = chain_for(c, d, doc);
    FrameDumpReader reader(input);
    const auto sc = scenario_from_dump(reader.header(), doc ? read_scenario(*doc) : Scenario{});
    FrameProcessor proc(sc, cfg);
    std::map<std::uint32_t, ClutterAccumulator> acquisition;
    std::vector<Detection> dets, replicas;
    auto floors = open_out(c, "noise_floor.csv");
    floors << "frame_index,noise_floor,noise_floor_db\n";
    std::size_t processed = 0;
    while (auto rec = reader.next()) {
        const auto ch = estimate_channel(rec->tx, rec->rx);
        if (rec->frame_index < 0) {
            acquisition[rec->beam_index].add(ch);
            continue;
        }
        if (cfg.clutter == ClutterRemoval::crap && !proc.has_clutter_map(rec->beam_index)) {
            auto it = acquisition.find(rec->beam_index);
            if (it == acquisition.end())
                throw ConfigError("crap needs pre-roll frames for beam " + std::to_string(rec->beam_index) +
                                  " (simulate --preroll)");
            proc.set_clutter_map(rec->beam_index, it->second.finish(cfg.clutter_map_stale_after));
        }
        auto out = proc.process(ch, rec->beam_index);
        floors << rec->frame_index << ',' << out.noise_floor << ','
               << (out.noise_floor > 0.0 ? linear_to_db(out.noise_floor) : -400.0) << '\n';
        if (detect) {
            dets.insert(dets.end(), out.detections.begin(), out.detections.end());
            replicas.insert(replicas.end(), out.replicas.begin(), out.replicas.end());
        } else {
            auto os = open_out(c, "periodogram_" + std::to_string(rec->frame_index) + ".csv");
            write_periodogram_csv(os, proc.last_periodogram(), max_range_m);
        }
        ++processed;
    }
    if (detect) {
        auto os = open_out(c, "detections.csv");
        write_detections_csv(os, dets);
        auto ro = open_out(c, "replicas.csv");
        write_detections_csv(ro, replicas);
        std::cout << "frames = " << processed << "\ndetections = " << dets.size()
                  << "\nreplicas_suppressed = " << replicas.size() << "\n";
    } else {
        std::cout << "frames = " << processed << "\n";
    }
    return 0;
}

AcceptanceThresholds thresholds_for(int experiment, const std::optional<KeyValueDocument>& doc) {
    AcceptanceThresholds t;
    if (experiment == 1) {
        t.max_q50_m = 0.15;
    } else if (experiment == 2) {
        t.max_q50_m = 0.30;
        t.max_q95_m = 0.9;
        t.min_matched_sinr_db = 7.0;
    }
    if (doc) {
        if (const auto* s = doc->first("acceptance")) {
            if (s->has("max_q50")) t.max_q50_m = s->quantity("max_q50", Dimension::length);
            if (s->has("max_q95")) t.max_q95_m = s->quantity("max_q95", Dimension::length);
            if (s->has("min_sinr")) t.min_matched_sinr_db = parse_number(s->text("min_sinr"));
            if (s->has("min_detection_rate")) t.min_detection_rate = parse_number(s->text("min_detection_rate"));
        }
    }
    return t;
}

int run_replay(const Common& c, const DetectOptions& d, std::optional<std::int64_t> max_frames, bool quiet) {
    const auto doc = load_doc(c);
    const auto sc = scenario_for(c, doc);
    auto cfg = chain_for(c, d, doc);
    if (max_frames) cfg.max_frames = *max_frames;
    const auto total = cfg.max_frames ? std::min(*cfg.max_frames, sc.frame_count()) : sc.frame_count();

    auto run = replay(sc, cfg, [&](std::int64_t f, const FrameOutput& out, const FrameProcessor&) {
        if (!quiet && (f % 100 == 0 || f + 1 == total))
            std::fprintf(stderr, "frame %lld/%lld  detections %zu\n", static_cast<long long>(f + 1),
                         static_cast<long long>(total), out.detections.size());
    });
    const auto& m = run.metrics;

    { auto os = open_out(c, "truth.csv"); write_truth_csv(os, run.truth); }
    { auto os = open_out(c, "detections.csv"); write_detections_csv(os, run.detections); }
    { auto os = open_out(c, "replicas.csv"); write_detections_csv(os, run.replicas); }
    { auto os = open_out(c, "tracks.csv"); write_tracks_csv(os, run.tracks); }
    { auto os = open_out(c, "track_summary.csv"); write_track_summary_csv(os, summarize(run.tracks)); }
    { auto os = open_out(c, "sinr_points.csv"); write_sinr_points_csv(os, m.sinr_curve); }
    { auto os = open_out(c, "metrics.json"); os << metrics_json(m); }
    { auto os = open_out(c, "timing.json"); os << timing_json(run.timing); }

    std::cout << "frames = " << m.frames_processed << "\n"
              << "detection_rate = " << m.detection_rate << "\n"
              << "range_bias_m = " << m.range_bias_m << "\n"
              << "range_error_q50_m = " << m.range_error.q50 << "\n"
              << "range_error_q95_m = " << m.range_error.q95 << "\n"
              << "valid_tracks = " << m.valid_tracks << "\n"
              << "false_tracks = " << m.false_track_count << "\n"
              << "min_matched_sinr_db = " << m.min_matched_sinr_db << "\n"
              << "mean_frame_ms = " << run.timing.mean_ms << "\n";

    if (c.check) {
        const auto violations = check_metrics(m, thresholds_for(c.experiment, doc));
        for (const auto& v : violations) std::cerr << "check failed: " << v << "\n";
        if (!violations.empty()) return 2;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"OFDM radar sensing chain and link-budget toolkit"};
    app.require_subcommand(1);

    Common c;
    DetectOptions d;
    std::string sweep;
    std::int64_t frames = 1;
    bool preroll = false;
    std::string input;
    std::optional<double> max_range_m = 600.0;
    std::optional<std::int64_t> max_frames;
    bool quiet = false;

    auto* lb = app.add_subcommand("linkbudget", "Print the link budget and maximum range");
    add_common(lb, c);

    auto* rep = app.add_subcommand("report", "Model report and SINR-vs-range curves");
    add_common(rep, c);
    rep->add_option("--sweep-range", sweep, "start:stop:step for the curves (default 1:1400:1 m)");

    auto* sim = app.add_subcommand("simulate", "Synthesise frames into a raw frame dump");
    add_common(sim, c, false);
    sim->add_option("--frames", frames, "Number of frames (default 1)");
    sim->add_flag("--preroll", preroll, "Also write the clutter-acquisition frames");

    auto* proc = app.add_subcommand("process", "Clutter removal and periodograms from a frame dump");
    add_common(proc, c, false);
    proc->add_option("--input", input, "Frame dump written by simulate")->required();
    proc->add_option("--max-range", max_range_m, "Periodogram CSV range limit in metres");

    auto* det = app.add_subcommand("detect", "CFAR detection from a frame dump");
    add_common(det, c, false);
    add_detect(det, d);
    det->add_option("--input", input, "Frame dump written by simulate")->required();

    auto* rp = app.add_subcommand("replay", "Synthesise and process a whole scenario with tracking");
    add_common(rp, c);
    add_detect(rp, d);
    rp->add_option("--max-frames", max_frames, "Stop after this many frames");
    rp->add_flag("--quiet", quiet, "No progress output");

    CLI11_PARSE(app, argc, argv);

    try {
        if (lb->parsed()) return run_linkbudget(c);
        if (rep->parsed()) return run_report(c, sweep);
        if (sim->parsed()) return run_simulate(c, frames, preroll);
        if (proc->parsed()) return run_dump(c, d, input, false, max_range_m);
        if (det->parsed()) return run_dump(c, d, input, true, std::nullopt);
        if (rp->parsed()) return run_replay(c, d, max_frames, quiet);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
