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

#include "isac/scene.hpp"

#include "isac/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace isac {
namespace {

double norm(const Vec3& v) { return std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z); }

double wrap_degrees(double deg) {
    deg = std::fmod(deg + 180.0, 360.0);
    if (deg < 0.0) deg += 360.0;
    return deg - 180.0;
}

// RNG stream ids; every (seed, frame, stream, object) tuple gets its own engine.
enum Stream : std::uint64_t { kPayload = 1, kNoise = 2, kJitter = 3, kFading = 4 };

struct TargetState {
    double range_m;
    double radial_velocity;
    double az_deg;
    double el_deg;
};

TargetState target_state(const Target& t, double time_s) {
    const Vec3 p = t.trajectory.position(time_s);
    const Vec3 v = t.trajectory.velocity(time_s);
    TargetState s{};
    s.range_m = norm(p);
    s.radial_velocity = s.range_m > 0.0 ? -(p.x * v.x + p.y * v.y + p.z * v.z) / s.range_m : 0.0;
    s.az_deg = std::atan2(p.y, p.x) * 180.0 / kPi;
    s.el_deg = std::atan2(p.z, std::hypot(p.x, p.y)) * 180.0 / kPi;
    return s;
}

} // namespace

// ---- trajectory -----------------------------------------------------------

Trajectory::Trajectory(std::vector<Waypoint> points) : points_(std::move(points)) {
    if (points_.empty()) throw ConfigError("trajectory needs at least one waypoint");
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const auto& w = points_[i];
        if (!std::isfinite(w.time_s) || !std::isfinite(w.position.x) ||
            !std::isfinite(w.position.y) || !std::isfinite(w.position.z))
            throw ConfigError("trajectory waypoint is not finite");
        if (i > 0 && !(w.time_s > points_[i - 1].time_s))
            throw ConfigError("trajectory waypoints must be strictly time-sorted");
    }
}

Vec3 Trajectory::position(double t) const {
    if (points_.empty()) return {};
    if (t <= points_.front().time_s) return points_.front().position;
    if (t >= points_.back().time_s) return points_.back().position;
    auto it = std::upper_bound(points_.begin(), points_.end(), t,
                               [](double v, const Waypoint& w) { return v < w.time_s; });
    const Waypoint& b = *it;
    const Waypoint& a = *(it - 1);
    const double f = (t - a.time_s) / (b.time_s - a.time_s);
    return {a.position.x + f * (b.position.x - a.position.x),
            a.position.y + f * (b.position.y - a.position.y),
            a.position.z + f * (b.position.z - a.position.z)};
}

Vec3 Trajectory::velocity(double t) const {
    if (points_.size() < 2 || t < points_.front().time_s || t >= points_.back().time_s) return {};
    auto it = std::upper_bound(points_.begin(), points_.end(), t,
                               [](double v, const Waypoint& w) { return v < w.time_s; });
    const Waypoint& b = *it;
    const Waypoint& a = *(it - 1);
    const double dt = b.time_s - a.time_s;
    return {(b.position.x - a.position.x) / dt, (b.position.y - a.position.y) / dt,
            (b.position.z - a.position.z) / dt};
}

// ---- beams, clutter, masks ------------------------------------------------

double combined_coupling_loss(const std::vector<ClutterObject>& clutter) {
    double inv = 0.0;
    for (const auto& c : clutter) inv += 1.0 / c.coupling_loss;
    return inv > 0.0 ? 1.0 / inv : std::numeric_limits<double>::infinity();
}

double beam_pattern(const Beam& beam, double az, double el) {
    const double k = 4.0 * std::log(2.0);
    const double ua = az / beam.hpbw_az_deg;
    const double ue = el / beam.hpbw_el_deg;
    return std::exp(-k * ua * ua) * std::exp(-k * ue * ue);
}

double beam_gain(const Beam& beam, double az, double el) { return beam.gain * beam_pattern(beam, az, el); }

DlMask make_dl_mask(const std::string& pattern, int symbols) {
    DlMask unit;
    std::size_t i = 0;
    while (i < pattern.size()) {
        if (std::isspace(static_cast<unsigned char>(pattern[i]))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < pattern.size() && std::isdigit(static_cast<unsigned char>(pattern[j]))) ++j;
        if (j == i || j >= pattern.size())
            throw ConfigError("bad DL pattern '" + pattern + "': expected <count><D|U>");
        const int count = std::stoi(pattern.substr(i, j - i));
        const char kind = pattern[j];
        if (kind != 'D' && kind != 'U')
            throw ConfigError("bad DL pattern '" + pattern + "': unknown symbol kind");
        unit.insert(unit.end(), static_cast<std::size_t>(count), kind == 'D' ? 1 : 0);
        i = j + 1;
    }
    if (unit.empty() || symbols <= 0 || symbols % static_cast<int>(unit.size()) != 0)
        throw ConfigError("DL pattern '" + pattern + "' does not tile " + std::to_string(symbols) +
                          " symbols");
    DlMask mask;
    mask.reserve(static_cast<std::size_t>(symbols));
    while (mask.size() < static_cast<std::size_t>(symbols)) mask.insert(mask.end(), unit.begin(), unit.end());
    return mask;
}

DlMask default_dl_mask() { return make_dl_mask("52D18U", 1120); }

// ---- scenario -------------------------------------------------------------

void Scenario::validate() const {
    params.validate();
    if (symbols_per_frame < 1) throw ConfigError("scenario: symbols_per_frame must be >= 1");
    if (dl_mask.size() != static_cast<std::size_t>(symbols_per_frame))
        throw ConfigError("scenario: dl_mask length differs from symbols_per_frame");
    if (count_dl(dl_mask) != static_cast<std::size_t>(params.symbols))
        throw ConfigError("scenario: dl_mask has " + std::to_string(count_dl(dl_mask)) +
                          " DL symbols but m_symbols = " + std::to_string(params.symbols));
    const double implied = symbols_per_frame * params.symbol_with_cp_s();
    if (std::abs(implied - frame_duration_s) > 1e-9 * frame_duration_s)
        throw ConfigError("scenario: symbols_per_frame * T0 = " + std::to_string(implied) +
                          " s does not match frame_duration");
    if (!(duration_s > 0.0)) throw ConfigError("scenario: duration must be positive");
    if (beams.empty()) throw ConfigError("scenario: at least one beam is required");
    for (const auto& b : beams) {
        if (!(b.dwell_s > 0.0)) throw ConfigError("scenario: beam dwell must be positive");
        if (!(b.beam.gain > 0.0) || !(b.beam.hpbw_az_deg > 0.0) || !(b.beam.hpbw_el_deg > 0.0))
            throw ConfigError("scenario: beam gain and HPBW must be positive");
        const double frames = b.dwell_s / frame_duration_s;
        if (std::abs(frames - std::round(frames)) > 1e-6)
            throw ConfigError("scenario: beam dwell must be a whole number of frames");
    }
    for (const auto& c : clutter) {
        if (!(c.coupling_loss > 0.0) || !(c.range_m >= 0.0) || !(c.phase_jitter_std >= 0.0))
            throw ConfigError("scenario: invalid clutter object");
    }
    for (const auto& t : targets) {
        if (t.trajectory.points().empty()) throw ConfigError("scenario: target without trajectory");
        if (!(t.rcs_m2 > 0.0)) throw ConfigError("scenario: target RCS must be positive");
    }
    if (acquisition_frames < 0) throw ConfigError("scenario: acquisition_frames must be >= 0");
}

std::int64_t Scenario::frame_count() const {
    return static_cast<std::int64_t>(std::floor(duration_s / frame_duration_s + 1e-9));
}

double Scenario::sweep_period_s() const {
    double total = 0.0;
    for (const auto& b : beams) total += b.dwell_s;
    return total;
}

std::size_t Scenario::beam_index_at(std::int64_t frame_index) const {
    if (beams.size() == 1) return 0;
    std::int64_t period = 0;
    std::vector<std::int64_t> frames;
    for (const auto& b : beams) {
        frames.push_back(static_cast<std::int64_t>(std::llround(b.dwell_s / frame_duration_s)));
        period += frames.back();
    }
    std::int64_t pos = frame_index % period;
    if (pos < 0) pos += period;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (pos < frames[i]) return i;
        pos -= frames[i];
    }
    return frames.size() - 1;
}

double target_amplitude(const LinkBudgetParams& p, double range_m, double rcs_m2) {
    const double lambda = p.wavelength_m();
    const double power = p.tx_power_w / p.subcarriers * p.tx_gain * p.rx_gain * lambda * lambda *
                         rcs_m2 / (std::pow(4.0 * kPi, 3) * std::pow(range_m, 4));
    return std::sqrt(power);
}

std::vector<TruthRecord> ground_truth(const Scenario& sc, std::int64_t frame_index,
                                      std::optional<std::size_t> beam_override) {
    const std::size_t bi = beam_override.value_or(sc.beam_index_at(frame_index));
    const Beam& beam = sc.beams.at(bi).beam;
    const double t = frame_index * sc.frame_duration_s;
    std::vector<TruthRecord> out;
    out.reserve(sc.targets.size());
    for (const auto& target : sc.targets) {
        const auto s = target_state(target, t);
        out.push_back({frame_index, t, target.id, s.range_m, s.radial_velocity,
                       wrap_degrees(s.az_deg - beam.azimuth_deg), s.el_deg - beam.elevation_deg});
    }
    return out;
}

SynthesizedFrame synthesize_frame(const Scenario& sc, std::int64_t frame_index,
                                  std::optional<std::size_t> beam_override) {
    if (frame_index >= sc.frame_count() ||
        frame_index < -static_cast<std::int64_t>(sc.acquisition_frames) *
                           static_cast<std::int64_t>(sc.beams.size()))
        throw ConfigError("synthesize_frame: frame index " + std::to_string(frame_index) +
                          " outside the scenario");
    const std::size_t bi = beam_override.value_or(sc.beam_index_at(frame_index));
    if (bi >= sc.beams.size()) throw ConfigError("synthesize_frame: beam index out of range");
    const Beam& beam = sc.beams[bi].beam;
    const auto& p = sc.params;
    const std::size_t n_sc = static_cast<std::size_t>(p.subcarriers);
    const std::size_t n_sym = static_cast<std::size_t>(sc.symbols_per_frame);
    const double t0 = sc.symbol_duration_s();
    const double df = p.subcarrier_spacing_hz;
    const auto window = range_window(p);

    SynthesizedFrame out;
    out.truth = ground_truth(sc, frame_index, bi);
    const double timestamp = frame_index * sc.frame_duration_s;

    // Rank-1 components: amplitude * range steering(n) * slow-time phasor(m).
    struct Component {
        std::vector<Complex> range;
        std::vector<Complex> slow;
    };
    std::vector<Component> comps;

    auto add_component = [&](Complex amplitude, double range_m, double doppler_hz) {
        Component c;
        c.range.resize(n_sc);
        c.slow.assign(n_sym, Complex{});
        const double tau = 2.0 * range_m / kSpeedOfLight;
        for (std::size_t n = 0; n < n_sc; ++n)
            c.range[n] = amplitude * std::polar(1.0, -2.0 * kPi * static_cast<double>(n) * df * tau);
        for (std::size_t m = 0; m < n_sym; ++m)
            if (sc.dl_mask[m])
                c.slow[m] = std::polar(1.0, 2.0 * kPi * doppler_hz * static_cast<double>(m) * t0);
        comps.push_back(std::move(c));
    };
    auto carrier_phase = [&](double range_m) {
        return std::polar(1.0, -4.0 * kPi * p.carrier_hz * range_m / kSpeedOfLight);
    };

    if (sc.synthesis.targets) {
        for (std::size_t k = 0; k < sc.targets.size(); ++k) {
            const auto& target = sc.targets[k];
            const auto& truth = out.truth[k];
            const double w = window.overlap(truth.range_m);
            if (w <= 0.0 || truth.range_m <= 0.0) continue;
            double rcs = target.rcs_m2;
            if (target.rcs_model == RcsModel::exponential_fading) {
                auto eng = make_engine(sc.rng_seed, frame_index, kFading, static_cast<std::uint64_t>(target.id));
                rcs *= std::exponential_distribution<double>(1.0)(eng);
            }
            const double pattern = beam_pattern(beam, truth.az_offset_deg, truth.el_offset_deg);
            // Two-way pattern in power is pattern^2, hence pattern in amplitude.
            const double amp = target_amplitude(p, truth.range_m, rcs) * pattern * w;
            const double doppler = 2.0 * truth.radial_velocity_mps * p.carrier_hz / kSpeedOfLight;
            add_component(amp * carrier_phase(truth.range_m), truth.range_m, doppler);
        }
    }
    if (sc.synthesis.clutter) {
        for (std::size_t k = 0; k < sc.clutter.size(); ++k) {
            const auto& c = sc.clutter[k];
            const double w = window.overlap(c.range_m);
            if (w <= 0.0) continue;
            Complex phase = carrier_phase(c.range_m);
            if (c.phase_jitter_std > 0.0) {
                auto eng = make_engine(sc.rng_seed, frame_index, kJitter, k);
                phase *= std::polar(1.0, c.phase_jitter_std * standard_normal(eng));
            }
            const double amp = std::sqrt(p.tx_power_w / (c.coupling_loss * p.subcarriers)) * w;
            add_component(amp * phase, c.range_m, c.doppler_hz);
        }
    }
    const Complex leakage = sc.synthesis.leakage
                                ? Complex(std::sqrt(p.tx_power_w / (p.isolation * p.subcarriers)), 0.0)
                                : Complex{};

    // Payload: unit-modulus QPSK on DL symbols.
    out.tx.grid = ComplexGrid(n_sc, n_sym);
    out.tx.dl_mask = sc.dl_mask;
    out.tx.frame_index = frame_index;
    out.tx.timestamp_s = timestamp;
    {
        auto eng = make_engine(sc.rng_seed, frame_index, kPayload, 0);
        static const Complex kQpsk[4] = {Complex(M_SQRT1_2, M_SQRT1_2), Complex(-M_SQRT1_2, M_SQRT1_2),
                                         Complex(-M_SQRT1_2, -M_SQRT1_2), Complex(M_SQRT1_2, -M_SQRT1_2)};
        std::uint64_t bits = 0;
        int left = 0;
        for (std::size_t n = 0; n < n_sc; ++n) {
            auto row = out.tx.grid.row(n);
            for (std::size_t m = 0; m < n_sym; ++m) {
                if (!sc.dl_mask[m]) continue;
                if (left == 0) {
                    bits = eng();
                    left = 32;
                }
                row[m] = kQpsk[bits & 3u];
                bits >>= 2;
                --left;
            }
        }
    }

    out.rx.grid = ComplexGrid(n_sc, n_sym);
    out.rx.dl_mask = sc.dl_mask;
    out.rx.frame_index = frame_index;
    out.rx.timestamp_s = timestamp;

    const double noise_sigma =
        sc.synthesis.noise ? std::sqrt(interference_psd(p).total * df / 2.0) : 0.0;
    auto noise_eng = make_engine(sc.rng_seed, frame_index, kNoise, 0);
    NormalSource normal;
    for (std::size_t n = 0; n < n_sc; ++n) {
        auto tx = out.tx.grid.row(n);
        auto rx = out.rx.grid.row(n);
        for (std::size_t m = 0; m < n_sym; ++m) {
            if (!sc.dl_mask[m]) continue; // acquisition hole: stays exactly zero
            Complex h = leakage;
            for (const auto& c : comps) h += c.range[n] * c.slow[m];
            Complex v = h * tx[m];
            if (noise_sigma > 0.0) {
                const double re = normal(noise_eng);
                const double im = normal(noise_eng);
                v += Complex(noise_sigma * re, noise_sigma * im);
            }
            rx[m] = v;
        }
    }
    return out;
}

} // namespace isac
