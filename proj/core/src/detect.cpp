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

#include "isac/detect.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>

namespace isac {

// ---- configuration --------------------------------------------------------

void CfarConfig::validate() const {
    if (!(pfa > 0.0 && pfa < 1.0)) throw ConfigError("CFAR pfa must lie in (0, 1)");
    if (training.range < 0 || training.doppler < 0 || guard.range < 0 || guard.doppler < 0)
        throw ConfigError("CFAR training and guard sizes must be >= 0");
    if (training.range < 1 && training.doppler < 1)
        throw ConfigError("CFAR needs at least one training cell per side");
    if (cluster_radius.range < 0 || cluster_radius.doppler < 0)
        throw ConfigError("CFAR cluster radius must be >= 0");
}

std::size_t CfarConfig::training_cell_count() const {
    const auto outer = static_cast<std::size_t>(2 * (training.range + guard.range) + 1) *
                       static_cast<std::size_t>(2 * (training.doppler + guard.doppler) + 1);
    const auto inner = static_cast<std::size_t>(2 * guard.range + 1) * static_cast<std::size_t>(2 * guard.doppler + 1);
    return outer - inner;
}

double CfarConfig::threshold_factor() const {
    const double n = static_cast<double>(training_cell_count());
    return n * (std::pow(pfa, -1.0 / n) - 1.0);
}

// ---- box sums -------------------------------------------------------------

namespace {

// Re-anchoring interval for running sums; bounds the accumulated rounding.
constexpr std::size_t kAnchor = 128;

std::size_t wrap_index(std::ptrdiff_t i, std::size_t n) {
    const auto m = static_cast<std::ptrdiff_t>(n);
    i %= m;
    return static_cast<std::size_t>(i < 0 ? i + m : i);
}

/// Toroidal running sum along one row: dst[c] = sum of src over [c - h, c + h].
void row_box_sum(std::span<const double> src, std::size_t h, std::vector<double>& ext, std::span<double> dst) {
    const std::size_t cols = src.size();
    ext.resize(cols + 2 * h);
    for (std::size_t i = 0; i < h; ++i) {
        ext[i] = src[wrap_index(static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(h), cols)];
        ext[cols + h + i] = src[i % cols];
    }
    std::copy(src.begin(), src.end(), ext.begin() + static_cast<std::ptrdiff_t>(h));
    const std::size_t w = 2 * h + 1;
    double s = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
        if (c % kAnchor == 0) {
            s = 0.0;
            for (std::size_t i = 0; i < w; ++i) s += ext[c + i];
        } else {
            s += ext[c + w - 1] - ext[c - 1];
        }
        dst[c] = s;
    }
}

/// Running column sums of `rows_in` over a toroidal window of half-height h,
/// advanced one row at a time.
class ColumnWindow {
public:
    ColumnWindow(const PowerGrid& rows_in, int h) : in_(rows_in), h_(h), acc_(rows_in.cols()) {}

    const std::vector<double>& at(std::size_t r) {
        const std::size_t rows = in_.rows();
        if (r % kAnchor == 0) {
            std::fill(acc_.begin(), acc_.end(), 0.0);
            for (int i = -h_; i <= h_; ++i) add(in_.row(wrap_index(static_cast<std::ptrdiff_t>(r) + i, rows)));
        } else {
            auto plus = in_.row(wrap_index(static_cast<std::ptrdiff_t>(r) + h_, rows));
            auto minus = in_.row(wrap_index(static_cast<std::ptrdiff_t>(r) - h_ - 1, rows));
            for (std::size_t c = 0; c < acc_.size(); ++c) acc_[c] += plus[c] - minus[c];
        }
        return acc_;
    }

private:
    void add(std::span<const double> row) {
        for (std::size_t c = 0; c < acc_.size(); ++c) acc_[c] += row[c];
    }

    const PowerGrid& in_;
    int h_;
    std::vector<double> acc_;
};

struct CfarScratch {
    PowerGrid outer_rows; ///< Doppler box sums over guard + training
    PowerGrid inner_rows; ///< Doppler box sums over guard
    std::vector<double> ext;
};

CfarScratch& scratch() {
    thread_local CfarScratch s;
    return s;
}

void check_fits(const Periodogram& p, const CfarConfig& cfg) {
    cfg.validate();
    const auto wr = static_cast<std::size_t>(2 * (cfg.training.range + cfg.guard.range) + 1);
    const auto wd = static_cast<std::size_t>(2 * (cfg.training.doppler + cfg.guard.doppler) + 1);
    if (wr > p.power.rows() || wd > p.power.cols())
        throw ConfigError("CFAR window (" + std::to_string(wr) + " x " + std::to_string(wd) +
                          ") does not fit inside the periodogram");
}

/// Calls f(row, col) for each cell above the CFAR threshold. The training sum
/// is the outer box minus the guard box, both toroidal and separable.
template <typename F>
void for_each_hit(const Periodogram& p, const CfarConfig& cfg, F&& f) {
    check_fits(p, cfg);
    const auto& pw = p.power;
    const std::size_t rows = pw.rows();
    const std::size_t cols = pw.cols();
    auto& s = scratch();
    if (!s.outer_rows.same_shape(pw)) s.outer_rows = PowerGrid(rows, cols);
    if (!s.inner_rows.same_shape(pw)) s.inner_rows = PowerGrid(rows, cols);
    const auto od = static_cast<std::size_t>(cfg.training.doppler + cfg.guard.doppler);
    const auto id = static_cast<std::size_t>(cfg.guard.doppler);
    for (std::size_t r = 0; r < rows; ++r) {
        row_box_sum(pw.row(r), od, s.ext, s.outer_rows.row(r));
        row_box_sum(pw.row(r), id, s.ext, s.inner_rows.row(r));
    }

    ColumnWindow outer(s.outer_rows, cfg.training.range + cfg.guard.range);
    ColumnWindow inner(s.inner_rows, cfg.guard.range);
    const double scale = cfg.threshold_factor() / static_cast<double>(cfg.training_cell_count());
    for (std::size_t r = 0; r < rows; ++r) {
        const auto& o = outer.at(r);
        const auto& in = inner.at(r);
        auto row = pw.row(r);
        for (std::size_t c = 0; c < cols; ++c) {
            const double train = std::max(0.0, o[c] - in[c]);
            if (row[c] > scale * train) f(r, c);
        }
    }
}

bool is_local_max(const PowerGrid& pw, std::size_t r, std::size_t c, CellPair radius) {
    const double v = pw(r, c);
    const std::size_t self = r * pw.cols() + c;
    for (int i = -radius.range; i <= radius.range; ++i) {
        const std::size_t rr = wrap_index(static_cast<std::ptrdiff_t>(r) + i, pw.rows());
        for (int j = -radius.doppler; j <= radius.doppler; ++j) {
            if (i == 0 && j == 0) continue;
            const std::size_t cc = wrap_index(static_cast<std::ptrdiff_t>(c) + j, pw.cols());
            const double u = pw(rr, cc);
            if (u > v) return false;
            if (u == v && rr * pw.cols() + cc < self) return false;
        }
    }
    return true;
}

double wrapped_difference(double a, double b, double period) {
    double d = std::fmod(a - b, period);
    if (d < -period / 2.0) d += period;
    if (d >= period / 2.0) d -= period;
    return d;
}

/// Sidelobe envelope of an n-point DFT kernel, |1 / (n sin(pi x / n))|^2,
/// at x native bins from the peak. Reduces to 1 / (pi x)^2 for x << n.
double dirichlet_envelope(double bins, double n) {
    bins = std::abs(bins);
    if (bins < 1.0) return 1.0;
    if (n < 2.0) return 1.0 / (kPi * kPi * bins * bins);
    const double s = n * std::sin(kPi * std::min(bins, n / 2.0) / n);
    return 1.0 / (s * s);
}

/// Doppler sidelobe envelope of a kernel repeating every n native bins.
/// Replica main lobes (within one bin of a nonzero multiple of n) are left
/// to suppress_tdd_replicas and get no envelope.
double doppler_envelope(double bins, double n) {
    bins = std::abs(bins);
    if (bins < 1.0) return 1.0;
    if (n < 2.0) return 1.0 / (kPi * kPi * bins * bins);
    const double r = std::abs(bins - n * std::round(bins / n));
    if (r < 1.0) return 0.0;
    const double s = n * std::sin(kPi * r / n);
    return 1.0 / (s * s);
}

} // namespace

// ---- detection ------------------------------------------------------------

std::pair<double, double> interpolate_peak(double left, double centre, double right) {
    if (!(left > 0.0 && centre > 0.0 && right > 0.0)) return {0.0, centre};
    const double a = std::log(left);
    const double b = std::log(centre);
    const double c = std::log(right);
    const double den = a - 2.0 * b + c;
    if (!(den < 0.0)) return {0.0, centre};
    const double d = std::clamp(0.5 * (a - c) / den, -0.5, 0.5);
    return {d, std::exp(b - 0.25 * (a - c) * d)};
}

Matrix<std::uint8_t> cfar_hits(const Periodogram& p, const CfarConfig& cfg) {
    Matrix<std::uint8_t> hits(p.power.rows(), p.power.cols());
    for_each_hit(p, cfg, [&](std::size_t r, std::size_t c) { hits(r, c) = 1; });
    return hits;
}

std::vector<Detection> cfar_detect(const Periodogram& p, const CfarConfig& cfg) {
    const auto& pw = p.power;
    std::vector<std::pair<std::size_t, std::size_t>> peaks;
    for_each_hit(p, cfg, [&](std::size_t r, std::size_t c) {
        if (is_local_max(pw, r, c, cfg.cluster_radius)) peaks.emplace_back(r, c);
    });

    const std::size_t rows = pw.rows();
    const std::size_t cols = pw.cols();
    std::vector<Detection> dets;
    dets.reserve(peaks.size());
    for (auto [r, c] : peaks) {
        const double centre = pw(r, c);
        const double up = pw(wrap_index(static_cast<std::ptrdiff_t>(r) - 1, rows), c);
        const double down = pw((r + 1) % rows, c);
        const double lft = pw(r, wrap_index(static_cast<std::ptrdiff_t>(c) - 1, cols));
        const double rgt = pw(r, (c + 1) % cols);
        const auto [dr, pr] = interpolate_peak(up, centre, down);
        const auto [dd, pd] = interpolate_peak(lft, centre, rgt);

        Detection d;
        d.frame_index = p.frame_index;
        d.time_s = p.timestamp_s;
        d.range_bin = r;
        d.doppler_bin = c;
        d.range_offset = dr;
        d.doppler_offset = dd;
        d.range_m = p.axes.range_at(static_cast<double>(r) + dr);
        d.doppler_hz = p.axes.doppler_at(static_cast<double>(c) + dd);
        d.velocity_mps = p.axes.velocity_at(static_cast<double>(c) + dd);
        // Separable gains from both fits on top of the sampled maximum.
        d.peak_power = pr * pd / centre;
        dets.push_back(d);
    }

    std::sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) {
        if (a.peak_power != b.peak_power) return a.peak_power > b.peak_power;
        if (a.range_bin != b.range_bin) return a.range_bin < b.range_bin;
        return a.doppler_bin < b.doppler_bin;
    });

    if (!cfg.sidelobe_margin_db) return dets;
    const double margin = db_to_linear(*cfg.sidelobe_margin_db);
    const double range_period = static_cast<double>(rows);
    const double doppler_period = static_cast<double>(cols);
    const double native_rows = static_cast<double>(p.axes.subcarriers);
    // A mask repeating every P symbols turns the slow-time kernel into a
    // Dirichlet over symbols / P periods, repeating at every replica.
    const double doppler_kernel = p.axes.mask_period_symbols > 0 && p.axes.mask_period_symbols < p.axes.symbols
                                      ? static_cast<double>(p.axes.symbols / p.axes.mask_period_symbols)
                                      : static_cast<double>(p.axes.symbols);
    std::vector<Detection> kept;
    for (const auto& d : dets) {
        bool sidelobe = false;
        for (const auto& k : kept) {
            const double dr = wrapped_difference(d.range_bin + d.range_offset, k.range_bin + k.range_offset,
                                                 range_period) / p.axes.pad_range;
            const double dd = wrapped_difference(d.doppler_bin + d.doppler_offset,
                                                 k.doppler_bin + k.doppler_offset, doppler_period) /
                              p.axes.pad_doppler;
            if (d.peak_power < margin * k.peak_power * dirichlet_envelope(dr, native_rows) *
                                   doppler_envelope(dd, doppler_kernel)) {
                sidelobe = true;
                break;
            }
        }
        if (!sidelobe) kept.push_back(d);
    }
    return kept;
}

// ---- TDD gaps -------------------------------------------------------------

MaskGaps analyze_mask(const DlMask& mask, double symbol_duration_s, double carrier_hz) {
    MaskGaps g;
    const std::size_t s = mask.size();
    if (s == 0 || count_dl(mask) == s || count_dl(mask) == 0) return g;
    const std::size_t period = mask_period(mask);
    if (period == s) return g;
    g.has_gaps = true;
    g.period_symbols = period;
    g.gap_frequency_hz = 1.0 / (static_cast<double>(period) * symbol_duration_s);
    g.gap_velocity_mps = g.gap_frequency_hz * kSpeedOfLight / (2.0 * carrier_hz);
    return g;
}

std::vector<Detection> suppress_tdd_replicas(std::vector<Detection> dets, const MaskGaps& gaps,
                                             const PeriodogramAxes& axes, const ReplicaConfig& cfg,
                                             std::vector<Detection>* suppressed) {
    if (!gaps.has_gaps || dets.size() < 2) return dets;
    const double range_tol = cfg.range_tolerance_bins * axes.range_bin_m();
    const double doppler_tol = cfg.doppler_tolerance_bins * axes.doppler_bin_hz();
    const double span = 1.0 / axes.symbol_duration_s;

    // Strongest first; ties by input order.
    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dets[a].peak_power > dets[b].peak_power; });
    std::vector<std::size_t> rank(dets.size());
    for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = i;

    std::vector<Detection> kept;
    for (std::size_t i = 0; i < dets.size(); ++i) {
        auto& d = dets[i];
        for (std::size_t j = 0; j < dets.size(); ++j) {
            if (rank[j] >= rank[i]) continue;
            const auto& s = dets[j];
            if (std::abs(d.range_m - s.range_m) > range_tol) continue;
            const double df = wrapped_difference(d.doppler_hz, s.doppler_hz, span);
            const double k = std::round(df / gaps.gap_frequency_hz);
            if (k == 0.0) continue;
            if (std::abs(df - k * gaps.gap_frequency_hz) <= doppler_tol) {
                d.flags.replica_suppressed = true;
                break;
            }
        }
        if (d.flags.replica_suppressed) {
            if (suppressed) suppressed->push_back(d);
        } else {
            kept.push_back(d);
        }
    }
    return kept;
}

std::optional<bool> range_rate_consistent(std::span<const double> t, std::span<const double> r,
                                          std::span<const double> v, double threshold_mps) {
    const std::size_t n = t.size();
    if (n < 2 || r.size() != n || v.size() != n) return std::nullopt;
    const double tm = std::accumulate(t.begin(), t.end(), 0.0) / static_cast<double>(n);
    const double rm = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(n);
    const double vm = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(n);
    double stt = 0.0;
    double str = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        stt += (t[i] - tm) * (t[i] - tm);
        str += (t[i] - tm) * (r[i] - rm);
    }
    if (stt <= 0.0) return std::nullopt;
    const double slope = str / stt;
    return std::abs(-slope - vm) < threshold_mps;
}

void annotate_sinr(std::vector<Detection>& dets, const Periodogram& p) {
    if (!p.noise_floor_estimate || !(*p.noise_floor_estimate > 0.0))
        throw ConfigError("annotate_sinr: periodogram has no positive noise floor estimate");
    for (auto& d : dets) d.sinr_db = linear_to_db(d.peak_power / *p.noise_floor_estimate);
}

void flag_clutter_bands(std::vector<Detection>& dets, const std::vector<std::pair<double, double>>& bands) {
    for (auto& d : dets) {
        d.flags.clutter_band = false;
        for (const auto& [lo, hi] : bands)
            if (d.range_m >= lo && d.range_m <= hi) d.flags.clutter_band = true;
    }
}

} // namespace isac
