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

#include "isac/dsp.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>

namespace isac {

// ---- channel estimation ---------------------------------------------------

ChannelEstimate estimate_channel(const RadioFrame& tx, const RadioFrame& rx, double epsilon) {
    if (!tx.grid.same_shape(rx.grid))
        throw DimensionError("estimate_channel: tx and rx grids differ in shape");
    if (tx.dl_mask != rx.dl_mask)
        throw DimensionError("estimate_channel: tx and rx DL masks differ");
    if (tx.dl_mask.size() != tx.grid.cols())
        throw DimensionError("estimate_channel: DL mask length differs from symbol count");

    ChannelEstimate ch;
    ch.grid = ComplexGrid(tx.grid.rows(), tx.grid.cols());
    ch.dl_mask = tx.dl_mask;
    ch.frame_index = rx.frame_index;
    ch.timestamp_s = rx.timestamp_s;
    const double eps2 = epsilon * epsilon;
    for (std::size_t n = 0; n < tx.grid.rows(); ++n) {
        auto t = tx.grid.row(n);
        auto r = rx.grid.row(n);
        auto out = ch.grid.row(n);
        for (std::size_t m = 0; m < t.size(); ++m) {
            if (!ch.dl_mask[m]) continue;
            if (std::norm(t[m]) < eps2) {
                ++ch.zeroed_cells;
                continue;
            }
            out[m] = r[m] / t[m];
        }
    }
    return ch;
}

// ---- ECA-C ----------------------------------------------------------------

ChannelEstimate eca_c_remove(const ChannelEstimate& ch, const EcaConfig& cfg) {
    if (cfg.doppler_bins < 0) throw ConfigError("eca_c_remove: doppler_bins must be >= 0");
    if (cfg.oversample < 1) throw ConfigError("eca_c_remove: oversample must be >= 1");
    const std::size_t symbols = ch.grid.cols();
    std::vector<std::size_t> dl;
    for (std::size_t m = 0; m < symbols; ++m)
        if (ch.dl_mask[m]) dl.push_back(m);

    // Orthonormal basis (modified Gram-Schmidt) of the low-Doppler subspace,
    // restricted to DL symbols.
    std::vector<std::vector<Complex>> basis;
    const int span = cfg.doppler_bins * cfg.oversample;
    const double step = 1.0 / cfg.oversample;
    for (int k = -span; k <= span; ++k) {
        std::vector<Complex> v(dl.size());
        for (std::size_t i = 0; i < dl.size(); ++i)
            v[i] = std::polar(1.0, 2.0 * kPi * k * step * static_cast<double>(dl[i]) / static_cast<double>(symbols));
        for (const auto& q : basis) {
            Complex dot{};
            for (std::size_t i = 0; i < v.size(); ++i) dot += std::conj(q[i]) * v[i];
            for (std::size_t i = 0; i < v.size(); ++i) v[i] -= dot * q[i];
        }
        double nrm = 0.0;
        for (const auto& x : v) nrm += std::norm(x);
        nrm = std::sqrt(nrm);
        if (nrm < 1e-9 * std::sqrt(static_cast<double>(dl.size()))) continue; // degenerate under this mask
        for (auto& x : v) x /= nrm;
        basis.push_back(std::move(v));
    }

    ChannelEstimate out = ch;
    std::vector<Complex> x(dl.size());
    for (std::size_t n = 0; n < out.grid.rows(); ++n) {
        auto row = out.grid.row(n);
        for (std::size_t i = 0; i < dl.size(); ++i) x[i] = row[dl[i]];
        for (const auto& q : basis) {
            Complex dot{};
            for (std::size_t i = 0; i < x.size(); ++i) dot += std::conj(q[i]) * x[i];
            for (std::size_t i = 0; i < x.size(); ++i) x[i] -= dot * q[i];
        }
        for (std::size_t i = 0; i < dl.size(); ++i) row[dl[i]] = x[i];
    }
    return out;
}

// ---- clutter acquisition --------------------------------------------------

void ClutterAccumulator::add(const ChannelEstimate& ch) {
    if (count_ == 0) {
        sum_ = ComplexGrid(ch.grid.rows(), ch.grid.cols());
        mask_ = ch.dl_mask;
    } else if (!sum_.same_shape(ch.grid) || mask_ != ch.dl_mask) {
        throw DimensionError("clutter acquisition frames differ in shape or DL mask");
    }
    auto acc = sum_.flat();
    auto in = ch.grid.flat();
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += in[i];
    ++count_;
    last_ = std::max(last_, ch.frame_index);
    if (count_ == 1) last_ = ch.frame_index;
}

ClutterMap ClutterAccumulator::finish(std::int64_t stale_after) const {
    if (count_ == 0) throw ConfigError("clutter acquisition needs at least one frame");
    ClutterMap map;
    map.signature = sum_;
    const double scale = 1.0 / static_cast<double>(count_);
    for (auto& v : map.signature.flat()) v *= scale;
    map.dl_mask = mask_;
    map.acquisition_frame_count = count_;
    map.acquired_at = last_;
    map.stale_after = stale_after;
    return map;
}

ClutterMap crap_acquire(const std::vector<ChannelEstimate>& frames, std::int64_t stale_after) {
    if (frames.empty()) throw ConfigError("crap_acquire: empty acquisition list");
    ClutterAccumulator acc;
    for (const auto& f : frames) acc.add(f);
    return acc.finish(stale_after);
}

CrapResult crap_remove(const ChannelEstimate& ch, const ClutterMap& map, bool fit_scale) {
    if (!ch.grid.same_shape(map.signature) || ch.dl_mask != map.dl_mask)
        throw DimensionError("crap_remove: clutter map does not match the frame");
    CrapResult res;
    res.stale = (ch.frame_index - map.acquired_at) > map.stale_after;

    auto sig = map.signature.flat();
    const std::size_t cols = ch.grid.cols();
    res.scale = 1.0;
    if (fit_scale) {
        Complex cross{};
        double energy = 0.0;
        auto in = ch.grid.flat();
        for (std::size_t i = 0; i < sig.size(); ++i) {
            if (!ch.dl_mask[i % cols]) continue;
            cross += std::conj(sig[i]) * in[i];
            energy += std::norm(sig[i]);
        }
        res.scale = energy > 0.0 ? cross / energy : Complex{};
    }
    res.channel = ch;
    auto out = res.channel.grid.flat();
    for (std::size_t i = 0; i < sig.size(); ++i) {
        if (!ch.dl_mask[i % cols]) continue;
        out[i] -= res.scale * sig[i];
    }
    return res;
}

// ---- periodogram axes -----------------------------------------------------

double PeriodogramAxes::range_bin_m() const {
    return kSpeedOfLight / (2.0 * static_cast<double>(subcarriers) * subcarrier_spacing_hz);
}

double PeriodogramAxes::doppler_bin_hz() const {
    return 1.0 / (static_cast<double>(symbols) * symbol_duration_s);
}

double PeriodogramAxes::velocity_bin_mps() const {
    return doppler_bin_hz() * kSpeedOfLight / (2.0 * carrier_hz);
}

double PeriodogramAxes::range_at(double l) const { return l * range_bin_m() / pad_range; }

double PeriodogramAxes::doppler_at(double k) const {
    const double cells = static_cast<double>(doppler_cells());
    k = std::fmod(k, cells);
    if (k < 0.0) k += cells;
    if (k >= cells / 2.0) k -= cells;
    return k * doppler_bin_hz() / pad_doppler;
}

double PeriodogramAxes::velocity_at(double k) const {
    return doppler_at(k) * kSpeedOfLight / (2.0 * carrier_hz);
}

PeriodogramAxes axes_for(const Scenario& sc, const PeriodogramConfig& cfg) {
    PeriodogramAxes a;
    a.subcarriers = static_cast<std::size_t>(sc.params.subcarriers);
    a.symbols = static_cast<std::size_t>(sc.symbols_per_frame);
    a.mask_period_symbols = mask_period(sc.dl_mask);
    a.pad_range = cfg.pad_range;
    a.pad_doppler = cfg.pad_doppler;
    a.subcarrier_spacing_hz = sc.params.subcarrier_spacing_hz;
    a.symbol_duration_s = sc.symbol_duration_s();
    a.carrier_hz = sc.params.carrier_hz;
    return a;
}

// ---- periodogram engine ---------------------------------------------------

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

std::vector<double> make_window(Window w, std::size_t n) {
    std::vector<double> out(n, 1.0);
    if (w == Window::hann && n > 1)
        for (std::size_t i = 0; i < n; ++i)
            out[i] = 0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n)));
    return out;
}

} // namespace

struct PeriodogramEngine::Impl {
    std::size_t subcarriers;
    std::size_t symbols;
    std::size_t range_cells;
    std::size_t doppler_cells;
    PeriodogramConfig cfg;
    fftw_complex* slow = nullptr;  ///< subcarriers x doppler_cells
    fftw_complex* fast = nullptr;  ///< doppler_cells x range_cells (transposed)
    fftw_plan doppler_plan = nullptr;
    fftw_plan range_plan = nullptr;
    std::vector<double> slow_window;
    std::vector<double> freq_window;

    ~Impl() {
        std::lock_guard lock(planner_mutex());
        if (doppler_plan) fftw_destroy_plan(doppler_plan);
        if (range_plan) fftw_destroy_plan(range_plan);
        if (slow) fftw_free(slow);
        if (fast) fftw_free(fast);
    }
};

PeriodogramEngine::PeriodogramEngine(std::size_t subcarriers, std::size_t symbols, PeriodogramConfig cfg)
    : impl_(std::make_unique<Impl>()) {
    if (cfg.pad_range < 1 || cfg.pad_doppler < 1)
        throw ConfigError("periodogram: pad factors must be >= 1");
    if (subcarriers == 0 || symbols == 0) throw ConfigError("periodogram: empty grid");
    auto& d = *impl_;
    d.subcarriers = subcarriers;
    d.symbols = symbols;
    d.cfg = cfg;
    d.range_cells = subcarriers * static_cast<std::size_t>(cfg.pad_range);
    d.doppler_cells = symbols * static_cast<std::size_t>(cfg.pad_doppler);
    d.slow_window = make_window(cfg.window, symbols);
    d.freq_window = make_window(cfg.window, subcarriers);

    std::lock_guard lock(planner_mutex());
    d.slow = fftw_alloc_complex(d.subcarriers * d.doppler_cells);
    d.fast = fftw_alloc_complex(d.doppler_cells * d.range_cells);
    if (d.slow == nullptr || d.fast == nullptr) throw Error("periodogram: workspace allocation failed");
    const int dn[] = {static_cast<int>(d.doppler_cells)};
    const int rn[] = {static_cast<int>(d.range_cells)};
    // ESTIMATE keeps plan selection, and therefore rounding, identical across runs.
    d.doppler_plan = fftw_plan_many_dft(1, dn, static_cast<int>(subcarriers), d.slow, nullptr, 1,
                                        static_cast<int>(d.doppler_cells), d.slow, nullptr, 1,
                                        static_cast<int>(d.doppler_cells), FFTW_FORWARD, FFTW_ESTIMATE);
    d.range_plan = fftw_plan_many_dft(1, rn, static_cast<int>(d.doppler_cells), d.fast, nullptr, 1,
                                      static_cast<int>(d.range_cells), d.fast, nullptr, 1,
                                      static_cast<int>(d.range_cells), FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!d.doppler_plan || !d.range_plan) throw Error("periodogram: FFTW planning failed");
}

PeriodogramEngine::~PeriodogramEngine() = default;
PeriodogramEngine::PeriodogramEngine(PeriodogramEngine&&) noexcept = default;
PeriodogramEngine& PeriodogramEngine::operator=(PeriodogramEngine&&) noexcept = default;

const PeriodogramConfig& PeriodogramEngine::config() const noexcept { return impl_->cfg; }

void PeriodogramEngine::compute(const ChannelEstimate& ch, const PeriodogramAxes& axes, Periodogram& out) {
    auto& d = *impl_;
    if (ch.grid.rows() != d.subcarriers || ch.grid.cols() != d.symbols)
        throw DimensionError("periodogram: channel grid does not match the engine size");
    if (axes.subcarriers != d.subcarriers || axes.symbols != d.symbols ||
        axes.pad_range != d.cfg.pad_range || axes.pad_doppler != d.cfg.pad_doppler)
        throw DimensionError("periodogram: axes do not match the engine configuration");

    const std::size_t dc = d.doppler_cells;
    const std::size_t rc = d.range_cells;
    const std::size_t nsc = d.subcarriers;
    const bool rect = d.cfg.window == Window::rect;
    for (std::size_t n = 0; n < nsc; ++n) {
        auto row = ch.grid.row(n);
        fftw_complex* dst = d.slow + n * dc;
        if (rect) {
            static_assert(sizeof(Complex) == sizeof(fftw_complex));
            std::memcpy(dst, row.data(), sizeof(fftw_complex) * d.symbols);
        } else {
            const double wn = d.freq_window[n];
            for (std::size_t m = 0; m < d.symbols; ++m) {
                const double w = wn * d.slow_window[m];
                dst[m][0] = row[m].real() * w;
                dst[m][1] = row[m].imag() * w;
            }
        }
        std::memset(dst + d.symbols, 0, sizeof(fftw_complex) * (dc - d.symbols));
    }
    fftw_execute(d.doppler_plan);

    // Transpose into contiguous range rows, zero-padding beyond N.
    constexpr std::size_t blk = 8;
    for (std::size_t k = 0; k < dc; ++k) std::memset(d.fast[k * rc + nsc], 0, sizeof(fftw_complex) * (rc - nsc));
    for (std::size_t n0 = 0; n0 < nsc; n0 += blk)
        for (std::size_t k0 = 0; k0 < dc; k0 += blk)
            for (std::size_t n = n0; n < std::min(n0 + blk, nsc); ++n)
                for (std::size_t k = k0; k < std::min(k0 + blk, dc); ++k) {
                    d.fast[k * rc + n][0] = d.slow[n * dc + k][0];
                    d.fast[k * rc + n][1] = d.slow[n * dc + k][1];
                }
    fftw_execute(d.range_plan);

    if (out.power.rows() != rc || out.power.cols() != dc) out.power = PowerGrid(rc, dc);
    double* pw = out.power.data();
    for (std::size_t l0 = 0; l0 < rc; l0 += blk)
        for (std::size_t k0 = 0; k0 < dc; k0 += blk)
            for (std::size_t k = k0; k < std::min(k0 + blk, dc); ++k)
                for (std::size_t l = l0; l < std::min(l0 + blk, rc); ++l) {
                    const auto& v = d.fast[k * rc + l];
                    pw[l * dc + k] = v[0] * v[0] + v[1] * v[1];
                }
    out.axes = axes;
    out.frame_index = ch.frame_index;
    out.timestamp_s = ch.timestamp_s;
    out.noise_floor_estimate.reset();
}

Periodogram PeriodogramEngine::compute(const ChannelEstimate& ch, const PeriodogramAxes& axes) {
    Periodogram p;
    compute(ch, axes, p);
    return p;
}

Periodogram periodogram(const ChannelEstimate& ch, const PeriodogramAxes& axes, const PeriodogramConfig& cfg) {
    PeriodogramEngine engine(ch.grid.rows(), ch.grid.cols(), cfg);
    return engine.compute(ch, axes);
}

// ---- noise floor ----------------------------------------------------------

double estimate_noise_floor(Periodogram& p, const NoiseRegion& region) {
    const std::size_t rows = p.power.rows();
    const std::size_t cols = p.power.cols();
    // Only cells on the unpadded grid: their powers are mutually independent
    // for white noise, padded neighbours are not.
    const std::size_t rstep = static_cast<std::size_t>(std::max(1, p.axes.pad_range));
    const std::size_t cstep = static_cast<std::size_t>(std::max(1, p.axes.pad_doppler));
    const double vstep = p.axes.velocity_bin_mps() / p.axes.pad_doppler;
    const auto half = static_cast<double>(cols / 2);

    std::vector<std::uint8_t> col_hit(cols);
    std::vector<double> values;
    values.reserve(p.power.size() / (rstep * cstep) + 1);
    for (std::size_t r = 0; r < rows; r += rstep) {
        const double range = p.axes.range_at(static_cast<double>(r));
        bool any = false;
        std::fill(col_hit.begin(), col_hit.end(), 0);
        for (const auto& box : region.exclude) {
            if (range < box.range_min_m || range > box.range_max_m) continue;
            any = true;
            // Signed cell indices covered by the velocity interval, then wrapped.
            const double lo = std::max(std::ceil(box.velocity_min_mps / vstep), -half);
            const double hi = std::min(std::floor(box.velocity_max_mps / vstep), half - 1.0);
            for (double k = lo; k <= hi; k += 1.0) {
                const auto signed_k = static_cast<std::ptrdiff_t>(k);
                col_hit[static_cast<std::size_t>(signed_k < 0 ? signed_k + static_cast<std::ptrdiff_t>(cols) : signed_k)] = 1;
            }
        }
        auto row = p.power.row(r);
        for (std::size_t c = 0; c < cols; c += cstep)
            if (!any || !col_hit[c]) values.push_back(row[c]);
    }
    if (values.size() < region.min_cells)
        throw ConfigError("estimate_noise_floor: only " + std::to_string(values.size()) +
                          " cells left outside the exclusion region");
    auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
    std::nth_element(values.begin(), mid, values.end());
    const double floor = *mid / std::log(2.0);
    p.noise_floor_estimate = floor;
    return floor;
}

} // namespace isac
