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

// Sensing chain: channel estimation, static clutter removal and the
// range-Doppler periodogram.

#pragma once

#include "isac/common.hpp"
#include "isac/scene.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace isac {

struct ChannelEstimate {
    ComplexGrid grid; ///< subcarriers x symbols, UL symbols zero
    DlMask dl_mask;
    std::int64_t frame_index = 0;
    double timestamp_s = 0.0;
    std::size_t zeroed_cells = 0; ///< DL cells dropped because |tx| < epsilon
};

/// rx / tx element-wise on DL symbols, zero elsewhere.
ChannelEstimate estimate_channel(const RadioFrame& tx, const RadioFrame& rx, double epsilon = 1e-12);

// ---- clutter removal ------------------------------------------------------

struct EcaConfig {
    /// Half-width, in slow-time DFT bins (1 / frame duration), of the
    /// near-zero Doppler subspace cancelled on every subcarrier. 0 cancels
    /// only the DL mean.
    int doppler_bins = 1;
    /// Subspace frequencies per bin. 1 spans the integer bins only, which
    /// leaves slow targets between bins (e.g. half a bin) poorly cancelled.
    int oversample = 1;
};

/// Extensive cancellation by subcarrier: least-squares projection of each
/// subcarrier's DL slow-time samples onto the low-Doppler subspace, subtracted.
ChannelEstimate eca_c_remove(const ChannelEstimate& ch, const EcaConfig& cfg = {});

/// Stored acquisition of the static scene.
struct ClutterMap {
    ComplexGrid signature;
    DlMask dl_mask;
    std::size_t acquisition_frame_count = 0;
    std::int64_t acquired_at = 0; ///< frame index of the last acquisition frame
    std::int64_t stale_after = 18000; ///< frames (3 min at 10 ms)
};

/// Coherent average of the acquisition frames. Throws ConfigError if empty.
ClutterMap crap_acquire(const std::vector<ChannelEstimate>& frames, std::int64_t stale_after = 18000);

/// Incremental form of crap_acquire for long acquisitions.
class ClutterAccumulator {
public:
    void add(const ChannelEstimate& ch);
    std::size_t count() const noexcept { return count_; }
    ClutterMap finish(std::int64_t stale_after = 18000) const;

private:
    ComplexGrid sum_;
    DlMask mask_;
    std::size_t count_ = 0;
    std::int64_t last_ = 0;
};

struct CrapResult {
    ChannelEstimate channel;
    Complex scale{1.0, 0.0}; ///< factor applied to the signature
    bool stale = false;
};

/// Subtracts the clutter signature. A stale map is flagged, not refused.
/// With `fit_scale` the signature is first scaled by its least-squares fit to
/// the frame, which absorbs a common gain drift but is biased whenever a
/// target sat in the acquisition.
CrapResult crap_remove(const ChannelEstimate& ch, const ClutterMap& map, bool fit_scale = false);

// ---- periodogram ----------------------------------------------------------

enum class Window { rect, hann };

struct PeriodogramConfig {
    int pad_range = 2;
    int pad_doppler = 2;
    Window window = Window::rect;
};

/// Axis metadata needed to map periodogram cells to physical units.
struct PeriodogramAxes {
    std::size_t subcarriers = 0;       ///< N before padding
    std::size_t symbols = 0;           ///< slow-time length before padding
    std::size_t mask_period_symbols = 0; ///< DL mask period; 0 or symbols when aperiodic
    int pad_range = 1;
    int pad_doppler = 1;
    double subcarrier_spacing_hz = 0.0;
    double symbol_duration_s = 0.0;    ///< T0
    double carrier_hz = 0.0;

    double range_bin_m() const;        ///< c / (2 N df)
    double velocity_bin_mps() const;   ///< c / (2 f_c symbols T0)
    double doppler_bin_hz() const;     ///< 1 / (symbols T0)
    /// Physical coordinates of fractional grid positions. Doppler wraps to [-span/2, span/2).
    double range_at(double range_index) const;
    double doppler_at(double doppler_index) const;
    double velocity_at(double doppler_index) const;
    std::size_t range_cells() const { return subcarriers * pad_range; }
    std::size_t doppler_cells() const { return symbols * pad_doppler; }
};

PeriodogramAxes axes_for(const Scenario& scenario, const PeriodogramConfig& cfg = {});

struct Periodogram {
    PowerGrid power; ///< range cells x Doppler cells
    PeriodogramAxes axes;
    std::int64_t frame_index = 0;
    double timestamp_s = 0.0;
    std::optional<double> noise_floor_estimate;

    double range_bin_m() const { return axes.range_bin_m(); }
    double velocity_bin_mps() const { return axes.velocity_bin_mps(); }
};

/// Reusable FFT plans and workspace for one grid size. Not thread-safe;
/// use one engine per thread.
class PeriodogramEngine {
public:
    PeriodogramEngine(std::size_t subcarriers, std::size_t symbols, PeriodogramConfig cfg = {});
    ~PeriodogramEngine();
    PeriodogramEngine(PeriodogramEngine&&) noexcept;
    PeriodogramEngine& operator=(PeriodogramEngine&&) noexcept;
    PeriodogramEngine(const PeriodogramEngine&) = delete;
    PeriodogramEngine& operator=(const PeriodogramEngine&) = delete;

    const PeriodogramConfig& config() const noexcept;

    /// Forward slow-time (Doppler) transform per subcarrier, then inverse
    /// transform across subcarriers per Doppler bin. Unnormalised: a
    /// unit-amplitude exponential filling all M DL symbols and N subcarriers
    /// peaks at (M N)^2.
    void compute(const ChannelEstimate& ch, const PeriodogramAxes& axes, Periodogram& out);
    Periodogram compute(const ChannelEstimate& ch, const PeriodogramAxes& axes);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// One-shot convenience over PeriodogramEngine.
Periodogram periodogram(const ChannelEstimate& ch, const PeriodogramAxes& axes,
                        const PeriodogramConfig& cfg = {});

// ---- noise floor ----------------------------------------------------------

/// Rectangle in physical units excluded from the noise-floor estimate.
struct ExclusionBox {
    double range_min_m;
    double range_max_m;
    double velocity_min_mps;
    double velocity_max_mps;
};

struct NoiseRegion {
    std::vector<ExclusionBox> exclude;
    std::size_t min_cells = 1000;
};

/// median(power over included cells) / ln 2, the mean of exponentially
/// distributed cell powers. Only cells on the unpadded grid (every pad-th
/// index) are used. Stores the result in p.noise_floor_estimate.
/// Throws ConfigError if fewer than region.min_cells cells remain.
double estimate_noise_floor(Periodogram& p, const NoiseRegion& region = {});

} // namespace isac
