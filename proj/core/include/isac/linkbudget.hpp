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

// Analytic link budget of a mono-static OFDM radar built from communication
// hardware: noise plus 3rd-order intermodulation PSD, the achievable range
// r* and the receive-window-limited maximum range r_max.
//
// All values are linear SI (W, W/Hz, Hz, m, s). dB appears only at the I/O
// boundary (parameter files, reports).

#pragma once

#include "isac/common.hpp"

#include <optional>
#include <string>

namespace isac {

class KeyValueSection;

struct LinkBudgetParams {
    double carrier_hz = 27.6e9;
    double subcarrier_spacing_hz = 120e3;
    double cp_fraction = 1.0 / 14.0;  ///< CP length relative to the useful symbol duration
    double rx_offset_s = 0.0;         ///< sensing receive-window delay T_rx
    int subcarriers = 1584;           ///< N
    int symbols = 832;                ///< M, OFDM symbols used for sensing
    double tx_power_w = 0.0;          ///< total radiated power
    double oip3_tx_w = 0.0;
    double iip3_rx_w = 0.0;
    double tx_elements = 96.0;
    double rx_elements = 96.0;
    double tx_gain = 1.0;
    double rx_gain = 1.0;
    double isolation = 1.0;           ///< single-radiator Tx-Rx isolation
    double coupling_loss_total = 1.0; ///< C_total over all clutter and targets
    double noise_psd_w_per_hz = 0.0;  ///< N_0 = k_B T
    double noise_figure = 1.0;
    double rcs_m2 = 0.0;
    double min_sinr = 1.0;            ///< gamma_min
    /// Lower end of the r* interval for the near branch. Defaults to max(r_low, 0).
    std::optional<double> near_branch_floor_m;

    /// The proof-of-concept hardware values: 27.6 GHz, 120 kHz SCS, 1584 x 832,
    /// 28.1 dBm, sigma = -17 dBsm, gamma_min = 17 dB.
    static LinkBudgetParams reference();

    /// Throws ConfigError on non-positive powers/gains/PSDs, N or M < 1,
    /// cp_fraction outside [0, 1) or negative rx offset.
    void validate() const;

    double useful_symbol_s() const { return 1.0 / subcarrier_spacing_hz; }
    double symbol_with_cp_s() const { return (1.0 + cp_fraction) / subcarrier_spacing_hz; }
    double wavelength_m() const { return kSpeedOfLight / carrier_hz; }
};

/// Reads Table-style field names (f_c, delta_f, l_cp, t_rx, n_subcarriers,
/// m_symbols, p_tx, oip3_tx, iip3_rx, n_tx, n_rx, g_tx, g_rx, isolation,
/// c_total, noise_psd, noise_figure, rcs, gamma_min). Missing keys keep the
/// reference value.
LinkBudgetParams read_link_budget(const KeyValueSection& section);
LinkBudgetParams load_link_budget(const std::string& path);
std::string format_link_budget(const LinkBudgetParams& p);

struct InterferencePsd {
    double total;        ///< S_N+I
    double thermal;      ///< N_0 F_Rx
    double tx_intermod;  ///< S_3,Tx
    double rx_intermod;  ///< S_3,Rx
};

InterferencePsd interference_psd(const LinkBudgetParams& p);

/// SNR at unit range (linear, times m^4): Tx energy over coupling loss at 1 m
/// over S_N+I. `psd` overrides the noise-plus-interference PSD when given.
double snr_at_unit_range(const LinkBudgetParams& p, std::optional<double> psd = std::nullopt);

/// Achievable distance with the receive window matched to the target delay.
double r_star(const LinkBudgetParams& p);

struct RangeWindowModel {
    double r_sym;   ///< delay equal to the useful symbol duration
    double r_0;     ///< delay equal to the symbol duration including CP
    double r_cp;
    double r_rx;
    double r_low;   ///< may be negative
    double r_limit;

    /// Fraction of the reflected symbol that falls into the receive window
    /// (amplitude scale, 0 outside [r_low, r_limit], 1 inside the CP range).
    double overlap(double range_m) const;
    double r_low_clamped() const { return r_low > 0.0 ? r_low : 0.0; }
};

RangeWindowModel range_window(const LinkBudgetParams& p);

enum class RangeBranch { near, cp, far };
const char* to_string(RangeBranch b);

struct MaxRange {
    double r_max;
    double r_star;
    double a;  ///< r*^2 / (2 r_sym)
    RangeBranch branch;
    RangeWindowModel window;
    bool in_window;  ///< false when r_max falls outside (r_low, r_limit) or r* is below the near floor
};

MaxRange max_range(const LinkBudgetParams& p);

/// Evaluates the three-branch r_max formula for an externally supplied r*.
MaxRange max_range_for(const LinkBudgetParams& p, double r_star_m);

enum class SinrModel {
    thermal_only,  ///< N_0 F_Rx only, no window loss
    unwindowed,    ///< full S_N+I, no window loss
    windowed,      ///< full S_N+I with the receive-window overlap squared
};

/// Expected post-processing SINR at `range_m` in dB. Throws OutOfWindowError
/// unless max(r_low, 0) < range_m < r_limit.
double expected_sinr_db(const LinkBudgetParams& p, double range_m,
                        SinrModel model = SinrModel::windowed);

} // namespace isac
