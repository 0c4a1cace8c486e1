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

#include "isac/linkbudget.hpp"

#include "isac/keyvalue.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace isac {

LinkBudgetParams LinkBudgetParams::reference() {
    LinkBudgetParams p;
    p.carrier_hz = 27.6e9;
    p.subcarrier_spacing_hz = 120e3;
    p.cp_fraction = 1.0 / 14.0;
    p.rx_offset_s = 0.0;
    p.subcarriers = 1584;
    p.symbols = 832;
    p.tx_power_w = dbm_to_watts(28.1);
    p.oip3_tx_w = dbm_to_watts(23.1);
    p.iip3_rx_w = dbm_to_watts(-13.3);
    p.tx_elements = 96.0;
    p.rx_elements = 96.0;
    p.tx_gain = db_to_linear(23.4);
    p.rx_gain = db_to_linear(23.4);
    p.isolation = db_to_linear(103.0);
    p.coupling_loss_total = db_to_linear(85.0);
    p.noise_psd_w_per_hz = dbm_to_watts(-174.0);
    p.noise_figure = db_to_linear(5.0);
    p.rcs_m2 = db_to_linear(-17.0);
    p.min_sinr = db_to_linear(17.0);
    return p;
}

void LinkBudgetParams::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw ConfigError(std::string("link budget: ") + name + " must be positive and finite");
    };
    positive(carrier_hz, "f_c");
    positive(subcarrier_spacing_hz, "delta_f");
    positive(tx_power_w, "p_tx");
    positive(oip3_tx_w, "oip3_tx");
    positive(iip3_rx_w, "iip3_rx");
    positive(tx_elements, "n_tx");
    positive(rx_elements, "n_rx");
    positive(tx_gain, "g_tx");
    positive(rx_gain, "g_rx");
    positive(isolation, "isolation");
    positive(coupling_loss_total, "c_total");
    positive(noise_psd_w_per_hz, "noise_psd");
    positive(noise_figure, "noise_figure");
    positive(rcs_m2, "rcs");
    positive(min_sinr, "gamma_min");
    if (subcarriers < 1) throw ConfigError("link budget: n_subcarriers must be >= 1");
    if (symbols < 1) throw ConfigError("link budget: m_symbols must be >= 1");
    if (!(cp_fraction >= 0.0 && cp_fraction < 1.0))
        throw ConfigError("link budget: l_cp must lie in [0, 1)");
    if (!(rx_offset_s >= 0.0) || !std::isfinite(rx_offset_s))
        throw ConfigError("link budget: t_rx must be >= 0");
}

LinkBudgetParams read_link_budget(const KeyValueSection& s) {
    LinkBudgetParams p = LinkBudgetParams::reference();
    p.carrier_hz = s.quantity_or("f_c", Dimension::frequency, p.carrier_hz);
    p.subcarrier_spacing_hz = s.quantity_or("delta_f", Dimension::frequency, p.subcarrier_spacing_hz);
    p.cp_fraction = s.quantity_or("l_cp", Dimension::ratio, p.cp_fraction);
    p.rx_offset_s = s.quantity_or("t_rx", Dimension::time, p.rx_offset_s);
    p.subcarriers = static_cast<int>(s.integer_or("n_subcarriers", p.subcarriers));
    p.symbols = static_cast<int>(s.integer_or("m_symbols", p.symbols));
    p.tx_power_w = s.quantity_or("p_tx", Dimension::power, p.tx_power_w);
    p.oip3_tx_w = s.quantity_or("oip3_tx", Dimension::power, p.oip3_tx_w);
    p.iip3_rx_w = s.quantity_or("iip3_rx", Dimension::power, p.iip3_rx_w);
    p.tx_elements = s.quantity_or("n_tx", Dimension::ratio, p.tx_elements);
    p.rx_elements = s.quantity_or("n_rx", Dimension::ratio, p.rx_elements);
    p.tx_gain = s.quantity_or("g_tx", Dimension::ratio, p.tx_gain);
    p.rx_gain = s.quantity_or("g_rx", Dimension::ratio, p.rx_gain);
    p.isolation = s.quantity_or("isolation", Dimension::ratio, p.isolation);
    p.coupling_loss_total = s.quantity_or("c_total", Dimension::ratio, p.coupling_loss_total);
    p.noise_psd_w_per_hz = s.quantity_or("noise_psd", Dimension::psd, p.noise_psd_w_per_hz);
    p.noise_figure = s.quantity_or("noise_figure", Dimension::ratio, p.noise_figure);
    p.rcs_m2 = s.quantity_or("rcs", Dimension::area, p.rcs_m2);
    p.min_sinr = s.quantity_or("gamma_min", Dimension::ratio, p.min_sinr);
    if (s.has("near_floor")) p.near_branch_floor_m = s.quantity("near_floor", Dimension::length);
    p.validate();
    return p;
}

LinkBudgetParams load_link_budget(const std::string& path) {
    auto doc = KeyValueDocument::load(path);
    const KeyValueSection* s = doc.first("linkbudget");
    if (s == nullptr) s = doc.first("");
    return read_link_budget(*s);
}

std::string format_link_budget(const LinkBudgetParams& p) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "f_c = " << p.carrier_hz << " Hz\n"
       << "delta_f = " << p.subcarrier_spacing_hz << " Hz\n"
       << "l_cp = " << p.cp_fraction << "\n"
       << "t_rx = " << p.rx_offset_s << " s\n"
       << "n_subcarriers = " << p.subcarriers << "\n"
       << "m_symbols = " << p.symbols << "\n"
       << "p_tx = " << watts_to_dbm(p.tx_power_w) << " dBm\n"
       << "oip3_tx = " << watts_to_dbm(p.oip3_tx_w) << " dBm\n"
       << "iip3_rx = " << watts_to_dbm(p.iip3_rx_w) << " dBm\n"
       << "n_tx = " << p.tx_elements << "\n"
       << "n_rx = " << p.rx_elements << "\n"
       << "g_tx = " << linear_to_db(p.tx_gain) << " dB\n"
       << "g_rx = " << linear_to_db(p.rx_gain) << " dB\n"
       << "isolation = " << linear_to_db(p.isolation) << " dB\n"
       << "c_total = " << linear_to_db(p.coupling_loss_total) << " dB\n"
       << "noise_psd = " << watts_to_dbm(p.noise_psd_w_per_hz) << " dBm/Hz\n"
       << "noise_figure = " << linear_to_db(p.noise_figure) << " dB\n"
       << "rcs = " << linear_to_db(p.rcs_m2) << " dBsm\n"
       << "gamma_min = " << linear_to_db(p.min_sinr) << " dB\n";
    if (p.near_branch_floor_m) os << "near_floor = " << *p.near_branch_floor_m << " m\n";
    return os.str();
}

InterferencePsd interference_psd(const LinkBudgetParams& p) {
    p.validate();
    const double bandwidth = p.subcarriers * p.subcarrier_spacing_hz;
    const double pa_out = p.tx_power_w / p.tx_elements;
    const double lna_in =
        p.tx_power_w * (1.0 / (p.coupling_loss_total * p.rx_elements) + 1.0 / p.isolation);
    const double rx_power = p.tx_power_w * (1.0 / p.coupling_loss_total + 1.0 / p.isolation);

    InterferencePsd out{};
    out.thermal = p.noise_psd_w_per_hz * p.noise_figure;
    const double tx_ratio = p.oip3_tx_w / pa_out;
    const double rx_ratio = p.iip3_rx_w / lna_in;
    out.tx_intermod = rx_power / (tx_ratio * tx_ratio) / bandwidth;
    out.rx_intermod = rx_power / (rx_ratio * rx_ratio) / bandwidth;
    out.total = out.thermal + out.tx_intermod + out.rx_intermod;
    return out;
}

double snr_at_unit_range(const LinkBudgetParams& p, std::optional<double> psd) {
    p.validate();
    const double s = psd ? *psd : interference_psd(p).total;
    const double lambda = p.wavelength_m();
    const double tx_energy = p.tx_power_w * p.symbols / p.subcarrier_spacing_hz;
    const double coupling_inv =
        p.tx_gain * p.rx_gain * p.rcs_m2 * lambda * lambda / std::pow(4.0 * kPi, 3);
    return tx_energy * coupling_inv / s;
}

double r_star(const LinkBudgetParams& p) {
    return std::pow(snr_at_unit_range(p) / p.min_sinr, 0.25);
}

RangeWindowModel range_window(const LinkBudgetParams& p) {
    RangeWindowModel w{};
    w.r_sym = kSpeedOfLight / (2.0 * p.subcarrier_spacing_hz);
    w.r_0 = (1.0 + p.cp_fraction) * w.r_sym;
    w.r_cp = p.cp_fraction * w.r_sym;
    w.r_rx = p.rx_offset_s * kSpeedOfLight / 2.0;
    w.r_low = w.r_rx - w.r_sym;
    w.r_limit = w.r_rx + w.r_0;
    return w;
}

double RangeWindowModel::overlap(double r) const {
    if (r <= r_low || r >= r_limit) return 0.0;
    if (r < r_rx) return (r - r_low) / r_sym;
    if (r <= r_rx + r_cp) return 1.0;
    return (r_limit - r) / r_sym;
}

const char* to_string(RangeBranch b) {
    switch (b) {
    case RangeBranch::near: return "near";
    case RangeBranch::cp: return "cp";
    case RangeBranch::far: return "far";
    }
    return "?";
}

MaxRange max_range_for(const LinkBudgetParams& p, double rs) {
    MaxRange out{};
    out.window = range_window(p);
    const auto& w = out.window;
    out.r_star = rs;
    out.a = rs * rs / (2.0 * w.r_sym);
    const double a = out.a;
    const double floor_m = p.near_branch_floor_m.value_or(w.r_low_clamped());
    bool solvable = true;
    if (rs <= w.r_rx) {
        out.branch = RangeBranch::near;
        const double disc = a * a - 2.0 * a * (w.r_rx - w.r_sym);
        if (disc < 0.0 || rs < floor_m) {
            solvable = false;
            out.r_max = 0.0;
        } else {
            out.r_max = a + std::sqrt(disc);
        }
    } else if (rs <= w.r_rx + w.r_cp) {
        out.branch = RangeBranch::cp;
        out.r_max = rs;
    } else {
        out.branch = RangeBranch::far;
        out.r_max = -a + std::sqrt(a * a + 2.0 * a * (w.r_rx + w.r_0));
    }
    out.in_window = solvable && out.r_max > w.r_low && out.r_max < w.r_limit;
    return out;
}

MaxRange max_range(const LinkBudgetParams& p) { return max_range_for(p, r_star(p)); }

double expected_sinr_db(const LinkBudgetParams& p, double r, SinrModel model) {
    const auto w = range_window(p);
    if (!(r > w.r_low_clamped() && r < w.r_limit))
        throw OutOfWindowError("range " + std::to_string(r) + " m outside the receive window (" +
                               std::to_string(w.r_low_clamped()) + ", " + std::to_string(w.r_limit) +
                               ") m");
    double snr0 = 0.0;
    double gain = 1.0;
    switch (model) {
    case SinrModel::thermal_only:
        snr0 = snr_at_unit_range(p, p.noise_psd_w_per_hz * p.noise_figure);
        break;
    case SinrModel::unwindowed: snr0 = snr_at_unit_range(p); break;
    case SinrModel::windowed: {
        snr0 = snr_at_unit_range(p);
        const double o = w.overlap(r);
        gain = o * o;
        break;
    }
    }
    return linear_to_db(snr0 / std::pow(r, 4) * gain);
}

} // namespace isac
