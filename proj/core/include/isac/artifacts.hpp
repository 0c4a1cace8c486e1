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

// CSV, JSON and raw-frame artifacts.
//
// Raw-frame dump layout (all little-endian):
//
//   header   char[8]   "ISACFRM1"
//            uint32    subcarriers N
//            uint32    symbols per frame S
//            float64   carrier frequency [Hz]
//            float64   subcarrier spacing [Hz]
//            float64   CP fraction
//            uint8[S]  DL mask (1 = DL)
//   record   int64     frame index (negative: clutter acquisition)
//            uint32    beam index
//            float64   timestamp [s]
//            float32[2 N S]  tx grid, row-major (subcarrier, symbol), I then Q
//            float32[2 N S]  rx grid, same layout
//
// Records follow the header back to back until end of file.

#pragma once

#include "isac/harness.hpp"

#include <cstdint>
#include <fstream>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace isac {

void write_truth_csv(std::ostream& os, const std::vector<TruthRecord>& truth);
/// frame_index,time_s,range_m,velocity_mps,sinr_db,flags (flags: '|'-joined names or "none").
void write_detections_csv(std::ostream& os, const std::vector<Detection>& dets);
/// range_bin,doppler_bin,range_m,velocity_mps,power_db for cells with range <= max_range_m.
void write_periodogram_csv(std::ostream& os, const Periodogram& p,
                           std::optional<double> max_range_m = std::nullopt);
/// range_m,sinr_db_model,sinr_db_windowed,snr_db_thermal_only; ranges outside
/// the receive window are skipped.
void write_sinr_curves_csv(std::ostream& os, const LinkBudgetParams& p, double start_m, double stop_m,
                           double step_m);
void write_sinr_points_csv(std::ostream& os, const std::vector<SinrPoint>& points);

/// Deterministic JSON (fixed key order, shortest round-trip doubles).
std::string metrics_json(const RunMetrics& m);
std::string timing_json(const TimingStats& t);

struct FrameDumpHeader {
    std::uint32_t subcarriers = 0;
    std::uint32_t symbols = 0;
    double carrier_hz = 0.0;
    double subcarrier_spacing_hz = 0.0;
    double cp_fraction = 0.0;
    DlMask dl_mask;
};

struct FrameDumpRecord {
    std::int64_t frame_index = 0;
    std::uint32_t beam_index = 0;
    double timestamp_s = 0.0;
    RadioFrame tx;
    RadioFrame rx;
};

FrameDumpHeader dump_header_for(const Scenario& scenario);

class FrameDumpWriter {
public:
    FrameDumpWriter(const std::string& path, const FrameDumpHeader& header);
    void write(std::int64_t frame_index, std::uint32_t beam_index, const RadioFrame& tx, const RadioFrame& rx);

private:
    std::ofstream os_;
    FrameDumpHeader header_;
};

class FrameDumpReader {
public:
    /// Throws ParseError on a bad magic or truncated header.
    explicit FrameDumpReader(const std::string& path);
    const FrameDumpHeader& header() const noexcept { return header_; }
    /// Next record, or nullopt at end of file. Throws ParseError on a truncated record.
    std::optional<FrameDumpRecord> next();

private:
    std::ifstream is_;
    FrameDumpHeader header_;
};

} // namespace isac
