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

#include "isac/artifacts.hpp"

#include <json.hpp>

#include <bit>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <ostream>

namespace isac {

namespace {

constexpr char kMagic[8] = {'I', 'S', 'A', 'C', 'F', 'R', 'M', '1'};

struct CsvPrecision {
    explicit CsvPrecision(std::ostream& os) : os_(os), old_(os.precision(10)) {}
    ~CsvPrecision() { os_.precision(old_); }
    std::ostream& os_;
    std::streamsize old_;
};

} // namespace

void write_truth_csv(std::ostream& os, const std::vector<TruthRecord>& truth) {
    CsvPrecision guard(os);
    os << "frame_index,time_s,target_id,range_m,radial_velocity_mps,az_offset_deg\n";
    for (const auto& t : truth)
        os << t.frame_index << ',' << t.time_s << ',' << t.target_id << ',' << t.range_m << ','
           << t.radial_velocity_mps << ',' << t.az_offset_deg << '\n';
}

void write_detections_csv(std::ostream& os, const std::vector<Detection>& dets) {
    CsvPrecision guard(os);
    os << "frame_index,time_s,range_m,velocity_mps,sinr_db,flags\n";
    for (const auto& d : dets) {
        std::string flags;
        if (d.flags.replica_suppressed) flags = "replica_suppressed";
        if (d.flags.clutter_band) flags += (flags.empty() ? "" : "|") + std::string("clutter_band");
        if (flags.empty()) flags = "none";
        os << d.frame_index << ',' << d.time_s << ',' << d.range_m << ',' << d.velocity_mps << ',' << d.sinr_db
           << ',' << flags << '\n';
    }
}

void write_periodogram_csv(std::ostream& os, const Periodogram& p, std::optional<double> max_range_m) {
    CsvPrecision guard(os);
    os << "range_bin,doppler_bin,range_m,velocity_mps,power_db\n";
    for (std::size_t r = 0; r < p.power.rows(); ++r) {
        const double range = p.axes.range_at(static_cast<double>(r));
        if (max_range_m && range > *max_range_m) break;
        auto row = p.power.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) {
            const double db = row[c] > 0.0 ? linear_to_db(row[c]) : -400.0;
            os << r << ',' << c << ',' << range << ',' << p.axes.velocity_at(static_cast<double>(c)) << ',' << db
               << '\n';
        }
    }
}

void write_sinr_curves_csv(std::ostream& os, const LinkBudgetParams& p, double start_m, double stop_m,
                           double step_m) {
    if (!(step_m > 0.0) || stop_m < start_m) throw ConfigError("sweep must satisfy start <= stop and step > 0");
    CsvPrecision guard(os);
    os << "range_m,sinr_db_model,sinr_db_windowed,snr_db_thermal_only\n";
    const auto steps = static_cast<long long>(std::floor((stop_m - start_m) / step_m + 1e-9));
    for (long long i = 0; i <= steps; ++i) {
        const double r = start_m + static_cast<double>(i) * step_m;
        try {
            const double model = expected_sinr_db(p, r, SinrModel::unwindowed);
            const double windowed = expected_sinr_db(p, r, SinrModel::windowed);
            const double thermal = expected_sinr_db(p, r, SinrModel::thermal_only);
            os << r << ',' << model << ',' << windowed << ',' << thermal << '\n';
        } catch (const OutOfWindowError&) {
        }
    }
}

void write_sinr_points_csv(std::ostream& os, const std::vector<SinrPoint>& points) {
    CsvPrecision guard(os);
    os << "frame_index,range_m,measured_sinr_db,model_sinr_db,pattern_loss_db\n";
    for (const auto& s : points)
        os << s.frame_index << ',' << s.range_m << ',' << s.measured_sinr_db << ',' << s.model_sinr_db << ','
           << s.pattern_loss_db << '\n';
}

std::string metrics_json(const RunMetrics& m) {
    nlohmann::ordered_json j;
    j["frames_processed"] = m.frames_processed;
    j["truth_frames"] = m.truth_frames;
    j["matched_frames"] = m.matched_frames;
    j["detection_rate"] = m.detection_rate;
    j["range_bias_m"] = m.range_bias_m;
    j["range_error_m"] = {{"q50", m.range_error.q50}, {"q95", m.range_error.q95}};
    j["velocity_error_mps"] = {{"q50", m.velocity_error.q50}, {"q95", m.velocity_error.q95}};
    j["detections"] = m.detections;
    j["replicas_suppressed"] = m.replicas_suppressed;
    j["valid_tracks"] = m.valid_tracks;
    j["false_track_count"] = m.false_track_count;
    j["min_valid_sinr_db"] = m.min_valid_sinr_db;
    j["min_matched_sinr_db"] = m.min_matched_sinr_db;
    j["stale_map_frames"] = m.stale_map_frames;
    auto curve = nlohmann::ordered_json::array();
    for (const auto& s : m.sinr_curve)
        curve.push_back({{"frame_index", s.frame_index},
                         {"range_m", s.range_m},
                         {"measured_sinr_db", s.measured_sinr_db},
                         {"model_sinr_db", s.model_sinr_db},
                         {"pattern_loss_db", s.pattern_loss_db}});
    j["sinr_curve"] = std::move(curve);
    return j.dump(2) + "\n";
}

std::string timing_json(const TimingStats& t) {
    nlohmann::ordered_json j;
    j["frames"] = t.frames;
    j["mean_ms"] = t.mean_ms;
    j["p50_ms"] = t.p50_ms;
    j["p95_ms"] = t.p95_ms;
    j["max_ms"] = t.max_ms;
    j["frames_per_second"] = t.mean_ms > 0.0 ? 1000.0 / t.mean_ms : 0.0;
    return j.dump(2) + "\n";
}

// ---- raw frame dump -------------------------------------------------------

namespace {

template <typename T>
void put(std::ostream& os, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <typename T>
bool get(std::istream& is, T& v) {
    unsigned char b[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(b), sizeof(T))) return false;
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    std::memcpy(&v, b, sizeof(T));
    return true;
}

void put_grid(std::ostream& os, const ComplexGrid& g) {
    std::vector<float> buf(2 * g.size());
    auto flat = g.flat();
    for (std::size_t i = 0; i < flat.size(); ++i) {
        buf[2 * i] = static_cast<float>(flat[i].real());
        buf[2 * i + 1] = static_cast<float>(flat[i].imag());
    }
    if constexpr (std::endian::native == std::endian::little) {
        os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
    } else {
        for (float f : buf) put(os, f);
    }
}

bool get_grid(std::istream& is, ComplexGrid& g) {
    std::vector<float> buf(2 * g.size());
    if constexpr (std::endian::native == std::endian::little) {
        if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float))))
            return false;
    } else {
        for (auto& f : buf)
            if (!get(is, f)) return false;
    }
    auto flat = g.flat();
    for (std::size_t i = 0; i < flat.size(); ++i) flat[i] = Complex(buf[2 * i], buf[2 * i + 1]);
    return true;
}

} // namespace

FrameDumpHeader dump_header_for(const Scenario& sc) {
    FrameDumpHeader h;
    h.subcarriers = static_cast<std::uint32_t>(sc.params.subcarriers);
    h.symbols = static_cast<std::uint32_t>(sc.symbols_per_frame);
    h.carrier_hz = sc.params.carrier_hz;
    h.subcarrier_spacing_hz = sc.params.subcarrier_spacing_hz;
    h.cp_fraction = sc.params.cp_fraction;
    h.dl_mask = sc.dl_mask;
    return h;
}

FrameDumpWriter::FrameDumpWriter(const std::string& path, const FrameDumpHeader& header)
    : os_(path, std::ios::binary | std::ios::trunc), header_(header) {
    if (!os_) throw Error("cannot open '" + path + "' for writing");
    if (header.dl_mask.size() != header.symbols) throw DimensionError("dump header: mask length differs from symbols");
    os_.write(kMagic, sizeof(kMagic));
    put(os_, header.subcarriers);
    put(os_, header.symbols);
    put(os_, header.carrier_hz);
    put(os_, header.subcarrier_spacing_hz);
    put(os_, header.cp_fraction);
    os_.write(reinterpret_cast<const char*>(header.dl_mask.data()), static_cast<std::streamsize>(header.symbols));
}

void FrameDumpWriter::write(std::int64_t frame_index, std::uint32_t beam_index, const RadioFrame& tx,
                            const RadioFrame& rx) {
    if (tx.grid.rows() != header_.subcarriers || tx.grid.cols() != header_.symbols || !tx.grid.same_shape(rx.grid))
        throw DimensionError("frame dump: grid does not match the header");
    put(os_, frame_index);
    put(os_, beam_index);
    put(os_, rx.timestamp_s);
    put_grid(os_, tx.grid);
    put_grid(os_, rx.grid);
    if (!os_) throw Error("frame dump: write failed");
}

FrameDumpReader::FrameDumpReader(const std::string& path) : is_(path, std::ios::binary) {
    if (!is_) throw Error("cannot open '" + path + "'");
    char magic[8];
    if (!is_.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw ParseError("'" + path + "' is not an ISACFRM1 frame dump");
    if (!get(is_, header_.subcarriers) || !get(is_, header_.symbols) || !get(is_, header_.carrier_hz) ||
        !get(is_, header_.subcarrier_spacing_hz) || !get(is_, header_.cp_fraction))
        throw ParseError("frame dump: truncated header");
    if (header_.subcarriers == 0 || header_.symbols == 0) throw ParseError("frame dump: empty grid in header");
    header_.dl_mask.resize(header_.symbols);
    if (!is_.read(reinterpret_cast<char*>(header_.dl_mask.data()), header_.symbols))
        throw ParseError("frame dump: truncated DL mask");
}

std::optional<FrameDumpRecord> FrameDumpReader::next() {
    FrameDumpRecord rec;
    if (!get(is_, rec.frame_index)) {
        if (is_.eof() && is_.gcount() == 0) return std::nullopt;
        throw ParseError("frame dump: truncated record header");
    }
    if (!get(is_, rec.beam_index) || !get(is_, rec.timestamp_s)) throw ParseError("frame dump: truncated record header");
    for (RadioFrame* f : {&rec.tx, &rec.rx}) {
        f->grid = ComplexGrid(header_.subcarriers, header_.symbols);
        f->dl_mask = header_.dl_mask;
        f->frame_index = rec.frame_index;
        f->timestamp_s = rec.timestamp_s;
        if (!get_grid(is_, f->grid)) throw ParseError("frame dump: truncated grid");
    }
    return rec;
}

} // namespace isac
