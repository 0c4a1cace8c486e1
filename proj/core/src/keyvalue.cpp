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

#include "isac/keyvalue.hpp"

#include "isac/common.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

namespace isac {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

double parse_plain(std::string_view s) {
    s = trim(s);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ParseError("not a number: '" + std::string(s) + "'");
    return v;
}

enum class Scale { linear, db10, dbm };

struct UnitInfo {
    std::string_view name;
    Dimension dim;
    Scale scale;
    double factor; // multiplier applied after dB conversion
};

// dBm-type units yield watts (or W/Hz) after conversion.
constexpr UnitInfo kUnits[] = {
    {"Hz", Dimension::frequency, Scale::linear, 1.0},
    {"kHz", Dimension::frequency, Scale::linear, 1e3},
    {"MHz", Dimension::frequency, Scale::linear, 1e6},
    {"GHz", Dimension::frequency, Scale::linear, 1e9},
    {"W", Dimension::power, Scale::linear, 1.0},
    {"mW", Dimension::power, Scale::linear, 1e-3},
    {"dBm", Dimension::power, Scale::dbm, 1.0},
    {"dBW", Dimension::power, Scale::db10, 1.0},
    {"W/Hz", Dimension::psd, Scale::linear, 1.0},
    {"dBm/Hz", Dimension::psd, Scale::dbm, 1.0},
    {"dBW/Hz", Dimension::psd, Scale::db10, 1.0},
    {"m2", Dimension::area, Scale::linear, 1.0},
    {"m^2", Dimension::area, Scale::linear, 1.0},
    {"dBsm", Dimension::area, Scale::db10, 1.0},
    {"s", Dimension::time, Scale::linear, 1.0},
    {"ms", Dimension::time, Scale::linear, 1e-3},
    {"us", Dimension::time, Scale::linear, 1e-6},
    {"m", Dimension::length, Scale::linear, 1.0},
    {"km", Dimension::length, Scale::linear, 1e3},
    {"deg", Dimension::angle, Scale::linear, 1.0},
    {"rad", Dimension::angle, Scale::linear, 180.0 / kPi},
    {"m/s", Dimension::velocity, Scale::linear, 1.0},
    {"dB", Dimension::ratio, Scale::db10, 1.0},
    {"lin", Dimension::ratio, Scale::linear, 1.0},
};

} // namespace

double parse_number(std::string_view text) {
    text = trim(text);
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        double num = parse_plain(text.substr(0, slash));
        double den = parse_plain(text.substr(slash + 1));
        if (den == 0.0) throw ParseError("zero denominator in '" + std::string(text) + "'");
        return num / den;
    }
    return parse_plain(text);
}

double parse_quantity(std::string_view text, Dimension expected) {
    text = trim(text);
    auto split = text.find_first_of(" \t");
    std::string_view number = text;
    std::string_view unit;
    if (split != std::string_view::npos) {
        number = text.substr(0, split);
        unit = trim(text.substr(split));
    }
    const double value = parse_number(number);
    if (unit.empty()) return value;

    auto it = std::find_if(std::begin(kUnits), std::end(kUnits),
                           [&](const UnitInfo& u) { return u.name == unit; });
    if (it == std::end(kUnits)) throw ParseError("unknown unit '" + std::string(unit) + "'");
    if (expected != Dimension::any && it->dim != expected)
        throw ParseError("unit '" + std::string(unit) + "' has the wrong dimension in '" +
                         std::string(text) + "'");
    switch (it->scale) {
    case Scale::linear: return value * it->factor;
    case Scale::db10: return db_to_linear(value) * it->factor;
    case Scale::dbm: return dbm_to_watts(value) * it->factor;
    }
    return value;
}

void KeyValueSection::set(std::string key, std::string value) {
    for (auto& [k, v] : entries_) {
        if (k == key) {
            v = std::move(value);
            return;
        }
    }
    entries_.emplace_back(std::move(key), std::move(value));
}

bool KeyValueSection::has(std::string_view key) const { return find(key).has_value(); }

std::optional<std::string> KeyValueSection::find(std::string_view key) const {
    for (const auto& [k, v] : entries_)
        if (k == key) return v;
    return std::nullopt;
}

const std::string& KeyValueSection::text(std::string_view key) const {
    for (const auto& [k, v] : entries_)
        if (k == key) return v;
    throw ParseError("missing key '" + std::string(key) + "' in section [" + name_ + "] (line " +
                     std::to_string(line_) + ")");
}

double KeyValueSection::quantity(std::string_view key, Dimension dim) const {
    try {
        return parse_quantity(text(key), dim);
    } catch (const ParseError& e) {
        throw ParseError("[" + name_ + "] " + std::string(key) + ": " + e.what());
    }
}

double KeyValueSection::quantity_or(std::string_view key, Dimension dim, double fallback) const {
    return has(key) ? quantity(key, dim) : fallback;
}

long long KeyValueSection::integer(std::string_view key) const {
    const auto& s = text(key);
    auto t = trim(s);
    long long v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size())
        throw ParseError("[" + name_ + "] " + std::string(key) + ": not an integer: '" + s + "'");
    return v;
}

long long KeyValueSection::integer_or(std::string_view key, long long fallback) const {
    return has(key) ? integer(key) : fallback;
}

bool KeyValueSection::boolean_or(std::string_view key, bool fallback) const {
    auto v = find(key);
    if (!v) return fallback;
    auto t = trim(*v);
    if (t == "true" || t == "yes" || t == "on" || t == "1") return true;
    if (t == "false" || t == "no" || t == "off" || t == "0") return false;
    throw ParseError("[" + name_ + "] " + std::string(key) + ": not a boolean: '" + *v + "'");
}

KeyValueDocument KeyValueDocument::parse(std::istream& in, std::string source) {
    KeyValueDocument doc;
    doc.source_ = std::move(source);
    doc.sections_.emplace_back("", 0);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view view = line;
        if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = trim(view);
        if (view.empty()) continue;
        if (view.front() == '[') {
            if (view.back() != ']')
                throw ParseError(doc.source_ + ":" + std::to_string(lineno) + ": unterminated section");
            doc.sections_.emplace_back(std::string(trim(view.substr(1, view.size() - 2))), lineno);
            continue;
        }
        auto eq = view.find('=');
        if (eq == std::string_view::npos)
            throw ParseError(doc.source_ + ":" + std::to_string(lineno) + ": expected 'key = value'");
        auto key = trim(view.substr(0, eq));
        auto value = trim(view.substr(eq + 1));
        if (key.empty())
            throw ParseError(doc.source_ + ":" + std::to_string(lineno) + ": empty key");
        doc.sections_.back().set(std::string(key), std::string(value));
    }
    return doc;
}

KeyValueDocument KeyValueDocument::parse_string(std::string_view text, std::string source) {
    std::istringstream in{std::string(text)};
    return parse(in, std::move(source));
}

KeyValueDocument KeyValueDocument::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    return parse(in, path);
}

std::vector<const KeyValueSection*> KeyValueDocument::all(std::string_view name) const {
    std::vector<const KeyValueSection*> out;
    for (const auto& s : sections_)
        if (s.name() == name) out.push_back(&s);
    return out;
}

const KeyValueSection* KeyValueDocument::first(std::string_view name) const {
    for (const auto& s : sections_)
        if (s.name() == name) return &s;
    return nullptr;
}

} // namespace isac
