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

// Structured key-value text files used for link-budget parameters, scenarios
// and chain configuration.
//
//   # comment
//   [section]            (sections may repeat, e.g. one [target] per target)
//   key = value [unit]
//
// Quantities carry an optional unit suffix. Logarithmic units (dB, dBm,
// dBm/Hz, dBsm, ...) are converted to linear SI on read. A bare number is
// taken to already be in linear SI units. Fractions such as "1/14" are
// accepted wherever a number is.

#pragma once

#include "isac/common.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace isac {

enum class Dimension { any, ratio, frequency, power, psd, area, time, length, angle, velocity };

/// Parses "<number> [unit]" into linear SI. Throws ParseError on unknown
/// units or when the unit's dimension does not match `expected`.
double parse_quantity(std::string_view text, Dimension expected = Dimension::any);

/// Parses a plain number, allowing "a/b" fractions.
double parse_number(std::string_view text);

class KeyValueSection {
public:
    KeyValueSection(std::string name, int line) : name_(std::move(name)), line_(line) {}

    const std::string& name() const noexcept { return name_; }
    int line() const noexcept { return line_; }

    void set(std::string key, std::string value);
    bool has(std::string_view key) const;
    const std::string& text(std::string_view key) const;
    std::optional<std::string> find(std::string_view key) const;

    double quantity(std::string_view key, Dimension dim) const;
    double quantity_or(std::string_view key, Dimension dim, double fallback) const;
    long long integer(std::string_view key) const;
    long long integer_or(std::string_view key, long long fallback) const;
    bool boolean_or(std::string_view key, bool fallback) const;

    const std::vector<std::pair<std::string, std::string>>& entries() const noexcept {
        return entries_;
    }

private:
    std::string name_;
    int line_;
    std::vector<std::pair<std::string, std::string>> entries_;
};

class KeyValueDocument {
public:
    static KeyValueDocument parse(std::istream& in, std::string source = "<input>");
    static KeyValueDocument parse_string(std::string_view text, std::string source = "<string>");
    static KeyValueDocument load(const std::string& path);

    const std::string& source() const noexcept { return source_; }
    const std::vector<KeyValueSection>& sections() const noexcept { return sections_; }

    /// All sections with the given name, in file order. Keys that precede
    /// any section header belong to the section named "".
    std::vector<const KeyValueSection*> all(std::string_view name) const;
    const KeyValueSection* first(std::string_view name) const;

private:
    std::string source_;
    std::vector<KeyValueSection> sections_;
};

} // namespace isac
