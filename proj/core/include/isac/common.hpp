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

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace isac {

using Complex = std::complex<double>;

inline constexpr double kSpeedOfLight = 299792458.0; // m/s, used as the speed in air
inline constexpr double kPi = std::numbers::pi;

// ---- errors ---------------------------------------------------------------

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters, scenario or chain configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Operands with mismatched dimensions or masks.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A range that lies outside the receive window [r_low, r_limit].
class OutOfWindowError : public Error {
public:
    using Error::Error;
};

/// Malformed input files.
class ParseError : public Error {
public:
    using Error::Error;
};

// ---- dB helpers -----------------------------------------------------------

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

// ---- dense row-major matrix -----------------------------------------------

template <typename T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<T> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const T> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    std::span<T> flat() noexcept { return data_; }
    std::span<const T> flat() const noexcept { return data_; }
    T* data() noexcept { return data_.data(); }
    const T* data() const noexcept { return data_.data(); }

    bool same_shape(const Matrix& other) const noexcept {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using ComplexGrid = Matrix<Complex>;
using PowerGrid = Matrix<double>;

/// Per-symbol downlink flag: 1 where the OFDM symbol carries DL payload, 0 for UL/gap symbols.
using DlMask = std::vector<std::uint8_t>;

inline std::size_t count_dl(const DlMask& mask) {
    std::size_t n = 0;
    for (auto v : mask) n += v ? 1 : 0;
    return n;
}

/// Smallest P dividing mask.size() with mask[i] == mask[i % P] for all i.
/// mask.size() when the mask does not repeat.
inline std::size_t mask_period(const DlMask& mask) {
    const std::size_t s = mask.size();
    for (std::size_t period = 1; period < s; ++period) {
        if (s % period != 0) continue;
        bool repeats = true;
        for (std::size_t i = period; i < s && repeats; ++i) repeats = mask[i] == mask[i % period];
        if (repeats) return period;
    }
    return s;
}

} // namespace isac
