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

// Counter-based seeding so that any frame can be generated independently of
// all others: parallel and serial synthesis agree bit for bit.

#pragma once

#include <boost/random/normal_distribution.hpp>

#include <cstdint>
#include <random>

namespace isac {

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed, std::int64_t frame_index, std::uint64_t stream,
                          std::uint64_t object) {
    const auto frame = static_cast<std::uint64_t>(frame_index);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(frame), static_cast<std::uint32_t>(frame >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(object)};
    return Engine(seq);
}

/// Zero-mean unit-variance Gaussian (ziggurat). Stateless between calls, so
/// the drawn sequence depends only on the engine state.
using NormalSource = boost::random::normal_distribution<double>;

inline double standard_normal(Engine& eng) { return NormalSource{}(eng); }

} // namespace isac
