// SPDX-License-Identifier: Apache-2.0
//
// freesense: blind estimation of multi-cell OFDM transmit powers from the
// eigenvalue moments of the received sample covariance matrix.
// Copyright (C) 2026 the freesense authors
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

#include "freesense/rng.hpp"

#include <cmath>
#include <numbers>

namespace freesense {

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master_seed,
                          std::uint64_t trial,
                          RngStream stream,
                          std::uint64_t lane) noexcept {
    std::uint64_t s = mix64(master_seed ^ 0xA5A5A5A55A5A5A5AULL);
    s = mix64(s ^ (trial * 0xD1342543DE82EF95ULL));
    s = mix64(s ^ (static_cast<std::uint64_t>(stream) * 0xAF251AF3B0F025B5ULL +
                   lane * 0x9E3779B97F4A7C15ULL));
    return s;
}

std::complex<double> Rng::complex_gaussian() {
    // Box-Muller in polar form. u1 in (0, 1] keeps the log finite.
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(phi), r * std::sin(phi)};
}

std::complex<double> Rng::qpsk() {
    static constexpr double kInvSqrt2 = 0.70710678118654752440;
    const std::uint64_t bits = engine_();
    return {(bits & 1) ? kInvSqrt2 : -kInvSqrt2, (bits & 2) ? kInvSqrt2 : -kInvSqrt2};
}

}  // namespace freesense
