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

#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace freesense {

/// Independent random streams hanging off one master seed. Every stochastic
/// component of a trial (channel taps, symbols, additive noise, ...) draws
/// from its own derived stream, so a component can be regenerated bit-exactly
/// without replaying the others.
enum class RngStream : std::uint64_t {
    channel = 0x01,
    symbols = 0x02,
    noise = 0x03,
    covariance = 0x04,
    experiment = 0x05,
};

/// splitmix64 finalizer; bijective on 64-bit words.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed for (master_seed, trial, stream, lane). The chain is
/// mix64(mix64(mix64(master ^ A) ^ trial*B) ^ (stream*C + lane*D)) with fixed
/// odd constants, i.e. a documented counter scheme: trials are numbered, not
/// split from a shared generator, so workers can draw trials in any order.
std::uint64_t derive_seed(std::uint64_t master_seed,
                          std::uint64_t trial,
                          RngStream stream,
                          std::uint64_t lane = 0) noexcept;

/// mt19937_64 wrapped with explicit Box-Muller and QPSK draws. <random>
/// distributions are not bit-portable across standard libraries; these are.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform double in [0, 1), 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Circular complex Gaussian, E[z] = 0, E|z|^2 = 1.
    std::complex<double> complex_gaussian();

    /// Uniform over {(+-1 +- i)/sqrt(2)}; unit modulus, E[z] = 0, E|z|^2 = 1.
    std::complex<double> qpsk();

    std::uint64_t raw() { return engine_(); }

  private:
    std::mt19937_64 engine_;
};

}  // namespace freesense
