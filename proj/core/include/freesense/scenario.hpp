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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "freesense/keyvalue.hpp"

namespace freesense {

enum class Alphabet { gaussian, qpsk };

std::string to_string(Alphabet a);
Alphabet alphabet_from_string(const std::string& s);

/// Frequency-selectivity model of the per-station channels. The delay spread
/// tau (in time-domain samples) controls how decorrelated the frequency
/// response is across subcarriers: tau = N gives i.i.d. carriers, tau = 1 a
/// flat channel. The LTE presets scale tau with the DFT size.
struct ChannelModel {
    enum class Kind { iid_frequency, taps, preset_eva, preset_etu };

    Kind kind = Kind::iid_frequency;
    int tap_count = 0;  // meaningful for Kind::taps only

    static ChannelModel iid_frequency() { return {Kind::iid_frequency, 0}; }
    static ChannelModel taps(int tau) { return {Kind::taps, tau}; }
    static ChannelModel preset_eva() { return {Kind::preset_eva, 0}; }
    static ChannelModel preset_etu() { return {Kind::preset_etu, 0}; }

    /// Resolved delay spread for an N-subcarrier system.
    /// EVA resolves to round(N/27), ETU to round(N/13), both at least 1.
    /// Throws std::invalid_argument if the result lies outside [1, N].
    int delay_spread(int subcarriers) const;

    /// Text form used in scenario files: "iid-frequency", "taps(16)",
    /// "preset(EVA)", "preset(ETU)".
    std::string to_string() const;
    static ChannelModel parse(const std::string& text);

    bool operator==(const ChannelModel&) const = default;
};

/// Full description of one synthetic downlink experiment: M stations with
/// fixed per-station mean receive powers transmit i.i.d. unit-variance
/// frequency-domain symbols over N subcarriers for L OFDM symbols, observed
/// through random frequency-selective channels plus white Gaussian noise.
struct NetworkScenario {
    int stations = 0;                // M
    int subcarriers = 0;             // N
    int symbols = 0;                 // L
    std::vector<double> powers;      // size M, sorted descending, all >= 0
    double sigma2 = 0.0;             // noise variance
    ChannelModel channel_model;
    Alphabet alphabet = Alphabet::gaussian;
    std::uint64_t master_seed = 0;

    double aspect_ratio() const { return static_cast<double>(subcarriers) / symbols; }

    /// Throws std::invalid_argument on any broken invariant (dimension
    /// signs, powers order/sign/length, sigma2 sign, delay spread range).
    void validate() const;

    /// Copy with the power vector replaced (used for covariance hypotheses).
    NetworkScenario with_powers(std::vector<double> new_powers) const;

    /// `key = value` scenario files. Keys: M, N, L, powers, sigma2,
    /// channel_model, alphabet, master_seed. A symbols_override suppresses
    /// the L key (used by experiments that sweep L).
    static NetworkScenario from_file(const std::string& path);
    static NetworkScenario from_document(kv::Document& doc,
                                         std::optional<int> symbols_override = std::nullopt);
    std::string to_text() const;
};

}  // namespace freesense
