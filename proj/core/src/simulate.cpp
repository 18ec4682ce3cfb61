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

#include "freesense/simulate.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "freesense/rng.hpp"

namespace freesense {

namespace {

// One station's N x L symbol block, column-major draw order. Each station has
// its own derived stream so gen_symbols and synthesize agree entry for entry.
Eigen::MatrixXcd station_symbols(const NetworkScenario& scenario,
                                 std::uint64_t trial_seed,
                                 int station) {
    Rng rng(derive_seed(scenario.master_seed, trial_seed, RngStream::symbols,
                        static_cast<std::uint64_t>(station)));
    Eigen::MatrixXcd s(scenario.subcarriers, scenario.symbols);
    if (scenario.alphabet == Alphabet::gaussian) {
        for (Eigen::Index j = 0; j < s.cols(); ++j)
            for (Eigen::Index i = 0; i < s.rows(); ++i) s(i, j) = rng.complex_gaussian();
    } else {
        for (Eigen::Index j = 0; j < s.cols(); ++j)
            for (Eigen::Index i = 0; i < s.rows(); ++i) s(i, j) = rng.qpsk();
    }
    return s;
}

}  // namespace

ChannelRealization gen_channels(const NetworkScenario& scenario, std::uint64_t trial_seed) {
    scenario.validate();
    const int n = scenario.subcarriers;
    const int tau = scenario.channel_model.delay_spread(n);
    const double tap_scale = 1.0 / std::sqrt(static_cast<double>(tau));

    // DFT twiddle table, e^{-2 pi i m / N} for m = 0..N-1.
    std::vector<std::complex<double>> twiddle(static_cast<std::size_t>(n));
    for (int m = 0; m < n; ++m) {
        const double phi = -2.0 * std::numbers::pi * m / n;
        twiddle[static_cast<std::size_t>(m)] = {std::cos(phi), std::sin(phi)};
    }

    ChannelRealization out;
    out.response.resize(scenario.stations, n);
    std::vector<std::complex<double>> taps(static_cast<std::size_t>(tau));
    for (int k = 0; k < scenario.stations; ++k) {
        Rng rng(derive_seed(scenario.master_seed, trial_seed, RngStream::channel,
                            static_cast<std::uint64_t>(k)));
        for (int t = 0; t < tau; ++t)
            taps[static_cast<std::size_t>(t)] = tap_scale * rng.complex_gaussian();
        for (int j = 0; j < n; ++j) {
            std::complex<double> acc = 0.0;
            for (int t = 0; t < tau; ++t) {
                const int idx = static_cast<int>((static_cast<long long>(j) * t) % n);
                acc += taps[static_cast<std::size_t>(t)] * twiddle[static_cast<std::size_t>(idx)];
            }
            out.response(k, j) = acc;
        }
    }
    return out;
}

Eigen::MatrixXcd gen_symbols(const NetworkScenario& scenario, std::uint64_t trial_seed) {
    scenario.validate();
    Eigen::MatrixXcd theta(static_cast<Eigen::Index>(scenario.stations) * scenario.subcarriers,
                           scenario.symbols);
    for (int k = 0; k < scenario.stations; ++k)
        theta.middleRows(static_cast<Eigen::Index>(k) * scenario.subcarriers,
                         scenario.subcarriers) = station_symbols(scenario, trial_seed, k);
    return theta;
}

Eigen::MatrixXcd gen_noise(const NetworkScenario& scenario, std::uint64_t trial_seed) {
    scenario.validate();
    Rng rng(derive_seed(scenario.master_seed, trial_seed, RngStream::noise));
    Eigen::MatrixXcd w(scenario.subcarriers, scenario.symbols);
    for (Eigen::Index j = 0; j < w.cols(); ++j)
        for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = rng.complex_gaussian();
    return w;
}

ReceivedBlock synthesize(const NetworkScenario& scenario, std::uint64_t trial_seed) {
    scenario.validate();
    ReceivedBlock block;
    block.scenario = scenario;
    block.trial_seed = trial_seed;
    block.channels = gen_channels(scenario, trial_seed);

    block.y = Eigen::MatrixXcd::Zero(scenario.subcarriers, scenario.symbols);
    for (int k = 0; k < scenario.stations; ++k) {
        const double amplitude = std::sqrt(scenario.powers[static_cast<std::size_t>(k)]);
        const Eigen::VectorXcd gain =
            amplitude * block.channels.response.row(k).transpose();
        block.y.noalias() += gain.asDiagonal() * station_symbols(scenario, trial_seed, k);
    }
    if (scenario.sigma2 > 0.0)
        block.y += std::sqrt(scenario.sigma2) * gen_noise(scenario, trial_seed);
    return block;
}

MomentVector true_hph_moments(const ChannelRealization& channels,
                              const std::vector<double>& powers,
                              int order) {
    if (order < 1) throw std::invalid_argument("moment order must be >= 1");
    if (static_cast<int>(powers.size()) != channels.stations())
        throw std::invalid_argument("powers size must match station count");

    const int n = channels.subcarriers();
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    for (int k = 0; k < channels.stations(); ++k)
        diag += powers[static_cast<std::size_t>(k)] *
                channels.response.row(k).cwiseAbs2().transpose();

    MomentVector out;
    out.values.assign(static_cast<std::size_t>(order), 0.0);
    out.c = 0.0;
    out.n_eff = n;
    Eigen::VectorXd power = Eigen::VectorXd::Ones(n);
    for (int p = 1; p <= order; ++p) {
        power.array() *= diag.array();
        out.values[static_cast<std::size_t>(p) - 1] = power.mean();
    }
    return out;
}

}  // namespace freesense
