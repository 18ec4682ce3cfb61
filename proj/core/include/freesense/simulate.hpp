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
#include <vector>

#include <Eigen/Core>

#include "freesense/moments.hpp"
#include "freesense/scenario.hpp"

namespace freesense {

/// Frequency responses of the M station-to-terminal channels; row k holds the
/// response of station k over the N subcarriers. Rows are independent;
/// per-carrier power is normalized to E|h_kj|^2 = 1.
struct ChannelRealization {
    Eigen::MatrixXcd response;  // M x N

    int stations() const { return static_cast<int>(response.rows()); }
    int subcarriers() const { return static_cast<int>(response.cols()); }
};

/// One synthesized observation window: the N x L received matrix together
/// with the exact channel realization and scenario that produced it. The
/// whole block is reconstructible bit-exactly from (scenario, trial_seed).
struct ReceivedBlock {
    Eigen::MatrixXcd y;  // N x L
    ChannelRealization channels;
    NetworkScenario scenario;
    std::uint64_t trial_seed = 0;
};

/// Draws the M channel rows. Each row is the N-point DFT of a length-tau
/// vector of i.i.d. circular complex Gaussian taps with per-tap variance
/// 1/tau, zero-padded to N, so that E|h_kj|^2 = 1 on every carrier.
ChannelRealization gen_channels(const NetworkScenario& scenario, std::uint64_t trial_seed);

/// Stacked MN x L block of transmitted frequency-domain symbols; rows
/// [kN, (k+1)N) belong to station k. Entries are i.i.d. zero-mean
/// unit-variance draws from the scenario alphabet.
Eigen::MatrixXcd gen_symbols(const NetworkScenario& scenario, std::uint64_t trial_seed);

/// N x L matrix of i.i.d. circular complex Gaussian noise, unit variance
/// (the sigma scaling is applied by synthesize).
Eigen::MatrixXcd gen_noise(const NetworkScenario& scenario, std::uint64_t trial_seed);

/// Y = sum_k sqrt(P_k) diag(h_k) S_k + sigma * W. Channel, symbol and noise
/// draws come from independent derived streams, so the same trial re-run with
/// scaled powers reuses identical underlying standard draws.
ReceivedBlock synthesize(const NetworkScenario& scenario, std::uint64_t trial_seed);

/// Finite-N ground-truth moments nu_p = (1/N) sum_j (sum_k P_k |h_kj|^2)^p,
/// p = 1..order: the exact moments of the diagonal matrix the deconvolution
/// pipeline tries to recover. Used to score recovered moments.
MomentVector true_hph_moments(const ChannelRealization& channels,
                              const std::vector<double>& powers,
                              int order);

}  // namespace freesense
