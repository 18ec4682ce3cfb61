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
//
// Closed-form moment theory for the i.i.d.-carrier channel model: expected
// moments of the signal matrix as symmetric polynomials in the station
// powers, their inversion back to individual powers, and the sampling-noise
// covariance of recovered moments.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "freesense/moments.hpp"
#include "freesense/scenario.hpp"

namespace freesense {

/// E|h|^{2p} for a unit-power circular complex Gaussian h, evaluated through
/// the real/imaginary binomial expansion. Identically equal to p! (|h|^2 is
/// a unit-mean exponential variable); the expansion form is kept because the
/// power-moment formulas below are derived from it. Throws for p < 0.
double gaussian_abs_moment(int p);

/// Expected moments d_p = E[(sum_k P_k |h_k|^2)^p], p = 1..order, for
/// independent unit-power complex Gaussian carriers. Evaluates the
/// composition sum over per-station degrees with central-binomial weights;
/// algebraically d_p = p! * h_p(P) with h_p the complete homogeneous
/// symmetric polynomial. Exact for order <= 12 and moderate powers.
MomentVector theoretical_d(std::span<const double> powers, int order);

/// Inverts d_p = p! * h_p(P) to the power sums S_k = sum_i P_i^k, k = 1..M,
/// through Newton's identities (S_p = p h_p - sum_{i<p} S_i h_{p-i}).
/// Requires d.order() >= station_count.
std::vector<double> d_to_power_sums(const MomentVector& d, int station_count);

/// Power sums -> elementary symmetric polynomials -> roots of the monic
/// degree-M polynomial. Returns the roots sorted descending when they are
/// all real (|imag| <= 1e-6 * spectral scale) and nonnegative (>= -1e-6 *
/// scale, clamped to 0); std::nullopt otherwise (the power vector is not
/// identifiable from these sums).
std::optional<std::vector<double>> newton_girard_roots(std::span<const double> power_sums);

enum class CovarianceMethod { monte_carlo, analytic };

/// K x K covariance of the recovered-moment error w = d_obs - d_theory at a
/// hypothesized power vector. n_eff records the subcarrier count the matrix
/// was computed for; accumulating independent blocks scales it down.
struct NoiseCovariance {
    Eigen::MatrixXd matrix;
    std::int64_t n_eff = 0;
    CovarianceMethod origin = CovarianceMethod::monte_carlo;

    int order() const { return static_cast<int>(matrix.rows()); }

    /// Covariance after averaging `factor` independent blocks: matrix / factor,
    /// n_eff * factor.
    NoiseCovariance accumulated(int factor) const;
};

/// Moment-noise covariance at hypothesized powers.
///
/// monte_carlo (default): runs the full synthesize -> empirical moments ->
/// deconvolution pipeline `trials` times under the scenario's noise, channel
/// and alphabet settings with the hypothesis substituted for the powers, and
/// returns the second moment of (d_obs - d_theory) about zero, so both the
/// spread and the finite-size bias of the pipeline are charged to the error.
///
/// analytic: carrier-averaging covariance only,
/// C_ab = (d_{a+b} - d_a d_b) / N; cheap, but blind to deconvolution
/// residuals.
///
/// `seed_lane` decorrelates independent covariance estimates under one master
/// seed; trials parallelize over `workers` with per-trial derived seeds.
NoiseCovariance noise_covariance(const NetworkScenario& scenario,
                                 std::span<const double> hypothesis_powers,
                                 int order,
                                 int trials,
                                 CovarianceMethod method = CovarianceMethod::monte_carlo,
                                 std::uint64_t seed_lane = 0,
                                 int workers = 1);

}  // namespace freesense
