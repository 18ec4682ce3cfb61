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
#include <span>
#include <vector>

#include <Eigen/Core>

namespace freesense {

/// Ordered normalized-trace moments (m_1, ..., m_K) of a Hermitian matrix or
/// of a limit distribution. `c` is the aspect ratio N/L the moments were
/// measured at (0 for limit laws); `n_eff` counts the subcarriers that
/// contributed, which grows under accumulation and drives covariance scaling.
struct MomentVector {
    std::vector<double> values;
    double c = 0.0;
    std::int64_t n_eff = 0;

    int order() const { return static_cast<int>(values.size()); }

    /// 1-based access: moment(k) = m_k.
    double moment(int k) const { return values.at(static_cast<std::size_t>(k) - 1); }
};

/// m_k = (1/N) sum_i lambda_i^k for the eigenvalues lambda_i of the Gram
/// matrix (1/L) Y Y^H, k = 1..order. One Hermitian eigendecomposition serves
/// every order. Throws std::invalid_argument on order < 1 or non-finite Y.
MomentVector empirical_moments(const Eigen::MatrixXcd& y, int order);

/// Entrywise mean of moment vectors sharing order and aspect ratio; n_eff
/// adds up. Throws std::invalid_argument on shape mismatch or empty input.
MomentVector accumulate(std::span<const MomentVector> vectors);

}  // namespace freesense
