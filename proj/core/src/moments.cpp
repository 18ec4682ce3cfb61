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

#include "freesense/moments.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace freesense {

MomentVector empirical_moments(const Eigen::MatrixXcd& y, int order) {
    if (order < 1) throw std::invalid_argument("moment order must be >= 1");
    if (!y.allFinite()) throw std::invalid_argument("received matrix has non-finite entries");

    const Eigen::Index n = y.rows();
    const Eigen::Index l = y.cols();
    if (n < 1 || l < 1) throw std::invalid_argument("received matrix is empty");

    Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(n, n);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(y, 1.0 / static_cast<double>(l));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(gram, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eigenvalue decomposition failed");
    const Eigen::VectorXd lambda = solver.eigenvalues();

    MomentVector out;
    out.values.assign(static_cast<std::size_t>(order), 0.0);
    out.c = static_cast<double>(n) / static_cast<double>(l);
    out.n_eff = static_cast<std::int64_t>(n);

    Eigen::VectorXd power = Eigen::VectorXd::Ones(n);
    for (int k = 1; k <= order; ++k) {
        power.array() *= lambda.array();
        out.values[static_cast<std::size_t>(k) - 1] = power.sum() / static_cast<double>(n);
    }
    return out;
}

MomentVector accumulate(std::span<const MomentVector> vectors) {
    if (vectors.empty()) throw std::invalid_argument("accumulate: empty input");
    const MomentVector& first = vectors.front();
    MomentVector out;
    out.values.assign(first.values.size(), 0.0);
    out.c = first.c;
    out.n_eff = 0;
    for (const MomentVector& v : vectors) {
        if (v.values.size() != first.values.size())
            throw std::invalid_argument("accumulate: mismatched moment order");
        if (v.c != first.c)
            throw std::invalid_argument("accumulate: mismatched aspect ratio");
        for (std::size_t i = 0; i < v.values.size(); ++i) out.values[i] += v.values[i];
        out.n_eff += v.n_eff;
    }
    const double inv = 1.0 / static_cast<double>(vectors.size());
    for (double& v : out.values) v *= inv;
    return out;
}

}  // namespace freesense
