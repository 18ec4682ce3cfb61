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

#include <cmath>
#include <limits>
#include <vector>

#include <doctest.h>

#include "freesense/moments.hpp"
#include "freesense/rng.hpp"

using namespace freesense;

namespace {

Eigen::MatrixXcd random_matrix(int rows, int cols, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXcd y(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) y(i, j) = rng.complex_gaussian();
    return y;
}

// Independent route: trace of explicit Gram-matrix powers.
std::vector<double> trace_power_moments(const Eigen::MatrixXcd& y, int order) {
    const Eigen::Index n = y.rows();
    const Eigen::MatrixXcd gram = y * y.adjoint() / static_cast<double>(y.cols());
    std::vector<double> out;
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Identity(n, n);
    for (int k = 1; k <= order; ++k) {
        acc = acc * gram;
        out.push_back(acc.trace().real() / static_cast<double>(n));
    }
    return out;
}

}  // namespace

TEST_CASE("identity-like block has unit moments at every order") {
    const int n = 5;
    const int l = 8;
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, l);
    for (int i = 0; i < n; ++i) y(i, i) = std::sqrt(static_cast<double>(l));
    const MomentVector m = empirical_moments(y, 6);
    for (int k = 1; k <= 6; ++k) CHECK(m.moment(k) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.c == doctest::Approx(n / static_cast<double>(l)));
    CHECK(m.n_eff == n);
}

TEST_CASE("zero matrix has zero moments") {
    const MomentVector m = empirical_moments(Eigen::MatrixXcd::Zero(4, 6), 3);
    for (int k = 1; k <= 3; ++k) CHECK(m.moment(k) == 0.0);
}

TEST_CASE("eigenvalue route equals trace-of-powers route") {
    SUBCASE("4x8") {
        const Eigen::MatrixXcd y = random_matrix(4, 8, 21);
        const MomentVector m = empirical_moments(y, 8);
        const auto oracle = trace_power_moments(y, 8);
        for (int k = 1; k <= 8; ++k)
            CHECK(m.moment(k) ==
                  doctest::Approx(oracle[static_cast<std::size_t>(k) - 1]).epsilon(1e-8));
    }
    SUBCASE("64x40, tall Gram") {
        const Eigen::MatrixXcd y = random_matrix(64, 40, 22);
        const MomentVector m = empirical_moments(y, 6);
        const auto oracle = trace_power_moments(y, 6);
        for (int k = 1; k <= 6; ++k)
            CHECK(m.moment(k) ==
                  doctest::Approx(oracle[static_cast<std::size_t>(k) - 1]).epsilon(1e-8));
    }
}

TEST_CASE("moments scale as alpha^2k when the matrix scales by alpha") {
    const Eigen::MatrixXcd y = random_matrix(6, 12, 33);
    const double alpha = 2.0;
    const MomentVector m = empirical_moments(y, 5);
    const MomentVector ms = empirical_moments(alpha * y, 5);
    double factor = 1.0;
    for (int k = 1; k <= 5; ++k) {
        factor *= alpha * alpha;
        CHECK(ms.moment(k) == doctest::Approx(factor * m.moment(k)).epsilon(1e-13));
    }
}

TEST_CASE("positive-semidefinite moments satisfy Jensen") {
    const Eigen::MatrixXcd y = random_matrix(16, 24, 44);
    const MomentVector m = empirical_moments(y, 4);
    for (int k = 1; k <= 4; ++k) CHECK(m.moment(k) >= 0.0);
    CHECK(m.moment(2) >= m.moment(1) * m.moment(1));
}

TEST_CASE("non-finite input is rejected") {
    Eigen::MatrixXcd y = random_matrix(4, 4, 55);
    y(1, 2) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(empirical_moments(y, 2), std::invalid_argument);
    CHECK_THROWS_AS(empirical_moments(random_matrix(4, 4, 56), 0), std::invalid_argument);
}

TEST_CASE("accumulate: single input unchanged, identical pair doubles n_eff") {
    const MomentVector m = empirical_moments(random_matrix(8, 16, 66), 3);

    const MomentVector single = accumulate(std::vector<MomentVector>{m});
    CHECK(single.values == m.values);
    CHECK(single.n_eff == m.n_eff);

    const MomentVector pair = accumulate(std::vector<MomentVector>{m, m});
    CHECK(pair.values == m.values);
    CHECK(pair.n_eff == 2 * m.n_eff);
    CHECK(pair.c == m.c);
}

TEST_CASE("accumulate rejects mismatched shapes") {
    const MomentVector a = empirical_moments(random_matrix(8, 16, 67), 3);
    const MomentVector b = empirical_moments(random_matrix(8, 16, 68), 4);
    const MomentVector c = empirical_moments(random_matrix(8, 32, 69), 3);
    CHECK_THROWS_AS(accumulate(std::vector<MomentVector>{a, b}), std::invalid_argument);
    CHECK_THROWS_AS(accumulate(std::vector<MomentVector>{a, c}), std::invalid_argument);
    CHECK_THROWS_AS(accumulate(std::vector<MomentVector>{}), std::invalid_argument);
}

TEST_CASE("accumulating ten noise blocks shrinks the spread by about sqrt(10)") {
    const int repeats = 300;
    std::vector<double> single_m1;
    std::vector<double> accum_m1;
    std::uint64_t seed = 1000;
    for (int r = 0; r < repeats; ++r) {
        std::vector<MomentVector> batch;
        for (int i = 0; i < 10; ++i)
            batch.push_back(empirical_moments(random_matrix(32, 64, seed++), 2));
        single_m1.push_back(batch.front().moment(1));
        accum_m1.push_back(accumulate(batch).moment(1));
    }
    auto stddev = [](const std::vector<double>& v) {
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double acc = 0.0;
        for (double x : v) acc += (x - mean) * (x - mean);
        return std::sqrt(acc / static_cast<double>(v.size() - 1));
    };
    const double ratio = stddev(single_m1) / stddev(accum_m1);
    CHECK(ratio > 2.2);
    CHECK(ratio < 4.6);
}
