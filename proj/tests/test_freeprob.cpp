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
#include <numbers>
#include <vector>

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "freesense/free_deconv.hpp"
#include "freesense/moments.hpp"
#include "freesense/rng.hpp"

using namespace freesense;

namespace {

MomentVector dirac_moments(double location, int order) {
    MomentVector m;
    double v = 1.0;
    for (int k = 0; k < order; ++k) {
        v *= location;
        m.values.push_back(v);
    }
    return m;
}

MomentVector random_moments(std::uint64_t seed, int order, double low = 0.1, double high = 10.0) {
    Rng rng(seed);
    MomentVector m;
    for (int k = 0; k < order; ++k) m.values.push_back(low + (high - low) * rng.uniform01());
    return m;
}

// Moments m_k = sum_i w_i x_i^k of a random atomic measure, rescaled so the
// mean is log-uniform in [0.1, 10]. Genuine moment sequences keep the
// transform recursions well conditioned; unstructured vectors do not.
MomentVector random_measure_moments(std::uint64_t seed, int order) {
    Rng rng(seed);
    const int atoms = 6;
    std::vector<double> x(atoms);
    std::vector<double> w(atoms);
    double total = 0.0;
    for (int i = 0; i < atoms; ++i) {
        x[static_cast<std::size_t>(i)] = 0.05 + 2.45 * rng.uniform01();
        w[static_cast<std::size_t>(i)] = 0.05 + rng.uniform01();
        total += w[static_cast<std::size_t>(i)];
    }
    double mean = 0.0;
    for (int i = 0; i < atoms; ++i)
        mean += w[static_cast<std::size_t>(i)] / total * x[static_cast<std::size_t>(i)];
    const double scale = 0.1 * std::pow(100.0, rng.uniform01()) / mean;

    MomentVector m;
    for (int k = 1; k <= order; ++k) {
        double mk = 0.0;
        for (int i = 0; i < atoms; ++i)
            mk += w[static_cast<std::size_t>(i)] / total *
                  std::pow(scale * x[static_cast<std::size_t>(i)], k);
        m.values.push_back(mk);
    }
    return m;
}

Eigen::MatrixXcd random_gaussian(int rows, int cols, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXcd y(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) y(i, j) = rng.complex_gaussian();
    return y;
}

double max_rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
    REQUIRE(a.size() == b.size());
    // Per-entry relative error, floored at 1e-9 of the largest entry so that
    // accidentally tiny entries of mixed-scale sequences do not dominate.
    double vec_scale = 1e-30;
    for (std::size_t i = 0; i < a.size(); ++i)
        vec_scale = std::max({vec_scale, std::abs(a[i]), std::abs(b[i])});
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double scale = std::max({std::abs(a[i]), std::abs(b[i]), 1e-9 * vec_scale});
        worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
    }
    return worst;
}

}  // namespace

TEST_CASE("a point mass has only a first free cumulant") {
    const CumulantVector k = moments_to_free_cumulants(dirac_moments(1.7, 3));
    CHECK(k.values[0] == doctest::Approx(1.7).epsilon(1e-12));
    CHECK(std::abs(k.values[1]) < 1e-12);
    CHECK(std::abs(k.values[2]) < 1e-12);
}

TEST_CASE("a single cumulant expands into point-mass moments") {
    CumulantVector k;
    k.values = {0.6, 0.0, 0.0, 0.0};
    const MomentVector m = free_cumulants_to_moments(k);
    double v = 1.0;
    for (int p = 1; p <= 4; ++p) {
        v *= 0.6;
        CHECK(m.moment(p) == doctest::Approx(v).epsilon(1e-12));
    }

    CumulantVector zero;
    zero.values = {0.0, 0.0, 0.0};
    for (double mv : free_cumulants_to_moments(zero).values) CHECK(mv == 0.0);
}

TEST_CASE("Marchenko-Pastur moments: closed forms and the c^(k-1) cumulants") {
    for (double c : {0.25, 0.5, 1.0, 2.0}) {
        const MomentVector m = mp_moments(c, 8);
        CHECK(m.moment(1) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(m.moment(2) == doctest::Approx(1.0 + c).epsilon(1e-12));
        CHECK(m.moment(3) == doctest::Approx(1.0 + 3.0 * c + c * c).epsilon(1e-12));

        const CumulantVector k = moments_to_free_cumulants(m);
        double expected = 1.0;
        for (int j = 1; j <= 8; ++j) {
            CHECK(k.values[static_cast<std::size_t>(j) - 1] ==
                  doctest::Approx(expected).epsilon(1e-10));
            expected *= c;
        }
    }

    // c = 1 gives the Catalan numbers.
    const MomentVector cat = mp_moments(1.0, 4);
    CHECK(cat.moment(1) == doctest::Approx(1.0));
    CHECK(cat.moment(2) == doctest::Approx(2.0));
    CHECK(cat.moment(3) == doctest::Approx(5.0));
    CHECK(cat.moment(4) == doctest::Approx(14.0));

    // c -> 0 collapses onto a point mass at 1.
    const MomentVector tiny = mp_moments(1e-9, 6);
    for (int p = 1; p <= 6; ++p) CHECK(tiny.moment(p) == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("moment/cumulant transforms invert each other") {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const MomentVector m = random_measure_moments(seed, 10);
        const MomentVector back = free_cumulants_to_moments(moments_to_free_cumulants(m));
        CHECK(max_rel_diff(m.values, back.values) < 1e-12);

        // Reverse direction on a valid cumulant vector.
        const CumulantVector k = moments_to_free_cumulants(random_measure_moments(seed + 1000, 10));
        const CumulantVector kback = moments_to_free_cumulants(free_cumulants_to_moments(k));
        CHECK(max_rel_diff(k.values, kback.values) < 1e-12);
    }
}

TEST_CASE("transforms reject orders beyond the cap") {
    MomentVector m = random_moments(5, kMaxMomentOrder + 1);
    CHECK_THROWS_AS(moments_to_free_cumulants(m), std::invalid_argument);
    CHECK_THROWS_AS(mult_conv_mp(m, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(recover_hph_moments(m, 16, 32, 1, 0.0), std::invalid_argument);
}

TEST_CASE("Marchenko-Pastur density: support, atom and quadrature mass") {
    const MarchenkoPasturLaw law(0.5);
    CHECK(law.density(law.lower_edge() - 1e-9) == 0.0);
    CHECK(law.density(law.upper_edge() + 1e-9) == 0.0);
    CHECK(law.density(-1.0) == 0.0);
    CHECK(law.atom_at_zero() == 0.0);
    CHECK(MarchenkoPasturLaw(2.0).atom_at_zero() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(MarchenkoPasturLaw(1.0).atom_at_zero() == 0.0);
    CHECK_THROWS_AS(MarchenkoPasturLaw(0.0), std::invalid_argument);
    CHECK_THROWS_AS(mp_moments(-1.0, 3), std::invalid_argument);

    // Trigonometric substitution x = (a+b)/2 + (b-a)/2 cos t removes the
    // square-root edge singularities; the midpoint rule then converges fast.
    for (double c : {0.25, 0.5, 1.0, 2.0}) {
        const MarchenkoPasturLaw mp(c);
        const double a = mp.lower_edge();
        const double b = mp.upper_edge();
        const int steps = 20000;
        double mass = 0.0;
        double mean = 0.0;
        for (int i = 0; i < steps; ++i) {
            const double t = (i + 0.5) * std::numbers::pi / steps;
            const double x = 0.5 * (a + b) + 0.5 * (b - a) * std::cos(t);
            const double jac = 0.5 * (b - a) * std::sin(t) * std::numbers::pi / steps;
            mass += mp.density(x) * jac;
            mean += x * mp.density(x) * jac;
        }
        CHECK(mass + mp.atom_at_zero() == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(mean == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("multiplying a point mass at one by the MP law gives the MP law") {
    for (double c : {0.25, 1.0, 2.0}) {
        const MomentVector conv = mult_conv_mp(dirac_moments(1.0, 8), c);
        CHECK(max_rel_diff(conv.values, mp_moments(c, 8).values) < 1e-12);
    }
}

TEST_CASE("multiplicative convolution and deconvolution are inverse") {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const MomentVector m = random_measure_moments(seed, 8);
        for (double c : {0.3, 1.0, 2.5}) {
            const MomentVector round = mult_deconv_mp(mult_conv_mp(m, c), c);
            CHECK(max_rel_diff(m.values, round.values) < 1e-10);
        }
    }
}

TEST_CASE("additive convolution: point masses shift, zero is neutral") {
    const MomentVector sum = add_conv(dirac_moments(1.2, 6), dirac_moments(0.7, 6));
    CHECK(max_rel_diff(sum.values, dirac_moments(1.9, 6).values) < 1e-12);

    const MomentVector diff = add_deconv(dirac_moments(1.9, 6), dirac_moments(0.7, 6));
    CHECK(max_rel_diff(diff.values, dirac_moments(1.2, 6).values) < 1e-12);

    const MomentVector m = random_measure_moments(77, 6);
    const MomentVector same = add_deconv(m, dirac_moments(0.0, 6));
    CHECK(max_rel_diff(m.values, same.values) < 1e-12);

    MomentVector shorter = random_moments(78, 4);
    CHECK_THROWS_AS(add_deconv(m, shorter), std::invalid_argument);
}

TEST_CASE("additive pair is inverse on random vectors") {
    for (std::uint64_t seed = 300; seed < 400; ++seed) {
        const MomentVector a = random_measure_moments(seed, 8);
        const MomentVector b = random_measure_moments(seed + 5000, 8);
        const MomentVector round = add_deconv(add_conv(a, b), b);
        CHECK(max_rel_diff(a.values, round.values) < 1e-10);
    }
}

TEST_CASE("MP multiplicative convolution matches a covariance-shaped Wishart simulation") {
    // Y = D^(1/2) Z with deterministic diagonal D: the eigenvalue moments of
    // (1/L) Y Y^H approach the moments of D multiplied (freely) by the MP law
    // at c = N/L.
    const int n = 512;
    const int l = 1024;
    Eigen::VectorXd diag(n);
    for (int i = 0; i < n; ++i) diag(i) = 0.5 + 2.0 * i / (n - 1);

    MomentVector m_d;
    for (int p = 1; p <= 3; ++p) m_d.values.push_back(diag.array().pow(p).mean());
    const MomentVector predicted = mult_conv_mp(m_d, static_cast<double>(n) / l);

    const Eigen::MatrixXcd y = diag.cwiseSqrt().asDiagonal() * random_gaussian(n, l, 9001);
    const MomentVector measured = empirical_moments(y, 3);

    CHECK(measured.moment(1) == doctest::Approx(predicted.moment(1)).epsilon(0.02));
    CHECK(measured.moment(2) == doctest::Approx(predicted.moment(2)).epsilon(0.02));
    CHECK(measured.moment(3) == doctest::Approx(predicted.moment(3)).epsilon(0.02));
}

TEST_CASE("additive free convolution matches the sum of two independent Wisharts") {
    const int n = 512;
    const int l = 1024;
    const double c = static_cast<double>(n) / l;

    const Eigen::MatrixXcd y1 = random_gaussian(n, l, 31);
    const Eigen::MatrixXcd y2 = random_gaussian(n, l, 32);
    const Eigen::MatrixXcd sum = (y1 * y1.adjoint() + y2 * y2.adjoint()) / static_cast<double>(l);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(sum, Eigen::EigenvaluesOnly);
    MomentVector measured;
    for (int p = 1; p <= 3; ++p) measured.values.push_back(eig.eigenvalues().array().pow(p).mean());

    const MomentVector predicted = add_conv(mp_moments(c, 3), mp_moments(c, 3));
    CHECK(measured.moment(1) == doctest::Approx(predicted.moment(1)).epsilon(0.02));
    CHECK(measured.moment(3) == doctest::Approx(predicted.moment(3)).epsilon(0.02));
}

TEST_CASE("wide/tall Gram companions share nonzero eigenvalues and scaled moments") {
    // F is N x MN; F F^H on the small space and F^H F on the wide space have
    // identical nonzero spectra, so wide-space moments are the small-space
    // moments divided by M.
    const int n = 8;
    const int m = 3;
    const Eigen::MatrixXcd f = random_gaussian(n, m * n, 71);

    const Eigen::MatrixXcd small = f * f.adjoint();
    const Eigen::MatrixXcd wide = f.adjoint() * f;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(small, Eigen::EigenvaluesOnly);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ew(wide, Eigen::EigenvaluesOnly);

    int matched = 0;
    for (int i = 0; i < m * n; ++i) {
        const double lambda = ew.eigenvalues()(i);
        if (lambda < 1e-9) continue;
        bool found = false;
        for (int j = 0; j < n; ++j)
            if (std::abs(es.eigenvalues()(j) - lambda) < 1e-9 * std::max(1.0, lambda))
                found = true;
        CHECK(found);
        ++matched;
    }
    CHECK(matched == n);

    for (int p = 1; p <= 4; ++p) {
        const double m_small = es.eigenvalues().array().pow(p).mean();
        const double m_wide = ew.eigenvalues().array().pow(p).mean();
        CHECK(m_wide == doctest::Approx(m_small / m).epsilon(1e-12));
    }
}

TEST_CASE("noiseless single-station recovery reduces to one MP deconvolution") {
    const MomentVector m = random_moments(88, 6);
    MomentVector tagged = m;
    tagged.c = 0.5;  // N/L = 256/512
    const MomentVector d = recover_hph_moments(tagged, 256, 512, 1, 0.0);
    const MomentVector direct = mult_deconv_mp(m, 0.5);
    CHECK(max_rel_diff(d.values, direct.values) < 1e-10);
    CHECK(d.c == doctest::Approx(0.5));
    CHECK(d.n_eff == 256);
}

TEST_CASE("recovery preserves the first moment as m1 minus sigma2") {
    for (std::uint64_t seed = 500; seed < 520; ++seed) {
        const MomentVector m = random_moments(seed, 5, 1.0, 20.0);
        const double sigma2 = 0.25;
        const MomentVector d = recover_hph_moments(m, 128, 256, 3, sigma2);
        CHECK(d.moment(1) == doctest::Approx(m.moment(1) - sigma2).epsilon(1e-12));
    }
}

TEST_CASE("recovery validates its inputs") {
    const MomentVector m = random_moments(91, 4);
    CHECK_THROWS_AS(recover_hph_moments(m, 128, 256, 3, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(recover_hph_moments(m, 0, 256, 3, 0.1), std::invalid_argument);
}

TEST_CASE("subtracting the noise Dirac cumulants equals subtracting kappa_1 only") {
    // The noise step subtracts the full transformed cumulant vector of the
    // point mass at sigma2; only kappa_1 of a point mass is nonzero, so
    // shifting kappa_1 alone must give the same result.
    const MomentVector m = random_moments(92, 6, 1.0, 8.0);
    const double sigma2 = 0.3;

    const MomentVector via_full = add_deconv(m, dirac_moments(sigma2, 6));

    CumulantVector k = moments_to_free_cumulants(m);
    k.values[0] -= sigma2;
    const MomentVector via_kappa1 = free_cumulants_to_moments(k);

    CHECK(max_rel_diff(via_full.values, via_kappa1.values) < 1e-12);
}

TEST_CASE("noiseless flat-channel blocks recover the power sum as first moment") {
    // All-unit channels, sigma = 0: the deconvolved first moment estimates
    // sum P_k = 7 even though individual powers are unidentifiable here.
    const int n = 256;
    const int l = 512;
    const std::vector<double> powers = {4.0, 2.0, 1.0};
    double acc = 0.0;
    const int trials = 10;
    for (int t = 0; t < trials; ++t) {
        Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, l);
        for (std::size_t k = 0; k < powers.size(); ++k)
            y += std::sqrt(powers[k]) *
                 random_gaussian(n, l, 6000 + 10 * static_cast<std::uint64_t>(t) + k);
        const MomentVector m = empirical_moments(y, 3);
        const MomentVector d = recover_hph_moments(m, n, l, 3, 0.0);
        acc += d.moment(1);
    }
    CHECK(acc / trials == doctest::Approx(7.0).epsilon(0.02));
}
