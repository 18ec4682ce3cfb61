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

#include "freesense/theory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "freesense/free_deconv.hpp"
#include "freesense/parallel.hpp"
#include "freesense/rng.hpp"
#include "freesense/simulate.hpp"

namespace freesense {

namespace {

// Exact for n <= 20 or so; all uses here stay far below the 2^53 limit.
double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

// Central binomial coefficient C(2k, k), exact in double for k <= 26.
double central_binomial(int k) {
    double v = 1.0;
    for (int i = 1; i <= k; ++i) v = v * (k + i) / i;
    return std::round(v);
}

// w_j = sum_{k=0}^{j} C(2k,k) C(2(j-k), j-k): the degree-j weight carried by
// each station in the composition expansion of the expected moments.
std::vector<double> composition_weights(int order) {
    std::vector<double> cb(static_cast<std::size_t>(order) + 1);
    for (int k = 0; k <= order; ++k) cb[static_cast<std::size_t>(k)] = central_binomial(k);
    std::vector<double> w(static_cast<std::size_t>(order) + 1, 0.0);
    for (int j = 0; j <= order; ++j)
        for (int k = 0; k <= j; ++k)
            w[static_cast<std::size_t>(j)] +=
                cb[static_cast<std::size_t>(k)] * cb[static_cast<std::size_t>(j - k)];
    return w;
}

}  // namespace

double gaussian_abs_moment(int p) {
    if (p < 0) throw std::domain_error("moment order must be >= 0");
    // E|h|^{2p} = 4^{-p} sum_i C(p,i) (2i)! (2(p-i))! / (i! (p-i)!), the
    // binomial expansion over the real and imaginary parts (variance 1/2
    // each). Each term regroups exactly into p! C(2i,i) C(2(p-i),p-i), which
    // keeps every factor integral; the sum collapses to p! 4^p.
    double sum = 0.0;
    for (int i = 0; i <= p; ++i)
        sum += factorial(p) * central_binomial(i) * central_binomial(p - i);
    return sum / std::pow(4.0, p);
}

MomentVector theoretical_d(std::span<const double> powers, int order) {
    if (order < 1) throw std::invalid_argument("moment order must be >= 1");
    if (powers.empty()) throw std::invalid_argument("powers must be nonempty");
    for (double p : powers)
        if (!(p >= 0.0)) throw std::invalid_argument("powers must be nonnegative");

    const auto w = composition_weights(order);

    // d_p = (p!/4^p) [z^p] prod_i (sum_j w_j P_i^j z^j): the product form of
    // the sum over degree compositions (k_1, ..., k_M) with sum k_i = p.
    std::vector<double> poly(static_cast<std::size_t>(order) + 1, 0.0);
    poly[0] = 1.0;
    std::vector<double> next(poly.size());
    for (const double p_i : powers) {
        std::fill(next.begin(), next.end(), 0.0);
        double p_pow = 1.0;
        for (int j = 0; j <= order; ++j) {
            const double term = w[static_cast<std::size_t>(j)] * p_pow;
            for (int q = 0; q + j <= order; ++q)
                next[static_cast<std::size_t>(q + j)] += poly[static_cast<std::size_t>(q)] * term;
            p_pow *= p_i;
        }
        poly.swap(next);
    }

    MomentVector d;
    d.values.resize(static_cast<std::size_t>(order));
    double scale = 1.0;  // p!/4^p, updated incrementally
    for (int p = 1; p <= order; ++p) {
        scale *= p / 4.0;
        d.values[static_cast<std::size_t>(p) - 1] = scale * poly[static_cast<std::size_t>(p)];
    }
    return d;
}

std::vector<double> d_to_power_sums(const MomentVector& d, int station_count) {
    if (station_count < 1) throw std::invalid_argument("station count must be >= 1");
    if (d.order() < station_count)
        throw std::invalid_argument("need at least M moments to form M power sums");

    std::vector<double> h(static_cast<std::size_t>(station_count) + 1, 0.0);
    h[0] = 1.0;
    for (int p = 1; p <= station_count; ++p)
        h[static_cast<std::size_t>(p)] = d.moment(p) / factorial(p);

    std::vector<double> s(static_cast<std::size_t>(station_count), 0.0);
    for (int p = 1; p <= station_count; ++p) {
        double acc = p * h[static_cast<std::size_t>(p)];
        for (int i = 1; i < p; ++i)
            acc -= s[static_cast<std::size_t>(i) - 1] * h[static_cast<std::size_t>(p - i)];
        s[static_cast<std::size_t>(p) - 1] = acc;
    }
    return s;
}

std::optional<std::vector<double>> newton_girard_roots(std::span<const double> power_sums) {
    const int m = static_cast<int>(power_sums.size());
    if (m < 1) throw std::invalid_argument("need at least one power sum");

    // e_k = (1/k) sum_{i=1}^{k} (-1)^{i-1} e_{k-i} S_i
    std::vector<double> e(static_cast<std::size_t>(m) + 1, 0.0);
    e[0] = 1.0;
    for (int k = 1; k <= m; ++k) {
        double acc = 0.0;
        double sign = 1.0;
        for (int i = 1; i <= k; ++i) {
            acc += sign * e[static_cast<std::size_t>(k - i)] * power_sums[static_cast<std::size_t>(i) - 1];
            sign = -sign;
        }
        e[static_cast<std::size_t>(k)] = acc / k;
    }

    // Companion matrix of x^M - e1 x^{M-1} + e2 x^{M-2} - ... + (-1)^M eM.
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(m, m);
    for (int i = 1; i < m; ++i) companion(i, i - 1) = 1.0;
    double sign = 1.0;
    for (int k = 1; k <= m; ++k) {
        companion(0, k - 1) = sign * e[static_cast<std::size_t>(k)];
        sign = -sign;
    }

    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) return std::nullopt;
    const Eigen::VectorXcd roots = solver.eigenvalues();

    double scale = 0.0;
    for (int i = 0; i < m; ++i) scale = std::max(scale, std::abs(roots(i)));
    const double tol = 1e-6 * scale;

    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        if (std::abs(roots(i).imag()) > tol) return std::nullopt;
        const double re = roots(i).real();
        if (re < -tol) return std::nullopt;
        out.push_back(std::max(re, 0.0));
    }
    std::sort(out.begin(), out.end(), std::greater<double>());
    return out;
}

NoiseCovariance NoiseCovariance::accumulated(int factor) const {
    if (factor < 1) throw std::invalid_argument("accumulation factor must be >= 1");
    return {matrix / factor, n_eff * factor, origin};
}

NoiseCovariance noise_covariance(const NetworkScenario& scenario,
                                 std::span<const double> hypothesis_powers,
                                 int order,
                                 int trials,
                                 CovarianceMethod method,
                                 std::uint64_t seed_lane,
                                 int workers) {
    if (order < 1) throw std::invalid_argument("moment order must be >= 1");
    const NetworkScenario hyp = scenario.with_powers(
        std::vector<double>(hypothesis_powers.begin(), hypothesis_powers.end()));
    hyp.validate();

    if (method == CovarianceMethod::analytic) {
        const MomentVector d = theoretical_d(hyp.powers, 2 * order);
        Eigen::MatrixXd c(order, order);
        for (int a = 1; a <= order; ++a)
            for (int b = 1; b <= order; ++b)
                c(a - 1, b - 1) = (d.moment(a + b) - d.moment(a) * d.moment(b)) /
                                  static_cast<double>(hyp.subcarriers);
        return {std::move(c), hyp.subcarriers, CovarianceMethod::analytic};
    }

    if (trials < 2) throw std::invalid_argument("monte-carlo covariance needs trials >= 2");
    const MomentVector d_center = theoretical_d(hyp.powers, order);

    Eigen::MatrixXd errors(order, trials);
    parallel_for(trials, workers, [&](std::int64_t t) {
        const std::uint64_t trial_seed =
            derive_seed(hyp.master_seed, static_cast<std::uint64_t>(t), RngStream::covariance,
                        seed_lane);
        const ReceivedBlock block = synthesize(hyp, trial_seed);
        const MomentVector m = empirical_moments(block.y, order);
        const MomentVector d_hat =
            recover_hph_moments(m, hyp.subcarriers, hyp.symbols, hyp.stations, hyp.sigma2);
        for (int k = 1; k <= order; ++k)
            errors(k - 1, t) = d_hat.moment(k) - d_center.moment(k);
    });

    // Second moment about the theoretical center: deconvolution bias counts
    // as error, not just trial-to-trial spread.
    Eigen::MatrixXd c = (errors * errors.transpose()) / static_cast<double>(trials);
    return {std::move(c), hyp.subcarriers, CovarianceMethod::monte_carlo};
}

}  // namespace freesense
