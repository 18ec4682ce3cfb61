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

#include "freesense/free_deconv.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace freesense {

namespace {

void check_order(int order) {
    if (order < 1) throw std::invalid_argument("moment order must be >= 1");
    if (order > kMaxMomentOrder)
        throw std::invalid_argument("moment order capped at " +
                                    std::to_string(kMaxMomentOrder));
}

// The recursions cancel terms that are combinatorially larger than their
// results; extended-precision accumulation keeps the double-precision
// interface accurate to ~1e-12 through chained transforms.
using Series = std::vector<long double>;

Series to_extended(const std::vector<double>& v, long double scale = 1.0L) {
    Series out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = scale * v[i];
    return out;
}

std::vector<double> to_double(const Series& v, long double scale = 1.0L) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<double>(scale * v[i]);
    return out;
}

// Truncated product of two power series (degree cap included).
Series series_mul(const Series& a, const Series& b, std::size_t degree) {
    Series out(degree + 1, 0.0L);
    for (std::size_t i = 0; i < a.size() && i <= degree; ++i)
        for (std::size_t j = 0; j < b.size() && i + j <= degree; ++j)
            out[i + j] += a[i] * b[j];
    return out;
}

// powers[s][q] = [z^q] (1 + sum_j m_j z^j)^s for s = 0..max_power, q <= degree.
std::vector<Series> series_powers(const Series& m, std::size_t max_power, std::size_t degree) {
    Series base(degree + 1, 0.0L);
    base[0] = 1.0L;
    for (std::size_t j = 1; j <= degree && j <= m.size(); ++j) base[j] = m[j - 1];

    std::vector<Series> powers(max_power + 1);
    powers[0].assign(degree + 1, 0.0L);
    powers[0][0] = 1.0L;
    for (std::size_t s = 1; s <= max_power; ++s)
        powers[s] = series_mul(powers[s - 1], base, degree);
    return powers;
}

Series moments_to_cumulants_values(const Series& m) {
    const std::size_t n = m.size();
    const auto powers = series_powers(m, n, n);
    Series kappa(n, 0.0L);
    for (std::size_t k = 1; k <= n; ++k) {
        long double acc = m[k - 1];
        for (std::size_t s = 1; s < k; ++s) acc -= kappa[s - 1] * powers[s][k - s];
        kappa[k - 1] = acc;
    }
    return kappa;
}

Series cumulants_to_moments_values(const Series& kappa) {
    const std::size_t n = kappa.size();
    Series m(n, 0.0L);
    for (std::size_t k = 1; k <= n; ++k) {
        // Series powers of the moments known so far; degree k-1 suffices.
        const auto powers = series_powers(m, k, k - 1);
        long double acc = kappa[k - 1];  // s = k term: [z^0] M^k = 1
        for (std::size_t s = 1; s < k; ++s) acc += kappa[s - 1] * powers[s][k - s];
        m[k - 1] = acc;
    }
    return m;
}

}  // namespace

CumulantVector moments_to_free_cumulants(const MomentVector& m) {
    check_order(m.order());
    return {to_double(moments_to_cumulants_values(to_extended(m.values)))};
}

MomentVector free_cumulants_to_moments(const CumulantVector& k) {
    check_order(k.order());
    return {to_double(cumulants_to_moments_values(to_extended(k.values))), 0.0, 0};
}

MarchenkoPasturLaw::MarchenkoPasturLaw(double c) : ratio(c) {
    if (!(c > 0.0)) throw std::invalid_argument("Marchenko-Pastur ratio must be > 0");
}

double MarchenkoPasturLaw::lower_edge() const {
    const double r = 1.0 - std::sqrt(ratio);
    return r * r;
}

double MarchenkoPasturLaw::upper_edge() const {
    const double r = 1.0 + std::sqrt(ratio);
    return r * r;
}

double MarchenkoPasturLaw::density(double x) const {
    const double a = lower_edge();
    const double b = upper_edge();
    if (!(x > 0.0) || x <= a || x >= b) return 0.0;
    return std::sqrt((x - a) * (b - x)) / (2.0 * std::numbers::pi * ratio * x);
}

double MarchenkoPasturLaw::atom_at_zero() const {
    return ratio > 1.0 ? 1.0 - 1.0 / ratio : 0.0;
}

MomentVector mp_moments(double ratio, int order) {
    check_order(order);
    MarchenkoPasturLaw law(ratio);  // validates ratio
    Series kappa(static_cast<std::size_t>(order));
    long double c_pow = 1.0L;
    for (int k = 0; k < order; ++k) {
        kappa[static_cast<std::size_t>(k)] = c_pow;
        c_pow *= law.ratio;
    }
    return {to_double(cumulants_to_moments_values(kappa)), 0.0, 0};
}

double mp_density(double ratio, double x) { return MarchenkoPasturLaw(ratio).density(x); }

MomentVector mult_conv_mp(const MomentVector& m, double ratio) {
    check_order(m.order());
    if (!(ratio > 0.0)) throw std::invalid_argument("Marchenko-Pastur ratio must be > 0");
    const auto out = cumulants_to_moments_values(to_extended(m.values, ratio));
    return {to_double(out, 1.0L / ratio), m.c, m.n_eff};
}

MomentVector mult_deconv_mp(const MomentVector& m, double ratio) {
    check_order(m.order());
    if (!(ratio > 0.0)) throw std::invalid_argument("Marchenko-Pastur ratio must be > 0");
    const auto out = moments_to_cumulants_values(to_extended(m.values, ratio));
    return {to_double(out, 1.0L / ratio), m.c, m.n_eff};
}

MomentVector add_conv(const MomentVector& a, const MomentVector& b) {
    check_order(a.order());
    if (a.order() != b.order())
        throw std::invalid_argument("additive convolution: mismatched moment order");
    auto ka = moments_to_cumulants_values(to_extended(a.values));
    const auto kb = moments_to_cumulants_values(to_extended(b.values));
    for (std::size_t i = 0; i < ka.size(); ++i) ka[i] += kb[i];
    return {to_double(cumulants_to_moments_values(ka)), a.c, a.n_eff};
}

MomentVector add_deconv(const MomentVector& a, const MomentVector& b) {
    check_order(a.order());
    if (a.order() != b.order())
        throw std::invalid_argument("additive deconvolution: mismatched moment order");
    auto ka = moments_to_cumulants_values(to_extended(a.values));
    const auto kb = moments_to_cumulants_values(to_extended(b.values));
    for (std::size_t i = 0; i < ka.size(); ++i) ka[i] -= kb[i];
    return {to_double(cumulants_to_moments_values(ka)), a.c, a.n_eff};
}

MomentVector recover_hph_moments(const MomentVector& m_y,
                                 int subcarriers,
                                 int symbols,
                                 int stations,
                                 double sigma2) {
    check_order(m_y.order());
    if (subcarriers < 1 || symbols < 1 || stations < 1)
        throw std::invalid_argument("dimensions must be >= 1");
    if (sigma2 < 0.0) throw std::invalid_argument("sigma2 must be nonnegative");

    const double c = static_cast<double>(subcarriers) / symbols;
    const double c_wide = static_cast<double>(stations) * subcarriers / symbols;
    const int order = m_y.order();

    // Moments of the Dirac at sigma2: (s, s^2, ..., s^K). Its cumulant vector
    // has a single nonzero entry, but the full transform is applied so the
    // noise step mirrors the convolution steps exactly.
    MomentVector noise_dirac;
    noise_dirac.values.resize(static_cast<std::size_t>(order));
    double s_pow = 1.0;
    for (int k = 0; k < order; ++k) {
        s_pow *= sigma2;
        noise_dirac.values[static_cast<std::size_t>(k)] = s_pow;
    }

    MomentVector step = mult_deconv_mp(m_y, c);
    step = add_deconv(step, noise_dirac);
    step = mult_conv_mp(step, c);

    // Rank padding: the N x N signal Gram matrix and its MN x MN companion
    // share nonzero eigenvalues, so moments divide by M on the wide space.
    for (double& v : step.values) v /= stations;

    step = mult_deconv_mp(step, c_wide);
    for (double& v : step.values) v *= stations;

    step.c = c;
    step.n_eff = subcarriers;
    return step;
}

}  // namespace freesense
