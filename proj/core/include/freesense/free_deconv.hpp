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
// Free-probability moment calculus. Everything here works on truncated
// moment sequences: the first K moments of a spectral distribution determine
// the first K moments of its additive/multiplicative free (de)convolutions,
// so no densities are ever formed. Multiplicative (de)convolution is only
// needed against the Marchenko-Pastur family, where it reduces to the
// moment/cumulant transforms applied to ratio-scaled sequences.

#pragma once

#include <vector>

#include "freesense/moments.hpp"

namespace freesense {

/// Orders above this are statistically useless at practical matrix sizes and
/// are rejected by the pipeline entry points.
inline constexpr int kMaxMomentOrder = 12;

/// Free cumulants (kappa_1, ..., kappa_K); the sequence that linearizes
/// additive free convolution.
struct CumulantVector {
    std::vector<double> values;

    int order() const { return static_cast<int>(values.size()); }
};

/// Moments -> free cumulants. Inverts the recursion
///   m_n = sum_{s=1}^{n} kappa_s * [z^{n-s}] M(z)^s,  M(z) = 1 + sum m_j z^j,
/// which is the non-crossing-partition moment/cumulant relation in recursive
/// form: a Dirac at a maps to (a, 0, 0, ...).
CumulantVector moments_to_free_cumulants(const MomentVector& m);

/// Free cumulants -> moments; exact inverse of moments_to_free_cumulants.
MomentVector free_cumulants_to_moments(const CumulantVector& k);

/// Marchenko-Pastur law with ratio parameter c: the limiting eigenvalue
/// distribution of (1/L) A A^H for an N x L standard i.i.d. matrix, N/L -> c.
/// Support [(1-sqrt(c))^2, (1+sqrt(c))^2] plus an atom (1-1/c)+ at zero.
struct MarchenkoPasturLaw {
    double ratio;

    explicit MarchenkoPasturLaw(double c);

    double lower_edge() const;
    double upper_edge() const;
    double density(double x) const;  // absolutely continuous part
    double atom_at_zero() const;     // (1 - 1/c)+, nonzero only for c > 1
};

/// First `order` moments of the Marchenko-Pastur law (free cumulants c^{k-1}).
MomentVector mp_moments(double ratio, int order);

/// Density of the continuous part at x (0 outside the support).
double mp_density(double ratio, double x);

/// Multiplicative free convolution / deconvolution with the Marchenko-Pastur
/// law of the given ratio, in moment space: conv applies the cumulant->moment
/// transform to the ratio-scaled sequence, deconv the moment->cumulant
/// transform; the two are exact inverses.
MomentVector mult_conv_mp(const MomentVector& m, double ratio);
MomentVector mult_deconv_mp(const MomentVector& m, double ratio);

/// Additive free convolution / deconvolution: cumulantwise sum / difference.
MomentVector add_conv(const MomentVector& a, const MomentVector& b);
MomentVector add_deconv(const MomentVector& a, const MomentVector& b);

/// Recovers the moments d_k of the diagonal signal matrix H P H^H from the
/// measured Gram moments of the received block. Four steps:
///   1. strip the additive-noise mixing: MP-deconvolve at c = N/L, subtract
///      the cumulants of the Dirac at sigma2, MP-convolve back at c;
///   2. embed into the ML-sized product space (divide by M);
///   3. MP-deconvolve the symbol Wishart factor at c' = MN/L;
///   4. rescale by M.
/// The result carries c = N/L and n_eff = N for downstream accumulation.
MomentVector recover_hph_moments(const MomentVector& m_y,
                                 int subcarriers,
                                 int symbols,
                                 int stations,
                                 double sigma2);

}  // namespace freesense
