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
#include <optional>
#include <span>
#include <vector>

#include "freesense/moments.hpp"
#include "freesense/simulate.hpp"
#include "freesense/theory.hpp"

namespace freesense {

enum class EstimationMethod { mmse, ml, zf, classical };

std::string to_string(EstimationMethod m);
EstimationMethod estimation_method_from_string(const std::string& s);

/// How prior mass is spread over the ordered power region
/// {P_max >= P_1 >= ... >= P_M >= 0}: flat, or the sequential-conditioning
/// density proportional to prod_{i<M} 1/P_i.
enum class PriorModel { uniform_simplex, sequential };

struct EstimatorConfig {
    double p_max = 8.0;      // upper bound on any station power
    int grid_points = 64;    // per-axis grid resolution, >= 2
    int moment_order = 0;    // K; 0 means "use the station count"
    PriorModel prior = PriorModel::uniform_simplex;

    /// 64 points per axis up to M = 3, 24 beyond (the ordered grid has
    /// ~grid_points^M / M! nodes).
    static EstimatorConfig defaults_for(int stations, double p_max);

    int resolved_order(int stations) const { return moment_order > 0 ? moment_order : stations; }
    void validate() const;
};

struct PowerEstimate {
    std::vector<double> powers;  // descending
    EstimationMethod method = EstimationMethod::mmse;
    std::optional<double> residual;  // w^T C^{-1} w at the estimate; unset for zf
    int grid_resolution = 0;         // grid methods only
    bool degenerate = false;         // posterior underflow / root-failure fallback
};

/// Ordered power grid with the expected moments precomputed once per node.
/// Sharing one grid across many estimate calls amortizes the node moments.
class PowerGrid {
  public:
    PowerGrid(int stations, const EstimatorConfig& config);

    int stations() const { return stations_; }
    int order() const { return order_; }
    std::int64_t node_count() const { return static_cast<std::int64_t>(nodes_.size()) / stations_; }
    double step() const { return step_; }
    const EstimatorConfig& config() const { return config_; }

    std::span<const double> node(std::int64_t i) const;
    std::span<const double> node_moments(std::int64_t i) const;

  private:
    int stations_;
    int order_;
    double step_;
    EstimatorConfig config_;
    std::vector<double> nodes_;         // node_count x M, descending tuples
    std::vector<double> node_moments_;  // node_count x K
};

/// Posterior-mean estimate over the ordered grid under the Gaussian
/// moment-error model: weights exp(-1/2 w^T C^{-1} w) with
/// w = d_obs - expected moments at the node. If every weight underflows the
/// minimum-residual node is returned with `degenerate` set.
PowerEstimate mmse_estimate(const MomentVector& d_obs, const NoiseCovariance& covariance,
                            int stations, const EstimatorConfig& config);
PowerEstimate mmse_estimate(const MomentVector& d_obs, const NoiseCovariance& covariance,
                            const PowerGrid& grid);

/// Minimum of the same quadratic form over the grid.
PowerEstimate ml_estimate(const MomentVector& d_obs, const NoiseCovariance& covariance,
                          int stations, const EstimatorConfig& config);
PowerEstimate ml_estimate(const MomentVector& d_obs, const NoiseCovariance& covariance,
                          const PowerGrid& grid);

/// Zero-forcing: invert the first M moments exactly through power sums and
/// polynomial roots. No covariance involved; fails (nullopt) whenever the
/// root set leaves the admissible region.
std::optional<PowerEstimate> zf_estimate(const MomentVector& d_obs, int stations);

/// Large-L baseline: moments of (1/L) Y Y^H - sigma2 I are taken directly as
/// signal moments (no deconvolution) and pushed through the zero-forcing
/// path. On root failure falls back to a grid ML fit with identity weighting,
/// flagged degenerate. Returns nullopt only if no sane grid can be formed.
std::optional<PowerEstimate> classical_estimate(
    const ReceivedBlock& block, double sigma2, int stations,
    const std::optional<EstimatorConfig>& config = std::nullopt);

struct IterativeOptions {
    int covariance_trials = 48;
    CovarianceMethod covariance_method = CovarianceMethod::monte_carlo;
    std::uint64_t covariance_seed_lane = 0;
    int workers = 1;
    /// Refresh hypotheses are snapped to p_max/snap_divisions before the
    /// covariance is re-sampled, so settled estimates reuse the cached matrix.
    int snap_divisions = 16;
    /// Covariance used at step 1; computed at the all-equal p_max/2
    /// hypothesis when not supplied. Reusable across repeated runs.
    std::optional<NoiseCovariance> init_covariance;
};

/// Recursive MMSE: consume blocks one at a time, accumulate their recovered
/// moments, re-sample the covariance at the previous step's estimate scaled
/// to the grown n_eff, and re-estimate. Returns the estimate trajectory
/// (one entry per step).
std::vector<PowerEstimate> iterative_mmse(std::span<const ReceivedBlock> blocks, int stations,
                                          const EstimatorConfig& config, int steps,
                                          const IterativeOptions& options = {});

}  // namespace freesense
