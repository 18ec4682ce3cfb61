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

#include "freesense/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "freesense/free_deconv.hpp"

namespace freesense {

std::string to_string(EstimationMethod m) {
    switch (m) {
        case EstimationMethod::mmse: return "mmse";
        case EstimationMethod::ml: return "ml";
        case EstimationMethod::zf: return "zf";
        case EstimationMethod::classical: return "classical";
    }
    return {};
}

EstimationMethod estimation_method_from_string(const std::string& s) {
    if (s == "mmse") return EstimationMethod::mmse;
    if (s == "ml") return EstimationMethod::ml;
    if (s == "zf") return EstimationMethod::zf;
    if (s == "classical") return EstimationMethod::classical;
    throw std::invalid_argument("unknown estimator '" + s + "'");
}

EstimatorConfig EstimatorConfig::defaults_for(int stations, double p_max) {
    EstimatorConfig cfg;
    cfg.p_max = p_max;
    cfg.grid_points = stations <= 3 ? 64 : 24;
    return cfg;
}

void EstimatorConfig::validate() const {
    if (!(p_max > 0.0)) throw std::invalid_argument("p_max must be > 0");
    if (grid_points < 2) throw std::invalid_argument("grid_points must be >= 2");
    if (moment_order < 0) throw std::invalid_argument("moment_order must be >= 0");
}

PowerGrid::PowerGrid(int stations, const EstimatorConfig& config)
    : stations_(stations), order_(config.resolved_order(stations)), config_(config) {
    if (stations < 1) throw std::invalid_argument("station count must be >= 1");
    config.validate();
    const int g = config.grid_points;
    step_ = config.p_max / (g - 1);

    std::vector<double> axis(static_cast<std::size_t>(g));
    for (int j = 0; j < g; ++j) axis[static_cast<std::size_t>(j)] = config.p_max * j / (g - 1);

    // Odometer over descending index tuples (j_1 >= j_2 >= ... >= j_M).
    std::vector<int> idx(static_cast<std::size_t>(stations), 0);
    std::vector<double> node(static_cast<std::size_t>(stations));
    while (true) {
        for (int k = 0; k < stations; ++k)
            node[static_cast<std::size_t>(k)] = axis[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])];
        nodes_.insert(nodes_.end(), node.begin(), node.end());
        const MomentVector d = theoretical_d(node, order_);
        node_moments_.insert(node_moments_.end(), d.values.begin(), d.values.end());

        int k = stations - 1;
        while (k >= 0) {
            const int cap = k == 0 ? g - 1 : idx[static_cast<std::size_t>(k - 1)];
            if (idx[static_cast<std::size_t>(k)] < cap) {
                ++idx[static_cast<std::size_t>(k)];
                for (int r = k + 1; r < stations; ++r) idx[static_cast<std::size_t>(r)] = 0;
                break;
            }
            --k;
        }
        if (k < 0) break;
    }
}

std::span<const double> PowerGrid::node(std::int64_t i) const {
    return {nodes_.data() + i * stations_, static_cast<std::size_t>(stations_)};
}

std::span<const double> PowerGrid::node_moments(std::int64_t i) const {
    return {node_moments_.data() + i * order_, static_cast<std::size_t>(order_)};
}

namespace {

// Threshold below which exp() underflows to zero even after a generous margin.
constexpr double kLogWeightFloor = -700.0;

// Inverse-covariance factor with the conditioning guard: above condition
// 1e12 the diagonal is inflated by 1e-8; an all-zero matrix falls back to a
// vanishing isotropic covariance, which collapses the posterior onto the
// minimum-residual node.
Eigen::LDLT<Eigen::MatrixXd> factor_covariance(const NoiseCovariance& covariance, int order) {
    if (covariance.order() < order)
        throw std::invalid_argument("covariance order smaller than moment order");
    Eigen::MatrixXd c = covariance.matrix.topLeftCorner(order, order);
    if (!(c.trace() > 0.0)) {
        c = 1e-24 * Eigen::MatrixXd::Identity(order, order);
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c, Eigen::EigenvaluesOnly);
        const double lo = eig.eigenvalues().minCoeff();
        const double hi = eig.eigenvalues().maxCoeff();
        if (!(lo > 0.0) || hi / lo > 1e12)
            c += 1e-8 * c.diagonal().asDiagonal().toDenseMatrix();
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(c);
    if (ldlt.info() != Eigen::Success)
        throw std::invalid_argument("covariance is not factorizable");
    return ldlt;
}

double quadratic_form(const Eigen::LDLT<Eigen::MatrixXd>& ldlt, const Eigen::VectorXd& w) {
    return w.dot(ldlt.solve(w));
}

Eigen::VectorXd observed_vector(const MomentVector& d_obs, int order) {
    if (d_obs.order() < order)
        throw std::invalid_argument("observed moments shorter than requested order");
    Eigen::VectorXd v(order);
    for (int k = 0; k < order; ++k) v(k) = d_obs.values[static_cast<std::size_t>(k)];
    return v;
}

double log_prior(const PowerGrid& grid, std::span<const double> node) {
    if (grid.config().prior == PriorModel::uniform_simplex) return 0.0;
    // Discretized sequential-conditioning density prod_{i<M} 1/P_i; the
    // half-step floor keeps boundary nodes finite.
    const double floor_value = 0.5 * grid.step();
    double lp = 0.0;
    for (std::size_t i = 0; i + 1 < node.size(); ++i)
        lp -= std::log(std::max(node[i], floor_value));
    return lp;
}

PowerEstimate grid_estimate(const MomentVector& d_obs, const NoiseCovariance& covariance,
                            const PowerGrid& grid, bool posterior_mean) {
    const int order = grid.order();
    const int m = grid.stations();
    const auto ldlt = factor_covariance(covariance, order);
    const Eigen::VectorXd obs = observed_vector(d_obs, order);

    const std::int64_t n_nodes = grid.node_count();
    Eigen::VectorXd w(order);

    std::int64_t best_node = 0;
    double best_q = std::numeric_limits<double>::infinity();
    double best_logw = -std::numeric_limits<double>::infinity();
    std::vector<double> log_weights(posterior_mean ? static_cast<std::size_t>(n_nodes) : 0);

    for (std::int64_t i = 0; i < n_nodes; ++i) {
        const auto node_d = grid.node_moments(i);
        for (int k = 0; k < order; ++k) w(k) = obs(k) - node_d[static_cast<std::size_t>(k)];
        const double q = quadratic_form(ldlt, w);
        const double logw = -0.5 * q + log_prior(grid, grid.node(i));
        if (q < best_q) {
            best_q = q;
            best_node = i;
        }
        if (posterior_mean) {
            log_weights[static_cast<std::size_t>(i)] = logw;
            best_logw = std::max(best_logw, logw);
        }
    }

    PowerEstimate est;
    est.grid_resolution = grid.config().grid_points;

    if (!posterior_mean) {
        const auto node = grid.node(best_node);
        est.powers.assign(node.begin(), node.end());
        est.method = EstimationMethod::ml;
        est.residual = best_q;
        return est;
    }

    est.method = EstimationMethod::mmse;
    if (best_logw < kLogWeightFloor) {
        // Posterior underflows everywhere: surface the ML node and say so.
        const auto node = grid.node(best_node);
        est.powers.assign(node.begin(), node.end());
        est.residual = best_q;
        est.degenerate = true;
        return est;
    }

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(m);
    double total = 0.0;
    for (std::int64_t i = 0; i < n_nodes; ++i) {
        const double weight = std::exp(log_weights[static_cast<std::size_t>(i)] - best_logw);
        if (weight == 0.0) continue;
        const auto node = grid.node(i);
        for (int k = 0; k < m; ++k) mean(k) += weight * node[static_cast<std::size_t>(k)];
        total += weight;
    }
    mean /= total;

    est.powers.assign(mean.data(), mean.data() + m);
    std::sort(est.powers.begin(), est.powers.end(), std::greater<double>());

    const MomentVector d_at_mean = theoretical_d(est.powers, order);
    Eigen::VectorXd w_mean(order);
    for (int k = 0; k < order; ++k)
        w_mean(k) = obs(k) - d_at_mean.values[static_cast<std::size_t>(k)];
    est.residual = quadratic_form(ldlt, w_mean);
    return est;
}

}  // namespace

PowerEstimate mmse_estimate(const MomentVector& d_obs, const NoiseCovariance& covariance,
                            const PowerGrid& grid) {
    return grid_estimate(d_obs, covariance, grid, /*posterior_mean=*/true);
}

PowerEstimate mmse_estimate(const MomentVector& d_obs, const NoiseCovariance& covariance,
                            int stations, const EstimatorConfig& config) {
    return mmse_estimate(d_obs, covariance, PowerGrid(stations, config));
}

PowerEstimate ml_estimate(const MomentVector& d_obs, const NoiseCovariance& covariance,
                          const PowerGrid& grid) {
    return grid_estimate(d_obs, covariance, grid, /*posterior_mean=*/false);
}

PowerEstimate ml_estimate(const MomentVector& d_obs, const NoiseCovariance& covariance,
                          int stations, const EstimatorConfig& config) {
    return ml_estimate(d_obs, covariance, PowerGrid(stations, config));
}

std::optional<PowerEstimate> zf_estimate(const MomentVector& d_obs, int stations) {
    const std::vector<double> sums = d_to_power_sums(d_obs, stations);
    const auto roots = newton_girard_roots(sums);
    if (!roots) return std::nullopt;
    PowerEstimate est;
    est.powers = *roots;
    est.method = EstimationMethod::zf;
    return est;
}

std::optional<PowerEstimate> classical_estimate(const ReceivedBlock& block, double sigma2,
                                                int stations,
                                                const std::optional<EstimatorConfig>& config) {
    if (stations < 1) throw std::invalid_argument("station count must be >= 1");
    if (sigma2 < 0.0) throw std::invalid_argument("sigma2 must be nonnegative");

    // Moments of (1/L) Y Y^H - sigma2 I: shift the Gram eigenvalues. The
    // existing eigenmoment routine is reused through the binomial expansion
    // of ((lambda - s)^k).
    const MomentVector raw = empirical_moments(block.y, stations);
    MomentVector shifted;
    shifted.values.assign(static_cast<std::size_t>(stations), 0.0);
    shifted.c = raw.c;
    shifted.n_eff = raw.n_eff;
    for (int k = 1; k <= stations; ++k) {
        double acc = 0.0;
        double binom = 1.0;  // C(k, j) updated incrementally
        for (int j = 0; j <= k; ++j) {
            const double m_j = j == 0 ? 1.0 : raw.moment(j);
            acc += binom * m_j * std::pow(-sigma2, k - j);
            binom = binom * (k - j) / (j + 1);
        }
        shifted.values[static_cast<std::size_t>(k) - 1] = acc;
    }

    if (auto zf = zf_estimate(shifted, stations)) {
        zf->method = EstimationMethod::classical;
        return zf;
    }

    // Root failure: unweighted grid fit on the same raw moments. All powers
    // are bounded by their sum, so the observed first moment bounds the grid.
    EstimatorConfig cfg;
    if (config) {
        cfg = *config;
    } else {
        if (!(shifted.moment(1) > 0.0)) return std::nullopt;
        cfg = EstimatorConfig::defaults_for(stations, shifted.moment(1));
    }
    cfg.moment_order = stations;
    NoiseCovariance identity{Eigen::MatrixXd::Identity(stations, stations), block.scenario.subcarriers,
                             CovarianceMethod::analytic};
    PowerEstimate est = ml_estimate(shifted, identity, stations, cfg);
    est.method = EstimationMethod::classical;
    est.degenerate = true;
    return est;
}

std::vector<PowerEstimate> iterative_mmse(std::span<const ReceivedBlock> blocks, int stations,
                                          const EstimatorConfig& config, int steps,
                                          const IterativeOptions& options) {
    if (steps < 1) throw std::invalid_argument("steps must be >= 1");
    if (static_cast<int>(blocks.size()) < steps)
        throw std::invalid_argument("need at least `steps` blocks");
    config.validate();

    const NetworkScenario& scenario = blocks[0].scenario;
    const int order = config.resolved_order(stations);
    const PowerGrid grid(stations, config);

    const double snap = config.p_max / options.snap_divisions;
    auto snapped = [&](std::span<const double> p) {
        std::vector<double> out(p.size());
        for (std::size_t i = 0; i < p.size(); ++i)
            out[i] = snap * std::round(p[i] / snap);
        return out;
    };

    // Base covariances (n_eff = N) keyed by snapped hypothesis, so steps in
    // which the estimate has settled do not re-sample the pipeline.
    std::map<std::vector<double>, NoiseCovariance> cache;
    std::uint64_t refresh_counter = 0;
    auto covariance_at = [&](const std::vector<double>& hypothesis) -> const NoiseCovariance& {
        auto it = cache.find(hypothesis);
        if (it == cache.end()) {
            NoiseCovariance c = noise_covariance(
                scenario, hypothesis, order, options.covariance_trials,
                options.covariance_method,
                options.covariance_seed_lane * 0x10000ULL + refresh_counter, options.workers);
            ++refresh_counter;
            it = cache.emplace(hypothesis, std::move(c)).first;
        }
        return it->second;
    };

    std::vector<PowerEstimate> trajectory;
    trajectory.reserve(static_cast<std::size_t>(steps));

    std::vector<MomentVector> recovered;
    recovered.reserve(static_cast<std::size_t>(steps));

    for (int step = 1; step <= steps; ++step) {
        const ReceivedBlock& block = blocks[static_cast<std::size_t>(step) - 1];
        const MomentVector m = empirical_moments(block.y, order);
        recovered.push_back(recover_hph_moments(m, block.scenario.subcarriers,
                                                block.scenario.symbols, stations,
                                                block.scenario.sigma2));
        const MomentVector d_acc = accumulate(recovered);

        NoiseCovariance step_cov =
            [&]() -> NoiseCovariance {
            if (step == 1 && options.init_covariance) return *options.init_covariance;
            const std::vector<double> hypothesis =
                step == 1 ? std::vector<double>(static_cast<std::size_t>(stations),
                                                config.p_max / 2.0)
                          : snapped(trajectory.back().powers);
            return covariance_at(hypothesis);
        }()
                .accumulated(step);

        trajectory.push_back(mmse_estimate(d_acc, step_cov, grid));
    }
    return trajectory;
}

}  // namespace freesense
