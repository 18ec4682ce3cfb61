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
#include <string>
#include <vector>

#include "freesense/estimators.hpp"
#include "freesense/scenario.hpp"

namespace freesense {

/// Canned experiment families. Each produces one or two CSV artifacts:
///   table1        - classical baseline error sweep over the symbol count L
///   moment-relerr - accuracy of deconvolved moments vs the per-realization
///                   ground truth, by moment order
///   estimator-cdf - per-trial power estimates plus their pooled CDF
///   iterative     - per-step trajectories of the recursive MMSE detector
///   mp-density    - Marchenko-Pastur density samples for plotting
enum class ExperimentKind { table1, moment_relerr, estimator_cdf, iterative, mp_density };

std::string to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& s);

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::moment_relerr;
    NetworkScenario scenario;  // ignored by mp-density
    int trials = 10;
    EstimationMethod estimator = EstimationMethod::mmse;
    EstimatorConfig estimator_config;
    std::string output_path;  // relative paths resolve against RunOptions.output_dir

    std::vector<int> symbol_sweep;  // table1 only
    int accumulations = 10;         // estimator-cdf only
    int steps = 10;                 // iterative only
    int covariance_trials = 200;
    CovarianceMethod covariance_method = CovarianceMethod::monte_carlo;

    double mp_ratio = 0.5;  // mp-density only
    int mp_points = 512;    // mp-density only

    /// Canonical resolved form: every effective key, fixed order. The config
    /// hash recorded in CSV comments is FNV-1a64 over this text.
    std::string resolved_text() const;
};

std::uint64_t config_hash(const ExperimentSpec& spec);

/// Parses and validates an experiment spec file (same `key = value` grammar
/// as scenario files, plus experiment keys). Unknown keys, duplicates,
/// missing required keys and cross-field mismatches all raise kv::ParseError
/// with line numbers; nothing defaults silently on a misspelling.
ExperimentSpec parse_spec(const std::string& path);
ExperimentSpec parse_spec_text(const std::string& text, const std::string& source_name);

struct RunOptions {
    std::optional<std::uint64_t> seed_override;  // replaces scenario master_seed
    int workers = 0;                             // 0 = all hardware threads
    std::string output_dir;                      // empty = current directory
    bool verbose = true;                         // print resolved config + seed
};

struct RunResult {
    std::vector<std::string> output_files;
};

/// Runs the experiment and writes its CSV artifacts. Trials are independent
/// jobs folded in trial order, so the byte content never depends on the
/// worker count. Throws std::runtime_error after writing a partial-output
/// marker if any trial fails.
RunResult run_experiment(const ExperimentSpec& spec, const RunOptions& options = {});

}  // namespace freesense
