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

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "freesense/experiment.hpp"
#include "freesense/free_deconv.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitRuntimeError = 2;

int cmd_run(const std::string& spec_path, std::optional<std::uint64_t> seed, int workers,
            const std::string& out_dir) {
    freesense::ExperimentSpec spec;
    try {
        spec = freesense::parse_spec(spec_path);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    }
    try {
        freesense::RunOptions options;
        options.seed_override = seed;
        options.workers = workers;
        options.output_dir = out_dir;
        const auto result = freesense::run_experiment(spec, options);
        for (const std::string& f : result.output_files) std::cout << "wrote " << f << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kExitRuntimeError;
    }
}

int cmd_validate(const std::string& spec_path) {
    try {
        const auto spec = freesense::parse_spec(spec_path);
        std::cout << spec.resolved_text();
        std::cout << "ok\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    }
}

int cmd_mp_density(double ratio, int points) {
    try {
        const freesense::MarchenkoPasturLaw law(ratio);
        if (law.atom_at_zero() > 0.0)
            std::printf("# atom_at_zero = %.12g\n", law.atom_at_zero());
        std::printf("x,density\n");
        const double a = law.lower_edge();
        const double b = law.upper_edge();
        for (int i = 0; i < points; ++i) {
            const double x = a + (b - a) * i / (points - 1);
            std::printf("%.12g,%.12g\n", x, law.density(x));
        }
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"blind multi-cell OFDM power sensing from eigenvalue moments"};
    app.require_subcommand(1);

    std::string spec_path;
    std::optional<std::uint64_t> seed;
    int workers = 0;
    std::string out_dir;

    CLI::App* run = app.add_subcommand("run", "run an experiment spec and write CSV artifacts");
    run->add_option("spec", spec_path, "experiment spec file")->required();
    run->add_option("--seed", seed, "override the master seed");
    run->add_option("--workers", workers, "worker threads (default: all cores)");
    run->add_option("--out", out_dir, "directory for output files");

    std::string validate_path;
    CLI::App* validate = app.add_subcommand("validate", "parse a spec and print its resolved form");
    validate->add_option("spec", validate_path, "experiment spec file")->required();

    double mp_ratio = 0.5;
    int mp_points = 512;
    CLI::App* mp = app.add_subcommand("mp-density", "print Marchenko-Pastur density samples");
    mp->add_option("--c", mp_ratio, "ratio parameter c = N/L")->required();
    mp->add_option("--points", mp_points, "number of samples")
        ->check(CLI::Range(2, 1 << 24));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const std::string name = e.get_name();
        const int code = app.exit(e);
        return (name == "CallForHelp" || name == "CallForAllHelp" || code == 0)
                   ? kExitOk
                   : kExitConfigError;
    }

    if (run->parsed()) return cmd_run(spec_path, seed, workers, out_dir);
    if (validate->parsed()) return cmd_validate(validate_path);
    if (mp->parsed()) return cmd_mp_density(mp_ratio, mp_points);
    return kExitConfigError;
}
