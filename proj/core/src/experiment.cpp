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

#include "freesense/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "freesense/free_deconv.hpp"
#include "freesense/parallel.hpp"

namespace freesense {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

/// Buffered CSV assembly: comment rows, one header row, data rows. The file
/// is only written once, after all trials have been folded, so partially
/// failed runs can still end with an explicit marker line.
class CsvBuilder {
  public:
    void comment(const std::string& text) { out_ += "# " + text + "\n"; }
    void header(const std::vector<std::string>& columns) { row_of(columns); }

    void cell(const std::string& v) { cells_.push_back(v); }
    void cell(std::int64_t v) { cells_.push_back(std::to_string(v)); }
    void cell(int v) { cells_.push_back(std::to_string(v)); }
    void cell(double v) { cells_.push_back(format_double(v)); }
    void end_row() {
        row_of(cells_);
        cells_.clear();
    }

    void write(const std::string& path) const {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write output file " + path);
        f << out_;
    }

  private:
    void row_of(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ += ',';
            out_ += cells[i];
        }
        out_ += '\n';
    }

    std::string out_;
    std::vector<std::string> cells_;
};

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::string hex16(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string prior_name(PriorModel p) {
    return p == PriorModel::uniform_simplex ? "uniform-simplex" : "sequential";
}

std::string cov_method_name(CovarianceMethod m) {
    return m == CovarianceMethod::monte_carlo ? "monte-carlo" : "analytic";
}

const std::vector<int> kDefaultSymbolSweep = {256, 512, 1024, 2048, 4096, 8192, 16384, 32768};

// Per-block seeds pack (outer, inner) loop indices into one 64-bit counter;
// synthesize() mixes them against the master seed.
std::uint64_t packed_trial_seed(std::int64_t outer, std::int64_t inner) {
    return (static_cast<std::uint64_t>(outer) << 32) | static_cast<std::uint64_t>(inner);
}

double l2_error(std::span<const double> truth, std::span<const double> estimate) {
    double acc = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double d = truth[i] - estimate[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

void forbid(kv::Document& doc, const std::string& key, const std::string& why) {
    if (doc.has(key)) doc.fail_at(key, "key '" + key + "' not allowed here: " + why);
}

}  // namespace

std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::table1: return "table1";
        case ExperimentKind::moment_relerr: return "moment-relerr";
        case ExperimentKind::estimator_cdf: return "estimator-cdf";
        case ExperimentKind::iterative: return "iterative";
        case ExperimentKind::mp_density: return "mp-density";
    }
    return {};
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
    if (s == "table1") return ExperimentKind::table1;
    if (s == "moment-relerr") return ExperimentKind::moment_relerr;
    if (s == "estimator-cdf") return ExperimentKind::estimator_cdf;
    if (s == "iterative") return ExperimentKind::iterative;
    if (s == "mp-density") return ExperimentKind::mp_density;
    throw std::invalid_argument(
        "unknown kind '" + s +
        "' (expected table1, moment-relerr, estimator-cdf, iterative or mp-density)");
}

std::string ExperimentSpec::resolved_text() const {
    std::ostringstream os;
    os.precision(17);
    os << "kind = " << freesense::to_string(kind) << "\n";
    if (kind == ExperimentKind::mp_density) {
        os << "c = " << mp_ratio << "\n";
        os << "points = " << mp_points << "\n";
        os << "output = " << output_path << "\n";
        return os.str();
    }
    os << scenario.to_text();
    os << "trials = " << trials << "\n";
    if (kind == ExperimentKind::table1) {
        os << "L_sweep = ";
        for (std::size_t i = 0; i < symbol_sweep.size(); ++i)
            os << (i ? "," : "") << symbol_sweep[i];
        os << "\n";
    }
    if (kind == ExperimentKind::moment_relerr || kind == ExperimentKind::estimator_cdf ||
        kind == ExperimentKind::iterative) {
        os << "moment_order = " << estimator_config.resolved_order(scenario.stations) << "\n";
    }
    if (kind == ExperimentKind::estimator_cdf) {
        os << "estimator = " << freesense::to_string(estimator) << "\n";
        os << "accumulations = " << accumulations << "\n";
    }
    if (kind == ExperimentKind::iterative) os << "steps = " << steps << "\n";
    if (kind == ExperimentKind::estimator_cdf || kind == ExperimentKind::iterative) {
        os << "p_max = " << estimator_config.p_max << "\n";
        os << "grid_points = " << estimator_config.grid_points << "\n";
        os << "prior = " << prior_name(estimator_config.prior) << "\n";
        os << "cov_trials = " << covariance_trials << "\n";
        os << "cov_method = " << cov_method_name(covariance_method) << "\n";
    }
    os << "output = " << output_path << "\n";
    return os.str();
}

std::uint64_t config_hash(const ExperimentSpec& spec) { return fnv1a64(spec.resolved_text()); }

ExperimentSpec parse_spec_text(const std::string& text, const std::string& source_name) {
    kv::Document doc = kv::Document::parse_string(text, source_name);
    ExperimentSpec spec;

    const std::string kind_text = doc.get_string("kind");
    try {
        spec.kind = experiment_kind_from_string(kind_text);
    } catch (const std::invalid_argument& e) {
        doc.fail_at("kind", e.what());
    }
    spec.output_path = doc.opt_string("output").value_or(freesense::to_string(spec.kind) + ".csv");

    if (spec.kind == ExperimentKind::mp_density) {
        spec.mp_ratio = doc.get_double("c");
        if (!(spec.mp_ratio > 0.0)) doc.fail_at("c", "ratio c must be > 0");
        spec.mp_points = static_cast<int>(doc.opt_int("points").value_or(512));
        if (spec.mp_points < 2) doc.fail_at("points", "points must be >= 2");
        doc.require_all_used();
        return spec;
    }

    if (spec.kind == ExperimentKind::table1) {
        forbid(doc, "L", "table1 sweeps the symbol count; use L_sweep");
        if (auto sweep = doc.opt_int_list("L_sweep")) {
            for (std::int64_t l : *sweep)
                if (l < 1) doc.fail_at("L_sweep", "symbol counts must be >= 1");
            spec.symbol_sweep.assign(sweep->begin(), sweep->end());
        } else {
            spec.symbol_sweep = kDefaultSymbolSweep;
        }
        const int max_symbols = *std::max_element(spec.symbol_sweep.begin(), spec.symbol_sweep.end());
        spec.scenario = NetworkScenario::from_document(doc, max_symbols);
    } else {
        spec.scenario = NetworkScenario::from_document(doc);
    }

    spec.trials = static_cast<int>(doc.opt_int("trials").value_or(10));
    if (spec.trials < 1) doc.fail_at("trials", "trials must be >= 1");

    spec.estimator_config = EstimatorConfig::defaults_for(spec.scenario.stations, 8.0);

    const bool grid_kind =
        spec.kind == ExperimentKind::estimator_cdf || spec.kind == ExperimentKind::iterative;
    const bool order_kind = grid_kind || spec.kind == ExperimentKind::moment_relerr;

    if (order_kind) {
        if (auto k = doc.opt_int("moment_order")) {
            if (*k < 1 || *k > kMaxMomentOrder)
                doc.fail_at("moment_order", "moment_order must be in [1, " +
                                                std::to_string(kMaxMomentOrder) + "]");
            spec.estimator_config.moment_order = static_cast<int>(*k);
        }
    } else {
        forbid(doc, "moment_order", freesense::to_string(spec.kind) + " has a fixed moment order");
    }

    if (grid_kind) {
        if (auto v = doc.opt_double("p_max")) {
            if (!(*v > 0.0)) doc.fail_at("p_max", "p_max must be > 0");
            spec.estimator_config.p_max = *v;
        }
        if (auto v = doc.opt_int("grid_points")) {
            if (*v < 2) doc.fail_at("grid_points", "grid_points must be >= 2");
            spec.estimator_config.grid_points = static_cast<int>(*v);
        }
        if (auto v = doc.opt_string("prior")) {
            if (*v == "uniform-simplex")
                spec.estimator_config.prior = PriorModel::uniform_simplex;
            else if (*v == "sequential")
                spec.estimator_config.prior = PriorModel::sequential;
            else
                doc.fail_at("prior", "prior must be uniform-simplex or sequential");
        }
        spec.covariance_trials = static_cast<int>(doc.opt_int("cov_trials")
                .value_or(spec.kind == ExperimentKind::iterative ? 48 : 200));
        if (spec.covariance_trials < 2) doc.fail_at("cov_trials", "cov_trials must be >= 2");
        if (auto v = doc.opt_string("cov_method")) {
            if (*v == "monte-carlo")
                spec.covariance_method = CovarianceMethod::monte_carlo;
            else if (*v == "analytic")
                spec.covariance_method = CovarianceMethod::analytic;
            else
                doc.fail_at("cov_method", "cov_method must be monte-carlo or analytic");
        }
    }

    if (spec.kind == ExperimentKind::estimator_cdf) {
        if (auto v = doc.opt_string("estimator")) {
            try {
                spec.estimator = estimation_method_from_string(*v);
            } catch (const std::invalid_argument& e) {
                doc.fail_at("estimator", e.what());
            }
        }
        spec.accumulations = static_cast<int>(doc.opt_int("accumulations").value_or(10));
        if (spec.accumulations < 1) doc.fail_at("accumulations", "accumulations must be >= 1");
    } else {
        forbid(doc, "estimator",
               spec.kind == ExperimentKind::iterative
                   ? "the iterative experiment always runs mmse"
                   : freesense::to_string(spec.kind) + " does not estimate powers per trial");
        forbid(doc, "accumulations", "only estimator-cdf accumulates blocks");
    }

    if (spec.kind == ExperimentKind::iterative) {
        spec.steps = static_cast<int>(doc.opt_int("steps").value_or(10));
        if (spec.steps < 1) doc.fail_at("steps", "steps must be >= 1");
    } else {
        forbid(doc, "steps", "only the iterative experiment runs steps");
    }

    doc.require_all_used();
    return spec;
}

ExperimentSpec parse_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw kv::ParseError(path + ": cannot open file");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_spec_text(buffer.str(), path);
}

namespace {

struct RunContext {
    ExperimentSpec spec;  // with seed override applied
    int workers = 1;
    std::filesystem::path out_path;
    std::string failure;  // first trial failure, if any

    void stamp(CsvBuilder& csv) const {
        csv.comment("freesense " + freesense::to_string(spec.kind));
        csv.comment("seed = " + std::to_string(spec.scenario.master_seed));
        csv.comment("config_hash = " + hex16(config_hash(spec)));
    }
};

void run_table1(RunContext& ctx, CsvBuilder& csv) {
    const ExperimentSpec& spec = ctx.spec;
    const int m = spec.scenario.stations;

    std::vector<std::string> columns = {"L", "trial"};
    for (int k = 1; k <= m; ++k) columns.push_back("estimate_" + std::to_string(k));
    columns.push_back("l2_error");
    ctx.stamp(csv);
    csv.header(columns);

    const std::int64_t total =
        static_cast<std::int64_t>(spec.symbol_sweep.size()) * spec.trials;
    std::vector<std::vector<double>> estimates(static_cast<std::size_t>(total));

    parallel_for(total, ctx.workers, [&](std::int64_t job) {
        const std::int64_t sweep_index = job / spec.trials;
        const std::int64_t trial = job % spec.trials;
        NetworkScenario scn = spec.scenario;
        scn.symbols = spec.symbol_sweep[static_cast<std::size_t>(sweep_index)];
        const ReceivedBlock block = synthesize(scn, packed_trial_seed(sweep_index, trial));
        const auto est = classical_estimate(block, scn.sigma2, m);
        estimates[static_cast<std::size_t>(job)] =
            est ? est->powers
                : std::vector<double>(static_cast<std::size_t>(m),
                                      std::numeric_limits<double>::quiet_NaN());
    });

    for (std::int64_t job = 0; job < total; ++job) {
        const std::int64_t sweep_index = job / spec.trials;
        const std::int64_t trial = job % spec.trials;
        const auto& est = estimates[static_cast<std::size_t>(job)];
        csv.cell(static_cast<std::int64_t>(spec.symbol_sweep[static_cast<std::size_t>(sweep_index)]));
        csv.cell(trial);
        for (double p : est) csv.cell(p);
        csv.cell(l2_error(spec.scenario.powers, est));
        csv.end_row();
    }
}

void run_moment_relerr(RunContext& ctx, CsvBuilder& csv) {
    const ExperimentSpec& spec = ctx.spec;
    const NetworkScenario& scn = spec.scenario;
    const int order = spec.estimator_config.resolved_order(scn.stations);

    ctx.stamp(csv);
    csv.header({"order", "mean_rel_error"});

    std::vector<std::vector<double>> rel(static_cast<std::size_t>(spec.trials));
    parallel_for(spec.trials, ctx.workers, [&](std::int64_t trial) {
        const ReceivedBlock block = synthesize(scn, packed_trial_seed(0, trial));
        const MomentVector m = empirical_moments(block.y, order);
        const MomentVector d_hat =
            recover_hph_moments(m, scn.subcarriers, scn.symbols, scn.stations, scn.sigma2);
        const MomentVector nu = true_hph_moments(block.channels, scn.powers, order);
        std::vector<double> row(static_cast<std::size_t>(order));
        for (int k = 1; k <= order; ++k)
            row[static_cast<std::size_t>(k) - 1] =
                std::abs(d_hat.moment(k) - nu.moment(k)) / std::abs(nu.moment(k));
        rel[static_cast<std::size_t>(trial)] = std::move(row);
    });

    for (int k = 1; k <= order; ++k) {
        double mean = 0.0;
        for (const auto& row : rel) mean += row[static_cast<std::size_t>(k) - 1];
        mean /= spec.trials;
        csv.cell(k);
        csv.cell(mean);
        csv.end_row();
    }
}

void run_estimator_cdf(RunContext& ctx, CsvBuilder& csv, CsvBuilder& cdf_csv) {
    const ExperimentSpec& spec = ctx.spec;
    const NetworkScenario& scn = spec.scenario;
    const int m = scn.stations;
    const int order = spec.estimator_config.resolved_order(m);

    // Grid methods weight residuals with the moment-noise covariance taken at
    // the scenario's true powers (the perfect-knowledge setting).
    std::optional<NoiseCovariance> covariance;
    std::optional<PowerGrid> grid;
    if (spec.estimator == EstimationMethod::mmse || spec.estimator == EstimationMethod::ml) {
        covariance = noise_covariance(scn, scn.powers, order, spec.covariance_trials,
                                      spec.covariance_method, /*seed_lane=*/0, ctx.workers);
        covariance = covariance->accumulated(spec.accumulations);
        grid.emplace(m, spec.estimator_config);
    }

    ctx.stamp(csv);
    csv.header({"trial", "power_index", "estimate"});

    std::vector<std::vector<double>> estimates(static_cast<std::size_t>(spec.trials));
    parallel_for(spec.trials, ctx.workers, [&](std::int64_t trial) {
        std::vector<MomentVector> recovered;
        recovered.reserve(static_cast<std::size_t>(spec.accumulations));
        ReceivedBlock last_block;
        for (int a = 0; a < spec.accumulations; ++a) {
            last_block = synthesize(scn, packed_trial_seed(trial, a));
            const MomentVector mm = empirical_moments(last_block.y, order);
            recovered.push_back(recover_hph_moments(mm, scn.subcarriers, scn.symbols, m,
                                                    scn.sigma2));
        }
        const MomentVector d_acc = accumulate(recovered);

        std::vector<double> est;
        switch (spec.estimator) {
            case EstimationMethod::mmse:
                est = mmse_estimate(d_acc, *covariance, *grid).powers;
                break;
            case EstimationMethod::ml:
                est = ml_estimate(d_acc, *covariance, *grid).powers;
                break;
            case EstimationMethod::zf: {
                const auto zf = zf_estimate(d_acc, m);
                est = zf ? zf->powers
                         : std::vector<double>(static_cast<std::size_t>(m),
                                               std::numeric_limits<double>::quiet_NaN());
                break;
            }
            case EstimationMethod::classical: {
                const auto cl = classical_estimate(last_block, scn.sigma2, m);
                est = cl ? cl->powers
                         : std::vector<double>(static_cast<std::size_t>(m),
                                               std::numeric_limits<double>::quiet_NaN());
                break;
            }
        }
        estimates[static_cast<std::size_t>(trial)] = std::move(est);
    });

    std::vector<double> pooled;
    for (std::int64_t trial = 0; trial < spec.trials; ++trial) {
        const auto& est = estimates[static_cast<std::size_t>(trial)];
        for (int k = 0; k < m; ++k) {
            csv.cell(trial);
            csv.cell(k + 1);
            csv.cell(est[static_cast<std::size_t>(k)]);
            csv.end_row();
            if (std::isfinite(est[static_cast<std::size_t>(k)]))
                pooled.push_back(est[static_cast<std::size_t>(k)]);
        }
    }

    std::sort(pooled.begin(), pooled.end());
    ctx.stamp(cdf_csv);
    cdf_csv.header({"value", "cdf"});
    for (std::size_t i = 0; i < pooled.size(); ++i) {
        cdf_csv.cell(pooled[i]);
        cdf_csv.cell(static_cast<double>(i + 1) / static_cast<double>(pooled.size()));
        cdf_csv.end_row();
    }
}

void run_iterative(RunContext& ctx, CsvBuilder& csv) {
    const ExperimentSpec& spec = ctx.spec;
    const NetworkScenario& scn = spec.scenario;
    const int m = scn.stations;
    const int order = spec.estimator_config.resolved_order(m);

    // The all-equal initial hypothesis is shared by every run; sample its
    // covariance once.
    const std::vector<double> init_hypothesis(static_cast<std::size_t>(m),
                                              spec.estimator_config.p_max / 2.0);
    const NoiseCovariance init_cov =
        noise_covariance(scn, init_hypothesis, order, spec.covariance_trials,
                         spec.covariance_method, /*seed_lane=*/0, ctx.workers);

    std::vector<std::string> columns = {"run", "step"};
    for (int k = 1; k <= m; ++k) columns.push_back("estimate_" + std::to_string(k));
    ctx.stamp(csv);
    csv.header(columns);

    std::vector<std::vector<PowerEstimate>> trajectories(static_cast<std::size_t>(spec.trials));
    parallel_for(spec.trials, ctx.workers, [&](std::int64_t run) {
        std::vector<ReceivedBlock> blocks;
        blocks.reserve(static_cast<std::size_t>(spec.steps));
        for (int s = 0; s < spec.steps; ++s)
            blocks.push_back(synthesize(scn, packed_trial_seed(run, s)));
        IterativeOptions opts;
        opts.covariance_trials = spec.covariance_trials;
        opts.covariance_method = spec.covariance_method;
        opts.covariance_seed_lane = static_cast<std::uint64_t>(run) + 1;
        opts.init_covariance = init_cov;
        trajectories[static_cast<std::size_t>(run)] =
            iterative_mmse(blocks, m, spec.estimator_config, spec.steps, opts);
    });

    for (std::int64_t run = 0; run < spec.trials; ++run) {
        const auto& traj = trajectories[static_cast<std::size_t>(run)];
        for (int s = 0; s < spec.steps; ++s) {
            csv.cell(run);
            csv.cell(s + 1);
            for (double p : traj[static_cast<std::size_t>(s)].powers) csv.cell(p);
            csv.end_row();
        }
    }
}

void run_mp_density(RunContext& ctx, CsvBuilder& csv) {
    const ExperimentSpec& spec = ctx.spec;
    const MarchenkoPasturLaw law(spec.mp_ratio);

    ctx.stamp(csv);
    if (law.atom_at_zero() > 0.0)
        csv.comment("atom_at_zero = " + format_double(law.atom_at_zero()));
    csv.header({"x", "density"});

    const double a = law.lower_edge();
    const double b = law.upper_edge();
    for (int i = 0; i < spec.mp_points; ++i) {
        const double x = a + (b - a) * i / (spec.mp_points - 1);
        csv.cell(x);
        csv.cell(law.density(x));
        csv.end_row();
    }
}

}  // namespace

RunResult run_experiment(const ExperimentSpec& spec, const RunOptions& options) {
    RunContext ctx;
    ctx.spec = spec;
    if (options.seed_override) ctx.spec.scenario.master_seed = *options.seed_override;
    ctx.workers = options.workers > 0
                      ? options.workers
                      : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

    std::filesystem::path out(ctx.spec.output_path);
    if (out.is_relative() && !options.output_dir.empty())
        out = std::filesystem::path(options.output_dir) / out;
    ctx.out_path = out;

    if (options.verbose) {
        std::cout << "# resolved configuration\n"
                  << ctx.spec.resolved_text() << "# config_hash = "
                  << hex16(config_hash(ctx.spec)) << "\n";
    }

    RunResult result;
    CsvBuilder csv;
    CsvBuilder cdf_csv;
    bool has_cdf = false;
    std::string failure;

    try {
        switch (ctx.spec.kind) {
            case ExperimentKind::table1: run_table1(ctx, csv); break;
            case ExperimentKind::moment_relerr: run_moment_relerr(ctx, csv); break;
            case ExperimentKind::estimator_cdf:
                run_estimator_cdf(ctx, csv, cdf_csv);
                has_cdf = true;
                break;
            case ExperimentKind::iterative: run_iterative(ctx, csv); break;
            case ExperimentKind::mp_density: run_mp_density(ctx, csv); break;
        }
    } catch (const std::exception& e) {
        failure = e.what();
        csv.comment(std::string("partial-output: ") + failure);
    }

    csv.write(out.string());
    result.output_files.push_back(out.string());

    if (has_cdf && failure.empty()) {
        std::filesystem::path cdf_path = out;
        cdf_path.replace_filename(cdf_path.stem().string() + "_cdf" +
                                  cdf_path.extension().string());
        cdf_csv.write(cdf_path.string());
        result.output_files.push_back(cdf_path.string());
    }

    if (!failure.empty())
        throw std::runtime_error("experiment failed (partial output written): " + failure);
    return result;
}

}  // namespace freesense
