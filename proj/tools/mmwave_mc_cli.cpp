// SPDX-License-Identifier: Apache-2.0
//
// mmwave-mc: matrix-completion channel estimation for hybrid mmWave MIMO
// Copyright (C) 2026 The mmwave-mc Authors
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


// mmwave_mc command line: gen-channel, estimate, sweep, rank-hist.
// Exit codes: 0 success, 2 config error, 3 estimator failure (estimate only),
// 1 anything else.

#include "mmwave_mc/mmwave_mc.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace
{

using namespace mmwave_mc;

constexpr int exit_ok = 0;
constexpr int exit_other = 1;
constexpr int exit_config = 2;
constexpr int exit_estimator = 3;

std::ostream &open_output(const std::string &path, std::ofstream &file)
{
    if (path.empty() || path == "-")
        return std::cout;
    file.open(path);
    require(file.good(), ErrorCode::io, "cannot write '" + path + "'");
    return file;
}

SweepPoint pick_point(const ExperimentConfig &c, int index)
{
    const auto points = sweep_points(c);
    require(index >= 0 && static_cast<std::size_t>(index) < points.size(), ErrorCode::config,
            "sweep point index " + std::to_string(index) + " out of range [0, " + std::to_string(points.size()) + ")");
    return points[static_cast<std::size_t>(index)];
}

int cmd_gen_channel(const std::string &config_path, int trial, std::optional<std::uint64_t> seed, int point,
                    bool impairments, const std::string &out_path)
{
    const ExperimentConfig c = load_config(config_path);
    const std::uint64_t ts = trial_seed(c.seed, trial);
    json doc;
    if (seed)
        doc = to_json(generate_channel(c.channel, c.system.tx, c.system.rx, *seed));
    else
    {
        const TrialData d = prepare_trial(c, pick_point(c, point), ts);
        doc = to_json(d.channel);
        if (impairments)
        {
            doc["impairments"] = {{"tx", to_json(d.imp_tx)}, {"rx", to_json(d.imp_rx)}};
            doc["H_eff"] = matrix_to_json(d.H_eff);
        }
    }
    std::ofstream file;
    open_output(out_path, file) << doc.dump(2) << '\n';
    return exit_ok;
}

int cmd_estimate(const std::string &config_path, int trial, int point, std::optional<double> pnr,
                 const std::vector<std::string> &names, const std::string &trace_path)
{
    ExperimentConfig c = load_config(config_path);
    if (!names.empty())
    {
        c.estimators.clear();
        for (const auto &n : names)
            c.estimators.push_back(estimator_from_string(n));
    }
    SweepPoint pt = pick_point(c, point);
    if (pnr)
        pt.pnr_db = *pnr;
    const std::uint64_t ts = trial_seed(c.seed, trial);
    const TrialData d = prepare_trial(c, pt, ts);

    json out = {{"trial", trial},
                {"seed", ts},
                {"M", pt.M},
                {"S", pt.S},
                {"pnr_db", pt.pnr_db},
                {"r_sub", energy_capture_rank(d.H_eff, c.energy_fraction)},
                {"estimators", json::object()}};
    bool failed = false;
    for (EstimatorKind kind : c.estimators)
    {
        json e;
        try
        {
            const EstimatorOutput o = run_estimator(kind, c, d, ts);
            const double v = nmse(o.H_hat, d.H_eff);
            e = {{"nmse", v}, {"nmse_db", lin2db(v)}, {"r_hat", o.r_hat}, {"flops", o.flops}};
            if (o.factors)
            {
                e["stop"] = to_string(o.factors->stop);
                e["truncated"] = o.factors->truncated;
                if (!trace_path.empty())
                {
                    std::ofstream tf(trace_path + "." + to_string(kind) + ".csv");
                    require(tf.good(), ErrorCode::io, "cannot write trace next to '" + trace_path + "'");
                    write_trace_csv(tf, *o.factors);
                }
            }
        }
        catch (const Error &err)
        {
            if (err.code() == ErrorCode::config)
                throw;
            e = {{"error", err.what()}};
            failed = true;
        }
        out["estimators"][to_string(kind)] = e;
    }
    std::cout << out.dump(2) << '\n';
    return failed ? exit_estimator : exit_ok;
}

int cmd_sweep(const std::string &config_path, const std::string &out_path, std::optional<int> threads,
              std::optional<int> trials)
{
    ExperimentConfig c = load_config(config_path);
    if (threads)
        c.threads = *threads;
    if (trials)
        c.trials = *trials;
    c.validate();
    std::ofstream file;
    std::ostream &os = open_output(out_path, file);
    write_csv_header(os, c);
    std::size_t failures = 0;
    run_sweep(c, [&](const ResultRecord &r) {
        write_csv_row(os, c, r);
        failures += r.status != "ok";
    });
    if (failures > 0)
        std::cerr << failures << " record(s) failed; see the status column\n";
    return exit_ok;
}

int cmd_rank_hist(const std::string &csv_path, const std::string &out_path)
{
    std::ifstream in(csv_path);
    require(in.good(), ErrorCode::io, "cannot open '" + csv_path + "'");
    const CsvTable t = read_csv(in);
    const RankHistogram h = rank_histogram_from_csv(t);
    json doc = to_json(h);
    auto med = [&](const std::vector<double> &hist) -> json {
        double acc = 0.0;
        for (std::size_t b = 0; b < hist.size(); ++b)
        {
            acc += hist[b];
            if (acc >= 0.5 - 1e-12)
                return h.first_bin + static_cast<int>(b);
        }
        return nullptr;
    };
    doc["median_r_sub"] = med(h.r_sub);
    doc["median_r_gcg"] = med(h.r_gcg);
    doc["median_r_omp"] = med(h.r_omp);
    std::ofstream file;
    open_output(out_path, file) << doc.dump(2) << '\n';
    return exit_ok;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Matrix-completion channel estimation experiments for hybrid mmWave MIMO"};
    app.require_subcommand(1);

    std::string config, out, trace, csv;
    int trial = 0, point = 0;
    std::optional<std::uint64_t> seed;
    std::optional<double> pnr;
    std::optional<int> threads, trials;
    std::vector<std::string> estimators;
    bool impairments = false;

    auto *gen = app.add_subcommand("gen-channel", "Emit one channel realization as JSON");
    gen->add_option("-c,--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    gen->add_option("-t,--trial", trial, "Trial index whose channel stream is used")->check(CLI::NonNegativeNumber);
    gen->add_option("-p,--point", point, "Sweep point index")->check(CLI::NonNegativeNumber);
    gen->add_option("--seed", seed, "Raw channel seed (overrides --trial)");
    gen->add_flag("--impairments", impairments, "Also emit impairment profiles and H_eff");
    gen->add_option("-o,--out", out, "Output path (default stdout)");

    auto *est = app.add_subcommand("estimate", "Run the configured estimators on one trial");
    est->add_option("-c,--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    est->add_option("-t,--trial", trial, "Trial index")->check(CLI::NonNegativeNumber);
    est->add_option("-p,--point", point, "Sweep point index")->check(CLI::NonNegativeNumber);
    est->add_option("--pnr", pnr, "Override the PNR in dB");
    est->add_option("-e,--estimator", estimators, "Estimator(s): gcg_alt, gcg_alt_imc, omp, perfect_csi");
    est->add_option("--trace", trace, "Write GCG-Alt iteration traces to <prefix>.<estimator>.csv");

    auto *sw = app.add_subcommand("sweep", "Run a config-driven sweep and write CSV records");
    sw->add_option("-c,--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sw->add_option("-o,--out", out, "CSV output path (default stdout)");
    sw->add_option("-j,--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    sw->add_option("-n,--trials", trials, "Override the trial count")->check(CLI::PositiveNumber);

    auto *rh = app.add_subcommand("rank-hist", "Rank histograms from a sweep CSV");
    rh->add_option("-i,--csv", csv, "Sweep CSV")->required()->check(CLI::ExistingFile);
    rh->add_option("-o,--out", out, "JSON output path (default stdout)");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_config;
    }

    try
    {
        if (*gen)
            return cmd_gen_channel(config, trial, seed, point, impairments, out);
        if (*est)
            return cmd_estimate(config, trial, point, pnr, estimators, trace);
        if (*sw)
            return cmd_sweep(config, out, threads, trials);
        if (*rh)
            return cmd_rank_hist(csv, out);
    }
    catch (const Error &e)
    {
        std::cerr << e.what() << '\n';
        return e.code() == ErrorCode::config ? exit_config : exit_other;
    }
    catch (const std::exception &e)
    {
        std::cerr << e.what() << '\n';
        return exit_other;
    }
    return exit_other;
}
