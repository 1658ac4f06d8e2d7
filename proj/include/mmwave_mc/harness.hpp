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

#ifndef MMWAVE_MC_HARNESS_HPP
#define MMWAVE_MC_HARNESS_HPP

#include "channel_io.hpp"
#include "gcg_alt.hpp"
#include "imc.hpp"
#include "metrics.hpp"
#include "omp.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

// Experiment orchestration. A work item is one (sweep point, trial) pair; all
// estimators inside it consume the same channel, impairments, pattern and
// noise. Trial seeds depend on the trial index only, so sweep points are
// paired as well.

namespace mmwave_mc
{

// ------------------------------------------------------------------------
// Configuration
// ------------------------------------------------------------------------

struct SystemConfig
{
    ArrayGeometry tx = ArrayGeometry::ula(128);
    ArrayGeometry rx = ArrayGeometry::ula(32);
    int K_t = 16;
    int K_r = 4;
    int shifter_bits = 6;
};

// Angles in radians; JSON carries degrees.
struct ImpairmentLevels
{
    double phase_tx = 0.0;
    double phase_rx = 0.0;
    double gain_tx = 0.0;
    double gain_rx = 0.0;
};

struct TrainingConfig
{
    int M = 128;
    int S = 4;
    std::optional<double> p; // unset: S (K_r - 1) / N_r
    std::vector<double> pnr_db{20.0};
};

struct SolverSettings
{
    std::optional<double> mu;  // unset: noise variance, floored at mu_floor
    double mu_floor = 1e-8;
    double eps = 0.01;
    double eps_a = 0.1;
    int max_rank = 0;
    int rsvd_power = 2;
    int rsvd_oversample = 10;
    int max_inner = 1000;
    ThetaRule theta_rule = ThetaRule::exact;
};

struct OmpSettings
{
    int G_t = 0; // 0: 2 N_t
    int G_r = 0; // 0: 2 N_r
    int max_paths = 64;
    std::optional<double> eps_stop; // unset: PNR threshold table
    OmpStopRule stop_rule = OmpStopRule::residual_decrease;
};

struct SeSettings
{
    int N_s = 4;
    std::vector<double> snr_db;
};

// Empty axes take the base value from the training / impairment sections.
// Impairment axes set the transmit and receive levels together.
struct SweepAxes
{
    std::vector<int> M;
    std::vector<int> S;
    std::vector<double> pnr_db;
    std::vector<double> phase_level_deg;
    std::vector<double> gain_level;
};

enum class EstimatorKind
{
    gcg_alt,
    gcg_alt_imc,
    omp,
    perfect_csi,
};

inline const char *to_string(EstimatorKind e)
{
    switch (e)
    {
    case EstimatorKind::gcg_alt: return "gcg_alt";
    case EstimatorKind::gcg_alt_imc: return "gcg_alt_imc";
    case EstimatorKind::omp: return "omp";
    case EstimatorKind::perfect_csi: return "perfect_csi";
    }
    return "unknown";
}

inline EstimatorKind estimator_from_string(const std::string &s)
{
    if (s == "gcg_alt")
        return EstimatorKind::gcg_alt;
    if (s == "gcg_alt_imc")
        return EstimatorKind::gcg_alt_imc;
    if (s == "omp")
        return EstimatorKind::omp;
    if (s == "perfect_csi")
        return EstimatorKind::perfect_csi;
    throw Error(ErrorCode::config, "unknown estimator '" + s + "'");
}

struct ExperimentConfig
{
    SystemConfig system;
    ChannelParams channel;
    ImpairmentLevels impairments;
    TrainingConfig training;
    std::vector<EstimatorKind> estimators{EstimatorKind::gcg_alt, EstimatorKind::omp};
    SolverSettings solver;
    OmpSettings omp;
    SeSettings se;
    SweepAxes sweep;
    int trials = 200;
    std::uint64_t seed = 1;
    int threads = 1;
    double energy_fraction = 0.95;

    void validate() const
    {
        system.tx.validate();
        system.rx.validate();
        channel.validate();
        require(system.K_t >= 2 && system.K_r >= 2, ErrorCode::config, "need at least two RF chains per side");
        require(system.shifter_bits >= 1, ErrorCode::config, "shifter_bits must be at least 1");
        require(trials >= 1, ErrorCode::config, "trials must be at least 1");
        require(threads >= 1, ErrorCode::config, "threads must be at least 1");
        require(!training.pnr_db.empty() || !sweep.pnr_db.empty(), ErrorCode::config, "no PNR value given");
        require(!estimators.empty(), ErrorCode::config, "no estimator selected");
        require(energy_fraction > 0.0 && energy_fraction <= 1.0, ErrorCode::config,
                "energy_fraction must lie in (0, 1]");
        require(se.N_s >= 1 && se.N_s <= std::min(system.tx.num_antennas, system.rx.num_antennas), ErrorCode::config,
                "se.N_s must lie in [1, min(N_r, N_t)]");
        for (double s : se.snr_db)
            require(std::isfinite(s), ErrorCode::config, "SNR values must be finite");
        for (double g : sweep.gain_level)
            require(g >= 0.0 && g < 1.0, ErrorCode::config, "gain levels must lie in [0, 1)");
        for (double ph : sweep.phase_level_deg)
            require(ph >= 0.0, ErrorCode::config, "phase levels must be non-negative");
        for (int m : sweep.M)
            require(m >= system.tx.num_antennas, ErrorCode::config, "sweep M must be at least N_t");
        for (int s : sweep.S)
            require(s >= 1, ErrorCode::config, "sweep S must be at least 1");
    }
};

// ------------------------------------------------------------------------
// JSON ingestion
// ------------------------------------------------------------------------

namespace detail
{
inline void check_keys(const json &j, std::initializer_list<const char *> allowed, const std::string &where)
{
    require(j.is_object(), ErrorCode::config, where + " must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
    {
        bool ok = false;
        for (const char *a : allowed)
            ok = ok || it.key() == a;
        require(ok, ErrorCode::config, "unknown key '" + it.key() + "' in " + where);
    }
}

template <class T> void read(const json &j, const char *key, T &out)
{
    if (!j.contains(key))
        return;
    try
    {
        out = j.at(key).get<T>();
    }
    catch (const json::exception &e)
    {
        throw Error(ErrorCode::config, std::string("bad value for '") + key + "': " + e.what());
    }
}

inline void read_deg(const json &j, const char *key, double &out_rad)
{
    if (!j.contains(key))
        return;
    double deg = 0.0;
    read(j, key, deg);
    out_rad = deg2rad(deg);
}

template <class T> void read_list(const json &j, const char *key, std::vector<T> &out)
{
    if (!j.contains(key))
        return;
    const json &v = j.at(key);
    if (v.is_array())
        read(j, key, out);
    else
    {
        T x{};
        read(j, key, x);
        out = {x};
    }
}
} // namespace detail

inline ExperimentConfig config_from_json(const json &j)
{
    using detail::check_keys;
    using detail::read;
    using detail::read_deg;
    using detail::read_list;
    ExperimentConfig c;
    check_keys(j,
               {"system", "channel", "impairments", "training", "estimators", "solver", "omp", "se", "sweep", "trials",
                "seed", "threads", "energy_fraction"},
               "config");

    if (j.contains("system"))
    {
        const json &s = j["system"];
        check_keys(s, {"tx", "rx", "K_t", "K_r", "shifter_bits"}, "system");
        try
        {
            if (s.contains("tx"))
                c.system.tx = geometry_from_json(s["tx"]);
            if (s.contains("rx"))
                c.system.rx = geometry_from_json(s["rx"]);
        }
        catch (const json::exception &e)
        {
            throw Error(ErrorCode::config, std::string("bad geometry: ") + e.what());
        }
        read(s, "K_t", c.system.K_t);
        read(s, "K_r", c.system.K_r);
        read(s, "shifter_bits", c.system.shifter_bits);
    }
    if (j.contains("channel"))
    {
        const json &s = j["channel"];
        check_keys(s,
                   {"cluster_rate", "max_rays", "azimuth_spread_tx_deg", "azimuth_spread_rx_deg",
                    "elevation_spread_tx_deg", "elevation_spread_rx_deg", "cluster_power_tau",
                    "cluster_power_shadowing_db", "center_separation_deg", "scaling", "max_center_retries"},
                   "channel");
        read(s, "cluster_rate", c.channel.cluster_rate);
        read(s, "max_rays", c.channel.max_rays);
        read_deg(s, "azimuth_spread_tx_deg", c.channel.azimuth_spread_tx);
        read_deg(s, "azimuth_spread_rx_deg", c.channel.azimuth_spread_rx);
        read_deg(s, "elevation_spread_tx_deg", c.channel.elevation_spread_tx);
        read_deg(s, "elevation_spread_rx_deg", c.channel.elevation_spread_rx);
        read(s, "cluster_power_tau", c.channel.cluster_power.tau);
        read(s, "cluster_power_shadowing_db", c.channel.cluster_power.shadowing_db);
        if (s.contains("center_separation_deg"))
        {
            double sep = 0.0;
            read_deg(s, "center_separation_deg", sep);
            c.channel.center_separation = sep;
        }
        read(s, "max_center_retries", c.channel.max_center_retries);
        std::string scaling = c.channel.scaling == ChannelScaling::unit ? "unit" : "per_entry";
        read(s, "scaling", scaling);
        require(scaling == "unit" || scaling == "per_entry", ErrorCode::config,
                "channel.scaling must be 'unit' or 'per_entry'");
        c.channel.scaling = scaling == "unit" ? ChannelScaling::unit : ChannelScaling::per_entry;
    }
    else
        c.channel.scaling = ChannelScaling::per_entry;
    if (j.contains("impairments"))
    {
        const json &s = j["impairments"];
        check_keys(s, {"phase_level_tx_deg", "phase_level_rx_deg", "gain_level_tx", "gain_level_rx"}, "impairments");
        read_deg(s, "phase_level_tx_deg", c.impairments.phase_tx);
        read_deg(s, "phase_level_rx_deg", c.impairments.phase_rx);
        read(s, "gain_level_tx", c.impairments.gain_tx);
        read(s, "gain_level_rx", c.impairments.gain_rx);
    }
    if (j.contains("training"))
    {
        const json &s = j["training"];
        check_keys(s, {"M", "S", "p", "pnr_db"}, "training");
        read(s, "M", c.training.M);
        read(s, "S", c.training.S);
        if (s.contains("p"))
        {
            double p = 0.0;
            read(s, "p", p);
            c.training.p = p;
        }
        read_list(s, "pnr_db", c.training.pnr_db);
    }
    if (j.contains("estimators"))
    {
        std::vector<std::string> names;
        read_list(j, "estimators", names);
        c.estimators.clear();
        for (const auto &n : names)
            c.estimators.push_back(estimator_from_string(n));
    }
    if (j.contains("solver"))
    {
        const json &s = j["solver"];
        check_keys(s,
                   {"mu", "mu_floor", "eps", "eps_a", "max_rank", "rsvd_power", "rsvd_oversample", "max_inner",
                    "theta_rule"},
                   "solver");
        if (s.contains("mu"))
        {
            double mu = 0.0;
            read(s, "mu", mu);
            c.solver.mu = mu;
        }
        read(s, "mu_floor", c.solver.mu_floor);
        read(s, "eps", c.solver.eps);
        read(s, "eps_a", c.solver.eps_a);
        read(s, "max_rank", c.solver.max_rank);
        read(s, "rsvd_power", c.solver.rsvd_power);
        read(s, "rsvd_oversample", c.solver.rsvd_oversample);
        read(s, "max_inner", c.solver.max_inner);
        std::string rule = to_string(c.solver.theta_rule);
        read(s, "theta_rule", rule);
        require(rule == "exact" || rule == "printed", ErrorCode::config, "solver.theta_rule must be 'exact' or 'printed'");
        c.solver.theta_rule = rule == "exact" ? ThetaRule::exact : ThetaRule::printed;
    }
    if (j.contains("omp"))
    {
        const json &s = j["omp"];
        check_keys(s, {"G_t", "G_r", "max_paths", "eps_stop", "stop_rule"}, "omp");
        read(s, "G_t", c.omp.G_t);
        read(s, "G_r", c.omp.G_r);
        read(s, "max_paths", c.omp.max_paths);
        if (s.contains("eps_stop"))
        {
            double e = 0.0;
            read(s, "eps_stop", e);
            c.omp.eps_stop = e;
        }
        std::string rule = to_string(c.omp.stop_rule);
        read(s, "stop_rule", rule);
        require(rule == "residual" || rule == "residual_decrease", ErrorCode::config,
                "omp.stop_rule must be 'residual' or 'residual_decrease'");
        c.omp.stop_rule = rule == "residual" ? OmpStopRule::residual : OmpStopRule::residual_decrease;
    }
    if (j.contains("se"))
    {
        const json &s = j["se"];
        check_keys(s, {"N_s", "snr_db"}, "se");
        read(s, "N_s", c.se.N_s);
        read_list(s, "snr_db", c.se.snr_db);
    }
    if (j.contains("sweep"))
    {
        const json &s = j["sweep"];
        check_keys(s, {"M", "S", "pnr_db", "phase_level_deg", "gain_level"}, "sweep");
        read_list(s, "M", c.sweep.M);
        read_list(s, "S", c.sweep.S);
        read_list(s, "pnr_db", c.sweep.pnr_db);
        read_list(s, "phase_level_deg", c.sweep.phase_level_deg);
        read_list(s, "gain_level", c.sweep.gain_level);
    }
    read(j, "trials", c.trials);
    std::int64_t seed = static_cast<std::int64_t>(c.seed);
    read(j, "seed", seed);
    require(seed >= 0, ErrorCode::config, "seed must be non-negative");
    c.seed = static_cast<std::uint64_t>(seed);
    read(j, "threads", c.threads);
    read(j, "energy_fraction", c.energy_fraction);
    c.validate();
    return c;
}

inline ExperimentConfig load_config(const std::string &path)
{
    std::ifstream in(path);
    require(in.good(), ErrorCode::config, "cannot open config '" + path + "'");
    json j;
    try
    {
        in >> j;
    }
    catch (const json::exception &e)
    {
        throw Error(ErrorCode::config, "config '" + path + "' is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

// ------------------------------------------------------------------------
// Sweep points and seeds
// ------------------------------------------------------------------------

struct SweepPoint
{
    int M = 128;
    int S = 4;
    double pnr_db = 20.0;
    double phase_level_deg = 0.0; // both sides; NaN keeps the per-side base levels
    double gain_level = 0.0;      // both sides; NaN keeps the per-side base levels
};

// Cartesian product in the order M, S, pnr_db, phase_level_deg, gain_level
// (last axis fastest).
inline std::vector<SweepPoint> sweep_points(const ExperimentConfig &c)
{
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const auto Ms = c.sweep.M.empty() ? std::vector<int>{c.training.M} : c.sweep.M;
    const auto Ss = c.sweep.S.empty() ? std::vector<int>{c.training.S} : c.sweep.S;
    const auto Ps = c.sweep.pnr_db.empty() ? c.training.pnr_db : c.sweep.pnr_db;
    const auto Phs = c.sweep.phase_level_deg.empty() ? std::vector<double>{nan} : c.sweep.phase_level_deg;
    const auto Gs = c.sweep.gain_level.empty() ? std::vector<double>{nan} : c.sweep.gain_level;
    std::vector<SweepPoint> out;
    for (int M : Ms)
        for (int S : Ss)
            for (double pnr : Ps)
                for (double ph : Phs)
                    for (double g : Gs)
                        out.push_back({M, S, pnr, ph, g});
    return out;
}

enum class Stream : std::uint64_t
{
    channel = 1,
    impairment_tx = 2,
    impairment_rx = 3,
    pattern = 4,
    noise = 5,
    features = 6,
    sounding = 7,
    sounding_noise = 8,
    solver = 9,
};

inline std::uint64_t trial_seed(std::uint64_t master, int trial) { return derive_seed(master, static_cast<std::uint64_t>(trial)); }

inline std::uint64_t stream_seed(std::uint64_t trial_seed, Stream s)
{
    return derive_seed(trial_seed, static_cast<std::uint64_t>(s));
}

// ------------------------------------------------------------------------
// Records
// ------------------------------------------------------------------------

struct ResultRecord
{
    SweepPoint point;
    int trial = 0;
    std::string estimator;
    double nmse = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> se; // one entry per configured SNR
    bool se_padded = false;
    int r_hat = 0;
    int r_sub = 0;
    double flops = 0.0;
    std::uint64_t seed = 0; // trial seed; every stream derives from it
    std::string status = "ok";
    double wall_ms = 0.0;

    double nmse_db() const { return lin2db(nmse); }
};

// Everything a trial at one sweep point generates before estimation.
struct TrialData
{
    ChannelRealization channel;
    ImpairmentProfile imp_tx;
    ImpairmentProfile imp_rx;
    CMatrix H_eff;
    TrainingPlan plan;
    double pnr_db = 0.0;
};

inline ImpairmentLevels levels_at(const ExperimentConfig &c, const SweepPoint &pt)
{
    ImpairmentLevels l = c.impairments;
    if (!std::isnan(pt.phase_level_deg))
        l.phase_tx = l.phase_rx = deg2rad(pt.phase_level_deg);
    if (!std::isnan(pt.gain_level))
        l.gain_tx = l.gain_rx = pt.gain_level;
    return l;
}

inline double sampling_ratio(const ExperimentConfig &c, const SweepPoint &pt)
{
    if (c.training.p)
        return *c.training.p;
    return static_cast<double>(pt.S * (c.system.K_r - 1)) / c.system.rx.num_antennas;
}

inline TrialData prepare_trial(const ExperimentConfig &c, const SweepPoint &pt, std::uint64_t ts)
{
    const auto &tx = c.system.tx;
    const auto &rx = c.system.rx;
    const ImpairmentLevels lv = levels_at(c, pt);
    TrialData d;
    d.pnr_db = pt.pnr_db;
    d.channel = generate_channel(c.channel, tx, rx, stream_seed(ts, Stream::channel));
    d.imp_tx = impairment_profile(lv.phase_tx, lv.gain_tx, tx.num_antennas, stream_seed(ts, Stream::impairment_tx));
    d.imp_rx = impairment_profile(lv.phase_rx, lv.gain_rx, rx.num_antennas, stream_seed(ts, Stream::impairment_rx));
    d.H_eff = apply_impairments(d.channel.H, d.imp_tx, d.imp_rx);
    const auto pattern = build_sampling_pattern(tx.num_antennas, rx.num_antennas, sampling_ratio(c, pt),
                                                stream_seed(ts, Stream::pattern));
    d.plan = assemble_training_plan(pattern, c.system.K_t, c.system.K_r, PhaseShifterSet(c.system.shifter_bits), pt.M,
                                    pt.S);
    return d;
}

inline SolverConfig solver_config(const ExperimentConfig &c, double noise_var, std::uint64_t ts)
{
    SolverConfig s;
    s.mu = c.solver.mu ? *c.solver.mu : std::max(noise_var, c.solver.mu_floor);
    s.eps = c.solver.eps;
    s.eps_a = c.solver.eps_a;
    s.sigma = std::sqrt(noise_var);
    s.max_rank = c.solver.max_rank;
    s.rsvd_power = c.solver.rsvd_power;
    s.rsvd_oversample = c.solver.rsvd_oversample;
    s.max_inner = c.solver.max_inner;
    s.theta_rule = c.solver.theta_rule;
    s.seed = stream_seed(ts, Stream::solver);
    return s;
}

inline Dictionary config_dictionary(const ExperimentConfig &c)
{
    const int G_t = c.omp.G_t > 0 ? c.omp.G_t : 2 * c.system.tx.num_antennas;
    const int G_r = c.omp.G_r > 0 ? c.omp.G_r : 2 * c.system.rx.num_antennas;
    return build_dictionary(c.system.tx, c.system.rx, G_t, G_r);
}

// Output of one estimator on one trial; H_hat is empty on failure.
struct EstimatorOutput
{
    CMatrix H_hat;
    int r_hat = 0;
    double flops = 0.0;
    std::optional<FactorEstimate> factors;
};

// OMP uses M transmit beams with S K_r receive beams each, the same
// measurement budget as the completion schemes.
inline EstimatorOutput run_estimator(EstimatorKind kind, const ExperimentConfig &c, const TrialData &d,
                                     std::uint64_t ts, const Dictionary *dict = nullptr)
{
    EstimatorOutput out;
    const CVector &e_r = d.imp_rx.e;
    switch (kind)
    {
    case EstimatorKind::perfect_csi:
        out.H_hat = d.H_eff;
        out.r_hat = energy_capture_rank(d.H_eff, c.energy_fraction);
        break;
    case EstimatorKind::gcg_alt:
    case EstimatorKind::gcg_alt_imc: {
        const bool imc = kind == EstimatorKind::gcg_alt_imc;
        std::optional<FeaturePair> features;
        if (imc)
            features = generate_features(d.plan.N_r, d.plan.N_t, stream_seed(ts, Stream::features));
        const ObservationMatrix obs =
            imc ? simulate_imc_training(d.H_eff, *features, d.plan, d.pnr_db, stream_seed(ts, Stream::noise), e_r)
                : simulate_training(d.H_eff, d.plan, d.pnr_db, stream_seed(ts, Stream::noise), e_r);
        FactorEstimate est = estimate(obs, solver_config(c, obs.noise_var, ts));
        out.H_hat = imc ? recover_channel(est.H(), *features) : est.H();
        out.r_hat = est.rank();
        out.flops = est.flops;
        out.factors = std::move(est);
        break;
    }
    case EstimatorKind::omp: {
        const int M = d.plan.M;
        const int n = M * d.plan.S * c.system.K_r;
        const SoundingOperator s = build_sounding(d.plan.N_t, d.plan.N_r, c.system.K_t, c.system.K_r, n,
                                                  PhaseShifterSet(c.system.shifter_bits),
                                                  stream_seed(ts, Stream::sounding), M);
        const CVector y = simulate_sounding(d.H_eff, s, d.pnr_db, stream_seed(ts, Stream::sounding_noise), e_r);
        OmpOptions o;
        o.eps_stop = c.omp.eps_stop ? *c.omp.eps_stop : omp_stop_threshold(d.pnr_db);
        o.max_paths = c.omp.max_paths;
        o.rule = c.omp.stop_rule;
        std::optional<Dictionary> own;
        if (!dict)
            own = config_dictionary(c);
        const OmpResult r = omp_estimate(y, s, dict ? *dict : *own, o);
        require(r.r_hat > 0, ErrorCode::estimator_failure, "OMP selected no atom: " + r.diagnostic);
        out.H_hat = r.H_hat;
        out.r_hat = r.r_hat;
        out.flops = r.flops;
        break;
    }
    }
    return out;
}

// All configured estimators on one (sweep point, trial); records follow the
// configured estimator order.
inline std::vector<ResultRecord> run_trial(const ExperimentConfig &c, const SweepPoint &pt, int trial,
                                           const Dictionary *dict = nullptr)
{
    const std::uint64_t ts = trial_seed(c.seed, trial);
    std::vector<ResultRecord> out;
    std::optional<TrialData> d;
    std::string setup_error;
    try
    {
        d = prepare_trial(c, pt, ts);
    }
    catch (const Error &e)
    {
        setup_error = e.what();
    }
    const int r_sub = d ? energy_capture_rank(d->H_eff, c.energy_fraction) : 0;

    for (EstimatorKind kind : c.estimators)
    {
        ResultRecord rec;
        rec.point = pt;
        rec.trial = trial;
        rec.estimator = to_string(kind);
        rec.seed = ts;
        rec.r_sub = r_sub;
        rec.se.assign(c.se.snr_db.size(), std::numeric_limits<double>::quiet_NaN());
        const auto t0 = std::chrono::steady_clock::now();
        if (!d)
            rec.status = "error: " + setup_error;
        else
        {
            try
            {
                const EstimatorOutput o = run_estimator(kind, c, *d, ts, dict);
                rec.nmse = nmse(o.H_hat, d->H_eff);
                rec.r_hat = o.r_hat;
                rec.flops = o.flops;
                for (std::size_t i = 0; i < c.se.snr_db.size(); ++i)
                {
                    const auto se = spectral_efficiency(d->H_eff, o.H_hat, c.se.N_s, c.se.snr_db[i]);
                    rec.se[i] = se.bits;
                    rec.se_padded = rec.se_padded || se.padded;
                }
            }
            catch (const Error &e)
            {
                rec.status = std::string("error: ") + e.what();
            }
        }
        rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        out.push_back(std::move(rec));
    }
    return out;
}

// ------------------------------------------------------------------------
// Sweep execution
// ------------------------------------------------------------------------

// Records reach `sink` in (sweep point, trial, estimator) order whatever the
// thread count. Failures are recorded in ResultRecord::status.
inline void run_sweep(const ExperimentConfig &c, const std::function<void(const ResultRecord &)> &sink)
{
    c.validate();
    const auto points = sweep_points(c);
    const std::size_t n_items = points.size() * static_cast<std::size_t>(c.trials);
    const bool needs_dict = std::find(c.estimators.begin(), c.estimators.end(), EstimatorKind::omp) != c.estimators.end();
    std::optional<Dictionary> dict;
    if (needs_dict)
        dict = config_dictionary(c);
    const Dictionary *dp = dict ? &*dict : nullptr;

    std::vector<std::optional<std::vector<ResultRecord>>> done(n_items);
    std::size_t next_emit = 0;
    std::mutex mtx;
    std::atomic<std::size_t> next_item{0};

    auto worker = [&] {
        for (;;)
        {
            const std::size_t i = next_item.fetch_add(1);
            if (i >= n_items)
                return;
            const auto &pt = points[i / static_cast<std::size_t>(c.trials)];
            const int trial = static_cast<int>(i % static_cast<std::size_t>(c.trials));
            auto recs = run_trial(c, pt, trial, dp);
            std::lock_guard<std::mutex> lock(mtx);
            done[i] = std::move(recs);
            while (next_emit < n_items && done[next_emit])
            {
                for (const auto &r : *done[next_emit])
                    sink(r);
                done[next_emit].reset();
                ++next_emit;
            }
        }
    };

    const int n_threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(c.threads), n_items));
    if (n_threads <= 1)
        worker();
    else
    {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t)
            pool.emplace_back(worker);
        for (auto &t : pool)
            t.join();
    }
}

inline std::vector<ResultRecord> run_sweep(const ExperimentConfig &c)
{
    std::vector<ResultRecord> out;
    run_sweep(c, [&](const ResultRecord &r) { out.push_back(r); });
    return out;
}

// ------------------------------------------------------------------------
// CSV
// ------------------------------------------------------------------------

namespace detail
{
inline std::string format_number(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

// Compact label for column names: -10 -> "-10", 2.5 -> "2.5".
inline std::string format_label(double x)
{
    std::ostringstream os;
    os << std::setprecision(15) << x;
    return os.str();
}
} // namespace detail

inline std::vector<std::string> csv_columns(const ExperimentConfig &c)
{
    std::vector<std::string> cols{"M", "S", "pnr_db", "phase_level_deg", "gain_level", "trial", "estimator", "nmse",
                                  "nmse_db"};
    for (double s : c.se.snr_db)
        cols.push_back("se_at_snr_" + detail::format_label(s));
    for (const char *k : {"r_hat", "r_sub", "flops", "seed", "status", "wall_ms"})
        cols.emplace_back(k);
    return cols;
}

inline void write_csv_header(std::ostream &os, const ExperimentConfig &c)
{
    const auto cols = csv_columns(c);
    for (std::size_t i = 0; i < cols.size(); ++i)
        os << (i ? "," : "") << cols[i];
    os << '\n';
}

// NaN impairment axes are written as the effective transmit-side level.
inline void write_csv_row(std::ostream &os, const ExperimentConfig &c, const ResultRecord &r)
{
    using detail::format_number;
    const ImpairmentLevels lv = levels_at(c, r.point);
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    os << r.point.M << ',' << r.point.S << ',' << format_number(r.point.pnr_db) << ','
       << format_number(rad2deg(lv.phase_tx)) << ',' << format_number(lv.gain_tx) << ',' << r.trial << ','
       << r.estimator << ',' << format_number(r.nmse) << ',' << format_number(r.nmse_db());
    for (double s : r.se)
        os << ',' << format_number(s);
    os << ',' << r.r_hat << ',' << r.r_sub << ',' << format_number(r.flops) << ',' << r.seed << ',' << status << ','
       << format_number(r.wall_ms) << '\n';
}

// Minimal reader for CSV files produced by write_csv_*: no quoting.
struct CsvTable
{
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string &name) const
    {
        const auto it = std::find(header.begin(), header.end(), name);
        require(it != header.end(), ErrorCode::io, "CSV has no column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    }
};

inline CsvTable read_csv(std::istream &in)
{
    auto split = [](const std::string &line) {
        std::vector<std::string> out;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            out.push_back(cell);
        if (!line.empty() && line.back() == ',')
            out.emplace_back();
        return out;
    };
    CsvTable t;
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorCode::io, "CSV is empty");
    t.header = split(line);
    while (std::getline(in, line))
    {
        if (line.empty())
            continue;
        auto row = split(line);
        require(row.size() == t.header.size(), ErrorCode::io, "CSV row has " + std::to_string(row.size()) +
                                                                  " fields, header has " +
                                                                  std::to_string(t.header.size()));
        t.rows.push_back(std::move(row));
    }
    return t;
}

// Rank histograms from a sweep CSV: r_sub and r_hat of gcg_alt rows, r_hat
// of omp rows. Rows with a non-ok status are skipped.
inline RankHistogram rank_histogram_from_csv(const CsvTable &t)
{
    const std::size_t est = t.column("estimator"), rh = t.column("r_hat"), rs = t.column("r_sub"),
                      st = t.column("status");
    std::vector<int> r_sub, r_gcg, r_omp;
    for (const auto &row : t.rows)
    {
        if (row[st] != "ok")
            continue;
        if (row[est] == "gcg_alt")
        {
            r_gcg.push_back(std::stoi(row[rh]));
            r_sub.push_back(std::stoi(row[rs]));
        }
        else if (row[est] == "omp")
            r_omp.push_back(std::stoi(row[rh]));
    }
    return rank_distribution(r_sub, r_gcg, r_omp);
}

inline json to_json(const RankHistogram &h)
{
    return json{{"first_bin", h.first_bin}, {"r_sub", h.r_sub}, {"r_gcg", h.r_gcg}, {"r_omp", h.r_omp}};
}

} // namespace mmwave_mc

#endif
