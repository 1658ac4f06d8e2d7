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

#ifndef MMWAVE_MC_FRONTEND_HPP
#define MMWAVE_MC_FRONTEND_HPP

#include "channel.hpp"

#include <numeric>
#include <optional>
#include <vector>

// All antenna, row and column indices in this header are 0-based.

namespace mmwave_mc
{

using IMatrix = Eigen::MatrixXi;

// ------------------------------------------------------------------------
// Quantized phase shifters
// ------------------------------------------------------------------------

class PhaseShifterSet
{
  public:
    explicit PhaseShifterSet(int bits = 6) : bits_(bits)
    {
        require(bits >= 1 && bits <= 16, ErrorCode::config, "phase shifter resolution must be 1..16 bits");
        values_.resize(static_cast<std::size_t>(size()));
        for (int k = 0; k < size(); ++k)
            values_[static_cast<std::size_t>(k)] = compute(k);
    }

    int bits() const { return bits_; }
    int size() const { return 1 << bits_; }

    // exp(j 2 pi k / 2^I) for any integer k (reduced mod 2^I).
    cplx value(long long k) const { return values_[static_cast<std::size_t>(reduce(k))]; }
    int reduce(long long k) const
    {
        const long long n = size();
        return static_cast<int>(((k % n) + n) % n);
    }
    const std::vector<cplx> &values() const { return values_; }

    bool contains(cplx z) const
    {
        return std::find(values_.begin(), values_.end(), z) != values_.end();
    }

    CMatrix realize(const IMatrix &index) const
    {
        CMatrix out(index.rows(), index.cols());
        for (Eigen::Index c = 0; c < index.cols(); ++c)
            for (Eigen::Index r = 0; r < index.rows(); ++r)
                out(r, c) = value(index(r, c));
        return out;
    }

  private:
    // Quarter-turn points are returned exactly so that 1-bit and 2-bit sets
    // contain +-1 and +-j without rounding noise.
    cplx compute(int k) const
    {
        const int n = size();
        if ((4 * k) % n == 0)
        {
            switch ((4 * k) / n)
            {
            case 0: return {1.0, 0.0};
            case 1: return {0.0, 1.0};
            case 2: return {-1.0, 0.0};
            default: return {0.0, -1.0};
            }
        }
        return std::polar(1.0, 2.0 * pi * k / n);
    }

    int bits_;
    std::vector<cplx> values_;
};

// ------------------------------------------------------------------------
// Transmit stage: G b = e_j with unit-modulus quantized G
// ------------------------------------------------------------------------

struct TransmitStageDesign
{
    IMatrix phase_index; // N_t x K_t exponents into the phase set
    double scale = 1.0;  // shared analog scale 1/sqrt(K_t)
    CVector b;           // K_t digital weights
    int target_column = 0;
    int bits = 1;

    CMatrix G() const { return scale * PhaseShifterSet(bits).realize(phase_index); }
    CVector f() const { return G() * b; }
};

inline TransmitStageDesign design_transmit_stage(int j, int N_t, int K_t, const PhaseShifterSet &shifter,
                                                 int n1 = 0, int n2 = 1)
{
    require(K_t >= 2, ErrorCode::infeasible_design, "a single RF chain cannot synthesise a selection vector");
    require(N_t >= 2, ErrorCode::dimension_mismatch, "transmit design needs at least two antennas");
    require(j >= 0 && j < N_t, ErrorCode::dimension_mismatch, "target column out of range");
    require(shifter.reduce(n1) != shifter.reduce(n2), ErrorCode::singular_design,
            "transmit exponents must differ modulo the phase-set size");

    TransmitStageDesign d;
    d.bits = shifter.bits();
    d.target_column = j;
    d.scale = 1.0 / std::sqrt(static_cast<double>(K_t));
    d.phase_index.resize(N_t, K_t);
    for (int l = 0; l < K_t; ++l)
    {
        d.phase_index(0, l) = shifter.reduce(static_cast<long long>(n1) * l);
        d.phase_index(1, l) = shifter.reduce(static_cast<long long>(n2) * l);
    }
    for (int r = 2; r < N_t; ++r)
        d.phase_index.row(r) = d.phase_index.row(1);

    // b = G1^H (G1 G1^H)^-1 e_1
    const CMatrix G1 = d.scale * shifter.realize(d.phase_index.topRows(2));
    const Eigen::Matrix2cd gram = G1 * G1.adjoint();
    const Eigen::Vector2cd x = gram.fullPivLu().solve(Eigen::Vector2cd(1.0, 0.0));
    d.b = G1.adjoint() * x;

    if (j != 0)
        d.phase_index.row(0).swap(d.phase_index.row(j));
    return d;
}

// ------------------------------------------------------------------------
// Receive step: Q D = W with W a 0/1 row selection
// ------------------------------------------------------------------------

struct ReceiveStepDesign
{
    IMatrix phase_index; // N_r x K_r
    double scale = 1.0;  // 1/sqrt(K_r)
    CMatrix D;           // K_r x |row_set|
    std::vector<int> row_set;
    int bits = 1;

    CMatrix Q() const { return scale * PhaseShifterSet(bits).realize(phase_index); }
    CMatrix combiner() const { return Q() * D; }

    // The selection target: column q has a single one at row_set[q].
    CMatrix W() const
    {
        CMatrix w = CMatrix::Zero(phase_index.rows(), static_cast<Eigen::Index>(row_set.size()));
        for (std::size_t q = 0; q < row_set.size(); ++q)
            w(row_set[q], static_cast<Eigen::Index>(q)) = 1.0;
        return w;
    }
};

// Exponent k*floor(2^I/K_r) for chain k: distinct whenever 2^I >= K_r, and
// unitary (DFT-like) when K_r divides 2^I.
inline std::vector<int> default_receive_exponents(int K_r, const PhaseShifterSet &shifter)
{
    require(shifter.size() >= K_r, ErrorCode::infeasible_design,
            "phase set has fewer points than receive RF chains; distinct exponents unavailable");
    const int step = shifter.size() / K_r;
    std::vector<int> n(static_cast<std::size_t>(K_r));
    for (int k = 0; k < K_r; ++k)
        n[static_cast<std::size_t>(k)] = k * step;
    return n;
}

inline ReceiveStepDesign design_receive_step(const std::vector<int> &row_set, int N_r, int K_r,
                                             const PhaseShifterSet &shifter,
                                             std::optional<std::vector<int>> exponents = std::nullopt)
{
    require(K_r >= 2, ErrorCode::infeasible_design, "receive design needs at least two RF chains");
    require(N_r >= K_r, ErrorCode::dimension_mismatch, "receive design needs N_r >= K_r");
    require(static_cast<int>(row_set.size()) <= K_r - 1, ErrorCode::infeasible_design,
            "at most K_r - 1 rows can be selected per step");
    std::vector<char> used(static_cast<std::size_t>(N_r), 0);
    for (int r : row_set)
    {
        require(r >= 0 && r < N_r, ErrorCode::dimension_mismatch, "selected row out of range");
        require(!used[static_cast<std::size_t>(r)], ErrorCode::infeasible_design, "duplicate row in selection set");
        used[static_cast<std::size_t>(r)] = 1;
    }
    const int n_sel = static_cast<int>(row_set.size());
    IMatrix base(N_r, K_r);
    if (!exponents && shifter.size() < K_r)
    {
        // Too few phases for distinct exponents: J - 2 diag(0, 1, ..., 1)
        // with entries +-1 is invertible for every K_r.
        const int minus_one = shifter.size() / 2;
        for (int k = 0; k < K_r; ++k)
            for (int l = 0; l < K_r; ++l)
                base(k, l) = (k >= 1 && k == l) ? minus_one : 0;
    }
    else
    {
        const std::vector<int> n = exponents ? *exponents : default_receive_exponents(K_r, shifter);
        require(static_cast<int>(n.size()) == K_r, ErrorCode::config, "need one exponent per receive RF chain");
        for (int a = 0; a < K_r; ++a)
            for (int c = a + 1; c < K_r; ++c)
                require(shifter.reduce(n[static_cast<std::size_t>(a)]) !=
                            shifter.reduce(n[static_cast<std::size_t>(c)]),
                        ErrorCode::singular_design, "receive exponents must be pairwise distinct modulo 2^I");
        for (int k = 0; k < K_r; ++k)
            for (int l = 0; l < K_r; ++l)
                base(k, l) = shifter.reduce(static_cast<long long>(n[static_cast<std::size_t>(k)]) * l);
    }
    for (int r = K_r; r < N_r; ++r)
        base.row(r) = base.row(K_r - 1);

    ReceiveStepDesign d;
    d.bits = shifter.bits();
    d.scale = 1.0 / std::sqrt(static_cast<double>(K_r));
    d.row_set = row_set;
    const CMatrix Q1 = d.scale * shifter.realize(base.topRows(K_r));
    const CMatrix W1 = CMatrix::Identity(K_r, n_sel);
    d.D = Q1.fullPivLu().solve(W1);

    // Unpermuted row q < n_sel moves to row_set[q]; the rest keep their order.
    std::vector<int> dest(static_cast<std::size_t>(N_r), -1);
    for (int q = 0; q < n_sel; ++q)
        dest[static_cast<std::size_t>(q)] = row_set[static_cast<std::size_t>(q)];
    int next = 0;
    for (int q = n_sel; q < N_r; ++q)
    {
        while (used[static_cast<std::size_t>(next)])
            ++next;
        dest[static_cast<std::size_t>(q)] = next++;
    }
    d.phase_index.resize(N_r, K_r);
    for (int q = 0; q < N_r; ++q)
        d.phase_index.row(dest[static_cast<std::size_t>(q)]) = base.row(q);
    return d;
}

// ------------------------------------------------------------------------
// Uniform spatial sampling
// ------------------------------------------------------------------------

struct SamplingPattern
{
    int N_r = 0;
    int N_t = 0;
    int per_column = 0;
    std::vector<std::vector<int>> rows; // rows[k]: sorted sampled rows of column k

    std::size_t size() const { return static_cast<std::size_t>(per_column) * static_cast<std::size_t>(N_t); }
    double ratio() const { return static_cast<double>(per_column) / N_r; }

    // Column lists of each row (the transpose view of Omega).
    std::vector<std::vector<int>> columns_by_row() const
    {
        std::vector<std::vector<int>> out(static_cast<std::size_t>(N_r));
        for (int k = 0; k < N_t; ++k)
            for (int r : rows[static_cast<std::size_t>(k)])
                out[static_cast<std::size_t>(r)].push_back(k);
        return out;
    }

    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mask() const
    {
        Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> m =
            Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(N_r, N_t, false);
        for (int k = 0; k < N_t; ++k)
            for (int r : rows[static_cast<std::size_t>(k)])
                m(r, k) = true;
        return m;
    }

    CMatrix project(const CMatrix &M) const
    {
        CMatrix out = CMatrix::Zero(N_r, N_t);
        for (int k = 0; k < N_t; ++k)
            for (int r : rows[static_cast<std::size_t>(k)])
                out(r, k) = M(r, k);
        return out;
    }
};

inline int samples_per_column(int N_r, double p)
{
    const double x = p * N_r;
    const double rx = std::round(x);
    require(std::abs(x - rx) <= 1e-9, ErrorCode::config, "p * N_r must be an integer");
    require(rx >= 1.0 && rx <= N_r, ErrorCode::config, "p * N_r must lie in [1, N_r]");
    return static_cast<int>(rx);
}

inline SamplingPattern build_sampling_pattern(int N_t, int N_r, double p, std::uint64_t seed)
{
    require(N_t >= 1 && N_r >= 1, ErrorCode::config, "matrix dimensions must be positive");
    SamplingPattern s;
    s.N_r = N_r;
    s.N_t = N_t;
    s.per_column = samples_per_column(N_r, p);
    s.rows.resize(static_cast<std::size_t>(N_t));
    Rng rng(seed);
    std::vector<int> perm(static_cast<std::size_t>(N_r));
    for (int k = 0; k < N_t; ++k)
    {
        std::iota(perm.begin(), perm.end(), 0);
        for (int i = 0; i < s.per_column; ++i)
        {
            std::uniform_int_distribution<int> pick(i, N_r - 1);
            std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(pick(rng))]);
        }
        auto &col = s.rows[static_cast<std::size_t>(k)];
        col.assign(perm.begin(), perm.begin() + s.per_column);
        std::sort(col.begin(), col.end());
    }
    return s;
}

// ------------------------------------------------------------------------
// Training plan
// ------------------------------------------------------------------------

struct TrainingStage
{
    int index = 0; // m - 1
    TransmitStageDesign transmit;
    std::vector<ReceiveStepDesign> steps;
};

// Position n of the received vector Y holds the sample of entry (row, col),
// observed at (stage, step) on combiner column slot.
struct IndexEntry
{
    int stage = 0;
    int step = 0;
    int slot = 0;
    int row = 0;
    int col = 0;
};

struct TrainingPlan
{
    int N_t = 0;
    int N_r = 0;
    int K_t = 0;
    int K_r = 0;
    int M = 0;
    int S = 0;
    int bits = 1;
    SamplingPattern pattern;
    std::vector<TrainingStage> stages;
    std::vector<IndexEntry> index_map;

    int total_steps() const { return M * S; }
};

// Stage m (1-based) sounds column mod(m, N_t). A column's sorted rows are
// chunked into groups of K_r - 1 and spread over the (stage, step) slots of
// the stages targeting it, in stage-major order; unused steps stay empty.
inline TrainingPlan assemble_training_plan(const SamplingPattern &pattern, int K_t, int K_r,
                                           const PhaseShifterSet &shifter, int M, int S,
                                           std::optional<std::vector<int>> rx_exponents = std::nullopt,
                                           int n1 = 0, int n2 = 1)
{
    const int N_t = pattern.N_t;
    const int N_r = pattern.N_r;
    require(S >= 1, ErrorCode::plan, "need at least one receive step per stage");
    require(M >= N_t, ErrorCode::plan, "need M >= N_t stages so every column is sounded");
    require(static_cast<int>(pattern.rows.size()) == N_t, ErrorCode::dimension_mismatch, "malformed sampling pattern");
    require(K_r >= 2, ErrorCode::infeasible_design, "receive design needs at least two RF chains");
    const int chunk = K_r - 1;

    TrainingPlan plan;
    plan.N_t = N_t;
    plan.N_r = N_r;
    plan.K_t = K_t;
    plan.K_r = K_r;
    plan.M = M;
    plan.S = S;
    plan.bits = shifter.bits();
    plan.pattern = pattern;

    std::vector<std::vector<int>> stages_of(static_cast<std::size_t>(N_t));
    for (int m = 1; m <= M; ++m)
        stages_of[static_cast<std::size_t>(m % N_t)].push_back(m - 1);

    // row sets per (stage, step)
    std::vector<std::vector<std::vector<int>>> sets(static_cast<std::size_t>(M),
                                                    std::vector<std::vector<int>>(static_cast<std::size_t>(S)));
    for (int k = 0; k < N_t; ++k)
    {
        const auto &rows = pattern.rows[static_cast<std::size_t>(k)];
        const auto &st = stages_of[static_cast<std::size_t>(k)];
        const std::size_t n_chunks = (rows.size() + static_cast<std::size_t>(chunk) - 1) / static_cast<std::size_t>(chunk);
        if (n_chunks > st.size() * static_cast<std::size_t>(S))
            throw Error(ErrorCode::plan, "column " + std::to_string(k) + " needs " + std::to_string(n_chunks) +
                                             " steps but only " + std::to_string(st.size() * S) + " are available");
        for (std::size_t c = 0; c < n_chunks; ++c)
        {
            const int m = st[c / static_cast<std::size_t>(S)];
            const int s = static_cast<int>(c % static_cast<std::size_t>(S));
            const auto first = rows.begin() + static_cast<std::ptrdiff_t>(c * static_cast<std::size_t>(chunk));
            const auto last = rows.begin() + static_cast<std::ptrdiff_t>(std::min(rows.size(), (c + 1) * static_cast<std::size_t>(chunk)));
            sets[static_cast<std::size_t>(m)][static_cast<std::size_t>(s)].assign(first, last);
        }
    }

    std::optional<std::vector<int>> exps = rx_exponents;
    if (!exps && shifter.size() >= K_r)
        exps = default_receive_exponents(K_r, shifter);
    plan.stages.resize(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m)
    {
        auto &stage = plan.stages[static_cast<std::size_t>(m)];
        stage.index = m;
        const int col = (m + 1) % N_t;
        stage.transmit = design_transmit_stage(col, N_t, K_t, shifter, n1, n2);
        stage.steps.reserve(static_cast<std::size_t>(S));
        for (int s = 0; s < S; ++s)
        {
            const auto &rs = sets[static_cast<std::size_t>(m)][static_cast<std::size_t>(s)];
            stage.steps.push_back(design_receive_step(rs, N_r, K_r, shifter, exps));
            for (std::size_t q = 0; q < rs.size(); ++q)
                plan.index_map.push_back({m, s, static_cast<int>(q), rs[q], col});
        }
    }
    return plan;
}

// ------------------------------------------------------------------------
// Training simulation
// ------------------------------------------------------------------------

enum class ObservationMode
{
    mc,
    imc,
};

inline const char *to_string(ObservationMode m) { return m == ObservationMode::mc ? "MC" : "IMC"; }

struct ObservationMatrix
{
    CMatrix H_tilde; // zero off Omega
    SamplingPattern pattern;
    double pnr_db = 0.0;
    double noise_var = 0.0;
    ObservationMode mode = ObservationMode::mc;
    CVector y; // received samples in index-map order

    int N_r() const { return static_cast<int>(H_tilde.rows()); }
    int N_t() const { return static_cast<int>(H_tilde.cols()); }
    std::size_t num_samples() const { return pattern.size(); }
};

// sigma^2 = P / PNR with P = 1; +inf dB disables noise.
inline double noise_variance(double pnr_db)
{
    require(!std::isnan(pnr_db) && pnr_db != -std::numeric_limits<double>::infinity(), ErrorCode::config,
            "PNR must be a number above -inf dB");
    if (std::isinf(pnr_db))
        return 0.0;
    return 1.0 / db2lin(pnr_db);
}

struct TrainingOptions
{
    // false: apply the ideal selections e_j and W that the verified designs
    // realise. true: apply the realised hybrid products G b and Q D.
    bool realized_processors = false;
};

// One CN(0, sigma^2) vector of length N_r is drawn per (stage, step), in plan
// order and including empty steps, so noise pairs across estimators and modes.
inline ObservationMatrix simulate_training(const CMatrix &H_eff, const TrainingPlan &plan, double pnr_db,
                                           std::uint64_t seed, const CVector &e_r, TrainingOptions opts = {})
{
    require(H_eff.rows() == plan.N_r && H_eff.cols() == plan.N_t, ErrorCode::dimension_mismatch,
            "channel does not match the training plan");
    require(e_r.size() == plan.N_r, ErrorCode::dimension_mismatch, "receive impairment vector has wrong length");
    ObservationMatrix obs;
    obs.pattern = plan.pattern;
    obs.pnr_db = pnr_db;
    obs.noise_var = noise_variance(pnr_db);
    obs.mode = ObservationMode::mc;
    obs.H_tilde = CMatrix::Zero(plan.N_r, plan.N_t);
    obs.y.resize(static_cast<Eigen::Index>(plan.index_map.size()));

    Rng rng(seed);
    Eigen::Index n_out = 0;
    for (const auto &stage : plan.stages)
    {
        const int j = stage.transmit.target_column;
        CVector Hf;
        if (opts.realized_processors)
            Hf = H_eff * stage.transmit.f();
        for (const auto &step : stage.steps)
        {
            const CVector n = complex_gaussian_vector(rng, plan.N_r, obs.noise_var);
            if (step.row_set.empty())
                continue;
            if (opts.realized_processors)
            {
                const CVector r = Hf + e_r.cwiseProduct(n);
                const CVector y = step.combiner().adjoint() * r;
                for (std::size_t q = 0; q < step.row_set.size(); ++q)
                {
                    obs.H_tilde(step.row_set[q], j) = y(static_cast<Eigen::Index>(q));
                    obs.y(n_out++) = y(static_cast<Eigen::Index>(q));
                }
            }
            else
            {
                for (int row : step.row_set)
                {
                    const cplx y = H_eff(row, j) + e_r(row) * n(row);
                    obs.H_tilde(row, j) = y;
                    obs.y(n_out++) = y;
                }
            }
        }
    }
    return obs;
}

inline ObservationMatrix simulate_training(const CMatrix &H_eff, const TrainingPlan &plan, double pnr_db,
                                           std::uint64_t seed, TrainingOptions opts = {})
{
    return simulate_training(H_eff, plan, pnr_db, seed, CVector::Ones(plan.N_r), opts);
}

} // namespace mmwave_mc

#endif
