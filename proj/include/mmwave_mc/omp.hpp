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

#ifndef MMWAVE_MC_OMP_HPP
#define MMWAVE_MC_OMP_HPP

#include "frontend.hpp"

#include <array>
#include <vector>

// Dictionary-based OMP over the virtual channel H = A_r H_v A_t^H, sounded
// with random quantized-phase beam pairs y = w^H H f + w^H E_r n.

namespace mmwave_mc
{

// ------------------------------------------------------------------------
// Dictionaries
// ------------------------------------------------------------------------

struct AngleGrid
{
    ArrayKind kind = ArrayKind::ula;
    int size = 0;      // total grid points G
    int per_axis = 0;  // G for a ULA, sqrt(G) for a USPA
    // Spatial frequency of point g on one axis: -1 + 2 g / per_axis.
    double frequency(int g) const { return -1.0 + 2.0 * g / per_axis; }

    // (y, z) axis frequencies of column g of a planar grid.
    std::pair<double, double> planar_frequencies(int g) const
    {
        return {frequency(g / per_axis), frequency(g % per_axis)};
    }

    // (phi, theta) with sin(phi) sin(theta) = s_y and cos(theta) = s_z, for
    // grid points inside the visible region s_y^2 + s_z^2 <= 1.
    std::optional<std::pair<double, double>> planar_angles(int g) const
    {
        const auto [sy, sz] = planar_frequencies(g);
        if (sy * sy + sz * sz > 1.0)
            return std::nullopt;
        const double theta = std::acos(sz);
        const double st = std::sin(theta);
        if (st == 0.0)
            return sy == 0.0 ? std::optional<std::pair<double, double>>({0.0, theta}) : std::nullopt;
        return std::pair<double, double>{std::asin(std::clamp(sy / st, -1.0, 1.0)), theta};
    }
};

struct Dictionary
{
    CMatrix A_r; // N_r x G_r
    CMatrix A_t; // N_t x G_t
    AngleGrid grid_r;
    AngleGrid grid_t;
};

namespace detail
{
inline std::pair<CMatrix, AngleGrid> array_dictionary(const ArrayGeometry &g, int G)
{
    g.validate();
    require(G >= g.num_antennas, ErrorCode::config, "dictionary grid must have at least as many points as antennas");
    AngleGrid grid;
    grid.kind = g.kind;
    grid.size = G;
    if (g.kind == ArrayKind::ula)
    {
        grid.per_axis = G;
        CMatrix A(g.num_antennas, G);
        const double norm = 1.0 / std::sqrt(static_cast<double>(g.num_antennas));
        for (int k = 0; k < G; ++k)
            A.col(k) = steering(g.num_antennas, g.spacing, grid.frequency(k), norm);
        return {A, grid};
    }
    const int axis = static_cast<int>(std::lround(std::sqrt(static_cast<double>(G))));
    require(axis * axis == G, ErrorCode::config, "planar dictionary grid size must be a perfect square");
    grid.per_axis = axis;
    const double norm = 1.0 / std::pow(static_cast<double>(g.num_antennas), 0.25);
    CMatrix A(g.num_antennas, G);
    for (int k = 0; k < G; ++k)
    {
        const auto [sy, sz] = grid.planar_frequencies(k);
        A.col(k) = kron(steering(g.side(), g.spacing, sy, norm), steering(g.side(), g.spacing, sz, norm));
    }
    return {A, grid};
}
} // namespace detail

// ULA grids are uniform in sin(phi) over [-1, 1); USPA grids are Kronecker
// products of two such per-axis grids.
inline Dictionary build_dictionary(const ArrayGeometry &tx, const ArrayGeometry &rx, int G_t, int G_r)
{
    Dictionary d;
    std::tie(d.A_t, d.grid_t) = detail::array_dictionary(tx, G_t);
    std::tie(d.A_r, d.grid_r) = detail::array_dictionary(rx, G_r);
    return d;
}

// ------------------------------------------------------------------------
// Sounding
// ------------------------------------------------------------------------

struct SoundingOperator
{
    int N_t = 0;
    int N_r = 0;
    int group = 1;              // receive beams sharing one noise draw (one step)
    CMatrix F;                  // N_t x M unit-norm transmit beams
    std::vector<CMatrix> W;     // W[m]: N_r x n_m unit-norm receive beams

    int num_tx_beams() const { return static_cast<int>(F.cols()); }
    Eigen::Index size() const
    {
        Eigen::Index n = 0;
        for (const auto &w : W)
            n += w.cols();
        return n;
    }

    // Noiseless y, ordered by transmit beam then receive beam.
    CVector apply(const CMatrix &H) const
    {
        CVector y(size());
        Eigen::Index o = 0;
        for (int m = 0; m < num_tx_beams(); ++m)
        {
            const auto &Wm = W[static_cast<std::size_t>(m)];
            y.segment(o, Wm.cols()) = Wm.adjoint() * (H * F.col(m));
            o += Wm.cols();
        }
        return y;
    }

    // Explicit Phi acting on column-major vec(H); row entries conj(w_r) f_c.
    CMatrix matrix() const
    {
        CMatrix Phi(size(), static_cast<Eigen::Index>(N_t) * N_r);
        Eigen::Index o = 0;
        for (int m = 0; m < num_tx_beams(); ++m)
        {
            const auto &Wm = W[static_cast<std::size_t>(m)];
            for (Eigen::Index l = 0; l < Wm.cols(); ++l, ++o)
                for (int c = 0; c < N_t; ++c)
                    for (int r = 0; r < N_r; ++r)
                        Phi(o, static_cast<Eigen::Index>(c) * N_r + r) = std::conj(Wm(r, l)) * F(c, m);
        }
        return Phi;
    }
};

// Beam entries are drawn uniformly from the phase set and scaled to unit norm.
// Measurements are spread evenly over num_tx_beams transmit beams; each group
// of K_r receive beams forms one training step.
inline SoundingOperator build_sounding(int N_t, int N_r, int K_t, int K_r, int num_measurements,
                                       const PhaseShifterSet &shifter, std::uint64_t seed, int num_tx_beams = 0)
{
    require(N_t >= 1 && N_r >= 1, ErrorCode::config, "array sizes must be positive");
    require(K_t >= 1 && K_r >= 1, ErrorCode::config, "RF chain counts must be positive");
    const int M = num_tx_beams > 0 ? num_tx_beams : N_t;
    require(num_measurements >= M, ErrorCode::config, "need at least one measurement per transmit beam");
    SoundingOperator s;
    s.N_t = N_t;
    s.N_r = N_r;
    s.group = K_r;
    Rng rng(seed);
    std::uniform_int_distribution<int> phase(0, shifter.size() - 1);
    const double ft = 1.0 / std::sqrt(static_cast<double>(N_t));
    const double fr = 1.0 / std::sqrt(static_cast<double>(N_r));
    s.F.resize(N_t, M);
    for (int m = 0; m < M; ++m)
        for (int c = 0; c < N_t; ++c)
            s.F(c, m) = ft * shifter.value(phase(rng));
    s.W.resize(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m)
    {
        const int n_m = num_measurements / M + (m < num_measurements % M ? 1 : 0);
        CMatrix Wm(N_r, n_m);
        for (int l = 0; l < n_m; ++l)
            for (int r = 0; r < N_r; ++r)
                Wm(r, l) = fr * shifter.value(phase(rng));
        s.W[static_cast<std::size_t>(m)] = std::move(Wm);
    }
    return s;
}

// One CN(0, sigma^2) receive-noise vector per group of K_r receive beams.
inline CVector simulate_sounding(const CMatrix &H_eff, const SoundingOperator &s, double pnr_db, std::uint64_t seed,
                                 const CVector &e_r)
{
    require(H_eff.rows() == s.N_r && H_eff.cols() == s.N_t, ErrorCode::dimension_mismatch,
            "channel does not match the sounding operator");
    require(e_r.size() == s.N_r, ErrorCode::dimension_mismatch, "receive impairment vector has wrong length");
    const double var = noise_variance(pnr_db);
    Rng rng(seed);
    CVector y(s.size());
    Eigen::Index o = 0;
    for (int m = 0; m < s.num_tx_beams(); ++m)
    {
        const auto &Wm = s.W[static_cast<std::size_t>(m)];
        const CVector Hf = H_eff * s.F.col(m);
        for (Eigen::Index l0 = 0; l0 < Wm.cols(); l0 += s.group)
        {
            const Eigen::Index n_l = std::min<Eigen::Index>(s.group, Wm.cols() - l0);
            const CVector r = Hf + e_r.cwiseProduct(complex_gaussian_vector(rng, s.N_r, var));
            y.segment(o, n_l) = Wm.middleCols(l0, n_l).adjoint() * r;
            o += n_l;
        }
    }
    return y;
}

inline CVector simulate_sounding(const CMatrix &H_eff, const SoundingOperator &s, double pnr_db, std::uint64_t seed)
{
    return simulate_sounding(H_eff, s, pnr_db, seed, CVector::Ones(s.N_r));
}

// ------------------------------------------------------------------------
// OMP
// ------------------------------------------------------------------------

// Stopping thresholds in units of sigma^2 at the anchor PNRs 0..20 dB (step 5).
inline double omp_threshold_factor(double pnr_db)
{
    static constexpr std::array<double, 5> anchors{0.0, 5.0, 10.0, 15.0, 20.0};
    static constexpr std::array<double, 5> factors{0.025, 0.05, 0.1, 0.2, 0.4};
    std::size_t best = 0;
    for (std::size_t i = 1; i < anchors.size(); ++i)
        if (std::abs(pnr_db - anchors[i]) < std::abs(pnr_db - anchors[best]))
            best = i;
    return factors[best];
}

inline double omp_stop_threshold(double pnr_db) { return omp_threshold_factor(pnr_db) * noise_variance(pnr_db); }

enum class OmpStopRule
{
    // Residual energy removed by the latest atom, per measurement, <= eps_stop;
    // that atom is discarded.
    residual_decrease,
    // Residual mean square ||r||^2 / N <= eps_stop.
    residual,
};

inline const char *to_string(OmpStopRule r) { return r == OmpStopRule::residual ? "residual" : "residual_decrease"; }

struct OmpOptions
{
    double eps_stop = 0.0;
    int max_paths = 64;
    OmpStopRule rule = OmpStopRule::residual_decrease;
};

struct OmpResult
{
    CMatrix H_hat;
    std::vector<std::pair<int, int>> support; // (receive grid index, transmit grid index)
    CVector gains;                            // entries of H_v on the support
    std::vector<double> residual_history;     // ||r||^2 after 0, 1, ... kept atoms
    int r_hat = 0;
    double flops = 0.0;          // 8 N G_t G_r per correlation sweep
    long long correlation_sweeps = 0;
    bool breakdown = false;      // residual failed to decrease
    std::string diagnostic;
};

inline OmpResult omp_estimate(const CVector &y, const SoundingOperator &s, const Dictionary &dict, const OmpOptions &opt)
{
    const Eigen::Index N = y.size();
    require(N > 0, ErrorCode::degenerate_input, "OMP needs at least one observation");
    require(N == s.size(), ErrorCode::dimension_mismatch, "observation length does not match the sounding operator");
    require(dict.A_r.rows() == s.N_r && dict.A_t.rows() == s.N_t, ErrorCode::dimension_mismatch,
            "dictionary does not match the sounding operator");
    require(opt.max_paths >= 1, ErrorCode::config, "max_paths must be at least 1");

    const int M = s.num_tx_beams();
    const Eigen::Index G_r = dict.A_r.cols();
    const Eigen::Index G_t = dict.A_t.cols();

    // T = A_t^H F (G_t x M); R_m = W_m^H A_r (n_m x G_r)
    const CMatrix T = dict.A_t.adjoint() * s.F;
    std::vector<CMatrix> R(static_cast<std::size_t>(M));
    std::vector<Eigen::Index> offset(static_cast<std::size_t>(M) + 1, 0);
    Eigen::MatrixXd S(G_r, M); // S[gr, m] = sum_l |R_m[l, gr]|^2
    for (int m = 0; m < M; ++m)
    {
        R[static_cast<std::size_t>(m)] = s.W[static_cast<std::size_t>(m)].adjoint() * dict.A_r;
        S.col(m) = R[static_cast<std::size_t>(m)].cwiseAbs2().colwise().sum().transpose();
        offset[static_cast<std::size_t>(m) + 1] = offset[static_cast<std::size_t>(m)] + R[static_cast<std::size_t>(m)].rows();
    }
    // ||atom(gr, gt)||^2 = sum_m S[gr, m] |T[gt, m]|^2
    const Eigen::MatrixXd atom_norm_sq = S * T.cwiseAbs2().transpose();

    auto atom = [&](int gr, int gt) {
        CVector a(N);
        for (int m = 0; m < M; ++m)
        {
            const auto &Rm = R[static_cast<std::size_t>(m)];
            a.segment(offset[static_cast<std::size_t>(m)], Rm.rows()) = Rm.col(gr) * T(gt, m);
        }
        return a;
    };

    OmpResult out;
    CVector r = y;
    double r_sq = r.squaredNorm();
    out.residual_history.push_back(r_sq);
    CMatrix Qb(N, 0);
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> used =
        Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(G_r, G_t, false);
    const double dN = static_cast<double>(N);

    while (static_cast<int>(out.support.size()) < opt.max_paths)
    {
        if (opt.rule == OmpStopRule::residual && r_sq / dN <= opt.eps_stop)
            break;

        // C[gr, gt] = sum_m conj(T[gt, m]) (R_m^H r_m)[gr]
        CMatrix P(G_r, M);
        for (int m = 0; m < M; ++m)
        {
            const auto &Rm = R[static_cast<std::size_t>(m)];
            P.col(m) = Rm.adjoint() * r.segment(offset[static_cast<std::size_t>(m)], Rm.rows());
        }
        const CMatrix C = P * T.adjoint();
        ++out.correlation_sweeps;
        out.flops += 8.0 * dN * static_cast<double>(G_t) * static_cast<double>(G_r);

        int best_r = -1, best_t = -1;
        double best = -1.0;
        for (Eigen::Index gt = 0; gt < G_t; ++gt)
            for (Eigen::Index gr = 0; gr < G_r; ++gr)
            {
                if (used(gr, gt) || atom_norm_sq(gr, gt) <= 0.0)
                    continue;
                const double score = std::norm(C(gr, gt)) / atom_norm_sq(gr, gt);
                if (score > best)
                {
                    best = score;
                    best_r = static_cast<int>(gr);
                    best_t = static_cast<int>(gt);
                }
            }
        if (best_r < 0 || best <= 0.0)
        {
            out.diagnostic = "no atom correlates with the residual";
            break;
        }
        used(best_r, best_t) = true;

        // Modified Gram-Schmidt, applied twice.
        CVector a = atom(best_r, best_t);
        const double a_norm = a.norm();
        for (int pass = 0; pass < 2; ++pass)
            for (Eigen::Index c = 0; c < Qb.cols(); ++c)
                a -= Qb.col(c).dot(a) * Qb.col(c);
        const double rem = a.norm();
        if (!(rem > 1e-10 * a_norm))
        {
            out.breakdown = true;
            out.diagnostic = "selected atom is linearly dependent on the support";
            break;
        }
        a /= rem;
        Qb.conservativeResize(Eigen::NoChange, Qb.cols() + 1);
        Qb.col(Qb.cols() - 1) = a;
        out.support.emplace_back(best_r, best_t);

        r -= a.dot(r) * a;
        const double next_sq = r.squaredNorm();
        if (!(next_sq < r_sq))
        {
            // The atom is discarded; residual_history stays strictly decreasing.
            out.support.pop_back();
            out.breakdown = true;
            out.diagnostic = "residual did not decrease";
            break;
        }
        out.residual_history.push_back(next_sq);
        const double removed = r_sq - next_sq;
        r_sq = next_sq;
        if (opt.rule == OmpStopRule::residual_decrease && removed / dN <= opt.eps_stop)
        {
            // The last atom carried no more than noise-level energy; drop it.
            out.support.pop_back();
            out.residual_history.pop_back();
            break;
        }
    }

    // Least-squares gains on the final support.
    const Eigen::Index k = static_cast<Eigen::Index>(out.support.size());
    out.r_hat = static_cast<int>(k);
    out.H_hat = CMatrix::Zero(s.N_r, s.N_t);
    if (k == 0)
    {
        out.gains.resize(0);
        return out;
    }
    CMatrix Phi(N, k);
    for (Eigen::Index c = 0; c < k; ++c)
        Phi.col(c) = atom(out.support[static_cast<std::size_t>(c)].first, out.support[static_cast<std::size_t>(c)].second);
    out.gains = Phi.colPivHouseholderQr().solve(y);
    for (Eigen::Index c = 0; c < k; ++c)
    {
        const auto [gr, gt] = out.support[static_cast<std::size_t>(c)];
        out.H_hat.noalias() += (out.gains(c) * dict.A_r.col(gr)) * dict.A_t.col(gt).adjoint();
    }
    return out;
}

} // namespace mmwave_mc

#endif
