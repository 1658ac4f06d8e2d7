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

#ifndef MMWAVE_MC_IMC_HPP
#define MMWAVE_MC_IMC_HPP

#include "frontend.hpp"

// Inductive matrix completion: the sounded matrix is C = X_L^H H X_R for
// unitary features, and the channel is recovered as X_L C^ X_R^H.

namespace mmwave_mc
{

struct FeaturePair
{
    CMatrix X_L; // N_r x N_r
    CMatrix X_R; // N_t x N_t
    std::uint64_t seed = 0;
};

namespace detail
{
inline CMatrix unit_modulus_matrix(Rng &rng, int n)
{
    CMatrix A(n, n);
    for (int c = 0; c < n; ++c)
        for (int r = 0; r < n; ++r)
            A(r, c) = std::polar(1.0, 2.0 * pi * uniform01(rng));
    return A;
}
} // namespace detail

// Left singular vectors of random unit-modulus matrices A (N_r x N_r), then B.
inline FeaturePair generate_features(int N_r, int N_t, std::uint64_t seed)
{
    require(N_r >= 1 && N_t >= 1, ErrorCode::config, "feature dimensions must be positive");
    Rng rng(seed);
    const CMatrix A = detail::unit_modulus_matrix(rng, N_r);
    const CMatrix B = detail::unit_modulus_matrix(rng, N_t);
    FeaturePair f;
    f.seed = seed;
    f.X_L = Eigen::BDCSVD<CMatrix>(A, Eigen::ComputeFullU).matrixU();
    f.X_R = Eigen::BDCSVD<CMatrix>(B, Eigen::ComputeFullU).matrixU();
    return f;
}

inline FeaturePair identity_features(int N_r, int N_t)
{
    return {CMatrix::Identity(N_r, N_r), CMatrix::Identity(N_t, N_t), 0};
}

// [F]_{n,k} = exp(j 2 pi n k / N) / sqrt(N): column k is the half-wavelength
// ULA response at sin(phi) = 2k/N (mod 2).
inline CMatrix unitary_dft(int N)
{
    CMatrix F(N, N);
    const double s = 1.0 / std::sqrt(static_cast<double>(N));
    for (int k = 0; k < N; ++k)
        for (int n = 0; n < N; ++n)
            F(n, k) = std::polar(s, 2.0 * pi * static_cast<double>((static_cast<long long>(n) * k) % N) / N);
    return F;
}

inline FeaturePair dft_features(int N_r, int N_t) { return {unitary_dft(N_r), unitary_dft(N_t), 0}; }

inline CMatrix transform_channel(const CMatrix &H, const FeaturePair &f)
{
    require(H.rows() == f.X_L.rows() && H.cols() == f.X_R.rows(), ErrorCode::dimension_mismatch,
            "features do not match the channel dimensions");
    return f.X_L.adjoint() * H * f.X_R;
}

// Sample (i, j) observes X_L(:, i)^H (H_eff X_R(:, j)) + X_L(:, i)^H (e_r .* n).
// Noise vectors follow the plan's (stage, step) order so identity features
// reproduce simulate_training bit for bit.
inline ObservationMatrix simulate_imc_training(const CMatrix &H_eff, const FeaturePair &features,
                                               const TrainingPlan &plan, double pnr_db, std::uint64_t seed,
                                               const CVector &e_r)
{
    require(H_eff.rows() == plan.N_r && H_eff.cols() == plan.N_t, ErrorCode::dimension_mismatch,
            "channel does not match the training plan");
    require(features.X_L.rows() == plan.N_r && features.X_R.rows() == plan.N_t, ErrorCode::dimension_mismatch,
            "features do not match the training plan");
    require(e_r.size() == plan.N_r, ErrorCode::dimension_mismatch, "receive impairment vector has wrong length");

    ObservationMatrix obs;
    obs.pattern = plan.pattern;
    obs.pnr_db = pnr_db;
    obs.noise_var = noise_variance(pnr_db);
    obs.mode = ObservationMode::imc;
    obs.H_tilde = CMatrix::Zero(plan.N_r, plan.N_t);
    obs.y.resize(static_cast<Eigen::Index>(plan.index_map.size()));

    Rng rng(seed);
    Eigen::Index n_out = 0;
    for (const auto &stage : plan.stages)
    {
        const int j = stage.transmit.target_column;
        const CVector Hf = H_eff * features.X_R.col(j);
        for (const auto &step : stage.steps)
        {
            const CVector n = complex_gaussian_vector(rng, plan.N_r, obs.noise_var);
            if (step.row_set.empty())
                continue;
            const CVector en = e_r.cwiseProduct(n);
            for (int i : step.row_set)
            {
                const cplx y = features.X_L.col(i).dot(Hf) + features.X_L.col(i).dot(en);
                obs.H_tilde(i, j) = y;
                obs.y(n_out++) = y;
            }
        }
    }
    return obs;
}

inline ObservationMatrix simulate_imc_training(const CMatrix &H_eff, const FeaturePair &features,
                                               const TrainingPlan &plan, double pnr_db, std::uint64_t seed)
{
    return simulate_imc_training(H_eff, features, plan, pnr_db, seed, CVector::Ones(plan.N_r));
}

// X_L C^ X_R^H, the inverse transform for unitary features.
inline CMatrix recover_channel(const CMatrix &C_hat, const FeaturePair &features)
{
    require(C_hat.rows() == features.X_L.rows() && C_hat.cols() == features.X_R.rows(), ErrorCode::dimension_mismatch,
            "estimate does not match the features");
    return features.X_L * C_hat * features.X_R.adjoint();
}

struct IncoherenceReport
{
    int rank = 0;
    double max_left = 0.0;     // max_i ||U^H x_{L,i}||
    double max_right = 0.0;    // max_j ||V^H x_{R,j}||
    double max_joint = 0.0;    // max_{i,j} |x_{L,i}^H U V^H x_{R,j}|
    double max_col_norm_L = 0.0;
    double max_col_norm_R = 0.0;

    // Smallest mu_0 meeting each bound sqrt(mu_0 r / d).
    double mu0_left(int N_r) const { return max_left * max_left * N_r / rank; }
    double mu0_right(int N_t) const { return max_right * max_right * N_t / rank; }
    double mu0_joint(int N_r, int N_t) const { return max_joint * max_joint * N_r * static_cast<double>(N_t) / rank; }
};

inline IncoherenceReport incoherence_report(const FeaturePair &features, const CMatrix &H, double rank_tol = 1e-10)
{
    require(H.norm() > 0.0, ErrorCode::degenerate_input, "incoherence of a zero matrix");
    require(H.rows() == features.X_L.rows() && H.cols() == features.X_R.rows(), ErrorCode::dimension_mismatch,
            "features do not match the channel dimensions");
    Eigen::BDCSVD<CMatrix> svd(H, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RVector &s = svd.singularValues();
    int r = 0;
    while (r < s.size() && s(r) > rank_tol * s(0))
        ++r;
    const CMatrix U = svd.matrixU().leftCols(r);
    const CMatrix V = svd.matrixV().leftCols(r);

    IncoherenceReport rep;
    rep.rank = r;
    const CMatrix UL = U.adjoint() * features.X_L; // r x N_r
    const CMatrix VR = V.adjoint() * features.X_R; // r x N_t
    rep.max_left = UL.colwise().norm().maxCoeff();
    rep.max_right = VR.colwise().norm().maxCoeff();
    rep.max_joint = (UL.adjoint() * VR).cwiseAbs().maxCoeff();
    rep.max_col_norm_L = features.X_L.colwise().norm().maxCoeff();
    rep.max_col_norm_R = features.X_R.colwise().norm().maxCoeff();
    return rep;
}

} // namespace mmwave_mc

#endif
