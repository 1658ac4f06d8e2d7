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

#ifndef MMWAVE_MC_METRICS_HPP
#define MMWAVE_MC_METRICS_HPP

#include "common.hpp"

#include <algorithm>
#include <vector>

namespace mmwave_mc
{

inline double nmse(const CMatrix &H_hat, const CMatrix &H_ref)
{
    require(H_hat.rows() == H_ref.rows() && H_hat.cols() == H_ref.cols(), ErrorCode::dimension_mismatch,
            "estimate and reference differ in shape");
    const double ref = H_ref.squaredNorm();
    require(ref > 0.0, ErrorCode::degenerate_input, "NMSE against a zero reference");
    return (H_hat - H_ref).squaredNorm() / ref;
}

struct SpectralEfficiency
{
    double bits = 0.0;
    bool padded = false; // rank(H_est) < N_s; trailing singular vectors were used
};

// Equal-power SVD beamforming on the estimate, evaluated on the true channel:
//   F = V_est(:, 1:N_s) sqrt(P / N_s), W = U_est(:, 1:N_s), P = SNR, sigma^2 = 1
//   SE = log2 det(I + (W^H W)^-1 W^H H F F^H H^H W)
inline SpectralEfficiency spectral_efficiency(const CMatrix &H_true, const CMatrix &H_est, int N_s, double snr_db)
{
    require(H_true.rows() == H_est.rows() && H_true.cols() == H_est.cols(), ErrorCode::dimension_mismatch,
            "estimate and channel differ in shape");
    require(N_s >= 1 && N_s <= std::min(H_true.rows(), H_true.cols()), ErrorCode::config,
            "stream count must lie in [1, min(N_r, N_t)]");
    require(H_est.norm() > 0.0, ErrorCode::degenerate_input, "spectral efficiency of a zero estimate");

    Eigen::BDCSVD<CMatrix> svd(H_est, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RVector &s = svd.singularValues();
    SpectralEfficiency out;
    out.padded = s(N_s - 1) <= 1e-12 * s(0);
    if (std::isinf(snr_db) && snr_db < 0.0)
        return out;
    const double P = db2lin(snr_db);
    const CMatrix F = svd.matrixV().leftCols(N_s) * std::sqrt(P / N_s);
    const CMatrix W = svd.matrixU().leftCols(N_s);
    const CMatrix G = W.adjoint() * H_true * F; // N_s x N_s
    const CMatrix WW = W.adjoint() * W;
    CMatrix A = CMatrix::Identity(N_s, N_s) + WW.llt().solve(G * G.adjoint());
    const Eigen::PartialPivLU<CMatrix> lu(A);
    double logdet = 0.0;
    for (int i = 0; i < N_s; ++i)
        logdet += std::log2(std::abs(lu.matrixLU()(i, i)));
    out.bits = std::max(0.0, logdet);
    return out;
}

struct RankHistogram
{
    int first_bin = 1;        // bin b covers rank first_bin + b
    std::vector<double> r_sub;
    std::vector<double> r_gcg;
    std::vector<double> r_omp;
};

namespace detail
{
inline std::vector<double> normalized_counts(const std::vector<int> &v, int lo, int hi)
{
    std::vector<double> h(static_cast<std::size_t>(hi - lo + 1), 0.0);
    for (int x : v)
        h[static_cast<std::size_t>(x - lo)] += 1.0;
    for (auto &c : h)
        c /= static_cast<double>(v.size());
    return h;
}
} // namespace detail

// Normalised histograms over one shared set of unit-width bins.
inline RankHistogram rank_distribution(const std::vector<int> &r_sub, const std::vector<int> &r_gcg,
                                       const std::vector<int> &r_omp)
{
    require(!r_sub.empty() || !r_gcg.empty() || !r_omp.empty(), ErrorCode::degenerate_input,
            "rank distribution of an empty record set");
    int lo = std::numeric_limits<int>::max(), hi = std::numeric_limits<int>::min();
    for (const auto *v : {&r_sub, &r_gcg, &r_omp})
        for (int x : *v)
        {
            require(x >= 0, ErrorCode::degenerate_input, "ranks must be non-negative");
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    RankHistogram h;
    h.first_bin = lo;
    auto fill = [&](const std::vector<int> &v) {
        return v.empty() ? std::vector<double>(static_cast<std::size_t>(hi - lo + 1), 0.0)
                         : detail::normalized_counts(v, lo, hi);
    };
    h.r_sub = fill(r_sub);
    h.r_gcg = fill(r_gcg);
    h.r_omp = fill(r_omp);
    return h;
}

// Lower median for even counts.
inline double median(std::vector<double> v)
{
    require(!v.empty(), ErrorCode::degenerate_input, "median of an empty set");
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>((v.size() - 1) / 2);
    std::nth_element(v.begin(), mid, v.end());
    return *mid;
}

inline double mean(const std::vector<double> &v)
{
    require(!v.empty(), ErrorCode::degenerate_input, "mean of an empty set");
    double s = 0.0;
    for (double x : v)
        s += x;
    return s / static_cast<double>(v.size());
}

} // namespace mmwave_mc

#endif
