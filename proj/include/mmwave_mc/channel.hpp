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

#ifndef MMWAVE_MC_CHANNEL_HPP
#define MMWAVE_MC_CHANNEL_HPP

#include "common.hpp"

#include <algorithm>
#include <optional>
#include <vector>

namespace mmwave_mc
{

// ------------------------------------------------------------------------
// Array geometry
// ------------------------------------------------------------------------

enum class ArrayKind
{
    ula,  // elements along the y axis
    uspa, // sqrt(N) x sqrt(N) elements on the yz plane
};

inline const char *to_string(ArrayKind k) { return k == ArrayKind::ula ? "ULA" : "USPA"; }

struct ArrayGeometry
{
    ArrayKind kind = ArrayKind::ula;
    int num_antennas = 1;
    double spacing = 0.5; // element spacing in carrier wavelengths

    static ArrayGeometry ula(int n, double spacing = 0.5) { return {ArrayKind::ula, n, spacing}; }
    static ArrayGeometry uspa(int n, double spacing = 0.5) { return {ArrayKind::uspa, n, spacing}; }

    const char *axis() const { return kind == ArrayKind::ula ? "y" : "yz"; }

    // Elements per side of a USPA; num_antennas for a ULA.
    int side() const
    {
        if (kind == ArrayKind::ula)
            return num_antennas;
        return static_cast<int>(std::lround(std::sqrt(static_cast<double>(num_antennas))));
    }

    void validate() const
    {
        require(num_antennas >= 1, ErrorCode::config, "array needs at least one antenna");
        require(spacing > 0.0, ErrorCode::config, "element spacing must be positive");
        if (kind == ArrayKind::uspa)
            require(side() * side() == num_antennas, ErrorCode::config,
                    "USPA antenna count must be a perfect square");
    }

    bool operator==(const ArrayGeometry &) const = default;
};

namespace detail
{
// n-th entry exp(j 2 pi d n s) / sqrt(count) for spatial frequency s.
inline CVector steering(int count, double spacing, double s, double norm)
{
    CVector a(count);
    for (int n = 0; n < count; ++n)
        a(n) = std::polar(norm, 2.0 * pi * spacing * n * s);
    return a;
}

inline CVector kron(const CVector &a, const CVector &b)
{
    CVector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i)
        out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}
} // namespace detail

inline CVector ula_response(double phi, const ArrayGeometry &g)
{
    require(g.kind == ArrayKind::ula, ErrorCode::geometry_mismatch, "ula_response needs a ULA");
    g.validate();
    return detail::steering(g.num_antennas, g.spacing, std::sin(phi), 1.0 / std::sqrt(double(g.num_antennas)));
}

// y-axis factor of the planar response; depends on both angles.
inline CVector uspa_response_y(double phi, double theta, const ArrayGeometry &g)
{
    const double norm = 1.0 / std::pow(double(g.num_antennas), 0.25);
    return detail::steering(g.side(), g.spacing, std::sin(phi) * std::sin(theta), norm);
}

inline CVector uspa_response_z(double theta, const ArrayGeometry &g)
{
    const double norm = 1.0 / std::pow(double(g.num_antennas), 0.25);
    return detail::steering(g.side(), g.spacing, std::cos(theta), norm);
}

inline CVector uspa_response(double phi, double theta, const ArrayGeometry &g)
{
    require(g.kind == ArrayKind::uspa, ErrorCode::geometry_mismatch, "uspa_response needs a USPA");
    g.validate();
    return detail::kron(uspa_response_y(phi, theta, g), uspa_response_z(theta, g));
}

// Dispatches on geometry; ULAs ignore the elevation angle.
inline CVector array_response(double phi, double theta, const ArrayGeometry &g)
{
    return g.kind == ArrayKind::ula ? ula_response(phi, g) : uspa_response(phi, theta, g);
}

// ------------------------------------------------------------------------
// Channel synthesis
// ------------------------------------------------------------------------

// Surrogate for the cluster fractional powers: gamma_k proportional to
// U^(tau-1) * 10^(-shadowing_db * X / 10), U ~ U(0,1), X ~ N(0,1).
struct ClusterPowerLaw
{
    double tau = 2.0;
    double shadowing_db = 0.6;
};

enum class ChannelScaling
{
    unit,      // literal sum of unit-norm outer products, E||H||_F^2 ~ 1
    per_entry, // additionally scaled by sqrt(Nt*Nr) so E|H_ij|^2 ~ 1
};

struct ChannelParams
{
    double cluster_rate = 1.8;
    int max_rays = 20;
    double azimuth_spread_tx = deg2rad(10.2);
    double azimuth_spread_rx = deg2rad(15.5);
    double elevation_spread_tx = 0.0;
    double elevation_spread_rx = deg2rad(6.0);
    ClusterPowerLaw cluster_power{};
    // Minimum gap between cluster centres. Unset: each angle type uses its own spread.
    std::optional<double> center_separation{};
    ChannelScaling scaling = ChannelScaling::unit;
    int max_center_retries = 1000;

    void validate() const
    {
        require(cluster_rate > 0.0, ErrorCode::config, "cluster rate must be positive");
        require(max_rays >= 1, ErrorCode::config, "max rays must be at least 1");
        require(azimuth_spread_tx >= 0.0 && azimuth_spread_rx >= 0.0 && elevation_spread_tx >= 0.0 &&
                    elevation_spread_rx >= 0.0,
                ErrorCode::config, "angular spreads must be non-negative");
        require(!center_separation || *center_separation >= 0.0, ErrorCode::config,
                "centre separation must be non-negative");
    }
};

struct Path
{
    int cluster = 0;
    int ray = 0;
    cplx gain{};
    double aoa_az = 0.0;
    double aod_az = 0.0;
    double aoa_el = pi / 2;
    double aod_el = pi / 2;
};

struct ChannelRealization
{
    ArrayGeometry tx;
    ArrayGeometry rx;
    std::vector<Path> paths;
    int num_clusters = 0;
    std::vector<int> rays_per_cluster;
    std::vector<double> cluster_powers;
    double scale = 1.0;
    std::uint64_t seed = 0;
    CMatrix H;

    int total_rays() const { return static_cast<int>(paths.size()); }

    // H = scale / sqrt(L) * sum_l g_l a_r a_t^H with L the total ray count.
    static CMatrix assemble(const ArrayGeometry &tx, const ArrayGeometry &rx, const std::vector<Path> &paths,
                            double scale)
    {
        CMatrix H = CMatrix::Zero(rx.num_antennas, tx.num_antennas);
        if (paths.empty())
            return H;
        for (const auto &p : paths)
        {
            const CVector ar = array_response(p.aoa_az, p.aoa_el, rx);
            const CVector at = array_response(p.aod_az, p.aod_el, tx);
            H.noalias() += (p.gain * ar) * at.adjoint();
        }
        H *= scale / std::sqrt(static_cast<double>(paths.size()));
        return H;
    }

    static ChannelRealization from_paths(const ArrayGeometry &tx, const ArrayGeometry &rx, std::vector<Path> paths,
                                         double scale = 1.0)
    {
        tx.validate();
        rx.validate();
        ChannelRealization r;
        r.tx = tx;
        r.rx = rx;
        r.scale = scale;
        int max_cluster = -1;
        for (const auto &p : paths)
            max_cluster = std::max(max_cluster, p.cluster);
        r.num_clusters = max_cluster + 1;
        r.rays_per_cluster.assign(static_cast<std::size_t>(r.num_clusters), 0);
        for (const auto &p : paths)
            ++r.rays_per_cluster[static_cast<std::size_t>(p.cluster)];
        r.paths = std::move(paths);
        r.H = assemble(r.tx, r.rx, r.paths, r.scale);
        return r;
    }
};

namespace detail
{
inline double circular_gap(double a, double b)
{
    double d = std::fmod(std::abs(a - b), 2.0 * pi);
    return std::min(d, 2.0 * pi - d);
}

// Cluster centres uniform on [0, 2pi) with pairwise circular gap >= sep.
inline std::vector<double> draw_centers(Rng &rng, int count, double sep, int retries)
{
    std::vector<double> c;
    c.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k)
    {
        bool placed = false;
        for (int attempt = 0; attempt < retries && !placed; ++attempt)
        {
            const double x = 2.0 * pi * uniform01(rng);
            placed = std::all_of(c.begin(), c.end(), [&](double y) { return circular_gap(x, y) >= sep; });
            if (placed)
                c.push_back(x);
        }
        if (!placed)
            throw Error(ErrorCode::generation, "could not place cluster centres with the requested separation");
    }
    return c;
}

inline double ray_offset(Rng &rng, double spread)
{
    if (spread == 0.0)
        return 0.0;
    return spread * (uniform01(rng) - 0.5);
}
} // namespace detail

// Draw order: cluster count, ray counts, cluster powers, centres (AoD az,
// AoA az, then elevations for planar arrays), ray offsets, gains.
inline ChannelRealization generate_channel(const ChannelParams &params, const ArrayGeometry &tx,
                                           const ArrayGeometry &rx, std::uint64_t seed)
{
    params.validate();
    tx.validate();
    rx.validate();
    Rng rng(seed);

    const int K = std::max(std::poisson_distribution<int>(params.cluster_rate)(rng), 1);
    std::vector<int> rays(static_cast<std::size_t>(K));
    std::uniform_int_distribution<int> ray_dist(1, params.max_rays);
    for (auto &l : rays)
        l = ray_dist(rng);

    std::vector<double> gamma(static_cast<std::size_t>(K));
    {
        std::normal_distribution<double> nd(0.0, 1.0);
        double total = 0.0;
        for (auto &g : gamma)
        {
            double u = uniform01(rng);
            while (u == 0.0)
                u = uniform01(rng);
            const double x = nd(rng);
            g = std::pow(u, params.cluster_power.tau - 1.0) * std::pow(10.0, -params.cluster_power.shadowing_db * x / 10.0);
            total += g;
        }
        for (auto &g : gamma)
            g /= total;
    }

    auto sep = [&](double spread) { return params.center_separation.value_or(spread); };
    const int retries = params.max_center_retries;
    const auto aod_c = detail::draw_centers(rng, K, sep(params.azimuth_spread_tx), retries);
    const auto aoa_c = detail::draw_centers(rng, K, sep(params.azimuth_spread_rx), retries);
    const bool planar = tx.kind == ArrayKind::uspa || rx.kind == ArrayKind::uspa;
    std::vector<double> eod_c(static_cast<std::size_t>(K), pi / 2), eoa_c(static_cast<std::size_t>(K), pi / 2);
    if (planar)
    {
        eod_c = detail::draw_centers(rng, K, sep(params.elevation_spread_tx), retries);
        eoa_c = detail::draw_centers(rng, K, sep(params.elevation_spread_rx), retries);
    }

    ChannelRealization r;
    r.tx = tx;
    r.rx = rx;
    r.num_clusters = K;
    r.rays_per_cluster = rays;
    r.cluster_powers = gamma;
    r.seed = seed;
    r.scale = params.scaling == ChannelScaling::per_entry
                  ? std::sqrt(static_cast<double>(tx.num_antennas) * rx.num_antennas)
                  : 1.0;

    for (int k = 0; k < K; ++k)
    {
        const auto ks = static_cast<std::size_t>(k);
        for (int l = 0; l < rays[ks]; ++l)
        {
            Path p;
            p.cluster = k;
            p.ray = l;
            p.aod_az = aod_c[ks] + detail::ray_offset(rng, params.azimuth_spread_tx);
            p.aoa_az = aoa_c[ks] + detail::ray_offset(rng, params.azimuth_spread_rx);
            if (planar)
            {
                p.aod_el = eod_c[ks] + detail::ray_offset(rng, params.elevation_spread_tx);
                p.aoa_el = eoa_c[ks] + detail::ray_offset(rng, params.elevation_spread_rx);
            }
            p.gain = complex_gaussian(rng, gamma[ks]);
            r.paths.push_back(p);
        }
    }
    r.H = ChannelRealization::assemble(r.tx, r.rx, r.paths, r.scale);
    return r;
}

// ------------------------------------------------------------------------
// Array-inherent impairments
// ------------------------------------------------------------------------

struct ImpairmentProfile
{
    CVector e;                 // rho_i * exp(j kappa_i)
    RVector phase_errors;      // kappa_i
    RVector gain_errors;       // rho_i
    double phase_level = 0.0;  // kappa_i ~ U(-phase_level, phase_level)
    double gain_level = 0.0;   // rho_i ~ U(1 - gain_level, 1 + gain_level)

    static ImpairmentProfile ideal(int n)
    {
        return {CVector::Ones(n), RVector::Zero(n), RVector::Ones(n), 0.0, 0.0};
    }

    Eigen::Index size() const { return e.size(); }
};

// The same uniform variates are consumed for every level, so sweeping the
// levels with a fixed seed scales one underlying error pattern.
inline ImpairmentProfile impairment_profile(double phase_level, double gain_level, int num_antennas,
                                            std::uint64_t seed)
{
    require(phase_level >= 0.0, ErrorCode::config, "phase error level must be non-negative");
    require(gain_level >= 0.0, ErrorCode::config, "gain error level must be non-negative");
    require(gain_level < 1.0, ErrorCode::config, "gain error level must be below 1 (gains would be non-positive)");
    require(num_antennas >= 1, ErrorCode::config, "need at least one antenna");
    Rng rng(seed);
    ImpairmentProfile p;
    p.phase_level = phase_level;
    p.gain_level = gain_level;
    p.e.resize(num_antennas);
    p.phase_errors.resize(num_antennas);
    p.gain_errors.resize(num_antennas);
    for (int i = 0; i < num_antennas; ++i)
    {
        const double u_phase = uniform01(rng);
        const double u_gain = uniform01(rng);
        const double kappa = phase_level * (2.0 * u_phase - 1.0);
        const double rho = 1.0 + gain_level * (2.0 * u_gain - 1.0);
        p.phase_errors(i) = kappa;
        p.gain_errors(i) = rho;
        p.e(i) = kappa == 0.0 ? cplx(rho, 0.0) : std::polar(rho, kappa);
    }
    return p;
}

// H_eff = diag(e_r) H diag(e_t)^H
inline CMatrix apply_impairments(const CMatrix &H, const ImpairmentProfile &tx, const ImpairmentProfile &rx)
{
    require(rx.size() == H.rows() && tx.size() == H.cols(), ErrorCode::dimension_mismatch,
            "impairment vectors do not match the channel dimensions");
    return rx.e.asDiagonal() * H * tx.e.conjugate().asDiagonal();
}

// ------------------------------------------------------------------------
// Low-rank diagnostics
// ------------------------------------------------------------------------

inline RVector singular_values(const CMatrix &H)
{
    return Eigen::BDCSVD<CMatrix>(H).singularValues();
}

// Smallest r with (sum_{j<=r} s_j^2) / (sum_i s_i^2) >= p_e. Energy below a
// few ulps of the total is treated as zero so p_e = 1 yields the numerical rank.
inline int energy_capture_rank(const CMatrix &H, double p_e)
{
    require(p_e > 0.0 && p_e <= 1.0, ErrorCode::config, "energy fraction must lie in (0, 1]");
    const RVector s = singular_values(H);
    const double total = s.squaredNorm();
    require(total > 0.0, ErrorCode::undefined_rank, "energy capture rank of a zero matrix");
    const double slack = 64.0 * std::numeric_limits<double>::epsilon() * total;
    double acc = 0.0;
    for (Eigen::Index r = 0; r < s.size(); ++r)
    {
        acc += s(r) * s(r);
        if (acc >= p_e * total - slack)
            return static_cast<int>(r + 1);
    }
    return static_cast<int>(s.size());
}

} // namespace mmwave_mc

#endif
