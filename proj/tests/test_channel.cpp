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


#include "test_util.hpp"

#include <set>

using namespace mmwave_mc;
using mmwave_mc::test::max_abs;

namespace
{

CVector vec(std::initializer_list<cplx> v)
{
    CVector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (const auto &x : v)
        out(i++) = x;
    return out;
}

// ------------------------------------------------------------------------
// Array responses
// ------------------------------------------------------------------------

TEST(UlaResponse, BroadsideIsUniform)
{
    const CVector a = ula_response(0.0, ArrayGeometry::ula(4));
    EXPECT_LT(max_abs(a - vec({0.5, 0.5, 0.5, 0.5})), 1e-15);
}

TEST(UlaResponse, EndfireTwoElementsAlternates)
{
    const CVector a = ula_response(pi / 2, ArrayGeometry::ula(2));
    const double s = 1.0 / std::sqrt(2.0);
    EXPECT_LT(max_abs(a - vec({s, -s})), 1e-15);
}

TEST(UlaResponse, ThirtyDegreesStepsQuarterTurns)
{
    const CVector a = ula_response(pi / 6, ArrayGeometry::ula(4));
    EXPECT_LT(max_abs(a - vec({0.5, 0.5 * j_unit, -0.5, -0.5 * j_unit})), 1e-15);
}

TEST(UlaResponse, RejectsPlanarGeometry)
{
    try
    {
        ula_response(0.1, ArrayGeometry::uspa(16));
        FAIL() << "expected a geometry mismatch";
    }
    catch (const Error &e)
    {
        EXPECT_EQ(e.code(), ErrorCode::geometry_mismatch);
    }
}

TEST(UspaResponse, BroadsideIsUniform)
{
    const CVector a = uspa_response(0.0, pi / 2, ArrayGeometry::uspa(4));
    EXPECT_LT(max_abs(a - vec({0.5, 0.5, 0.5, 0.5})), 1e-15);
}

TEST(UspaResponse, EndfireAzimuthFlipsOuterFactor)
{
    const CVector a = uspa_response(pi / 2, pi / 2, ArrayGeometry::uspa(4));
    EXPECT_LT(max_abs(a - vec({0.5, 0.5, -0.5, -0.5})), 1e-15);
}

TEST(UspaResponse, EqualsKroneckerOfIndependentAxisFactors)
{
    Rng rng(11);
    const ArrayGeometry g = ArrayGeometry::uspa(36, 0.5);
    const int side = 6;
    for (int trial = 0; trial < 50; ++trial)
    {
        const double phi = 2 * pi * uniform01(rng), theta = pi * uniform01(rng);
        CVector ay(side), az(side);
        for (int n = 0; n < side; ++n)
        {
            ay(n) = std::exp(j_unit * (pi * n * std::sin(phi) * std::sin(theta))) / std::sqrt(6.0);
            az(n) = std::exp(j_unit * (pi * n * std::cos(theta))) / std::sqrt(6.0);
        }
        CVector expect(36);
        for (int a = 0; a < side; ++a)
            for (int b = 0; b < side; ++b)
                expect(a * side + b) = ay(a) * az(b);
        EXPECT_LT(max_abs(uspa_response(phi, theta, g) - expect), 1e-14);
    }
}

TEST(UspaResponse, RejectsLinearGeometryAndNonSquareCounts)
{
    EXPECT_THROW(uspa_response(0.0, 0.0, ArrayGeometry::ula(16)), Error);
    EXPECT_THROW(ArrayGeometry::uspa(12).validate(), Error);
    EXPECT_THROW(ArrayGeometry::ula(4, 0.0).validate(), Error);
}

TEST(ArrayResponse, AlwaysUnitNorm)
{
    Rng rng(3);
    const ArrayGeometry geos[] = {ArrayGeometry::ula(1), ArrayGeometry::ula(7, 0.3), ArrayGeometry::ula(128),
                                  ArrayGeometry::uspa(64), ArrayGeometry::uspa(9, 0.7)};
    for (const auto &g : geos)
        for (int t = 0; t < 200; ++t)
        {
            const double phi = 4 * pi * (uniform01(rng) - 0.5), theta = 2 * pi * uniform01(rng);
            EXPECT_NEAR(array_response(phi, theta, g).norm(), 1.0, 1e-12);
        }
}

// ------------------------------------------------------------------------
// Channel synthesis
// ------------------------------------------------------------------------

TEST(GenerateChannel, SinglePathIsUnitRankOneOuterProduct)
{
    const auto tx = ArrayGeometry::ula(16), rx = ArrayGeometry::ula(8);
    Path p;
    p.gain = 1.0;
    p.aod_az = 0.3;
    p.aoa_az = -0.7;
    const auto r = ChannelRealization::from_paths(tx, rx, {p});
    const CMatrix expect = ula_response(-0.7, rx) * ula_response(0.3, tx).adjoint();
    EXPECT_LT(max_abs(r.H - expect), 1e-15);
    EXPECT_NEAR(r.H.norm(), 1.0, 1e-13);
    const RVector s = singular_values(r.H);
    EXPECT_LT(s(1), 1e-12);
}

TEST(GenerateChannel, SameSeedIsBitwiseIdentical)
{
    ChannelParams cp;
    const auto a = generate_channel(cp, ArrayGeometry::uspa(16), ArrayGeometry::ula(8), 42);
    const auto b = generate_channel(cp, ArrayGeometry::uspa(16), ArrayGeometry::ula(8), 42);
    ASSERT_EQ(a.paths.size(), b.paths.size());
    EXPECT_TRUE((a.H.array() == b.H.array()).all());
    const auto c = generate_channel(cp, ArrayGeometry::uspa(16), ArrayGeometry::ula(8), 43);
    EXPECT_FALSE(c.H.size() == a.H.size() && (c.H.array() == a.H.array()).all());
}

// E[max(K, 1)] = sum_k max(k, 1) pmf(k), summed from the Poisson pmf.
TEST(GenerateChannel, ClusterCountMeanMatchesClippedPoisson)
{
    const double lambda = 1.8;
    double expect = 0.0, pmf = std::exp(-lambda);
    for (int k = 0; k < 100; ++k)
    {
        expect += std::max(k, 1) * pmf;
        pmf *= lambda / (k + 1);
    }
    ChannelParams cp;
    cp.cluster_rate = lambda;
    cp.max_rays = 1;
    const auto g = ArrayGeometry::ula(2);
    double sum = 0.0;
    const int draws = 100000;
    for (int t = 0; t < draws; ++t)
        sum += generate_channel(cp, g, g, derive_seed(7, t)).num_clusters;
    EXPECT_NEAR(sum / draws / expect, 1.0, 0.02);
}

TEST(GenerateChannel, MatrixRebuildsFromStoredPaths)
{
    ChannelParams cp;
    for (std::uint64_t seed = 0; seed < 20; ++seed)
    {
        const auto r = generate_channel(cp, ArrayGeometry::ula(128), ArrayGeometry::uspa(16), seed);
        CMatrix H = CMatrix::Zero(16, 128);
        for (const auto &p : r.paths)
            H += p.gain * uspa_response(p.aoa_az, p.aoa_el, r.rx) * ula_response(p.aod_az, r.tx).adjoint();
        H /= std::sqrt(static_cast<double>(r.total_rays()));
        EXPECT_LT((H - r.H).norm() / r.H.norm(), 1e-12);
    }
}

TEST(GenerateChannel, JsonRoundTripIsBitwise)
{
    ChannelParams cp;
    cp.scaling = ChannelScaling::per_entry;
    const auto r = generate_channel(cp, ArrayGeometry::uspa(16), ArrayGeometry::ula(8), 5);
    const auto back = channel_from_json(json::parse(to_json(r).dump()));
    EXPECT_TRUE((back.H.array() == r.H.array()).all());
    EXPECT_EQ(back.seed, r.seed);
    EXPECT_EQ(back.rays_per_cluster, r.rays_per_cluster);
    EXPECT_TRUE((matrix_from_json(to_json(r)["H"]).array() == r.H.array()).all());
}

TEST(GenerateChannel, RankBoundedByDimensionsAndRays)
{
    ChannelParams cp;
    cp.max_rays = 3;
    for (std::uint64_t seed = 0; seed < 50; ++seed)
    {
        const auto r = generate_channel(cp, ArrayGeometry::ula(64), ArrayGeometry::ula(32), seed);
        const RVector s = singular_values(r.H);
        const int rank = static_cast<int>((s.array() > 1e-10 * s(0)).count());
        EXPECT_LE(rank, std::min({32, 64, r.total_rays()}));
    }
}

TEST(GenerateChannel, RayAnglesStayInsideClusterSpread)
{
    ChannelParams cp;
    for (std::uint64_t seed = 0; seed < 100; ++seed)
    {
        const auto r = generate_channel(cp, ArrayGeometry::uspa(16), ArrayGeometry::uspa(16), seed);
        std::map<int, std::vector<const Path *>> by;
        for (const auto &p : r.paths)
            by[p.cluster].push_back(&p);
        EXPECT_EQ(static_cast<int>(by.size()), r.num_clusters);
        for (const auto &[k, ps] : by)
        {
            EXPECT_GE(static_cast<int>(ps.size()), 1);
            EXPECT_LE(static_cast<int>(ps.size()), cp.max_rays);
            auto spread_of = [&](double Path::*f) {
                double lo = 1e9, hi = -1e9;
                for (const auto *p : ps)
                {
                    lo = std::min(lo, p->*f);
                    hi = std::max(hi, p->*f);
                }
                return hi - lo;
            };
            EXPECT_LE(spread_of(&Path::aod_az), cp.azimuth_spread_tx + 1e-12);
            EXPECT_LE(spread_of(&Path::aoa_az), cp.azimuth_spread_rx + 1e-12);
            EXPECT_LE(spread_of(&Path::aoa_el), cp.elevation_spread_rx + 1e-12);
            EXPECT_EQ(spread_of(&Path::aod_el), 0.0);
        }
        double total = 0.0;
        for (double g : r.cluster_powers)
            total += g;
        EXPECT_NEAR(total, 1.0, 1e-12);
    }
}

TEST(GenerateChannel, ClusterCentresRespectSeparation)
{
    ChannelParams cp;
    cp.cluster_rate = 3.0;
    cp.max_rays = 1;
    cp.azimuth_spread_tx = cp.azimuth_spread_rx = 0.0;
    cp.center_separation = 0.4;
    for (std::uint64_t seed = 0; seed < 50; ++seed)
    {
        const auto r = generate_channel(cp, ArrayGeometry::ula(8), ArrayGeometry::ula(8), seed);
        for (std::size_t a = 0; a < r.paths.size(); ++a)
            for (std::size_t b = a + 1; b < r.paths.size(); ++b)
            {
                EXPECT_GE(detail::circular_gap(r.paths[a].aod_az, r.paths[b].aod_az), 0.4);
                EXPECT_GE(detail::circular_gap(r.paths[a].aoa_az, r.paths[b].aoa_az), 0.4);
            }
    }
}

TEST(GenerateChannel, ImpossibleSeparationIsAGenerationError)
{
    ChannelParams cp;
    cp.cluster_rate = 40.0;
    cp.center_separation = 2.0 * pi / 2.5; // at most two centres fit
    cp.max_center_retries = 50;
    try
    {
        generate_channel(cp, ArrayGeometry::ula(4), ArrayGeometry::ula(4), 1);
        FAIL() << "expected a generation error";
    }
    catch (const Error &e)
    {
        EXPECT_EQ(e.code(), ErrorCode::generation);
    }
}

TEST(GenerateChannel, InvalidParamsAreConfigErrors)
{
    ChannelParams cp;
    cp.cluster_rate = 0.0;
    EXPECT_THROW(generate_channel(cp, ArrayGeometry::ula(4), ArrayGeometry::ula(4), 1), Error);
    cp = {};
    cp.max_rays = 0;
    EXPECT_THROW(generate_channel(cp, ArrayGeometry::ula(4), ArrayGeometry::ula(4), 1), Error);
    cp = {};
    cp.elevation_spread_rx = -1.0;
    EXPECT_THROW(generate_channel(cp, ArrayGeometry::ula(4), ArrayGeometry::ula(4), 1), Error);
}

TEST(GenerateChannel, PerEntryScalingMultipliesBySqrtOfArrayProduct)
{
    ChannelParams a, b;
    b.scaling = ChannelScaling::per_entry;
    const auto ra = generate_channel(a, ArrayGeometry::ula(16), ArrayGeometry::ula(4), 9);
    const auto rb = generate_channel(b, ArrayGeometry::ula(16), ArrayGeometry::ula(4), 9);
    EXPECT_LT(max_abs(rb.H - 8.0 * ra.H), 1e-12);
}

// ------------------------------------------------------------------------
// Impairments
// ------------------------------------------------------------------------

TEST(ApplyImpairments, IdealProfilesLeaveChannelUnchanged)
{
    Rng rng(1);
    const CMatrix H = test::random_matrix(rng, 8, 12);
    EXPECT_TRUE((apply_impairments(H, ImpairmentProfile::ideal(12), ImpairmentProfile::ideal(8)).array() == H.array()).all());
}

TEST(ApplyImpairments, CommonReceivePhaseFactorsOut)
{
    Rng rng(2);
    const CMatrix H = test::random_matrix(rng, 8, 12);
    auto rx = ImpairmentProfile::ideal(8);
    rx.e.setConstant(j_unit);
    EXPECT_LT(max_abs(apply_impairments(H, ImpairmentProfile::ideal(12), rx) - j_unit * H), 1e-15);
}

TEST(ApplyImpairments, EntrywiseOracle)
{
    Rng rng(3);
    const CMatrix H = test::random_matrix(rng, 8, 12);
    const auto tx = impairment_profile(0.7, 0.3, 12, 10), rx = impairment_profile(0.4, 0.2, 8, 11);
    const CMatrix He = apply_impairments(H, tx, rx);
    for (int i = 0; i < 8; ++i)
        for (int k = 0; k < 12; ++k)
            EXPECT_LT(std::abs(He(i, k) - rx.e(i) * H(i, k) * std::conj(tx.e(k))), 1e-14);
}

TEST(ApplyImpairments, DimensionMismatchThrows)
{
    const CMatrix H = CMatrix::Ones(4, 6);
    EXPECT_THROW(apply_impairments(H, ImpairmentProfile::ideal(4), ImpairmentProfile::ideal(4)), Error);
}

TEST(ApplyImpairments, SpectralNormBound)
{
    Rng rng(4);
    for (int t = 0; t < 50; ++t)
    {
        const CMatrix H = test::random_matrix(rng, 16, 24);
        const double gr = 0.3 * uniform01(rng), gt = 0.3 * uniform01(rng);
        const auto tx = impairment_profile(pi * uniform01(rng), gt, 24, derive_seed(5, t, 0));
        const auto rx = impairment_profile(pi * uniform01(rng), gr, 16, derive_seed(5, t, 1));
        const double s = singular_values(H)(0);
        const double se = singular_values(apply_impairments(H, tx, rx))(0);
        EXPECT_LE(se, (1 + gr) * (1 + gt) * s * (1 + 1e-12));
    }
}

TEST(ImpairmentProfile, ZeroLevelsGiveExactOnes)
{
    const auto p = impairment_profile(0.0, 0.0, 64, 3);
    EXPECT_TRUE((p.e.array() == cplx(1.0, 0.0)).all());
}

TEST(ImpairmentProfile, EntriesRespectBoundsExactly)
{
    const auto p = impairment_profile(pi / 4, 0.2, 10000, 4);
    for (Eigen::Index i = 0; i < p.size(); ++i)
    {
        EXPECT_LE(std::abs(p.phase_errors(i)), pi / 4);
        EXPECT_GE(p.gain_errors(i), 0.8);
        EXPECT_LE(p.gain_errors(i), 1.2);
        EXPECT_LE(std::abs(std::arg(p.e(i))), pi / 4 + 1e-15);
        EXPECT_NEAR(std::abs(p.e(i)), p.gain_errors(i), 1e-15);
    }
}

TEST(ImpairmentProfile, MeanModulusNearOne)
{
    const auto p = impairment_profile(pi / 4, 0.2, 100000, 5);
    EXPECT_NEAR(p.e.cwiseAbs().mean(), 1.0, 0.01);
}

TEST(ImpairmentProfile, GainLevelOneIsRejected)
{
    EXPECT_THROW(impairment_profile(0.0, 1.0, 4, 1), Error);
    EXPECT_THROW(impairment_profile(-0.1, 0.0, 4, 1), Error);
}

// ------------------------------------------------------------------------
// Energy-capture rank
// ------------------------------------------------------------------------

TEST(EnergyCaptureRank, RankOneNeedsOne)
{
    Rng rng(6);
    EXPECT_EQ(energy_capture_rank(test::random_low_rank(rng, 8, 12, 1), 0.95), 1);
}

TEST(EnergyCaptureRank, HandComputedDiagonal)
{
    CMatrix H = CMatrix::Zero(6, 7);
    H(0, 0) = 2.0;
    H(1, 1) = 1.0;
    H(2, 2) = 1.0;
    EXPECT_EQ(energy_capture_rank(H, 0.9), 3);
    EXPECT_EQ(energy_capture_rank(H, 4.0 / 6.0), 1);
    EXPECT_EQ(energy_capture_rank(H, 0.8), 2);
}

TEST(EnergyCaptureRank, FullFractionGivesNumericalRank)
{
    Rng rng(7);
    for (int r = 1; r <= 6; ++r)
    {
        const CMatrix H = test::random_low_rank(rng, 10, 14, r);
        const RVector s = Eigen::JacobiSVD<CMatrix>(H).singularValues();
        const int numerical = static_cast<int>((s.array() > 1e-10 * s(0)).count());
        EXPECT_EQ(energy_capture_rank(H, 1.0), numerical);
    }
}

TEST(EnergyCaptureRank, NondecreasingInFraction)
{
    Rng rng(8);
    for (int t = 0; t < 20; ++t)
    {
        const CMatrix H = test::random_matrix(rng, 8, 16);
        int prev = 0;
        for (double pe = 0.05; pe <= 1.0; pe += 0.05)
        {
            const int r = energy_capture_rank(H, pe);
            EXPECT_GE(r, prev);
            prev = r;
        }
    }
}

TEST(EnergyCaptureRank, ZeroMatrixIsUndefined)
{
    try
    {
        energy_capture_rank(CMatrix::Zero(3, 3), 0.9);
        FAIL() << "expected an undefined-rank error";
    }
    catch (const Error &e)
    {
        EXPECT_EQ(e.code(), ErrorCode::undefined_rank);
    }
}

} // namespace
