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

#include <sstream>

using namespace mmwave_mc;
using mmwave_mc::test::inner;
using mmwave_mc::test::max_abs;
using mmwave_mc::test::nuclear_norm;

namespace
{

double sigma_max(const CMatrix &M) { return Eigen::JacobiSVD<CMatrix>(M).singularValues()(0); }

CMatrix random_unitary(Rng &rng, int n)
{
    return Eigen::HouseholderQR<CMatrix>(complex_gaussian_matrix(rng, n, n)).householderQ();
}

// Matrix with prescribed leading singular values and a random tail below them.
CMatrix with_spectrum(Rng &rng, int r, int c, const std::vector<double> &lead, double tail)
{
    const int n = std::min(r, c);
    RVector s(n);
    for (int i = 0; i < n; ++i)
        s(i) = i < static_cast<int>(lead.size()) ? lead[static_cast<std::size_t>(i)] : tail * uniform01(rng);
    return random_unitary(rng, r).leftCols(n) * s.cast<cplx>().asDiagonal() * random_unitary(rng, c).leftCols(n).adjoint();
}

// Random state: noiseless rank-r data on a USS pattern plus a perturbed
// factor pair of width k.
struct SolverState
{
    CMatrix H;
    ObservationMatrix obs;
    CMatrix U, V;
};

SolverState random_state(std::uint64_t seed, int k, double p = 0.375, int rank = 3, int N_r = 32, int N_t = 128)
{
    Rng rng(seed);
    SolverState s;
    s.H = test::random_low_rank(rng, N_r, N_t, rank) / std::sqrt(static_cast<double>(rank));
    s.obs = test::noiseless_observation(s.H + 0.05 * complex_gaussian_matrix(rng, N_r, N_t),
                                        build_sampling_pattern(N_t, N_r, p, seed));
    s.U = complex_gaussian_matrix(rng, N_r, k) * 0.3;
    s.V = complex_gaussian_matrix(rng, N_t, k) * 0.3;
    return s;
}

// ------------------------------------------------------------------------
// Top singular pair
// ------------------------------------------------------------------------

TEST(TopSingularPair, SpikeMatrix)
{
    CMatrix M = CMatrix::Zero(32, 128);
    M(0, 1) = 3.0;
    const auto t = top_singular_pair(M, 2, 10, 1);
    EXPECT_NEAR(t.sigma, 3.0, 1e-12);
    EXPECT_NEAR(std::abs(t.u(0)), 1.0, 1e-12);
    EXPECT_NEAR(std::abs(t.v(1)), 1.0, 1e-12);
    const cplx uMv = t.u.dot(M * t.v);
    EXPECT_NEAR(uMv.real(), 3.0, 1e-12);
    EXPECT_NEAR(uMv.imag(), 0.0, 1e-12);
}

TEST(TopSingularPair, RandomMatricesMatchDenseSvd)
{
    Rng rng(1);
    for (int t = 0; t < 20; ++t)
    {
        const CMatrix M = complex_gaussian_matrix(rng, 32, 128);
        const auto p = top_singular_pair(M, 2, 10, static_cast<std::uint64_t>(t));
        const double s = sigma_max(M);
        EXPECT_NEAR(p.sigma / s, 1.0, 1e-6);
        EXPECT_NEAR(p.u.norm(), 1.0, 1e-12);
        EXPECT_NEAR(p.v.norm(), 1.0, 1e-12);
        const cplx uMv = p.u.dot(M * p.v);
        EXPECT_NEAR(uMv.imag(), 0.0, 1e-10 * s);
        EXPECT_GE(uMv.real(), (1 - 1e-6) * s);
    }
}

TEST(TopSingularPair, OnePercentGap)
{
    Rng rng(2);
    for (int t = 0; t < 10; ++t)
    {
        const CMatrix M = with_spectrum(rng, 32, 128, {1.0, 0.99, 0.985}, 0.98);
        const auto p = top_singular_pair(M, 2, 10, static_cast<std::uint64_t>(t));
        EXPECT_GE(p.u.dot(M * p.v).real(), 1.0 - 1e-6);
    }
}

TEST(TopSingularPair, TiedTopValues)
{
    Rng rng(3);
    for (int t = 0; t < 10; ++t)
    {
        const CMatrix M = with_spectrum(rng, 32, 128, {2.0, 2.0}, 1.5);
        const auto p = top_singular_pair(M, 2, 10, static_cast<std::uint64_t>(t));
        EXPECT_NEAR(p.sigma, 2.0, 2e-6);
    }
}

TEST(TopSingularPair, SmallMatricesUseDenseFallback)
{
    Rng rng(4);
    const CMatrix M = complex_gaussian_matrix(rng, 6, 40);
    const auto p = top_singular_pair(M, 2, 10, 0);
    EXPECT_NEAR(p.sigma, sigma_max(M), 1e-12);
}

TEST(TopSingularPair, ZeroMatrixIsDegenerate)
{
    try
    {
        top_singular_pair(CMatrix::Zero(32, 128), 2, 10, 0);
        FAIL();
    }
    catch (const Error &e)
    {
        EXPECT_EQ(e.code(), ErrorCode::degenerate_input);
    }
}

// ------------------------------------------------------------------------
// Descent atom
// ------------------------------------------------------------------------

TEST(DescentAtom, EmptyFactorsUseSampledMatrix)
{
    const auto s = random_state(5, 0);
    const SampledData data(s.obs);
    const auto atom = descent_atom(data, CMatrix(32, 0), CMatrix(128, 0), 2, 10, 1);
    ASSERT_TRUE(atom.has_value());
    EXPECT_NEAR(atom->sigma / sigma_max(s.obs.H_tilde), 1.0, 1e-6);
    EXPECT_LT(max_abs(data.residual(CMatrix(32, 0), CMatrix(128, 0)) - s.obs.H_tilde), 1e-15);
}

TEST(DescentAtom, ExactFitSignalsZeroGradient)
{
    Rng rng(6);
    const CMatrix U = complex_gaussian_matrix(rng, 32, 2), V = complex_gaussian_matrix(rng, 128, 2);
    const auto obs = test::noiseless_observation(U * V.adjoint(), build_sampling_pattern(128, 32, 0.375, 2));
    EXPECT_FALSE(descent_atom(SampledData(obs), U, V, 2, 10, 0).has_value());
}

TEST(DescentAtom, BeatsRandomRankOneProbes)
{
    Rng rng(7);
    const auto s = random_state(7, 2);
    const SampledData data(s.obs);
    const CMatrix grad = -data.residual(s.U, s.V); // P_Omega(U V^H - H~)
    const auto atom = descent_atom(data, s.U, s.V, 2, 10, 3);
    ASSERT_TRUE(atom.has_value());
    const double best = inner(atom->u * atom->v.adjoint(), grad);
    for (int t = 0; t < 100; ++t)
    {
        const CMatrix Z = test::random_unit(rng, 32) * test::random_unit(rng, 128).adjoint();
        EXPECT_LE(best, inner(Z, grad) + 1e-12);
    }
}

// ------------------------------------------------------------------------
// Line search
// ------------------------------------------------------------------------

// h(theta) and phi(theta) evaluated with dense matrices.
struct LineOracle
{
    CMatrix H_tilde, H_hat, Z;
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mask;
    double eta, mu, nuc_hat;

    double fit(const CMatrix &X) const
    {
        double s = 0.0;
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            for (Eigen::Index j = 0; j < X.cols(); ++j)
                if (mask(i, j))
                    s += std::norm(X(i, j) - H_tilde(i, j));
        return 0.5 * s;
    }
    double h(double theta) const { return fit((1 - eta) * H_hat + theta * Z) + mu * (1 - eta) * nuc_hat + mu * theta; }
    double phi(double theta) const
    {
        const CMatrix X = (1 - eta) * H_hat + theta * Z;
        return fit(X) + mu * nuclear_norm(X);
    }
};

TEST(LineSearch, ClosedFormBeatsGridSearch)
{
    for (std::uint64_t seed = 0; seed < 25; ++seed)
    {
        const int k = 1 + static_cast<int>(seed % 4);
        const auto s = random_state(100 + seed, k);
        const SampledData data(s.obs);
        const auto atom = descent_atom(data, s.U, s.V, 2, 10, seed);
        ASSERT_TRUE(atom.has_value());
        const double eta = 2.0 / (k + 2.0), mu = 0.01 * (1 + seed % 5);
        const double theta = line_search_theta(data, s.U, s.V, *atom, eta, mu);
        const LineOracle o{s.obs.H_tilde, s.U * s.V.adjoint(), atom->u * atom->v.adjoint(), s.obs.pattern.mask(), eta, mu,
                           nuclear_norm(s.U * s.V.adjoint())};
        const double h_star = o.h(theta);
        const double hi = theta > 0 ? 2 * theta : 1.0;
        double grid_min = std::numeric_limits<double>::infinity();
        for (int g = 0; g <= 10000; ++g)
            grid_min = std::min(grid_min, o.h(hi * g / 10000.0));
        EXPECT_GE(grid_min, h_star - 1e-10);
        EXPECT_GE(o.h(theta) + 1e-12, o.phi(theta)); // upper bound validity
    }
}

TEST(LineSearch, HugePenaltyClampsToZero)
{
    const auto s = random_state(8, 1);
    const SampledData data(s.obs);
    const auto atom = descent_atom(data, s.U, s.V, 2, 10, 0);
    EXPECT_EQ(line_search_theta(data, s.U, s.V, *atom, 0.5, 1e12), 0.0);
}

TEST(LineSearch, EmptyEstimateSpecialisation)
{
    const auto s = random_state(9, 0);
    const SampledData data(s.obs);
    const CMatrix U0(32, 0), V0(128, 0);
    const auto atom = descent_atom(data, U0, V0, 2, 10, 0);
    const auto t = line_search_terms(data, U0, V0, *atom);
    EXPECT_EQ(t.z_h_hat, cplx(0.0));
    const double mu = 0.1;
    const double expect = (2 * t.z_h_tilde.real() - 2 * mu) / (2 * t.z_sq);
    EXPECT_NEAR(line_search_theta(data, U0, V0, *atom, 1.0, mu), std::max(expect, 0.0), 1e-14);
}

TEST(LineSearch, PrintedRuleEvaluatesItsFormula)
{
    const auto s = random_state(10, 2);
    const SampledData data(s.obs);
    const auto atom = descent_atom(data, s.U, s.V, 2, 10, 0);
    const auto t = line_search_terms(data, s.U, s.V, *atom);
    const double eta = 2.0 / 3.0, mu = 0.01;
    const double printed = (2 * t.z_h_tilde.real() - (1 - eta) * t.z_h_hat.real() - 2 * mu) / (2 * t.z_sq);
    EXPECT_NEAR(line_search_theta(t, eta, mu, ThetaRule::printed), std::max(printed, 0.0), 1e-14);
}

TEST(LineSearch, AtomOffOmegaIsDegenerate)
{
    LineSearchTerms t;
    EXPECT_THROW(line_search_theta(t, 0.5, 0.1), Error);
}

// ------------------------------------------------------------------------
// Alternating refinement
// ------------------------------------------------------------------------

TEST(AltMin, ExactDataIsAFixedPoint)
{
    Rng rng(11);
    const CMatrix U = complex_gaussian_matrix(rng, 32, 2), V = complex_gaussian_matrix(rng, 128, 2);
    const auto obs = test::noiseless_observation(U * V.adjoint(), build_sampling_pattern(128, 32, 0.375, 4));
    const SampledData data(obs);
    const auto r = altmin_refine(data, U, V, 1e-12, 0.1);
    EXPECT_EQ(r.iterations, 1);
    EXPECT_LT((r.U * r.V.adjoint() - U * V.adjoint()).norm() / (U * V.adjoint()).norm(), 1e-9);
}

// The stacked system of the V update is block-diagonal over columns; solve it
// as one dense regularised least-squares problem and compare.
TEST(AltMin, ColumnUpdatesMatchStackedSolve)
{
    const int N_r = 8, N_t = 10, k = 2;
    const auto s = random_state(12, k, 0.5, 2, N_r, N_t);
    const SampledData data(s.obs);
    const double mu = 0.05;
    CMatrix V = s.V;
    update_V(data, s.U, V, mu);

    const auto &pat = s.obs.pattern;
    const Eigen::Index N = static_cast<Eigen::Index>(pat.size());
    CMatrix A = CMatrix::Zero(N, k * N_t);
    CVector h(N);
    Eigen::Index row = 0;
    for (int t = 0; t < N_t; ++t)
        for (int i : pat.rows[static_cast<std::size_t>(t)])
        {
            A.block(row, t * k, 1, k) = s.U.row(i);
            h(row) = s.obs.H_tilde(i, t);
            ++row;
        }
    const CMatrix Nrm = A.adjoint() * A + mu * CMatrix::Identity(k * N_t, k * N_t);
    const CVector x = Nrm.ldlt().solve(A.adjoint() * h); // x = vec of conj(V)^T blocks
    for (int t = 0; t < N_t; ++t)
        for (int c = 0; c < k; ++c)
            EXPECT_LT(std::abs(std::conj(V(t, c)) - x(t * k + c)), 1e-10);
}

TEST(AltMin, RowUpdatesMatchIndependentRidgeSolves)
{
    const auto s = random_state(13, 3, 0.5, 2, 8, 12);
    const SampledData data(s.obs);
    const double mu = 0.02;
    CMatrix U = s.U;
    update_U(data, U, s.V, mu);
    const auto by_row = s.obs.pattern.columns_by_row();
    for (int i = 0; i < 8; ++i)
    {
        // minimise sum_j |h_ij - u^T conj(v_j)|^2 + mu ||u||^2 via normal equations
        const auto &cols = by_row[static_cast<std::size_t>(i)];
        CMatrix B(static_cast<Eigen::Index>(cols.size()), 3);
        CVector h(static_cast<Eigen::Index>(cols.size()));
        for (std::size_t a = 0; a < cols.size(); ++a)
        {
            B.row(static_cast<Eigen::Index>(a)) = s.V.row(cols[a]).conjugate();
            h(static_cast<Eigen::Index>(a)) = s.obs.H_tilde(i, cols[a]);
        }
        const CVector u = (B.adjoint() * B + mu * CMatrix::Identity(3, 3)).ldlt().solve(B.adjoint() * h);
        EXPECT_LT(max_abs(U.row(i).transpose() - u), 1e-10);
    }
}

TEST(AltMin, ObjectiveStrictlyDecreasesFromRandomStart)
{
    const auto s = random_state(14, 2, 0.5, 2);
    const SampledData data(s.obs);
    const auto r = altmin_refine(data, s.U, s.V, 1e-3, 0.01);
    ASSERT_GE(r.objectives.size(), 3u);
    for (std::size_t i = 1; i < r.objectives.size(); ++i)
        EXPECT_LT(r.objectives[i], r.objectives[i - 1]);
    EXPECT_LE(r.relative_change.back(), 0.01);
}

TEST(AltMin, ZeroWidthIsNoOp)
{
    const auto s = random_state(15, 0);
    const auto r = altmin_refine(SampledData(s.obs), CMatrix(32, 0), CMatrix(128, 0), 0.1, 0.1);
    EXPECT_EQ(r.iterations, 0);
    EXPECT_EQ(r.U.cols(), 0);
}

// ------------------------------------------------------------------------
// Nuclear-norm identity
// ------------------------------------------------------------------------

TEST(NuclearNorm, BalancedFactorsAttainBound)
{
    Rng rng(16);
    for (int t = 0; t < 20; ++t)
    {
        const CMatrix H = test::random_low_rank(rng, 12, 20, 4);
        Eigen::JacobiSVD<CMatrix> svd(H, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const RVector sq = svd.singularValues().cwiseSqrt();
        const CMatrix U = svd.matrixU() * sq.cast<cplx>().asDiagonal();
        const CMatrix V = svd.matrixV() * sq.cast<cplx>().asDiagonal();
        EXPECT_NEAR(0.5 * (U.squaredNorm() + V.squaredNorm()), nuclear_norm(H), 1e-8 * nuclear_norm(H));
        const CMatrix G = complex_gaussian_matrix(rng, 12, 12) + 3.0 * CMatrix::Identity(12, 12);
        const CMatrix U2 = U * G, V2 = V * G.inverse().adjoint();
        EXPECT_GE(0.5 * (U2.squaredNorm() + V2.squaredNorm()), nuclear_norm(U2 * V2.adjoint()) * (1 - 1e-12));
    }
}

// ------------------------------------------------------------------------
// Estimator
// ------------------------------------------------------------------------

SolverConfig noiseless_config()
{
    SolverConfig c;
    c.mu = 1e-8;
    c.sigma = 1e-8;
    return c;
}

TEST(Estimate, NoiselessRankOne)
{
    Rng rng(17);
    const CMatrix H = test::random_unit(rng, 32) * test::random_unit(rng, 128).adjoint() * 10.0;
    const auto obs = test::noiseless_observation(H, build_sampling_pattern(128, 32, 0.375, 5));
    const auto est = estimate(obs, noiseless_config());
    EXPECT_LT(nmse(est.H(), H), 1e-6);
    EXPECT_EQ(est.numerical_rank(), 1);
    EXPECT_FALSE(est.truncated);
}

TEST(Estimate, NoiselessRankThree)
{
    for (std::uint64_t seed = 0; seed < 5; ++seed)
    {
        Rng rng(seed);
        const CMatrix H = test::random_low_rank(rng, 32, 128, 3);
        const auto obs = test::noiseless_observation(H, build_sampling_pattern(128, 32, 0.375, seed));
        auto cfg = noiseless_config();
        cfg.seed = seed;
        const auto est = estimate(obs, cfg);
        EXPECT_LT(nmse(est.H(), H), 1e-4);
        EXPECT_EQ(est.numerical_rank(), 3);
        if (est.stop == StopReason::noise_floor)
            EXPECT_LT(nmse(est.H(), H), 1e-4);
    }
}

TEST(Estimate, HugePenaltyStopsImmediately)
{
    Rng rng(18);
    const CMatrix Nz = complex_gaussian_matrix(rng, 32, 128);
    const auto obs = test::noiseless_observation(Nz, build_sampling_pattern(128, 32, 0.375, 1));
    SolverConfig cfg;
    cfg.mu = 1e9;
    const auto est = estimate(obs, cfg);
    EXPECT_EQ(est.stop, StopReason::zero_step);
    EXPECT_EQ(est.rank(), 0);
    EXPECT_EQ(est.H().norm(), 0.0);
}

TEST(Estimate, TraceInvariants)
{
    Rng rng(19);
    const CMatrix H = test::random_low_rank(rng, 32, 128, 4) * 0.5;
    const auto pattern = build_sampling_pattern(128, 32, 0.375, 2);
    const auto plan = assemble_training_plan(pattern, 16, 4, PhaseShifterSet(6), 128, 4);
    const auto obs = simulate_training(H, plan, 10.0, 3);
    SolverConfig cfg;
    cfg.mu = obs.noise_var;
    cfg.sigma = std::sqrt(obs.noise_var);
    const auto est = estimate(obs, cfg);
    ASSERT_FALSE(est.trace.empty());
    EXPECT_EQ(static_cast<int>(est.trace.size()), est.rank());
    double flops = 0.0;
    for (std::size_t i = 0; i < est.trace.size(); ++i)
    {
        const auto &r = est.trace[i];
        EXPECT_EQ(r.k, static_cast<int>(i) + 1);
        EXPECT_DOUBLE_EQ(r.eta, 2.0 / (r.k + 1.0));
        EXPECT_GT(r.theta, 0.0);
        EXPECT_GE(r.inner_iters, 1);
        EXPECT_GT(r.flops_cumulative, flops);
        flops = r.flops_cumulative;
        for (std::size_t h = 1; h < r.altmin_objectives.size(); ++h)
            EXPECT_LE(r.altmin_objectives[h], r.altmin_objectives[h - 1]);
    }
    EXPECT_TRUE(std::isnan(est.trace.front().eps_k));
    EXPECT_DOUBLE_EQ(est.flops, flops);
}

TEST(Estimate, MaxRankTruncates)
{
    Rng rng(20);
    const CMatrix H = test::random_low_rank(rng, 32, 128, 6);
    const auto obs = test::noiseless_observation(H, build_sampling_pattern(128, 32, 0.375, 3));
    auto cfg = noiseless_config();
    cfg.max_rank = 2;
    const auto est = estimate(obs, cfg);
    EXPECT_TRUE(est.truncated);
    EXPECT_EQ(est.stop, StopReason::max_rank);
    EXPECT_EQ(est.rank(), 2);
}

TEST(Estimate, DeterministicGivenSeed)
{
    Rng rng(21);
    const CMatrix H = test::random_low_rank(rng, 32, 128, 3);
    const auto pattern = build_sampling_pattern(128, 32, 0.375, 4);
    const auto plan = assemble_training_plan(pattern, 16, 4, PhaseShifterSet(6), 128, 4);
    const auto obs = simulate_training(H, plan, 15.0, 3);
    SolverConfig cfg;
    cfg.mu = obs.noise_var;
    cfg.sigma = std::sqrt(obs.noise_var);
    cfg.seed = 77;
    const auto a = estimate(obs, cfg), b = estimate(obs, cfg);
    EXPECT_TRUE((a.U.array() == b.U.array()).all());
    EXPECT_TRUE((a.V.array() == b.V.array()).all());
}

// The solver sees only samples: an impaired channel and the same matrix
// presented as an ideal channel give identical estimates.
TEST(Estimate, IndependentOfArrayModel)
{
    ChannelParams cp;
    cp.scaling = ChannelScaling::per_entry;
    const auto ch = generate_channel(cp, ArrayGeometry::ula(128), ArrayGeometry::ula(32), 4);
    const auto tx = impairment_profile(pi / 4, 0.2, 128, 5), rx = impairment_profile(pi / 4, 0.2, 32, 6);
    const CMatrix He = apply_impairments(ch.H, tx, rx);
    CMatrix H2(32, 128);
    for (int i = 0; i < 32; ++i)
        for (int k = 0; k < 128; ++k)
            H2(i, k) = rx.e(i) * ch.H(i, k) * std::conj(tx.e(k));
    const auto plan = assemble_training_plan(build_sampling_pattern(128, 32, 0.375, 1), 16, 4, PhaseShifterSet(6), 128, 4);
    SolverConfig cfg;
    cfg.mu = noise_variance(20.0);
    cfg.sigma = std::sqrt(cfg.mu);
    const auto a = estimate(simulate_training(He, plan, 20.0, 9), cfg);
    const auto b = estimate(simulate_training(H2, plan, 20.0, 9), cfg);
    EXPECT_NEAR(nmse(a.H(), He), nmse(b.H(), H2), 1e-10);
}

TEST(Estimate, InvalidConfigRejected)
{
    const auto s = random_state(22, 0);
    SolverConfig cfg;
    cfg.mu = 0.0;
    EXPECT_THROW(estimate(s.obs, cfg), Error);
    cfg = {};
    cfg.eps = 1.0;
    EXPECT_THROW(estimate(s.obs, cfg), Error);
    cfg = {};
    cfg.eps_a = 0.0;
    EXPECT_THROW(estimate(s.obs, cfg), Error);
}

TEST(Estimate, TraceCsvHeader)
{
    Rng rng(23);
    const CMatrix H = test::random_low_rank(rng, 32, 128, 1);
    const auto est = estimate(test::noiseless_observation(H, build_sampling_pattern(128, 32, 0.375, 1)), noiseless_config());
    std::ostringstream os;
    write_trace_csv(os, est);
    std::istringstream is(os.str());
    std::string header;
    std::getline(is, header);
    EXPECT_EQ(header, "k,theta_k,eta_k,objective,eps_k,delta_sq,inner_iters,flops_cumulative");
    int rows = 0;
    for (std::string line; std::getline(is, line);)
        rows += !line.empty();
    EXPECT_EQ(rows, est.rank());
}

// ------------------------------------------------------------------------
// Flop model
// ------------------------------------------------------------------------

TEST(FlopCount, HandDerivedGcgTerm)
{
    EXPECT_DOUBLE_EQ(flop_count(128, 32, 0.375, 1, 1, 2, 10).gcg, 3096576.0);
}

TEST(FlopCount, ZeroRankIsZero)
{
    const auto f = flop_count(128, 32, 0.375, 0, 3, 2, 10);
    EXPECT_EQ(f.gcg, 0.0);
    EXPECT_EQ(f.altmin_closed_form, 0.0);
    EXPECT_EQ(f.altmin_direct_sum, 0.0);
}

TEST(FlopCount, AltMinClosedFormMatchesDirectSum)
{
    for (int r = 1; r <= 10; ++r)
        for (int Q = 1; Q <= 5; ++Q)
        {
            const auto f = flop_count(128, 32, 0.375, r, Q, 2, 10);
            double direct = 0.0;
            for (int k = 1; k <= r; ++k)
                direct += Q * ((8.0 * k * k * 0.375 * 32 + 4.0 * k * k * k + 16.0 * k * k + 8.0 * k * 0.375 * 32) * 128 +
                               (8.0 * k * k * 0.375 * 128 + 4.0 * k * k * k + 16.0 * k * k + 8.0 * k * 0.375 * 128) * 32);
            EXPECT_NEAR(f.altmin_direct_sum, direct, 1e-9 * direct);
            EXPECT_NEAR(f.altmin_closed_form, direct, 1e-9 * direct);
        }
}

TEST(FlopCount, OmpRow)
{
    EXPECT_DOUBLE_EQ(omp_flop_count(128, 32, 0.375, 2, 256, 64), 8.0 * 0.375 * 2 * 128 * 32 * 256 * 64);
}

} // namespace
