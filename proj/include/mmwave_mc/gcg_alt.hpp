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

#ifndef MMWAVE_MC_GCG_ALT_HPP
#define MMWAVE_MC_GCG_ALT_HPP

#include "frontend.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <vector>

// GCG-Alt: a relaxed conditional-gradient outer loop that grows the factors
// U (N_r x k) and V (N_t x k) of H = U V^H by one rank-1 atom per iteration,
// followed by alternating ridge refinement of both factors. Objective:
//
//   phi(U, V) = 1/2 ||P_Omega(H~ - U V^H)||_F^2 + mu/2 (||U||_F^2 + ||V||_F^2)

namespace mmwave_mc
{

// ------------------------------------------------------------------------
// Top singular pair
// ------------------------------------------------------------------------

struct SingularTriplet
{
    CVector u;
    double sigma = 0.0;
    CVector v;
};

namespace detail
{
inline CMatrix orthonormal_basis(const CMatrix &Y)
{
    Eigen::HouseholderQR<CMatrix> qr(Y);
    CMatrix Q = CMatrix::Identity(Y.rows(), std::min(Y.rows(), Y.cols()));
    qr.householderQ().applyThisOnTheLeft(Q);
    return Q;
}

// u <- M v / ||M v||, sigma <- ||M v||; makes u^H M v real and positive.
inline SingularTriplet align_pair(const CMatrix &M, CVector v)
{
    v.normalize();
    CVector Mv = M * v;
    const double s = Mv.norm();
    return {Mv / s, s, std::move(v)};
}
} // namespace detail

// Randomized subspace iteration with l = g + 1 probes and q power steps.
// Further subspace iterations run until the leading Ritz value settles so the
// returned sigma matches sigma_max to well below 1e-6 whenever the top gap
// is at least 1%. Small problems use a dense SVD.
inline SingularTriplet top_singular_pair(const CMatrix &M, int q, int g, std::uint64_t seed)
{
    require(q >= 0 && g >= 0, ErrorCode::config, "power and oversampling parameters must be non-negative");
    const double fro = M.norm();
    require(fro > 0.0 && std::isfinite(fro), ErrorCode::degenerate_input, "top singular pair of a zero matrix");

    const Eigen::Index min_dim = std::min(M.rows(), M.cols());
    if (min_dim <= 2 * (g + 1))
    {
        Eigen::JacobiSVD<CMatrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
        return detail::align_pair(M, svd.matrixV().col(0));
    }

    const Eigen::Index l = std::min<Eigen::Index>(g + 1, min_dim);
    Rng rng(seed);
    CMatrix Y = detail::orthonormal_basis(M * complex_gaussian_matrix(rng, M.cols(), l));
    for (int i = 0; i < q; ++i)
    {
        const CMatrix Z = detail::orthonormal_basis(M.adjoint() * Y);
        Y = detail::orthonormal_basis(M * Z);
    }

    auto ritz = [&](const CMatrix &Qb, CVector &v_out) {
        const CMatrix B = Qb.adjoint() * M; // l x N_t
        const Eigen::SelfAdjointEigenSolver<CMatrix> eig(B * B.adjoint());
        const Eigen::Index top = eig.eigenvalues().size() - 1;
        v_out = B.adjoint() * eig.eigenvectors().col(top);
        const double sv = v_out.norm();
        v_out /= sv;
        return sv;
    };

    CVector v;
    double s = ritz(Y, v);
    constexpr int max_extra = 60;
    for (int it = 0; it < max_extra; ++it)
    {
        const CMatrix Z = detail::orthonormal_basis(M.adjoint() * Y);
        Y = detail::orthonormal_basis(M * Z);
        CVector v_next;
        const double s_next = ritz(Y, v_next);
        const bool settled = std::abs(s_next - s) <= 1e-9 * s_next;
        s = s_next;
        v = std::move(v_next);
        if (settled)
            break;
    }
    return detail::align_pair(M, std::move(v));
}

// ------------------------------------------------------------------------
// Sampled data in column-major and row-major index form
// ------------------------------------------------------------------------

class SampledData
{
  public:
    explicit SampledData(const ObservationMatrix &obs)
        : N_r_(obs.N_r()), N_t_(obs.N_t()), by_col_(static_cast<std::size_t>(N_t_)), by_row_(static_cast<std::size_t>(N_r_))
    {
        require(static_cast<int>(obs.pattern.rows.size()) == N_t_ && obs.pattern.N_r == N_r_,
                ErrorCode::dimension_mismatch, "observation pattern does not match H~");
        for (int t = 0; t < N_t_; ++t)
        {
            const auto &rows = obs.pattern.rows[static_cast<std::size_t>(t)];
            auto &c = by_col_[static_cast<std::size_t>(t)];
            c.index = rows;
            c.value.resize(static_cast<Eigen::Index>(rows.size()));
            for (std::size_t a = 0; a < rows.size(); ++a)
            {
                c.value(static_cast<Eigen::Index>(a)) = obs.H_tilde(rows[a], t);
                by_row_[static_cast<std::size_t>(rows[a])].index.push_back(t);
            }
            count_ += rows.size();
        }
        for (int i = 0; i < N_r_; ++i)
        {
            auto &r = by_row_[static_cast<std::size_t>(i)];
            r.value.resize(static_cast<Eigen::Index>(r.index.size()));
            for (std::size_t a = 0; a < r.index.size(); ++a)
                r.value(static_cast<Eigen::Index>(a)) = obs.H_tilde(i, r.index[a]);
        }
        require(count_ > 0, ErrorCode::degenerate_input, "observation has no samples");
    }

    struct Line
    {
        std::vector<int> index; // rows of a column, or columns of a row
        CVector value;
    };

    int N_r() const { return N_r_; }
    int N_t() const { return N_t_; }
    std::size_t count() const { return count_; }
    double ratio() const { return static_cast<double>(count_) / (static_cast<double>(N_r_) * N_t_); }
    const Line &column(int t) const { return by_col_[static_cast<std::size_t>(t)]; }
    const Line &row(int i) const { return by_row_[static_cast<std::size_t>(i)]; }

    // (U V^H)_{ij} for an observed position
    static cplx model(const CMatrix &U, const CMatrix &V, int i, int j)
    {
        cplx acc = 0.0;
        for (Eigen::Index c = 0; c < U.cols(); ++c)
            acc += U(i, c) * std::conj(V(j, c));
        return acc;
    }

    // ||P_Omega(H~ - U V^H)||_F^2
    double residual_sq(const CMatrix &U, const CMatrix &V) const
    {
        double s = 0.0;
        for (int t = 0; t < N_t_; ++t)
        {
            const auto &c = column(t);
            for (std::size_t a = 0; a < c.index.size(); ++a)
                s += std::norm(c.value(static_cast<Eigen::Index>(a)) - model(U, V, c.index[a], t));
        }
        return s;
    }

    // Dense P_Omega(H~ - U V^H)
    CMatrix residual(const CMatrix &U, const CMatrix &V) const
    {
        CMatrix R = CMatrix::Zero(N_r_, N_t_);
        for (int t = 0; t < N_t_; ++t)
        {
            const auto &c = column(t);
            for (std::size_t a = 0; a < c.index.size(); ++a)
                R(c.index[a], t) = c.value(static_cast<Eigen::Index>(a)) - model(U, V, c.index[a], t);
        }
        return R;
    }

    double data_norm_sq() const
    {
        double s = 0.0;
        for (const auto &c : by_col_)
            s += c.value.squaredNorm();
        return s;
    }

  private:
    int N_r_;
    int N_t_;
    std::size_t count_ = 0;
    std::vector<Line> by_col_;
    std::vector<Line> by_row_;
};

inline double surrogate_objective(const SampledData &data, const CMatrix &U, const CMatrix &V, double mu)
{
    return 0.5 * data.residual_sq(U, V) + 0.5 * mu * (U.squaredNorm() + V.squaredNorm());
}

// ||U V^H||_F^2 = tr((U^H U)(V^H V))
inline double factor_energy(const CMatrix &U, const CMatrix &V)
{
    if (U.cols() == 0)
        return 0.0;
    return ((U.adjoint() * U).cwiseProduct((V.adjoint() * V).transpose())).sum().real();
}

// ------------------------------------------------------------------------
// Outer-loop pieces
// ------------------------------------------------------------------------

// Top singular pair of the negative gradient P_Omega(H~ - U V^H). Empty when
// the gradient vanishes to rounding level.
inline std::optional<SingularTriplet> descent_atom(const SampledData &data, const CMatrix &U, const CMatrix &V,
                                                   int q, int g, std::uint64_t seed)
{
    const CMatrix R = data.residual(U, V);
    const double r = R.norm();
    if (r == 0.0 || r <= 1e-14 * std::sqrt(data.data_norm_sq()))
        return std::nullopt;
    return top_singular_pair(R, q, g, seed);
}

enum class ThetaRule
{
    exact,   // minimiser of the quadratic upper bound h(theta) over theta >= 0
    printed, // the closed form with the middle term halved and not real-part
};

inline const char *to_string(ThetaRule r) { return r == ThetaRule::exact ? "exact" : "printed"; }

struct LineSearchTerms
{
    double z_sq = 0.0;    // ||z_Omega||^2
    cplx z_h_tilde = 0.0; // z_Omega^H h~_Omega
    cplx z_h_hat = 0.0;   // z_Omega^H h^_Omega
};

inline LineSearchTerms line_search_terms(const SampledData &data, const CMatrix &U, const CMatrix &V,
                                         const SingularTriplet &atom)
{
    LineSearchTerms t;
    for (int j = 0; j < data.N_t(); ++j)
    {
        const auto &c = data.column(j);
        const cplx vj = std::conj(atom.v(j));
        for (std::size_t a = 0; a < c.index.size(); ++a)
        {
            const int i = c.index[a];
            const cplx z = atom.u(i) * vj;
            t.z_sq += std::norm(z);
            t.z_h_tilde += std::conj(z) * c.value(static_cast<Eigen::Index>(a));
            if (U.cols() > 0)
                t.z_h_hat += std::conj(z) * SampledData::model(U, V, i, j);
        }
    }
    return t;
}

// h(theta) = f((1-eta) H^ + theta z) + mu (1-eta) ||H^||_* + mu theta is a
// convex quadratic in theta; its minimiser over theta >= 0 is returned.
inline double line_search_theta(const LineSearchTerms &t, double eta, double mu, ThetaRule rule = ThetaRule::exact)
{
    require(t.z_sq > 0.0, ErrorCode::degenerate_input, "atom has no support on the sampling set");
    double theta = 0.0;
    if (rule == ThetaRule::exact)
        theta = (t.z_h_tilde.real() - (1.0 - eta) * t.z_h_hat.real() - mu) / t.z_sq;
    else
        theta = (2.0 * t.z_h_tilde.real() - (1.0 - eta) * t.z_h_hat.real() - 2.0 * mu) / (2.0 * t.z_sq);
    return std::max(theta, 0.0);
}

inline double line_search_theta(const SampledData &data, const CMatrix &U, const CMatrix &V,
                                const SingularTriplet &atom, double eta, double mu, ThetaRule rule = ThetaRule::exact)
{
    return line_search_theta(line_search_terms(data, U, V, atom), eta, mu, rule);
}

// ------------------------------------------------------------------------
// Alternating ridge refinement
// ------------------------------------------------------------------------

struct AltMinResult
{
    CMatrix U;
    CMatrix V;
    int iterations = 0;                  // Q
    std::vector<double> objectives;      // start, then after every half-step
    std::vector<double> relative_change; // eps_k^i per full iteration
};

namespace detail
{
inline CVector ridge_solve(const CMatrix &A, const CVector &h, double mu)
{
    CMatrix N = A.adjoint() * A;
    N.diagonal().array() += mu;
    return N.llt().solve(A.adjoint() * h);
}
} // namespace detail

// V^H(:, t) = (A^H A + mu I)^-1 A^H h~_t with A = U(Omega_t, :)
inline void update_V(const SampledData &data, const CMatrix &U, CMatrix &V, double mu)
{
    const Eigen::Index k = U.cols();
    for (int t = 0; t < data.N_t(); ++t)
    {
        const auto &c = data.column(t);
        if (c.index.empty())
        {
            V.row(t).setZero();
            continue;
        }
        CMatrix A(static_cast<Eigen::Index>(c.index.size()), k);
        for (std::size_t a = 0; a < c.index.size(); ++a)
            A.row(static_cast<Eigen::Index>(a)) = U.row(c.index[a]);
        V.row(t) = detail::ridge_solve(A, c.value, mu).adjoint();
    }
}

// U(i, :)^T = (A^H A + mu I)^-1 A^H h~^i with A = conj(V(Omega^i, :))
inline void update_U(const SampledData &data, CMatrix &U, const CMatrix &V, double mu)
{
    const Eigen::Index k = V.cols();
    for (int i = 0; i < data.N_r(); ++i)
    {
        const auto &r = data.row(i);
        if (r.index.empty())
        {
            U.row(i).setZero();
            continue;
        }
        CMatrix A(static_cast<Eigen::Index>(r.index.size()), k);
        for (std::size_t a = 0; a < r.index.size(); ++a)
            A.row(static_cast<Eigen::Index>(a)) = V.row(r.index[a]).conjugate();
        U.row(i) = detail::ridge_solve(A, r.value, mu).transpose();
    }
}

inline AltMinResult altmin_refine(const SampledData &data, CMatrix U, CMatrix V, double mu, double eps_a,
                                  int max_iterations = 1000)
{
    require(mu > 0.0, ErrorCode::config, "mu must be positive");
    require(U.cols() == V.cols(), ErrorCode::dimension_mismatch, "factor widths differ");
    AltMinResult out;
    if (U.cols() == 0)
    {
        out.U = std::move(U);
        out.V = std::move(V);
        return out;
    }
    double prev = surrogate_objective(data, U, V, mu);
    out.objectives.push_back(prev);
    while (out.iterations < max_iterations)
    {
        ++out.iterations;
        update_V(data, U, V, mu);
        out.objectives.push_back(surrogate_objective(data, U, V, mu));
        update_U(data, U, V, mu);
        const double cur = surrogate_objective(data, U, V, mu);
        out.objectives.push_back(cur);
        const double rel = prev > 0.0 ? (prev - cur) / prev : 0.0;
        out.relative_change.push_back(rel);
        prev = cur;
        if (rel <= eps_a)
            break;
    }
    out.U = std::move(U);
    out.V = std::move(V);
    return out;
}

// ------------------------------------------------------------------------
// Flop model
// ------------------------------------------------------------------------

struct FlopTotals
{
    double gcg = 0.0;
    double altmin_closed_form = 0.0;
    double altmin_direct_sum = 0.0;

    double total() const { return gcg + altmin_direct_sum; }
};

inline double gcg_iteration_flops(int N_t, int N_r, double p, int q, int g)
{
    const double B = (2.0 * q + 3.0) * (g + 1.0) + (4.0 * p + 16.0);
    return 8.0 * B * N_t * N_r;
}

// V and U ridge updates of one AltMin iteration at factor width k.
inline double altmin_iteration_flops(int N_t, int N_r, double p, int k)
{
    const double kk = k;
    const double v = (8.0 * kk * kk * p * N_r + 4.0 * kk * kk * kk + 16.0 * kk * kk + 8.0 * kk * p * N_r) * N_t;
    const double u = (8.0 * kk * kk * p * N_t + 4.0 * kk * kk * kk + 16.0 * kk * kk + 8.0 * kk * p * N_t) * N_r;
    return v + u;
}

inline FlopTotals flop_count(int N_t, int N_r, double p, int r_hat, int Q, int q, int g)
{
    require(r_hat >= 0 && Q >= 0, ErrorCode::config, "rank and iteration counts must be non-negative");
    FlopTotals f;
    const double r = r_hat;
    const double NN = static_cast<double>(N_t) * N_r;
    f.gcg = r * gcg_iteration_flops(N_t, N_r, p, q, g);
    f.altmin_closed_form = Q * r * (r + 1.0) * p * NN * (16.0 * r + 32.0) / 3.0 +
                           Q * r * (r + 1.0) * (N_t + N_r) * (3.0 * r * r + 19.0 * r + 8.0) / 3.0;
    for (int k = 1; k <= r_hat; ++k)
        f.altmin_direct_sum += Q * altmin_iteration_flops(N_t, N_r, p, k);
    return f;
}

inline double omp_flop_count(int N_t, int N_r, double p, int r_hat, int G_t, int G_r)
{
    return 8.0 * p * r_hat * static_cast<double>(N_t) * N_r * static_cast<double>(G_t) * G_r;
}

// ------------------------------------------------------------------------
// Estimator
// ------------------------------------------------------------------------

struct SolverConfig
{
    double mu = 1e-2;
    double eps = 0.01;
    double eps_a = 0.1;
    double sigma = 0.0; // known noise standard deviation
    int max_rank = 0;   // 0: min(N_r, N_t) / 2
    int rsvd_power = 2;
    int rsvd_oversample = 10;
    int max_inner = 1000;
    ThetaRule theta_rule = ThetaRule::exact;
    std::uint64_t seed = 0;

    void validate() const
    {
        require(mu > 0.0, ErrorCode::config, "mu must be positive");
        require(eps > 0.0 && eps < 1.0, ErrorCode::config, "eps must lie in (0, 1)");
        require(eps_a > 0.0 && eps_a < 1.0, ErrorCode::config, "eps_a must lie in (0, 1)");
        require(sigma >= 0.0, ErrorCode::config, "sigma must be non-negative");
        require(max_rank >= 0, ErrorCode::config, "max_rank must be non-negative");
        require(rsvd_power >= 0 && rsvd_oversample >= 0, ErrorCode::config, "randomized SVD parameters must be non-negative");
        require(max_inner >= 1, ErrorCode::config, "max_inner must be at least 1");
    }
};

enum class StopReason
{
    none,
    energy,        // |eps_k| <= eps
    noise_floor,   // delta_k^2 <= (N + sqrt(8N)) sigma^2
    max_rank,
    zero_gradient,
    zero_step,     // theta_k clamped to 0
};

inline const char *to_string(StopReason r)
{
    switch (r)
    {
    case StopReason::none: return "none";
    case StopReason::energy: return "energy";
    case StopReason::noise_floor: return "noise_floor";
    case StopReason::max_rank: return "max_rank";
    case StopReason::zero_gradient: return "zero_gradient";
    case StopReason::zero_step: return "zero_step";
    }
    return "none";
}

struct IterationRecord
{
    int k = 0;
    double theta = 0.0;
    double eta = 0.0;
    double objective = 0.0; // surrogate objective after refinement
    double eps_k = 0.0;     // NaN at k = 1
    double delta_sq = 0.0;
    int inner_iters = 0;
    double flops_cumulative = 0.0;
    std::vector<double> altmin_objectives;
};

struct FactorEstimate
{
    CMatrix U;
    CMatrix V;
    std::vector<IterationRecord> trace;
    bool truncated = false;
    StopReason stop = StopReason::none;
    double flops = 0.0;

    // Factor width; equals the number of outer iterations kept.
    int rank() const { return static_cast<int>(U.cols()); }

    RVector singular_values() const
    {
        if (U.cols() == 0)
            return RVector();
        Eigen::HouseholderQR<CMatrix> qu(U), qv(V);
        const Eigen::Index k = U.cols();
        const CMatrix Ru = qu.matrixQR().topRows(std::min<Eigen::Index>(k, U.rows())).template triangularView<Eigen::Upper>();
        const CMatrix Rv = qv.matrixQR().topRows(std::min<Eigen::Index>(k, V.rows())).template triangularView<Eigen::Upper>();
        return Eigen::JacobiSVD<CMatrix>(Ru * Rv.adjoint()).singularValues();
    }

    // Singular values of U V^H above rel_tol * sigma_1.
    int numerical_rank(double rel_tol = 1e-3) const
    {
        const RVector s = singular_values();
        if (s.size() == 0 || s(0) == 0.0)
            return 0;
        return static_cast<int>((s.array() > rel_tol * s(0)).count());
    }
    CMatrix H() const
    {
        if (U.cols() == 0)
            return CMatrix::Zero(U.rows(), V.rows());
        return U * V.adjoint();
    }
};

inline double noise_floor_threshold(std::size_t N, double sigma)
{
    const double n = static_cast<double>(N);
    return (n + std::sqrt(8.0 * n)) * sigma * sigma;
}

inline FactorEstimate estimate(const ObservationMatrix &obs, const SolverConfig &cfg)
{
    cfg.validate();
    const SampledData data(obs);
    const int N_r = data.N_r();
    const int N_t = data.N_t();
    const int max_rank = cfg.max_rank > 0 ? cfg.max_rank : std::max(1, std::min(N_r, N_t) / 2);
    const double floor = noise_floor_threshold(data.count(), cfg.sigma);
    const double p = data.ratio();

    FactorEstimate est;
    est.U = CMatrix(N_r, 0);
    est.V = CMatrix(N_t, 0);
    double energy_prev = 0.0;

    for (int k = 1;; ++k)
    {
        const auto atom = descent_atom(data, est.U, est.V, cfg.rsvd_power, cfg.rsvd_oversample, derive_seed(cfg.seed, k));
        if (!atom)
        {
            est.stop = StopReason::zero_gradient;
            break;
        }
        const double eta = 2.0 / (k + 1.0);
        const double theta = line_search_theta(data, est.U, est.V, *atom, eta, cfg.mu, cfg.theta_rule);
        if (theta <= 0.0)
        {
            est.stop = StopReason::zero_step;
            break;
        }

        CMatrix U(N_r, k), V(N_t, k);
        const double keep = std::sqrt(std::max(0.0, 1.0 - eta));
        U.leftCols(k - 1) = keep * est.U;
        V.leftCols(k - 1) = keep * est.V;
        U.col(k - 1) = std::sqrt(theta) * atom->u;
        V.col(k - 1) = std::sqrt(theta) * atom->v;

        auto refined = altmin_refine(data, std::move(U), std::move(V), cfg.mu, cfg.eps_a, cfg.max_inner);
        est.U = std::move(refined.U);
        est.V = std::move(refined.V);
        est.flops += gcg_iteration_flops(N_t, N_r, p, cfg.rsvd_power, cfg.rsvd_oversample) +
                     refined.iterations * altmin_iteration_flops(N_t, N_r, p, k);

        IterationRecord rec;
        rec.k = k;
        rec.theta = theta;
        rec.eta = eta;
        rec.objective = refined.objectives.back();
        const double energy = factor_energy(est.U, est.V);
        rec.eps_k = k == 1 ? std::numeric_limits<double>::quiet_NaN() : (energy - energy_prev) / energy_prev;
        rec.delta_sq = data.residual_sq(est.U, est.V);
        rec.inner_iters = refined.iterations;
        rec.flops_cumulative = est.flops;
        rec.altmin_objectives = std::move(refined.objectives);
        est.trace.push_back(std::move(rec));
        energy_prev = energy;

        const auto &last = est.trace.back();
        if (k > 1 && std::abs(last.eps_k) <= cfg.eps)
        {
            est.stop = StopReason::energy;
            break;
        }
        if (last.delta_sq <= floor)
        {
            est.stop = StopReason::noise_floor;
            break;
        }
        if (k >= max_rank)
        {
            est.stop = StopReason::max_rank;
            est.truncated = true;
            break;
        }
    }
    return est;
}

inline void write_trace_csv(std::ostream &os, const FactorEstimate &est)
{
    os << "k,theta_k,eta_k,objective,eps_k,delta_sq,inner_iters,flops_cumulative\n";
    os.precision(17);
    for (const auto &r : est.trace)
        os << r.k << ',' << r.theta << ',' << r.eta << ',' << r.objective << ',' << r.eps_k << ',' << r.delta_sq << ','
           << r.inner_iters << ',' << r.flops_cumulative << '\n';
}

} // namespace mmwave_mc

#endif
