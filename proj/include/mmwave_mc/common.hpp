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

#ifndef MMWAVE_MC_COMMON_HPP
#define MMWAVE_MC_COMMON_HPP

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace mmwave_mc
{

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx j_unit{0.0, 1.0};

enum class ErrorCode
{
    geometry_mismatch,
    dimension_mismatch,
    config,
    generation,
    infeasible_design,
    singular_design,
    plan,
    degenerate_input,
    undefined_rank,
    estimator_failure,
    io,
};

inline const char *to_string(ErrorCode c)
{
    switch (c)
    {
    case ErrorCode::geometry_mismatch: return "geometry mismatch";
    case ErrorCode::dimension_mismatch: return "dimension mismatch";
    case ErrorCode::config: return "config error";
    case ErrorCode::generation: return "generation error";
    case ErrorCode::infeasible_design: return "infeasible design";
    case ErrorCode::singular_design: return "singular design";
    case ErrorCode::plan: return "plan error";
    case ErrorCode::degenerate_input: return "degenerate input";
    case ErrorCode::undefined_rank: return "undefined rank";
    case ErrorCode::estimator_failure: return "estimator failure";
    case ErrorCode::io: return "io error";
    }
    return "error";
}

// Every failure raised by the library carries a code so callers (and the CLI
// exit-code mapping) can branch without parsing messages.
class Error : public std::runtime_error
{
  public:
    Error(ErrorCode code, const std::string &what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

inline void require(bool cond, ErrorCode code, const std::string &what)
{
    if (!cond)
        throw Error(code, what);
}

inline double deg2rad(double deg) { return deg * pi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / pi; }

inline double db2lin(double db) { return std::pow(10.0, db / 10.0); }
inline double lin2db(double lin) { return 10.0 * std::log10(lin); }

using Rng = std::mt19937_64;

// splitmix64 finaliser; used to derive independent stream seeds from a
// master seed and a tuple of indices.
inline std::uint64_t mix_seed(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

template <typename... Ts>
std::uint64_t derive_seed(std::uint64_t master, Ts... parts)
{
    std::uint64_t s = mix_seed(master);
    ((s = mix_seed(s ^ static_cast<std::uint64_t>(parts))), ...);
    return s;
}

// CN(0, variance): real and imaginary parts each N(0, variance/2).
inline cplx complex_gaussian(Rng &rng, double variance = 1.0)
{
    std::normal_distribution<double> n(0.0, 1.0);
    const double s = std::sqrt(variance / 2.0);
    const double re = n(rng);
    const double im = n(rng);
    return {s * re, s * im};
}

inline CVector complex_gaussian_vector(Rng &rng, Eigen::Index n, double variance = 1.0)
{
    CVector v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v(i) = complex_gaussian(rng, variance);
    return v;
}

inline CMatrix complex_gaussian_matrix(Rng &rng, Eigen::Index rows, Eigen::Index cols, double variance = 1.0)
{
    CMatrix m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r)
            m(r, c) = complex_gaussian(rng, variance);
    return m;
}

inline double uniform01(Rng &rng)
{
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

} // namespace mmwave_mc

#endif
