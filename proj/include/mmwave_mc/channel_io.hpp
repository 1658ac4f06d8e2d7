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

#ifndef MMWAVE_MC_CHANNEL_IO_HPP
#define MMWAVE_MC_CHANNEL_IO_HPP

#include "channel.hpp"

#include <json.hpp>

namespace mmwave_mc
{

using json = nlohmann::json;

// Matrices are stored row-major with interleaved real/imaginary parts.
inline json matrix_to_json(const CMatrix &M)
{
    json data = json::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r)
        for (Eigen::Index c = 0; c < M.cols(); ++c)
        {
            data.push_back(M(r, c).real());
            data.push_back(M(r, c).imag());
        }
    return {{"rows", M.rows()}, {"cols", M.cols()}, {"data", std::move(data)}};
}

inline CMatrix matrix_from_json(const json &j)
{
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto &data = j.at("data");
    require(rows >= 0 && cols >= 0 && data.size() == static_cast<std::size_t>(2 * rows * cols), ErrorCode::io,
            "matrix payload size does not match its shape");
    CMatrix M(rows, cols);
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c, k += 2)
            M(r, c) = {data[k].get<double>(), data[k + 1].get<double>()};
    return M;
}

inline json vector_to_json(const CVector &v)
{
    json data = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
    {
        data.push_back(v(i).real());
        data.push_back(v(i).imag());
    }
    return data;
}

inline CVector vector_from_json(const json &j)
{
    require(j.is_array() && j.size() % 2 == 0, ErrorCode::io, "complex vector payload must have even length");
    CVector v(static_cast<Eigen::Index>(j.size() / 2));
    for (Eigen::Index i = 0; i < v.size(); ++i)
        v(i) = {j[2 * i].get<double>(), j[2 * i + 1].get<double>()};
    return v;
}

inline ArrayKind array_kind_from_string(const std::string &s)
{
    if (s == "ULA" || s == "ula")
        return ArrayKind::ula;
    if (s == "USPA" || s == "uspa")
        return ArrayKind::uspa;
    throw Error(ErrorCode::config, "unknown array kind '" + s + "'");
}

inline json to_json(const ArrayGeometry &g)
{
    return {{"kind", to_string(g.kind)}, {"num_antennas", g.num_antennas}, {"element_spacing", g.spacing},
            {"axis", g.axis()}};
}

inline ArrayGeometry geometry_from_json(const json &j)
{
    ArrayGeometry g;
    g.kind = array_kind_from_string(j.at("kind").get<std::string>());
    g.num_antennas = j.at("num_antennas").get<int>();
    g.spacing = j.value("element_spacing", 0.5);
    g.validate();
    return g;
}

inline json to_json(const ChannelRealization &r)
{
    json paths = json::array();
    for (const auto &p : r.paths)
        paths.push_back({{"cluster", p.cluster},
                         {"ray", p.ray},
                         {"gain", {p.gain.real(), p.gain.imag()}},
                         {"aoa_az", p.aoa_az},
                         {"aod_az", p.aod_az},
                         {"aoa_el", p.aoa_el},
                         {"aod_el", p.aod_el}});
    return {{"tx", to_json(r.tx)},
            {"rx", to_json(r.rx)},
            {"seed", r.seed},
            {"scale", r.scale},
            {"num_clusters", r.num_clusters},
            {"rays_per_cluster", r.rays_per_cluster},
            {"cluster_powers", r.cluster_powers},
            {"paths", std::move(paths)},
            {"H", matrix_to_json(r.H)}};
}

// H is rebuilt from the stored paths; the stored matrix is only a
// cross-check payload for other implementations.
inline ChannelRealization channel_from_json(const json &j)
{
    std::vector<Path> paths;
    for (const auto &jp : j.at("paths"))
    {
        Path p;
        p.cluster = jp.at("cluster").get<int>();
        p.ray = jp.at("ray").get<int>();
        p.gain = {jp.at("gain")[0].get<double>(), jp.at("gain")[1].get<double>()};
        p.aoa_az = jp.at("aoa_az").get<double>();
        p.aod_az = jp.at("aod_az").get<double>();
        p.aoa_el = jp.at("aoa_el").get<double>();
        p.aod_el = jp.at("aod_el").get<double>();
        require(p.cluster >= 0, ErrorCode::io, "negative cluster index");
        paths.push_back(p);
    }
    auto r = ChannelRealization::from_paths(geometry_from_json(j.at("tx")), geometry_from_json(j.at("rx")),
                                            std::move(paths), j.value("scale", 1.0));
    r.seed = j.value<std::uint64_t>("seed", 0);
    if (j.contains("cluster_powers"))
        r.cluster_powers = j.at("cluster_powers").get<std::vector<double>>();
    return r;
}

inline json to_json(const ImpairmentProfile &p)
{
    json kappa = json::array(), rho = json::array();
    for (Eigen::Index i = 0; i < p.size(); ++i)
    {
        kappa.push_back(p.phase_errors(i));
        rho.push_back(p.gain_errors(i));
    }
    return {{"phase_level", p.phase_level},
            {"gain_level", p.gain_level},
            {"phase_errors", std::move(kappa)},
            {"gain_errors", std::move(rho)},
            {"e", vector_to_json(p.e)}};
}

} // namespace mmwave_mc

#endif
