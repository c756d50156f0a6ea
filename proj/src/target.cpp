// SPDX-License-Identifier: Apache-2.0
//
// isac-gbsm: geometry-based stochastic channel simulator for bistatic ISAC
// Copyright (C) 2026 The isac-gbsm authors
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

#include "isac/target.hpp"

#include <cmath>
#include <stdexcept>

namespace isac
{
    void RcsModel::validate() const
    {
        if (kind == constant && !(value_m2 >= 0.0))
            throw std::invalid_argument("RCS must be non-negative");
        if (kind == lognormal && !(b2_db >= 0.0))
            throw std::invalid_argument("RCS spread B2 must be non-negative");
    }

    double draw_rcs(const RcsModel &m, Rng &rng)
    {
        if (m.kind == RcsModel::constant)
            return m.value_m2;
        const double x = normal(rng, m.b1_db, m.b2_db);
        return std::pow(10.0, (m.a_dbsm + x) / 10.0);
    }

    double sp_rcs_share(const TargetConfig &cfg)
    {
        const double k = double(cfg.sp_count);
        return cfg.rcs_split == TargetConfig::power ? 1.0 / k : 1.0 / (k * k);
    }

    Target place_target_deterministic(const Vec3 &coords, const TargetConfig &cfg, const Vec3 &tx, const Vec3 &rx,
                                      double total_rcs, int id)
    {
        if (distance(coords, tx) < 1e-9 || distance(coords, rx) < 1e-9)
            throw GeometryError("target coincides with Tx or Rx");
        if (cfg.sp_count < 1)
            throw std::invalid_argument("target needs at least one scattering point");
        if (!cfg.sp_offsets.empty() && int(cfg.sp_offsets.size()) != cfg.sp_count)
            throw std::invalid_argument("sp_offsets must list one offset per scattering point");
        if (total_rcs < 0.0)
            throw std::invalid_argument("RCS must be non-negative");

        Target t;
        t.id = id;
        t.center = coords;
        t.velocity = cfg.velocity;
        for (int k = 0; k < cfg.sp_count; ++k)
        {
            const Vec3 p = coords + (cfg.sp_offsets.empty() ? Vec3{} : cfg.sp_offsets[k]);
            if (distance(p, tx) < 1e-9 || distance(p, rx) < 1e-9)
                throw GeometryError("scattering point coincides with Tx or Rx");
            t.scattering_points.push_back(p);
            t.rcs_per_sp.push_back(total_rcs * sp_rcs_share(cfg));
        }
        return t;
    }

    Vec3 place_target_stochastic(const SphericalAngles &cluster_angles, double cluster_delay, const Vec3 &tx,
                                 const Vec3 &rx)
    {
        return map_cluster_position(tx, rx, cluster_angles, cluster_delay);
    }

    MappingOutcome assign_deterministic_cluster_geometry(const std::vector<MappingRequest> &requests,
                                                         TargetLink link, const Vec3 &a, const Vec3 &b,
                                                         double rcs_per_sp, const Velocity &velocity, double xpr_db,
                                                         Rng &rng, int max_attempts)
    {
        MappingOutcome out;
        int id = 0;
        for (const auto &req : requests)
        {
            DeterministicCluster dc;
            dc.link = link;
            dc.source_index = req.source_index;
            dc.delay = req.delay;
            dc.power = req.power;
            dc.rcs = rcs_per_sp;
            dc.velocity = velocity;
            dc.xpr_db = xpr_db;

            bool ok = true;
            for (const auto &arr0 : req.arrivals)
            {
                SphericalAngles arr = arr0;
                bool placed = false;
                for (int attempt = 0; attempt < max_attempts && !placed; ++attempt)
                {
                    try
                    {
                        const Vec3 p = map_cluster_position(a, b, arr, req.delay);
                        dc.scattering_points.push_back(p);
                        dc.departure.push_back(angles_between(a, p));
                        placed = true;
                    }
                    catch (const GeometryError &)
                    {
                        // Redraw the arrival direction uniformly on the sphere
                        arr = normalize_angles(std::acos(1.0 - 2.0 * uniform01(rng)), uniform_phase(rng));
                    }
                }
                if (!placed)
                {
                    ok = false;
                    break;
                }
            }
            if (!ok || req.arrivals.empty())
            {
                out.demoted.push_back(req.source_index);
                out.warnings.push_back("deterministic cluster " + std::to_string(req.source_index) +
                                       " could not be mapped, demoted to stochastic");
                continue;
            }
            Vec3 c{};
            for (const auto &p : dc.scattering_points)
                c += p;
            dc.position = c * (1.0 / double(dc.scattering_points.size()));
            dc.sp_power.assign(dc.scattering_points.size(), dc.power / double(dc.scattering_points.size()));
            dc.id = id++;
            out.mapped.push_back(std::move(dc));
        }
        return out;
    }
}
