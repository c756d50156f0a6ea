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

#ifndef ISAC_TARGET_H
#define ISAC_TARGET_H

#include "isac/geometry.hpp"
#include "isac/random.hpp"

#include <string>
#include <vector>

namespace isac
{
    struct RcsModel
    {
        enum Kind
        {
            constant,
            lognormal
        } kind = constant;
        double value_m2 = 0.1;  // constant kind
        double a_dbsm = -13.57; // lognormal kind
        double b1_db = 0.0;
        double b2_db = 3.065;

        void validate() const;
    };

    double draw_rcs(const RcsModel &model, Rng &rng);

    struct TargetConfig
    {
        Vec3 position{3.0, 2.0, 5.0};
        int sp_count = 5;
        std::vector<Vec3> sp_offsets; // empty means co-located
        RcsModel rcs;
        // amplitude: sigma/K^2 per SP, so K co-located SPs echo sigma; power: sigma/K per SP
        enum RcsSplit
        {
            amplitude,
            power
        } rcs_split = amplitude;
        Velocity velocity;
    };

    // Fraction of the total RCS carried by one SP
    double sp_rcs_share(const TargetConfig &config);

    struct Target
    {
        int id = 0;
        Vec3 center;
        std::vector<Vec3> scattering_points;
        std::vector<double> rcs_per_sp; // m^2
        Velocity velocity;              // shared by all SPs
    };

    // Builds the target at 'coords' with the configured SP offsets; each SP carries sp_rcs_share of the RCS
    Target place_target_deterministic(const Vec3 &coords, const TargetConfig &config, const Vec3 &tx, const Vec3 &rx,
                                      double total_rcs, int id = 0);

    // Back-solves a target position from an Rx-side arrival direction and a bistatic delay
    Vec3 place_target_stochastic(const SphericalAngles &cluster_angles, double cluster_delay, const Vec3 &tx,
                                 const Vec3 &rx);

    enum class TargetLink
    {
        tx_target,
        target_rx
    };

    struct DeterministicCluster
    {
        int id = 0;
        TargetLink link = TargetLink::tx_target;
        std::size_t source_index = 0; // index into the link cluster list
        Vec3 position;                // SP centroid
        std::vector<Vec3> scattering_points;
        std::vector<SphericalAngles> departure; // realigned, from anchor_a toward each SP
        double rcs = 0.1;                       // per SP, m^2
        double power = 0.0;                     // cluster power P_p
        std::vector<double> sp_power;           // P_{p,k}
        Velocity velocity;
        double delay = 0.0; // tau_p, seconds
        double xpr_db = 10.0;
    };

    struct MappingRequest
    {
        std::size_t source_index = 0;
        double delay = 0.0;                    // total path delay anchor_a -> cluster -> anchor_b
        std::vector<SphericalAngles> arrivals; // one per SP, seen from anchor_b
        double power = 0.0;
    };

    struct MappingOutcome
    {
        std::vector<DeterministicCluster> mapped;
        std::vector<std::size_t> demoted; // source indices that fall back to stochastic
        std::vector<std::string> warnings;
    };

    // Places every SP on its ellipse and recomputes the departure angles at anchor_a.
    // Infeasible SPs get a redrawn arrival direction up to max_attempts times.
    MappingOutcome assign_deterministic_cluster_geometry(const std::vector<MappingRequest> &requests,
                                                         TargetLink link, const Vec3 &anchor_a, const Vec3 &anchor_b,
                                                         double rcs_per_sp, const Velocity &velocity, double xpr_db,
                                                         Rng &rng, int max_attempts = 8);
}

#endif
