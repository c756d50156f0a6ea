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

#ifndef ISAC_SMALLSCALE_H
#define ISAC_SMALLSCALE_H

#include "isac/geometry.hpp"
#include "isac/random.hpp"
#include "isac/scenario.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace isac
{
    struct ClusterDelays
    {
        std::vector<double> relative;             // tau'_n, seconds
        std::vector<double> absolute;             // tau_n, seconds
        std::vector<std::vector<double>> per_ray; // tau_{n,m}, seconds
        double excess_offset = 0.0;               // seconds
    };

    struct ClusterPowers
    {
        std::vector<double> per_cluster;          // normalized, sum 1
        std::vector<double> for_angles;           // specular-adjusted when a K-factor is given
        std::vector<std::vector<double>> per_ray; // P_n / M
    };

    struct RayAngles
    {
        std::vector<std::vector<SphericalAngles>> departure; // [cluster][ray], (ZoD, AoD)
        std::vector<std::vector<SphericalAngles>> arrival;   // [cluster][ray], (ZoA, AoA)
    };

    using PhaseQuad = std::array<double, 4>; // theta-theta, theta-phi, phi-theta, phi-phi

    struct ClusterPartition
    {
        std::vector<std::size_t> deterministic; // p-indices into the link cluster list
        std::vector<std::size_t> stochastic;    // n-indices into the link cluster list
    };

    enum class DeterministicSelection
    {
        strongest,
        first,
        explicit_indices
    };

    struct ThresholdResult
    {
        std::vector<std::size_t> kept; // indices into the input, ascending
        std::vector<double> powers;    // renormalized powers of the kept entries
    };

    // 20-ray intra-cluster offsets of TR38.901 Table 7.5-3 (unit spread)
    const std::array<double, 20> &ray_offsets();

    // Scaling constants of TR38.901 Tables 7.5-2 / 7.5-4, interpolated for unlisted N
    double azimuth_scaling(int n_clusters);
    double zenith_scaling(int n_clusters);

    std::vector<double> draw_relative_delays(int n_clusters, double ds, double r_tau, Rng &rng);

    // Specular delay scaling for LoS links (delays divided by C_tau)
    std::vector<double> scale_los_delays(const std::vector<double> &relative, double k_db);

    double draw_excess_delay(const ConditionParameters &params, Rng &rng);

    std::vector<double> absolutize_delays(const std::vector<double> &relative, double baseline, double excess,
                                          bool is_deterministic);

    ClusterPowers draw_cluster_powers(const std::vector<double> &relative_delays, double ds, double r_tau,
                                      double per_cluster_shadow_sigma_db, std::optional<double> k_db,
                                      int rays_per_cluster, Rng &rng);

    ThresholdResult threshold_clusters(const std::vector<double> &powers, double threshold_db);

    struct AngleInputs
    {
        std::vector<double> powers;   // per-cluster powers used for angle generation
        int n_clusters_total = 1;     // N used for the scaling constants
        int rays_per_cluster = 20;
        LspSet lsp;
        SphericalAngles los_departure; // LoS direction at the transmitting end
        SphericalAngles los_arrival;   // LoS direction at the receiving end
        Condition condition = Condition::NLoS;
        double cluster_asd_deg = 0.0, cluster_asa_deg = 0.0, cluster_zsa_deg = 0.0;
        double lg_zsd_mu = 0.0;        // scales the ZoD intra-cluster spread
        double zod_offset_deg = 0.0;
    };

    RayAngles draw_ray_angles(const AngleInputs &in, Rng &rng);

    // Independent per-cluster permutations of AoD, ZoD, AoA and ZoA
    void couple_rays(RayAngles &angles, Rng &rng);

    std::vector<double> draw_xpr(double mu_db, double sigma_db, std::size_t count, Rng &rng);
    std::vector<PhaseQuad> draw_phases(std::size_t count, Rng &rng);

    // Per-ray absolute delays; the two strongest clusters are split into three sub-clusters
    std::vector<std::vector<double>> ray_delays(const std::vector<double> &cluster_delays,
                                                const std::vector<double> &cluster_powers,
                                                double cluster_ds_s, int rays_per_cluster);

    ClusterPartition partition_clusters(const std::vector<double> &delays, const std::vector<double> &powers,
                                        std::size_t n_deterministic, DeterministicSelection selection,
                                        const std::vector<std::size_t> &explicit_indices = {});

    // Complete small-scale realization of one link, rays are already coupled
    struct LinkClusters
    {
        Condition condition = Condition::NLoS;
        double baseline = 0.0;              // LoS delay of the link, seconds
        double excess = 0.0;                // delta-tau, seconds
        std::vector<double> relative_delay; // per kept cluster, seconds, first is 0 if the LoS cluster survived
        std::vector<double> power;          // per kept cluster, sum 1
        std::vector<bool> is_los_cluster;   // true for the zero-delay cluster
        RayAngles angles;
        std::vector<std::vector<double>> xpr;
        std::vector<std::vector<PhaseQuad>> phases;
        int rays_per_cluster = 20;
        double cluster_ds_s = 0.0;
        double xpr_mu_db = 0.0, xpr_sigma_db = 0.0;
    };

    LinkClusters generate_link_clusters(const LinkState &link, const ConditionParameters &params,
                                        const SphericalAngles &los_departure, const SphericalAngles &los_arrival,
                                        double cluster_threshold_db, Rng &rng);
}

#endif
