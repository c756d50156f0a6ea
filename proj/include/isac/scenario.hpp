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

#ifndef ISAC_SCENARIO_H
#define ISAC_SCENARIO_H

#include "isac/geometry.hpp"
#include "isac/random.hpp"

#include <Eigen/Dense>
#include <optional>
#include <string>

namespace isac
{
    enum class Condition
    {
        LoS,
        NLoS
    };

    std::string to_string(Condition c);

    struct ScenarioKind
    {
        enum Kind
        {
            UMa,
            UMi,
            InF
        } kind = UMi;
        double clutter_density = 0.1; // InF only, fraction in [0, 1]
        double clutter_height = 2.0;  // InF only, meters
        double clutter_size = 10.0;   // InF only, meters

        void validate() const;
    };

    std::string to_string(ScenarioKind::Kind k);
    ScenarioKind::Kind parse_scenario_kind(const std::string &name);

    // Endpoints of one propagation link, 'a' is the transmitting side
    struct LinkGeometry
    {
        Vec3 a, b;
        double distance_2d() const;
        double distance_3d() const { return distance(a, b); }
    };

    struct LspSet
    {
        double delay_spread = 0.0; // seconds
        double asd = 0.0, asa = 0.0, zsd = 0.0, zsa = 0.0; // degrees
        double shadow_fading_db = 0.0;
        std::optional<double> k_db; // present for LoS links only
    };

    struct LinkState
    {
        Condition condition = Condition::LoS;
        double path_loss_db = 0.0;
        LspSet lsp;
        double distance_3d = 0.0;
        LinkGeometry geometry;
    };

    struct LogNormalParam
    {
        double mu = 0.0, sigma = 0.0;
    };

    // Statistics of one scenario/condition, see docs/formats.md for the file schema
    struct ConditionParameters
    {
        std::string scenario, condition;
        double carrier_hz = 0.0;
        int n_clusters = 1, rays_per_cluster = 1;
        LogNormalParam lg_ds, lg_asd, lg_asa, lg_zsa, lg_zsd;
        double zod_offset_deg = 0.0;
        double shadow_fading_sigma_db = 0.0;
        LogNormalParam k_factor_db; // LoS only
        double delay_scaling = 1.0; // r_tau
        LogNormalParam xpr_db;
        double cluster_shadowing_db = 0.0; // zeta
        double cluster_ds_ns = 0.0;
        double cluster_asd_deg = 0.0, cluster_asa_deg = 0.0, cluster_zsa_deg = 0.0;
        LogNormalParam excess_delay_lg; // log10 of seconds
        double excess_delay_max_s = 0.0;
        Eigen::MatrixXd correlation;      // [SF, K, DS, ASD, ASA, ZSD, ZSA], K absent for NLoS
        Eigen::MatrixXd sqrt_correlation; // lower Cholesky factor

        bool has_k() const { return correlation.rows() == 7; }
    };

    struct ScenarioParameterTable
    {
        ConditionParameters los, nlos;
        const ConditionParameters &at(Condition c) const { return c == Condition::LoS ? los : nlos; }
    };

    class ParameterError : public std::runtime_error
    {
    public:
        explicit ParameterError(const std::string &msg) : std::runtime_error(msg) {}
    };

    ConditionParameters load_condition_parameters(const std::string &path);
    ScenarioParameterTable load_parameter_table(const std::string &los_path, const std::string &nlos_path);

    // Loads <data_dir>/scenarios/<name>_{los,nlos}.json
    ScenarioParameterTable load_default_table(ScenarioKind::Kind kind, const std::string &data_dir = "");

    std::string default_data_dir();

    double los_probability(const LinkGeometry &link, const ScenarioKind &scenario);

    Condition assign_condition(const LinkGeometry &link, const ScenarioKind &scenario, Rng &rng,
                               std::optional<Condition> forced = std::nullopt);

    double free_space_path_loss(double distance_m, double carrier_hz);

    double path_loss(const LinkGeometry &link, Condition condition, const ScenarioKind &scenario, double carrier_hz);

    LspSet draw_lsps(Condition condition, const ScenarioParameterTable &table, Rng &rng);

    // Maps (Tx-target, target-Rx) conditions to case 1..4
    int target_channel_condition(Condition tx_target, Condition target_rx);
}

#endif
