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


#ifndef ISAC_DROP_H
#define ISAC_DROP_H

#include "isac/cir.hpp"
#include "isac/config.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace isac
{
    struct SimulationSetup
    {
        RunConfig config;
        ScenarioParameterTable table;
        AntennaArray tx, rx;
        double wavelength = 0.0;
        std::vector<double> times;

        explicit SimulationSetup(const RunConfig &cfg);
    };

    struct DropOptions
    {
        bool background = true;
        bool target = true;
        std::optional<double> k_linear; // replaces the K-factor of every LoS link
        std::optional<double> rcs_m2;   // constant total RCS for every target
    };

    // Large- and small-scale state of one link inside a drop
    struct LinkDraw
    {
        LinkState state;
        LinkClusters clusters;
        double k_linear = 0.0;
    };

    struct TargetDraw
    {
        Target target;
        LinkDraw tx_target, target_rx;
        std::vector<DeterministicCluster> det_tx, det_rx;
        std::vector<StochasticRay> stoch_tx, stoch_rx;
        int target_case = 1;
        double gain = 1.0;
    };

    // Per-link pieces of a drop, kept for inspection and tests
    struct DropDetail
    {
        LinkDraw background;
        std::vector<TargetDraw> targets;
    };

    ChannelRealization generate_drop(const SimulationSetup &setup, std::uint64_t drop, const DropOptions &opt = {},
                                     DropDetail *detail = nullptr);

    // Builds the NLoS ray set and the deterministic clusters of one target link
    void split_target_link(const LinkDraw &link, TargetLink which, const Vec3 &anchor_a, const Vec3 &anchor_b,
                           std::size_t n_deterministic, DeterministicSelection selection,
                           const std::vector<std::size_t> &explicit_indices, const DeterministicClusterConfig &cc,
                           Rng &rng, std::vector<StochasticRay> &stochastic, std::vector<DeterministicCluster> &det,
                           std::vector<std::string> &warnings);

    // Amplitude factor applied to the taps of one target relative to the unit-power background
    double bistatic_target_gain(double pl_tx_target_db, double pl_target_rx_db, double pl_background_db,
                                double wavelength);
}

#endif
