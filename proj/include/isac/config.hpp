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


#ifndef ISAC_CONFIG_H
#define ISAC_CONFIG_H

#include "isac/coefficients.hpp"
#include "isac/scenario.hpp"
#include "isac/smallscale.hpp"
#include "isac/target.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace isac
{
    class ConfigError : public std::runtime_error
    {
    public:
        explicit ConfigError(const std::string &msg) : std::runtime_error(msg) {}
    };

    struct NodeConfig
    {
        Vec3 position;
        Velocity velocity;
        int rows = 2, cols = 2;
        double spacing_wavelengths = 0.5;
        std::optional<double> boresight_azimuth_deg; // default: toward the other node
        FieldPattern::Kind pattern = FieldPattern::isotropic;
    };

    struct DeterministicClusterConfig
    {
        int count_tx_target = 5, count_target_rx = 5;
        int sp_count = 5;
        double rcs_m2 = 0.1;
        Velocity velocity;
        double xpr_db = 10.0;
        DeterministicSelection selection = DeterministicSelection::strongest;
        std::vector<std::size_t> indices_tx_target, indices_target_rx; // explicit selection only
    };

    struct ForcedConditions
    {
        std::optional<Condition> background, tx_target, target_rx;
    };

    struct WaveformConfig
    {
        int n_subcarriers = 256;
        int cp_length = 32;
        std::string modulation = "qpsk";
        double carrier_hz = 7e9;
        double sample_rate_hz = 30.72e6;
        int oversampling = 16; // delay grid refinement for the frequency response
    };

    struct BerExperiment
    {
        std::vector<double> snr_db{20, 25, 30, 35, 40, 45, 50, 55, 60, 65, 70};
        std::uint64_t min_bits = 100000;
        std::uint64_t min_errors = 100;
        bool include_baseline = true;
    };

    struct CapacityExperiment
    {
        std::vector<double> rcs_m2{0.1, 0.5, 1.0};
        double snr_db = 0.0;
        bool include_baseline = true;
    };

    struct RangeExperiment
    {
        std::vector<double> snr_db{-30, -25, -20, -15, -10, -5, 0};
        double rcs_m2 = 0.2;
        int ifft_size = 2048;
    };

    struct RocExperiment
    {
        Vec3 tx{0.0, 0.0, 10.0};
        Vec3 rx{5.0, 15.0, 10.0};
        std::vector<Vec3> target_positions{{0.0, 5.0, 10.0}, {25.0, 15.0, 10.0}};
        std::vector<std::string> labels{"d27", "d56"};
        std::vector<double> rcs_m2{0.1, 0.5, 1.0};
        double sensing_snr_db = 0.0;
        double reference_rcs_m2 = 0.5;
        std::size_t reference_geometry = 1;
        int gate_lead_bins = 1, gate_tail_bins = 3;
        int max_gate_bins = 64;
        int n_thresholds = 401;
        int drops = 2000; // per hypothesis and geometry
    };

    struct RunConfig
    {
        ScenarioKind scenario;
        std::string parameter_dir; // empty: bundled tables
        NodeConfig tx, rx;
        std::vector<TargetConfig> targets;
        DeterministicClusterConfig clusters;
        ForcedConditions forced;
        WaveformConfig waveform;
        int n_snapshots = 1;
        double snapshot_interval_s = 1e-3;
        double cluster_threshold_db = -25.0;
        double path_threshold_db = -40.0;
        std::string target_power = "bistatic_radar"; // or "unit"
        std::string discretization = "sinc_windowed";
        int drops = 500;
        std::uint64_t seed = 1;
        int threads = 0; // 0: hardware concurrency
        BerExperiment ber;
        CapacityExperiment capacity;
        RangeExperiment range;
        RocExperiment roc;
        int export_drops = 3;

        void validate() const;
    };

    // Defaults reproduce the simulation table of the evaluation (UMi, one 5-SP target)
    RunConfig default_config();

    RunConfig config_from_json(const nlohmann::json &j);
    nlohmann::json config_to_json(const RunConfig &c);

    // Sorted keys, two-space indent
    std::string canonical_config(const RunConfig &c);

    // 16 hex digits, FNV-1a over the canonical form
    std::string config_hash(const RunConfig &c);

    RunConfig load_config(const std::string &path, const std::vector<std::string> &overrides = {});

    // Applies "a.b.c=value"; value is parsed as JSON, falling back to a plain string
    void apply_override(nlohmann::json &j, const std::string &assignment);
}

#endif
