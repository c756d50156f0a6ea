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


#ifndef ISAC_EXPERIMENTS_H
#define ISAC_EXPERIMENTS_H

#include "isac/drop.hpp"
#include "isac/eval.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace isac
{
    class NumericalError : public std::runtime_error
    {
    public:
        explicit NumericalError(const std::string &msg) : std::runtime_error(msg) {}
    };

    // Runs fn(i) for i in [0, n) on 'threads' workers (0: hardware concurrency)
    void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)> &fn);

    struct BerResult
    {
        std::vector<BerPoint> proposed, baseline;
        std::size_t cp_exceeded = 0; // drops whose delay span exceeds the cyclic prefix
        std::size_t drops = 0;
    };

    struct CapacityResult
    {
        double baseline = 0.0;
        std::vector<double> rcs_m2, proposed; // mean bits/s/Hz per RCS
        std::size_t drops = 0;
    };

    struct RangeResult
    {
        std::vector<double> snr_db, mean_error_m, outage_rate;
        std::size_t drops = 0;
    };

    struct RocCurve
    {
        std::string geometry;
        double rcs_m2 = 0.0;
        std::vector<RocPoint> points;
        double auc = 0.0;
        double pfa_at_pd90 = 0.0;
    };

    struct RocResult
    {
        std::vector<RocCurve> curves;
        double noise_per_bin = 0.0;
        std::size_t drops = 0;
    };

    using Progress = std::function<void(const std::string &)>;

    BerResult compute_ber(const SimulationSetup &setup, const Progress &progress = {});
    CapacityResult compute_capacity(const SimulationSetup &setup, const Progress &progress = {});
    RangeResult compute_range(const SimulationSetup &setup, const Progress &progress = {});
    RocResult compute_roc(const RunConfig &config, const Progress &progress = {});

    const std::vector<std::string> &experiment_names();

    // Writes the experiment CSVs and manifest.json into out_dir; returns the written file names
    std::vector<std::string> run_experiment(const RunConfig &config, const std::string &experiment,
                                            const std::string &out_dir, const Progress &progress = {});

    std::string code_version();
}

#endif
