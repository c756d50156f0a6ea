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

#ifndef ISAC_RANDOM_H
#define ISAC_RANDOM_H

#include <cstdint>
#include <random>

namespace isac
{
    using Rng = std::mt19937_64;

    // Named substreams so that adding a component never shifts the draws of another
    enum class Stream : std::uint64_t
    {
        background = 1,
        tx_target = 2,
        target_rx = 3,
        target = 4,
        cascade = 5,
        noise = 6,
        symbols = 7,
        noise_h0 = 8,
        clusters = 9,
    };

    std::uint64_t splitmix64(std::uint64_t x);

    // Independent generator for (seed, drop, stream, sub)
    Rng make_stream(std::uint64_t seed, std::uint64_t drop, Stream stream, std::uint64_t sub = 0);

    double standard_normal(Rng &rng);
    double normal(Rng &rng, double mu, double sigma);

    // Uniform in [0, 1)
    double uniform01(Rng &rng);

    // Uniform in (0, 1]
    double uniform_open0(Rng &rng);

    // Uniform in (-pi, pi]
    double uniform_phase(Rng &rng);
}

#endif
