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

#include "isac/random.hpp"
#include "isac/geometry.hpp"

#include <cmath>

namespace isac
{
    std::uint64_t splitmix64(std::uint64_t x)
    {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    Rng make_stream(std::uint64_t seed, std::uint64_t drop, Stream stream, std::uint64_t sub)
    {
        std::uint64_t h = splitmix64(seed);
        h = splitmix64(h ^ drop);
        h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
        h = splitmix64(h ^ sub);
        std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
        return Rng(seq);
    }

    // 53-bit mantissa from one 64-bit draw
    double uniform01(Rng &rng)
    {
        return static_cast<double>(rng() >> 11) * 0x1.0p-53;
    }

    double uniform_open0(Rng &rng)
    {
        return 1.0 - uniform01(rng);
    }

    double standard_normal(Rng &rng)
    {
        // Box-Muller, one output per call keeps the stream position explicit
        const double u1 = uniform_open0(rng);
        const double u2 = uniform01(rng);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * pi * u2);
    }

    double normal(Rng &rng, double mu, double sigma)
    {
        return mu + sigma * standard_normal(rng);
    }

    double uniform_phase(Rng &rng)
    {
        // (-pi, pi]
        return pi - 2.0 * pi * uniform01(rng);
    }
}
