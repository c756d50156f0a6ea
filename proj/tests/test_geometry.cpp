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

#include <catch_amalgamated.hpp>

#include "isac/geometry.hpp"
#include "isac/random.hpp"

using namespace isac;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("Geometry - spherical unit vectors")
{
    Vec3 v = spherical_unit({0.5 * pi, 0.0});
    CHECK_THAT(v.x, WithinAbs(1.0, 1e-15));
    CHECK_THAT(v.y, WithinAbs(0.0, 1e-15));
    CHECK_THAT(v.z, WithinAbs(0.0, 1e-15));

    v = spherical_unit({0.0, 1.234});
    CHECK_THAT(v.z, WithinAbs(1.0, 1e-15));
    CHECK_THAT(std::hypot(v.x, v.y), WithinAbs(0.0, 1e-15));

    v = spherical_unit({0.5 * pi, 0.5 * pi});
    CHECK_THAT(v.x, WithinAbs(0.0, 1e-15));
    CHECK_THAT(v.y, WithinAbs(1.0, 1e-15));
}

TEST_CASE("Geometry - angles between points")
{
    auto a = angles_between({0, 0, 5}, {0, 5, 5});
    CHECK_THAT(a.zenith, WithinAbs(0.5 * pi, 1e-15));
    CHECK_THAT(a.azimuth, WithinAbs(0.5 * pi, 1e-15));

    a = angles_between({0, 0, 0}, {0, 0, 1});
    CHECK_THAT(a.zenith, WithinAbs(0.0, 1e-15));

    a = angles_between({0, 0, 0}, {1, 1, std::sqrt(2.0)});
    CHECK_THAT(a.zenith, WithinAbs(0.25 * pi, 1e-15));
    CHECK_THAT(a.azimuth, WithinAbs(0.25 * pi, 1e-15));

    CHECK_THROWS_AS(angles_between({1, 2, 3}, {1, 2, 3}), GeometryError);

    // Round trip through the unit vector
    Rng rng(7);
    for (int i = 0; i < 1000; ++i)
    {
        const Vec3 d{normal(rng, 0, 1), normal(rng, 0, 1), normal(rng, 0, 1)};
        const Vec3 u = spherical_unit(angles_between({}, d));
        const double n = d.norm();
        CHECK_THAT(u.x, WithinAbs(d.x / n, 1e-12));
        CHECK_THAT(u.y, WithinAbs(d.y / n, 1e-12));
        CHECK_THAT(u.z, WithinAbs(d.z / n, 1e-12));
    }
}

TEST_CASE("Geometry - angle wrapping")
{
    CHECK_THAT(wrap_azimuth(3.0 * pi), WithinAbs(pi, 1e-12));
    CHECK_THAT(wrap_azimuth(-pi), WithinAbs(pi, 1e-12));
    CHECK_THAT(wrap_azimuth(0.25), WithinAbs(0.25, 1e-15));

    auto a = normalize_angles(pi + 0.2, 0.0);
    CHECK_THAT(a.zenith, WithinAbs(pi - 0.2, 1e-12));
    CHECK_THAT(a.azimuth, WithinAbs(pi, 1e-12));

    a = normalize_angles(-0.3, 0.5);
    CHECK_THAT(a.zenith, WithinAbs(0.3, 1e-12));
    CHECK_THAT(a.azimuth, WithinAbs(0.5 - pi, 1e-12));
}

TEST_CASE("Geometry - cluster mapping on the ellipse")
{
    const Vec3 a{0, 0, 0}, b{10, 0, 0};

    // Collinear: leg = (dp - d) / 2 beyond anchor b
    Vec3 p = map_cluster_position(a, b, {0.5 * pi, 0.0}, 20.0 / speed_of_light);
    CHECK_THAT(p.x, WithinAbs(15.0, 1e-9));
    CHECK_THAT(p.y, WithinAbs(0.0, 1e-12));

    // Degenerate ellipse
    CHECK_THROWS_AS(map_cluster_position(a, b, {0.5 * pi, 0.5 * pi}, 10.0 / speed_of_light), GeometryError);

    // Perpendicular arrival, compared with a brute-force 1-D search
    p = map_cluster_position(a, b, {0.5 * pi, 0.5 * pi}, 26.0 / speed_of_light);
    double best_y = 0.0, best_err = 1e300;
    for (int i = 1; i <= 2000000; ++i)
    {
        const double y = i * 1e-5;
        const double err = std::abs(std::hypot(10.0, y) + y - 26.0);
        if (err < best_err)
            best_err = err, best_y = y;
    }
    CHECK_THAT(p.x, WithinAbs(10.0, 1e-12));
    CHECK_THAT(p.y, WithinAbs(best_y, 1e-5));
    CHECK_THAT(distance(a, p) + distance(p, b), WithinRel(26.0, 1e-12));

    // Random mappings
    Rng rng(11);
    int feasible = 0;
    for (int i = 0; i < 1000; ++i)
    {
        const Vec3 ta{normal(rng, 0, 20), normal(rng, 0, 20), normal(rng, 0, 5)};
        const Vec3 tb{normal(rng, 0, 20), normal(rng, 0, 20), normal(rng, 0, 5)};
        const SphericalAngles arr{std::acos(2.0 * uniform01(rng) - 1.0), uniform_phase(rng)};
        const double dp = distance(ta, tb) * (1.0 + 2.0 * uniform01(rng)) + 1e-3;
        try
        {
            const Vec3 q = map_cluster_position(ta, tb, arr, dp / speed_of_light);
            CHECK_THAT(distance(ta, q) + distance(q, tb), WithinRel(dp, 1e-9));
            const auto back = angles_between(tb, q);
            const Vec3 u = spherical_unit(back), w = spherical_unit(arr);
            CHECK((u - w).norm() < 1e-9);
            ++feasible;
        }
        catch (const GeometryError &)
        {
        }
    }
    CHECK(feasible > 900);
}
