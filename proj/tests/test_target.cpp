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

#include "isac/target.hpp"

#include <algorithm>

using namespace isac;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("Target - placement")
{
    const Vec3 tx{0, 0, 5}, rx{0, 5, 5};
    TargetConfig cfg;
    cfg.position = {3, 2, 5};
    cfg.sp_count = 5;

    auto t = place_target_deterministic(cfg.position, cfg, tx, rx, 0.1);
    REQUIRE(t.scattering_points.size() == 5);
    for (const auto &p : t.scattering_points)
        CHECK(p == Vec3{3, 2, 5});
    // Amplitude split: 5 coherent SPs echo the total RCS
    double amp = 0.0;
    for (double s : t.rcs_per_sp)
        amp += std::sqrt(s);
    CHECK_THAT(amp * amp, WithinRel(0.1, 1e-14));

    cfg.rcs_split = TargetConfig::power;
    t = place_target_deterministic(cfg.position, cfg, tx, rx, 0.1);
    for (double s : t.rcs_per_sp)
        CHECK_THAT(s, WithinRel(0.02, 1e-14));

    cfg.sp_count = 1;
    t = place_target_deterministic(cfg.position, cfg, tx, rx, 0.3);
    CHECK(t.rcs_per_sp == std::vector<double>{0.3});

    // Offsets shift the bistatic path by the exact geometric amount
    cfg.sp_count = 3;
    cfg.sp_offsets = {{0.1, 0, 0}, {0, -0.1, 0}, {0, 0, 0.1}};
    t = place_target_deterministic(cfg.position, cfg, tx, rx, 0.3);
    for (int k = 0; k < 3; ++k)
    {
        const Vec3 p = cfg.position + cfg.sp_offsets[k];
        const double expect = (std::hypot(p.x, p.y, p.z - 5.0) + std::hypot(p.x, p.y - 5.0, p.z - 5.0)) / speed_of_light;
        const double got = (distance(tx, t.scattering_points[k]) + distance(t.scattering_points[k], rx)) / speed_of_light;
        CHECK_THAT(got, WithinRel(expect, 1e-15));
    }

    cfg.sp_offsets.pop_back();
    CHECK_THROWS(place_target_deterministic(cfg.position, cfg, tx, rx, 0.3));
    cfg.sp_offsets.clear();
    CHECK_THROWS_AS(place_target_deterministic(tx, cfg, tx, rx, 0.3), GeometryError);
}

TEST_CASE("Target - RCS draws")
{
    Rng rng(6);
    RcsModel m;
    m.kind = RcsModel::constant;
    m.value_m2 = 0.1;
    CHECK(draw_rcs(m, rng) == 0.1);

    m.kind = RcsModel::lognormal;
    m.b2_db = 0.0;
    CHECK_THAT(draw_rcs(m, rng), WithinRel(std::pow(10.0, -1.357), 1e-12));
    CHECK_THAT(draw_rcs(m, rng), WithinAbs(0.0440, 1e-4));

    m.b2_db = 3.065;
    std::vector<double> v(100000);
    for (auto &x : v)
        x = draw_rcs(m, rng);
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    CHECK_THAT(v[v.size() / 2], WithinRel(std::pow(10.0, -1.357), 0.05));

    m.b2_db = -1.0;
    CHECK_THROWS(m.validate());
}

TEST_CASE("Target - deterministic cluster mapping")
{
    Rng rng(10);
    const Vec3 a{0, 0, 0}, b{10, 0, 0};

    MappingRequest collinear;
    collinear.source_index = 4;
    collinear.delay = 20.0 / speed_of_light;
    collinear.arrivals = {SphericalAngles{0.5 * pi, 0.0}};
    collinear.power = 0.2;

    MappingRequest spread;
    spread.source_index = 6;
    spread.delay = 31.0 / speed_of_light;
    spread.power = 0.1;
    for (int k = 0; k < 5; ++k)
        spread.arrivals.push_back({0.5 * pi + 0.1 * k, 0.4 * k});

    const auto out = assign_deterministic_cluster_geometry({collinear, spread}, TargetLink::target_rx, a, b, 0.1, {},
                                                           10.0, rng);
    REQUIRE(out.mapped.size() == 2);
    CHECK(out.demoted.empty());
    CHECK_THAT(out.mapped[0].scattering_points[0].x, WithinAbs(15.0, 1e-9));
    const auto &dc = out.mapped[1];
    REQUIRE(dc.scattering_points.size() == 5);
    for (std::size_t k = 0; k < 5; ++k)
    {
        const Vec3 &p = dc.scattering_points[k];
        CHECK_THAT(distance(a, p) + distance(p, b), WithinRel(31.0, 1e-12));
        const auto dep = angles_between(a, p);
        CHECK(dc.departure[k].zenith == dep.zenith);
        CHECK(dc.departure[k].azimuth == dep.azimuth);
        CHECK_THAT(dc.sp_power[k], WithinRel(0.02, 1e-14));
    }
    CHECK(dc.rcs == 0.1);

    // Shorter than the baseline: no direction can work, the cluster is demoted
    MappingRequest bad;
    bad.source_index = 2;
    bad.delay = 5.0 / speed_of_light;
    bad.arrivals = {SphericalAngles{}};
    const auto out2 = assign_deterministic_cluster_geometry({bad}, TargetLink::tx_target, a, b, 0.1, {}, 10.0, rng);
    CHECK(out2.mapped.empty());
    CHECK(out2.demoted == std::vector<std::size_t>{2});
    CHECK(out2.warnings.size() == 1);
}

TEST_CASE("Target - stochastic placement")
{
    const Vec3 p = place_target_stochastic({0.5 * pi, 0.0}, 20.0 / speed_of_light, {0, 0, 0}, {10, 0, 0});
    CHECK_THAT(p.x, WithinAbs(15.0, 1e-9));
}
