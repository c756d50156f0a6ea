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

#include "isac/smallscale.hpp"

#include <algorithm>
#include <numeric>

using namespace isac;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("Smallscale - cluster delays")
{
    Rng rng(1);
    CHECK(draw_relative_delays(1, 50e-9, 3.0, rng) == std::vector<double>{0.0});

    // Linear in DS for a fixed stream
    Rng r1(9), r2(9);
    const auto a = draw_relative_delays(12, 40e-9, 3.0, r1);
    const auto b = draw_relative_delays(12, 80e-9, 3.0, r2);
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK_THAT(b[i], WithinAbs(2.0 * a[i], 1e-20));

    // Mean of the non-minimum delays against exponential order statistics
    const int n = 12, trials = 100000;
    const double mu = 3.0 * 40e-9;
    double acc = 0.0;
    for (int t = 0; t < trials; ++t)
    {
        const auto d = draw_relative_delays(n, 40e-9, 3.0, rng);
        acc += std::accumulate(d.begin() + 1, d.end(), 0.0) / (n - 1);
    }
    double expect = 0.0;
    for (int k = 2; k <= n; ++k)
        for (int i = n - k + 1; i <= n - 1; ++i)
            expect += mu / i;
    expect /= (n - 1);
    CHECK_THAT(acc / trials, WithinRel(expect, 0.02));
}

TEST_CASE("Smallscale - absolute delays")
{
    const double base = 10.0 / speed_of_light;
    CHECK_THAT(absolutize_delays({0.0}, base, 5e-9, true)[0], WithinAbs(33.356e-9, 1e-12));
    CHECK(absolutize_delays({0.0, 1e-9}, base, 0.0, false) == absolutize_delays({0.0, 1e-9}, base, 0.0, true));
    CHECK_THAT(absolutize_delays({2e-9}, base, 5e-9, false)[0], WithinAbs(base + 7e-9, 1e-20));
    CHECK_THAT(5.0 / speed_of_light, WithinAbs(16.678e-9, 1e-12));
    CHECK_THROWS(absolutize_delays({0.0}, 0.0, 0.0, true));
}

TEST_CASE("Smallscale - cluster powers")
{
    Rng rng(4);
    CHECK(draw_cluster_powers({0.0}, 50e-9, 3.0, 3.0, std::nullopt, 20, rng).per_cluster == std::vector<double>{1.0});

    const auto p = draw_cluster_powers({0.0, 10e-9, 30e-9, 90e-9}, 50e-9, 3.0, 0.0, std::nullopt, 20, rng);
    CHECK(std::is_sorted(p.per_cluster.rbegin(), p.per_cluster.rend()));
    CHECK_THAT(p.per_ray[1][0] * 20.0, WithinRel(p.per_cluster[1], 1e-14));

    for (int t = 0; t < 10000; ++t)
    {
        const int n = 1 + int(uniform01(rng) * 20);
        const auto tau = draw_relative_delays(n, 1e-9 + 1e-7 * uniform01(rng), 1.5 + 2.0 * uniform01(rng), rng);
        std::optional<double> k;
        if (uniform01(rng) < 0.5)
            k = normal(rng, 9.0, 5.0);
        const auto cp = draw_cluster_powers(tau, 50e-9, 3.0, 3.0, k, 20, rng);
        CHECK_THAT(std::accumulate(cp.per_cluster.begin(), cp.per_cluster.end(), 0.0), WithinAbs(1.0, 1e-12));
        CHECK_THAT(std::accumulate(cp.for_angles.begin(), cp.for_angles.end(), 0.0), WithinAbs(1.0, 1e-12));
    }
}

TEST_CASE("Smallscale - cluster threshold")
{
    auto r = threshold_clusters({1.0, 1e-3}, -25.0);
    CHECK(r.kept == std::vector<std::size_t>{0});
    r = threshold_clusters({1.0, std::pow(10.0, -2.4)}, -25.0);
    CHECK(r.kept.size() == 2);
    r = threshold_clusters({1.0, std::pow(10.0, -3.9)}, -40.0);
    CHECK(r.kept.size() == 2);
    CHECK_THAT(r.powers[0] + r.powers[1], WithinAbs(1.0, 1e-15));

    Rng rng(8);
    for (int t = 0; t < 1000; ++t)
    {
        std::vector<double> p(12);
        for (auto &v : p)
            v = std::pow(10.0, -4.0 * uniform01(rng));
        const auto once = threshold_clusters(p, -25.0);
        const auto twice = threshold_clusters(once.powers, -25.0);
        REQUIRE(twice.kept.size() == once.kept.size());
        for (std::size_t i = 0; i < once.powers.size(); ++i)
            CHECK_THAT(twice.powers[i], WithinAbs(once.powers[i], 1e-15));
    }
}

TEST_CASE("Smallscale - ray angles")
{
    Rng rng(12);
    AngleInputs in;
    in.powers = {0.5, 0.3, 0.2};
    in.n_clusters_total = 12;
    in.rays_per_cluster = 20;
    in.lsp.asa = in.lsp.asd = 30.0;
    in.lsp.zsa = in.lsp.zsd = 10.0;
    in.los_departure = {0.5 * pi, 0.5 * pi};
    in.los_arrival = {0.5 * pi, -0.5 * pi};

    SECTION("Zero intra-cluster spread")
    {
        in.cluster_asa_deg = in.cluster_asd_deg = in.cluster_zsa_deg = 0.0;
        in.lg_zsd_mu = -1e9;
        const auto a = draw_ray_angles(in, rng);
        for (std::size_t c = 0; c < a.arrival.size(); ++c)
            for (const auto &r : a.arrival[c])
            {
                CHECK(r.azimuth == a.arrival[c][0].azimuth);
                CHECK(r.zenith == a.arrival[c][0].zenith);
            }
    }

    SECTION("Zenith angles stay in range")
    {
        in.lsp.zsa = in.lsp.zsd = 52.0;
        in.cluster_zsa_deg = 40.0;
        in.lg_zsd_mu = 1.7;
        for (int t = 0; t < 1000; ++t)
        {
            const auto a = draw_ray_angles(in, rng);
            for (const auto *side : {&a.arrival, &a.departure})
                for (const auto &cl : *side)
                    for (const auto &r : cl)
                    {
                        CHECK(r.zenith >= 0.0);
                        CHECK(r.zenith <= pi);
                        CHECK(r.azimuth > -pi - 1e-15);
                        CHECK(r.azimuth <= pi + 1e-15);
                    }
        }
    }

    SECTION("LoS cluster points along the LoS direction")
    {
        in.condition = Condition::LoS;
        in.lsp.k_db = 9.0;
        in.cluster_asa_deg = in.cluster_asd_deg = in.cluster_zsa_deg = 0.0;
        in.lg_zsd_mu = -1e9;
        const auto a = draw_ray_angles(in, rng);
        CHECK_THAT(a.arrival[0][0].azimuth, WithinAbs(in.los_arrival.azimuth, 1e-12));
        CHECK_THAT(a.departure[0][0].azimuth, WithinAbs(in.los_departure.azimuth, 1e-12));
    }

    SECTION("Coupling only permutes")
    {
        in.cluster_asa_deg = 11.0;
        in.cluster_asd_deg = 5.0;
        in.cluster_zsa_deg = 7.0;
        in.lg_zsd_mu = 1.0;
        auto a = draw_ray_angles(in, rng);
        const auto before = a;
        Rng r1(5), r2(5);
        couple_rays(a, r1);
        auto again = before;
        couple_rays(again, r2);
        for (std::size_t c = 0; c < a.arrival.size(); ++c)
        {
            auto sorted_az = [](const std::vector<SphericalAngles> &v)
            {
                std::vector<double> x;
                for (const auto &s : v)
                    x.push_back(s.azimuth);
                std::sort(x.begin(), x.end());
                return x;
            };
            CHECK(sorted_az(a.arrival[c]) == sorted_az(before.arrival[c]));
            CHECK(sorted_az(a.departure[c]) == sorted_az(before.departure[c]));
            for (std::size_t j = 0; j < a.arrival[c].size(); ++j)
                CHECK(a.arrival[c][j].azimuth == again.arrival[c][j].azimuth);
        }
    }
}

TEST_CASE("Smallscale - XPR and phases")
{
    Rng rng(2);
    for (double k : draw_xpr(8.0, 0.0, 50, rng))
        CHECK_THAT(k, WithinRel(std::pow(10.0, 0.8), 1e-14));

    const std::size_t n = 100000;
    double s = 0.0;
    for (double k : draw_xpr(8.0, 3.0, n, rng))
        s += 10.0 * std::log10(k);
    CHECK_THAT(s / n, WithinAbs(8.0, 3.0 * 3.0 / std::sqrt(double(n))));

    // Chi-square uniformity, 20 bins, 19 dof, 1% critical value 36.19
    const auto ph = draw_phases(n / 4, rng);
    std::vector<double> hist(20, 0.0);
    for (const auto &q : ph)
        for (double v : q)
            hist[std::min<std::size_t>(19, std::size_t((v + pi) / (2.0 * pi) * 20.0))] += 1.0;
    const double e = double(n) / 20.0;
    double chi2 = 0.0;
    for (double h : hist)
        chi2 += (h - e) * (h - e) / e;
    CHECK(chi2 < 36.19);
}

TEST_CASE("Smallscale - ray delays and partition")
{
    const auto rd = ray_delays({0.0, 10e-9, 20e-9}, {0.2, 0.5, 0.3}, 5e-9, 20);
    // Clusters 1 and 2 are the two strongest
    CHECK(rd[0][8] == 0.0);
    CHECK_THAT(rd[1][8], WithinAbs(10e-9 + 1.28 * 5e-9, 1e-20));
    CHECK_THAT(rd[2][12], WithinAbs(20e-9 + 2.56 * 5e-9, 1e-20));
    CHECK(rd[1][0] == 10e-9);

    const std::vector<double> d{0.0, 5e-9, 9e-9, 20e-9}, p{0.4, 0.1, 0.3, 0.2};
    auto part = partition_clusters(d, p, 2, DeterministicSelection::strongest);
    CHECK(part.deterministic == std::vector<std::size_t>{0, 2});
    CHECK(part.stochastic == std::vector<std::size_t>{1, 3});
    part = partition_clusters(d, p, 2, DeterministicSelection::first);
    CHECK(part.deterministic == std::vector<std::size_t>{0, 1});
    part = partition_clusters(d, p, 0, DeterministicSelection::explicit_indices, {3});
    CHECK(part.deterministic == std::vector<std::size_t>{3});
    part = partition_clusters(d, p, 10, DeterministicSelection::strongest);
    CHECK(part.stochastic.empty());
}
