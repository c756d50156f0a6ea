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

#include "isac/cir.hpp"
#include "test_support.hpp"

#include <limits>
#include <sstream>

using namespace isac;
using namespace isac_test;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace
{
    const double lambda0 = speed_of_light / 7e9;
    const double inf = std::numeric_limits<double>::infinity();

    LinkClusters draw_clusters(const Vec3 &a, const Vec3 &b, Condition cond, Rng &rng)
    {
        const auto table = load_default_table(ScenarioKind::UMi);
        LinkState st;
        st.condition = cond;
        st.geometry = {a, b};
        st.distance_3d = distance(a, b);
        st.lsp = draw_lsps(cond, table, rng);
        return generate_link_clusters(st, table.at(cond), angles_between(a, b), angles_between(b, a), -25.0, rng);
    }

    std::vector<StochasticRay> rays_of(const LinkClusters &lc)
    {
        std::vector<StochasticRay> out;
        for (std::size_t c = 0; c < lc.power.size(); ++c)
            for (std::size_t r = 0; r < std::size_t(lc.rays_per_cluster); ++r)
            {
                StochasticRay s;
                s.delay = lc.baseline + lc.relative_delay[c] + lc.excess;
                s.power = lc.power[c] / lc.rays_per_cluster;
                s.departure = lc.angles.departure[c][r];
                s.arrival = lc.angles.arrival[c][r];
                s.xpr = lc.xpr[c][r];
                s.phases = lc.phases[c][r];
                out.push_back(s);
            }
        return out;
    }

    struct Scene
    {
        Vec3 tx_pos{0, 0, 5}, rx_pos{0, 5, 5}, tgt{3, 2, 5};
        AntennaArray tx, rx;
        Target target;
        TargetContext ctx;

        Scene(int rows, int sp_count, double rcs, Rng &rng, TargetConfig::RcsSplit split = TargetConfig::amplitude)
        {
            tx = make_ura(tx_pos, rows, rows, 0.5 * lambda0, 0.5 * pi);
            rx = make_ura(rx_pos, rows, rows, 0.5 * lambda0, -0.5 * pi);
            TargetConfig tc;
            tc.position = tgt;
            tc.sp_count = sp_count;
            tc.rcs_split = split;
            target = place_target_deterministic(tgt, tc, tx_pos, rx_pos, rcs);
            ctx.target = &target;
            ctx.tx = &tx;
            ctx.rx = &rx;
            ctx.wavelength = lambda0;
            ctx.phase_seed = 99;

            const auto l1 = draw_clusters(tx_pos, tgt, Condition::NLoS, rng);
            const auto l2 = draw_clusters(tgt, rx_pos, Condition::NLoS, rng);
            ctx.stochastic_tx = rays_of(l1);
            ctx.stochastic_rx = rays_of(l2);
            // Two deterministic clusters per link from the longest-delay rays
            for (int link = 0; link < 2; ++link)
            {
                const Vec3 a = link == 0 ? tx_pos : tgt, b = link == 0 ? tgt : rx_pos;
                std::vector<MappingRequest> req(2);
                for (int i = 0; i < 2; ++i)
                {
                    req[i].source_index = std::size_t(i);
                    req[i].delay = distance(a, b) / speed_of_light + (20.0 + 15.0 * i) * 1e-9;
                    req[i].power = 0.1;
                    for (int k = 0; k < 3; ++k)
                        req[i].arrivals.push_back(random_direction(rng));
                }
                auto out = assign_deterministic_cluster_geometry(req, link == 0 ? TargetLink::tx_target : TargetLink::target_rx,
                                                                 a, b, 0.1, {}, 10.0, rng);
                (link == 0 ? ctx.deterministic_tx : ctx.deterministic_rx) = out.mapped;
            }
        }
    };
}

TEST_CASE("CIR - Rician weights")
{
    auto w = rician_weights(0.0);
    CHECK(w.gamma == 0.0);
    CHECK(w.gamma_tilde == 1.0);
    w = rician_weights(inf);
    CHECK(w.gamma == 1.0);
    CHECK(w.gamma_tilde == 0.0);
    w = rician_weights(1.0);
    CHECK_THAT(w.gamma, WithinAbs(std::sqrt(0.5), 1e-15));
    CHECK_THAT(w.gamma_tilde, WithinAbs(std::sqrt(0.5), 1e-15));
    CHECK_THROWS(rician_weights(-1.0));

    CHECK(target_gamma_weights(4, 3.0, 7.0) == std::array<double, 4>{0, 0, 0, 1});
    CHECK(target_gamma_weights(1, 0.0, 0.0) == std::array<double, 4>{0, 0, 0, 1});
    CHECK(target_gamma_weights(1, inf, inf) == std::array<double, 4>{1, 0, 0, 0});
    CHECK_THROWS(target_gamma_weights(5, 1.0, 1.0));
    Rng rng(1);
    for (int i = 0; i < 1000; ++i)
    {
        const auto g = target_gamma_weights(1, std::pow(10.0, normal(rng, 0, 1)), std::pow(10.0, normal(rng, 0, 1)));
        CHECK_THAT(g[0] * g[0] + g[1] * g[1] + g[2] * g[2] + g[3] * g[3], WithinAbs(1.0, 1e-12));
    }
}

TEST_CASE("CIR - background assembly")
{
    Rng rng(2);
    const Vec3 a{0, 0, 5}, b{0, 5, 5};
    const auto one_tx = make_ura(a, 1, 1, 0.0, 0.5 * pi);
    const auto one_rx = make_ura(b, 1, 1, 0.0, -0.5 * pi);
    const auto lc = draw_clusters(a, b, Condition::LoS, rng);

    BackgroundContext ctx;
    ctx.clusters = &lc;
    ctx.distance = 5.0;
    ctx.tx = &one_tx;
    ctx.rx = &one_rx;
    ctx.wavelength = lambda0;

    ctx.k_linear = inf;
    auto taps = assemble_background(ctx);
    REQUIRE(taps.size() == 1);
    CHECK(taps.label[0] == CaseLabel::LoS_back);
    CHECK_THAT(taps.delays(0)[0], WithinAbs(16.678e-9, 1e-12));
    CHECK_THAT(std::abs(taps.coeffs(0)[0]), WithinAbs(1.0, 1e-12));

    ctx.k_linear = 0.0;
    for (int seed = 0; seed < 50; ++seed)
    {
        Rng r(seed);
        const auto l = draw_clusters(a, b, Condition::NLoS, r);
        ctx.clusters = &l;
        taps = assemble_background(ctx);
        for (auto lab : taps.label)
            CHECK(lab == CaseLabel::NLoS_back);
        CHECK_THAT(taps.energy(), WithinAbs(1.0, 1e-9));
        CHECK(taps.min_delay() >= 5.0 / speed_of_light);
    }
}

TEST_CASE("CIR - target assembly")
{
    Rng rng(3);
    Scene sc(2, 3, 0.5, rng);
    const double bistatic = (distance(sc.tx_pos, sc.tgt) + distance(sc.tgt, sc.rx_pos)) / speed_of_light;
    const double half_aperture = 2.0 * std::sqrt(2.0) * 0.25 * lambda0 / speed_of_light;

    SECTION("Delays never precede the bistatic LoS path")
    {
        const auto taps = assemble_target(1, sc.ctx, 4.0, 2.0);
        REQUIRE(taps.size() > 0);
        CHECK(taps.min_delay() >= bistatic - half_aperture);
    }

    SECTION("Deterministic path delays are segment sums")
    {
        const auto taps = assemble_target_nlos(1, sc.ctx, 1.0, 0.0);
        std::size_t i = 0;
        while (i < taps.size() && taps.label[i] != CaseLabel::DNLoS1)
            ++i;
        REQUIRE(i < taps.size());
        const Vec3 &sp = sc.target.scattering_points[0];
        const Vec3 &cp = sc.ctx.deterministic_rx[0].scattering_points[0];
        const Vec3 et = sc.tx.position + sc.tx.element_offsets[1];
        const Vec3 er = sc.rx.position + sc.rx.element_offsets[2];
        const double expect = (distance(et, sp) + distance(sp, cp) + distance(cp, er)) / speed_of_light;
        CHECK_THAT(taps.delays(i)[2 * sc.tx.size() + 1], WithinRel(expect, 1e-14));
    }

    SECTION("Specular-only collapse")
    {
        Scene one(1, 1, 0.7, rng);
        const auto taps = assemble_target(1, one.ctx, inf, inf);
        REQUIRE(taps.size() == 1);
        CHECK(taps.label[0] == CaseLabel::LoS_tar);
        CHECK_THAT(taps.delays(0)[0], WithinRel(bistatic, 1e-14));
        CHECK_THAT(std::norm(taps.coeffs(0)[0]), WithinRel(0.7, 1e-12));
    }

    SECTION("Case 4 equals the NLoS3 component")
    {
        const double floor = max_target_path_power(sc.ctx) * 1e-4;
        const auto c4 = assemble_target(4, sc.ctx, 3.0, 3.0);
        const auto n3 = assemble_target_nlos(3, sc.ctx, 1.0, floor);
        REQUIRE(c4.size() == n3.size());
        CHECK(c4.coeff == n3.coeff);
        CHECK(c4.delay == n3.delay);
    }

    SECTION("Amplitudes follow the square root of the RCS")
    {
        Rng r1(5), r2(5);
        Scene s1(2, 3, 0.5, r1), s4(2, 3, 2.0, r2);
        const auto t1 = assemble_target(1, s1.ctx, 4.0, 2.0);
        const auto t4 = assemble_target(1, s4.ctx, 4.0, 2.0);
        REQUIRE(t1.size() == t4.size());
        for (std::size_t i = 0; i < t1.coeff.size(); ++i)
            CHECK(std::abs(t4.coeff[i] - 2.0 * t1.coeff[i]) <= 1e-12 * std::abs(t1.coeff[i]) + 1e-300);
    }

    SECTION("Co-located SPs with the amplitude split act as one point target")
    {
        Rng r1(6), r2(6);
        Scene many(2, 5, 0.5, r1), one(2, 1, 0.5, r2);
        const auto hm = frequency_response(assemble_target(1, many.ctx, 4.0, 2.0), 30.72e6, 64, 4);
        const auto h1 = frequency_response(assemble_target(1, one.ctx, 4.0, 2.0), 30.72e6, 64, 4);
        double err = 0.0, ref = 0.0;
        for (std::size_t i = 0; i < hm.size(); ++i)
            err += std::norm(hm[i] - h1[i]), ref += std::norm(h1[i]);
        CHECK(err <= 1e-20 * ref);
    }

    SECTION("Zero power gives no target")
    {
        Scene z(2, 3, 0.0, rng);
        CHECK(assemble_target(1, z.ctx, 4.0, 2.0).energy() == 0.0);
    }
}

TEST_CASE("CIR - superposition")
{
    TapList bg(1, 1, 1), tg(1, 1, 1);
    bg.coeffs(bg.add(CaseLabel::LoS_back, 10e-9))[0] = cd(1.0, 0.5);
    tg.coeffs(tg.add(CaseLabel::LoS_tar, 10e-9))[0] = cd(-0.25, 0.5);
    tg.coeffs(tg.add(CaseLabel::SNLoS3, 40e-9))[0] = cd(0.1, 0.0);

    auto r = combine_isac(bg, TapList(1, 1, 1), {0.0});
    CHECK(r.target.empty());
    CHECK(r.background.coeff == bg.coeff);

    r = combine_isac(bg, tg, {0.0});
    TapList all = r.background;
    all.append(r.target);
    CHECK(all.size() == 3);
    const auto h = frequency_response(all, 30.72e6, 32, 16);
    const double f = 3.0 * 30.72e6 / 32.0;
    const cd direct = cd(1.0, 0.5) * std::polar(1.0, -2.0 * pi * f * 10e-9) +
                      cd(-0.25, 0.5) * std::polar(1.0, -2.0 * pi * f * 10e-9) +
                      cd(0.1, 0.0) * std::polar(1.0, -2.0 * pi * f * 40e-9);
    // 10 ns and 40 ns snap to the 1/(16 fs) grid within 1 ns
    CHECK(std::abs(h[3] - direct) < 0.05);

    CHECK_THROWS(combine_isac(bg, tg, {0.0, 1.0}));
}

TEST_CASE("CIR - frequency response")
{
    const double fs = 30.72e6;
    TapList t(1, 1, 1);
    const double tau = 37.0 / (16.0 * fs);
    t.coeffs(t.add(CaseLabel::LoS_back, tau))[0] = cd(0.5, 0.0);
    const std::size_t n = 64;
    const auto h = frequency_response(t, fs, n, 16);
    for (std::size_t k = 0; k < n; ++k)
    {
        const double f = (k < n / 2 ? double(k) : double(k) - double(n)) * fs / double(n);
        const cd e = 0.5 * std::polar(1.0, -2.0 * pi * f * tau);
        CHECK(std::abs(h[k] - e) < 1e-12);
    }
    CHECK(frequency_response(TapList(2, 2, 1), fs, n, 16) == std::vector<cd>(n * 4, cd(0.0, 0.0)));
}

TEST_CASE("CIR - discretization")
{
    const double fs = 30.72e6;
    TapList on(1, 1, 1);
    on.coeffs(on.add(CaseLabel::LoS_back, 5.0 / fs))[0] = cd(0.3, -0.4);
    const auto a = discretize(on, fs, DiscretizationFilter::nearest_bin, 32);
    const auto b = discretize(on, fs, DiscretizationFilter::sinc_windowed, 32);
    for (std::size_t i = 0; i < 32; ++i)
        CHECK(std::abs(a.h[i] - b.h[i]) < 1e-12);

    // Two taps half a bin apart, energy of the band-limited sum
    TapList two(1, 1, 1);
    two.coeffs(two.add(CaseLabel::NLoS_back, 100.0 / fs))[0] = cd(0.6, 0.0);
    two.coeffs(two.add(CaseLabel::NLoS_back, 100.5 / fs))[0] = cd(0.0, 0.8);
    const auto d = discretize(two, fs, DiscretizationFilter::sinc_windowed, 256);
    // Cross term vanishes for orthogonal phases; the 65-tap window loses under 2% at half-bin offsets
    CHECK_THAT(d.energy(), WithinRel(1.0, 0.02));
    CHECK(d.energy() < 1.0);

    CHECK(discretize(TapList(1, 1, 1), fs, DiscretizationFilter::sinc_windowed, 16).energy() == 0.0);
    CHECK(parse_filter("nearest_bin") == DiscretizationFilter::nearest_bin);
    CHECK_THROWS(parse_filter("cubic"));
}

TEST_CASE("CIR - tap CSV")
{
    TapList t(1, 2, 1);
    const auto i = t.add(CaseLabel::DNLoS3, 1e-7);
    t.coeffs(i)[1] = cd(0.5, -0.25);
    std::ostringstream os;
    write_taps_csv(os, t, {0.0});
    const std::string s = os.str();
    CHECK(s.rfind("snapshot_time_s,u,s,case_label,delay_s,re,im\n", 0) == 0);
    CHECK(s.find("0,0,1,DNLoS3,9.9999999999999995e-08,0.5,-0.25\n") != std::string::npos);
}
