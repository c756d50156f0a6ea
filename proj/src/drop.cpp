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

#include "isac/drop.hpp"

#include <cmath>

namespace isac
{
    SimulationSetup::SimulationSetup(const RunConfig &cfg) : config(cfg)
    {
        config.validate();
        table = load_default_table(config.scenario.kind, config.parameter_dir);
        wavelength = speed_of_light / config.waveform.carrier_hz;

        auto make_array = [&](const NodeConfig &n, const Vec3 &other)
        {
            const double az = n.boresight_azimuth_deg ? *n.boresight_azimuth_deg * pi / 180.0
                                                      : angles_between(n.position, other).azimuth;
            return make_ura(n.position, n.rows, n.cols, n.spacing_wavelengths * wavelength, az, n.pattern);
        };
        tx = make_array(config.tx, config.rx.position);
        rx = make_array(config.rx, config.tx.position);
        for (int k = 0; k < config.n_snapshots; ++k)
            times.push_back(k * config.snapshot_interval_s);
    }

    double bistatic_target_gain(double pl1_db, double pl2_db, double plb_db, double wavelength)
    {
        const double lin = std::pow(10.0, -(pl1_db + pl2_db - plb_db) / 10.0);
        return std::sqrt(lin * 4.0 * pi / (wavelength * wavelength));
    }

    namespace
    {
        LinkDraw draw_link(const SimulationSetup &setup, const LinkGeometry &g, std::optional<Condition> forced,
                           const DropOptions &opt, Rng &rng)
        {
            const RunConfig &cfg = setup.config;
            LinkDraw ld;
            ld.state.geometry = g;
            ld.state.distance_3d = g.distance_3d();
            ld.state.condition = assign_condition(g, cfg.scenario, rng, forced);
            ld.state.path_loss_db = path_loss(g, ld.state.condition, cfg.scenario, cfg.waveform.carrier_hz);
            ld.state.lsp = draw_lsps(ld.state.condition, setup.table, rng);
            ld.clusters = generate_link_clusters(ld.state, setup.table.at(ld.state.condition),
                                                 angles_between(g.a, g.b), angles_between(g.b, g.a),
                                                 cfg.cluster_threshold_db, rng);
            if (ld.state.condition == Condition::LoS)
            {
                if (opt.k_linear)
                    ld.k_linear = *opt.k_linear;
                else if (ld.state.lsp.k_db)
                    ld.k_linear = std::pow(10.0, *ld.state.lsp.k_db / 10.0);
            }
            return ld;
        }

        double total_loss_db(const LinkDraw &l)
        {
            return l.state.path_loss_db + l.state.lsp.shadow_fading_db;
        }
    }

    void split_target_link(const LinkDraw &link, TargetLink which, const Vec3 &a, const Vec3 &b,
                           std::size_t n_det, DeterministicSelection selection,
                           const std::vector<std::size_t> &explicit_indices, const DeterministicClusterConfig &cc,
                           Rng &rng, std::vector<StochasticRay> &stochastic, std::vector<DeterministicCluster> &det,
                           std::vector<std::string> &warnings)
    {
        const LinkClusters &lc = link.clusters;
        const std::size_t m = lc.rays_per_cluster;

        // NLoS part of the link: every kept cluster except the specular one
        std::vector<std::size_t> nlos;
        double total = 0.0;
        for (std::size_t i = 0; i < lc.power.size(); ++i)
            if (!(lc.is_los_cluster[i] && lc.condition == Condition::LoS))
            {
                nlos.push_back(i);
                total += lc.power[i];
            }
        if (nlos.empty() || total <= 0.0)
            return;
        std::vector<double> power(lc.power.size(), 0.0);
        for (auto i : nlos)
            power[i] = lc.power[i] / total;

        // Zero-delay clusters have no feasible ellipse and stay stochastic
        std::vector<std::size_t> cand;
        std::vector<double> cand_delay, cand_power;
        std::vector<std::size_t> cand_explicit;
        for (auto i : nlos)
            if (lc.relative_delay[i] > 0.0)
            {
                for (auto e : explicit_indices)
                    if (e == i)
                        cand_explicit.push_back(cand.size());
                cand.push_back(i);
                cand_delay.push_back(lc.relative_delay[i]);
                cand_power.push_back(power[i]);
            }
        const auto part = partition_clusters(cand_delay, cand_power, n_det, selection, cand_explicit);

        std::vector<bool> is_det(lc.power.size(), false);
        std::vector<MappingRequest> requests;
        for (auto p : part.deterministic)
        {
            const std::size_t i = cand[p];
            MappingRequest rq;
            rq.source_index = i;
            rq.delay = lc.baseline + lc.relative_delay[i];
            rq.power = power[i];
            for (int k = 0; k < cc.sp_count; ++k)
                rq.arrivals.push_back(lc.angles.arrival[i][std::size_t(k) % m]);
            requests.push_back(rq);
            is_det[i] = true;
        }
        auto outcome = assign_deterministic_cluster_geometry(requests, which, a, b, cc.rcs_m2, cc.velocity,
                                                             cc.xpr_db, rng);
        for (auto i : outcome.demoted)
            is_det[i] = false;
        det = std::move(outcome.mapped);
        warnings.insert(warnings.end(), outcome.warnings.begin(), outcome.warnings.end());

        std::vector<std::size_t> stoch;
        std::vector<double> abs_delay, stoch_power;
        for (auto i : nlos)
            if (!is_det[i])
            {
                stoch.push_back(i);
                abs_delay.push_back(lc.baseline + lc.relative_delay[i] + lc.excess);
                stoch_power.push_back(power[i]);
            }
        if (stoch.empty())
            return;
        const auto rd = ray_delays(abs_delay, stoch_power, lc.cluster_ds_s, int(m));
        for (std::size_t j = 0; j < stoch.size(); ++j)
        {
            const std::size_t i = stoch[j];
            for (std::size_t r = 0; r < m; ++r)
            {
                StochasticRay ray;
                ray.delay = rd[j][r];
                ray.power = stoch_power[j] / double(m);
                ray.departure = lc.angles.departure[i][r];
                ray.arrival = lc.angles.arrival[i][r];
                ray.xpr = lc.xpr[i][r];
                ray.phases = lc.phases[i][r];
                stochastic.push_back(ray);
            }
        }
    }

    ChannelRealization generate_drop(const SimulationSetup &setup, std::uint64_t drop, const DropOptions &opt,
                                     DropDetail *detail)
    {
        const RunConfig &cfg = setup.config;
        const Vec3 &tx = cfg.tx.position, &rx = cfg.rx.position;
        RealizationMeta meta;
        meta.seed = cfg.seed;
        meta.drop = drop;
        meta.scenario = to_string(cfg.scenario.kind);

        Rng rng_bg = make_stream(cfg.seed, drop, Stream::background);
        const LinkDraw bg = draw_link(setup, {tx, rx}, cfg.forced.background, opt, rng_bg);
        meta.background_condition = bg.state.condition;
        meta.background_weights = rician_weights(bg.k_linear);

        TapList background(setup.rx.size(), setup.tx.size(), setup.times.size());
        if (opt.background)
        {
            BackgroundContext bc;
            bc.clusters = &bg.clusters;
            bc.distance = bg.state.distance_3d;
            bc.k_linear = bg.k_linear;
            bc.tx = &setup.tx;
            bc.rx = &setup.rx;
            bc.v_tx = cfg.tx.velocity.vector();
            bc.v_rx = cfg.rx.velocity.vector();
            bc.times = setup.times;
            bc.wavelength = setup.wavelength;
            background = assemble_background(bc);
        }

        TapList target(setup.rx.size(), setup.tx.size(), setup.times.size());
        std::vector<TargetDraw> draws;
        if (opt.target)
            for (std::size_t l = 0; l < cfg.targets.size(); ++l)
            {
                const TargetConfig &tc = cfg.targets[l];
                TargetDraw td;

                Rng rng_t = make_stream(cfg.seed, drop, Stream::target, l);
                double total = opt.rcs_m2 ? *opt.rcs_m2 : tc.rcs.value_m2;
                td.target = place_target_deterministic(tc.position, tc, tx, rx, total, int(l));
                if (!opt.rcs_m2 && tc.rcs.kind == RcsModel::lognormal)
                    for (auto &s : td.target.rcs_per_sp)
                        s = draw_rcs(tc.rcs, rng_t) * sp_rcs_share(tc);

                Rng rng1 = make_stream(cfg.seed, drop, Stream::tx_target, l);
                Rng rng2 = make_stream(cfg.seed, drop, Stream::target_rx, l);
                td.tx_target = draw_link(setup, {tx, tc.position}, cfg.forced.tx_target, opt, rng1);
                td.target_rx = draw_link(setup, {tc.position, rx}, cfg.forced.target_rx, opt, rng2);

                Rng rng_c1 = make_stream(cfg.seed, drop, Stream::clusters, 2 * l);
                Rng rng_c2 = make_stream(cfg.seed, drop, Stream::clusters, 2 * l + 1);
                split_target_link(td.tx_target, TargetLink::tx_target, tx, tc.position,
                                  std::size_t(cfg.clusters.count_tx_target), cfg.clusters.selection,
                                  cfg.clusters.indices_tx_target, cfg.clusters, rng_c1, td.stoch_tx, td.det_tx,
                                  meta.warnings);
                split_target_link(td.target_rx, TargetLink::target_rx, tc.position, rx,
                                  std::size_t(cfg.clusters.count_target_rx), cfg.clusters.selection,
                                  cfg.clusters.indices_target_rx, cfg.clusters, rng_c2, td.stoch_rx, td.det_rx,
                                  meta.warnings);

                td.target_case = target_channel_condition(td.tx_target.state.condition, td.target_rx.state.condition);

                TargetContext ctx;
                ctx.target = &td.target;
                ctx.stochastic_tx = td.stoch_tx;
                ctx.stochastic_rx = td.stoch_rx;
                ctx.deterministic_tx = td.det_tx;
                ctx.deterministic_rx = td.det_rx;
                ctx.tx = &setup.tx;
                ctx.rx = &setup.rx;
                ctx.v_tx = cfg.tx.velocity.vector();
                ctx.v_rx = cfg.rx.velocity.vector();
                ctx.times = setup.times;
                ctx.wavelength = setup.wavelength;
                ctx.path_threshold_db = cfg.path_threshold_db;
                ctx.phase_seed = splitmix64(splitmix64(cfg.seed ^ 0x5bd1e995ULL) + drop) + l;

                TapList taps = assemble_target(td.target_case, ctx, td.tx_target.k_linear, td.target_rx.k_linear);
                td.gain = cfg.target_power == "unit"
                              ? 1.0
                              : bistatic_target_gain(total_loss_db(td.tx_target), total_loss_db(td.target_rx),
                                                     total_loss_db(bg), setup.wavelength);
                taps.scale(td.gain);
                target.append(taps);

                meta.tx_target_condition.push_back(td.tx_target.state.condition);
                meta.target_rx_condition.push_back(td.target_rx.state.condition);
                meta.target_case.push_back(td.target_case);
                meta.target_weights.push_back(
                    target_gamma_weights(td.target_case, td.tx_target.k_linear, td.target_rx.k_linear));
                meta.bistatic_delay.push_back((distance(tx, tc.position) + distance(tc.position, rx)) / speed_of_light);
                meta.target_gain.push_back(td.gain);
                draws.push_back(std::move(td));
            }

        ChannelRealization r = combine_isac(background, target, setup.times);
        r.n_rx = setup.rx.size();
        r.n_tx = setup.tx.size();
        r.meta = std::move(meta);
        if (detail)
        {
            detail->background = bg;
            detail->targets = std::move(draws);
        }
        return r;
    }
}
