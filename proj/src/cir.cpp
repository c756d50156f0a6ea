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

#include "isac/cir.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <limits>

namespace isac
{
    // ---- TapList ----

    std::size_t TapList::add(CaseLabel l, double uniform_delay)
    {
        label.push_back(l);
        delay.insert(delay.end(), pairs(), uniform_delay);
        coeff.insert(coeff.end(), pairs() * n_snap, cd(0.0, 0.0));
        return label.size() - 1;
    }

    void TapList::scale(double f)
    {
        for (auto &c : coeff)
            c *= f;
    }

    void TapList::append(const TapList &o)
    {
        if (o.empty())
            return;
        if (o.n_rx != n_rx || o.n_tx != n_tx || o.n_snap != n_snap)
            throw std::invalid_argument("TapList::append: shape mismatch");
        label.insert(label.end(), o.label.begin(), o.label.end());
        delay.insert(delay.end(), o.delay.begin(), o.delay.end());
        coeff.insert(coeff.end(), o.coeff.begin(), o.coeff.end());
    }

    double TapList::min_delay() const
    {
        return delay.empty() ? 0.0 : *std::min_element(delay.begin(), delay.end());
    }

    double TapList::max_delay() const
    {
        return delay.empty() ? 0.0 : *std::max_element(delay.begin(), delay.end());
    }

    double TapList::energy(std::size_t k) const
    {
        double e = 0.0;
        for (std::size_t i = 0; i < size(); ++i)
        {
            const cd *c = coeffs(i) + k * pairs();
            for (std::size_t p = 0; p < pairs(); ++p)
                e += std::norm(c[p]);
        }
        return e;
    }

    // ---- weights ----

    RicianWeights rician_weights(double k)
    {
        if (!(k >= 0.0))
            throw std::invalid_argument("rician_weights: K must be non-negative");
        if (std::isinf(k))
            return {1.0, 0.0};
        return {std::sqrt(k / (k + 1.0)), std::sqrt(1.0 / (k + 1.0))};
    }

    std::array<double, 4> target_gamma_weights(int c, double k1, double k2)
    {
        const auto w1 = rician_weights(k1);
        const auto w2 = rician_weights(k2);
        const double e1 = w1.gamma, et1 = w1.gamma_tilde, e2 = w2.gamma, et2 = w2.gamma_tilde;
        switch (c)
        {
        case 1:
            return {e1 * e2, e1 * et2, et1 * e2, et1 * et2};
        case 2:
            return {0.0, e1, 0.0, et2};
        case 3:
            return {0.0, 0.0, e2, et1};
        case 4:
            return {0.0, 0.0, 0.0, 1.0};
        default:
            throw std::invalid_argument("target_gamma_weights: case must be 1..4");
        }
    }

    // ---- background ----

    TapList assemble_background(const BackgroundContext &ctx)
    {
        const AntennaArray &tx = *ctx.tx, &rx = *ctx.rx;
        const LinkClusters &lc = *ctx.clusters;
        TapList taps(rx.size(), tx.size(), ctx.times.size());
        const auto w = rician_weights(ctx.k_linear);

        if (w.gamma > 0.0)
        {
            BackgroundRayContext bc;
            bc.distance = ctx.distance;
            bc.tx_angles = angles_between(tx.position, rx.position);
            bc.rx_angles = angles_between(rx.position, tx.position);
            bc.v_tx = ctx.v_tx;
            bc.v_rx = ctx.v_rx;
            const auto rc = resolve_background(CaseLabel::LoS_back, bc, ctx.wavelength);
            const std::size_t i = taps.add(CaseLabel::LoS_back, 0.0);
            double *d = taps.delays(i);
            for (std::size_t u = 0; u < rx.size(); ++u)
                for (std::size_t s = 0; s < tx.size(); ++s)
                    d[u * tx.size() + s] = distance(tx.position + tx.element_offsets[s],
                                                    rx.position + rx.element_offsets[u]) /
                                           speed_of_light;
            accumulate_path(rc, tx, rx, ctx.times, ctx.wavelength, w.gamma, taps.coeffs(i));
        }

        if (w.gamma_tilde > 0.0)
        {
            const std::size_t n = lc.power.size();
            std::vector<double> abs(n);
            for (std::size_t c = 0; c < n; ++c)
            {
                const bool no_excess = lc.is_los_cluster[c] && lc.condition == Condition::LoS;
                abs[c] = lc.baseline + lc.relative_delay[c] + (no_excess ? 0.0 : lc.excess);
            }
            const auto rd = ray_delays(abs, lc.power, lc.cluster_ds_s, lc.rays_per_cluster);
            const std::size_t m = lc.rays_per_cluster;
            for (std::size_t c = 0; c < n; ++c)
                for (std::size_t r = 0; r < m; ++r)
                {
                    BackgroundRayContext bc;
                    bc.power = lc.power[c] / double(m);
                    bc.xpr = lc.xpr[c][r];
                    bc.phases = lc.phases[c][r];
                    bc.tx_angles = lc.angles.departure[c][r];
                    bc.rx_angles = lc.angles.arrival[c][r];
                    bc.v_tx = ctx.v_tx;
                    bc.v_rx = ctx.v_rx;
                    bc.delay = rd[c][r];
                    const auto rc = resolve_background(CaseLabel::NLoS_back, bc, ctx.wavelength);
                    const std::size_t i = taps.add(CaseLabel::NLoS_back, rd[c][r]);
                    accumulate_path(rc, tx, rx, ctx.times, ctx.wavelength, w.gamma_tilde, taps.coeffs(i));
                }
        }
        return taps;
    }

    // ---- target ----

    namespace
    {
        struct Elements
        {
            std::vector<Vec3> tx, rx;
            explicit Elements(const TargetContext &ctx)
            {
                for (const auto &o : ctx.tx->element_offsets)
                    tx.push_back(ctx.tx->position + o);
                for (const auto &o : ctx.rx->element_offsets)
                    rx.push_back(ctx.rx->position + o);
            }
        };

        Vec3 unit(const Vec3 &v)
        {
            const double n = v.norm();
            if (n < 1e-9)
                throw GeometryError("direction between coincident points");
            return v * (1.0 / n);
        }

        double combine_xpr(double k1, double k2)
        {
            return 1.0 / (1.0 / k1 + 1.0 / k2);
        }

        PhaseQuad phase_quad(Rng &rng)
        {
            return {uniform_phase(rng), uniform_phase(rng), uniform_phase(rng), uniform_phase(rng)};
        }
    }

    double max_target_path_power(const TargetContext &ctx)
    {
        const Target &t = *ctx.target;
        double smax = 0.0;
        for (double s : t.rcs_per_sp)
            smax = std::max(smax, s);

        auto max_stoch = [](const std::vector<StochasticRay> &v)
        {
            double m = 0.0;
            for (const auto &r : v)
                m = std::max(m, r.power);
            return m;
        };
        auto max_det = [](const std::vector<DeterministicCluster> &v)
        {
            double m = 0.0;
            for (const auto &c : v)
                for (double p : c.sp_power)
                    m = std::max(m, c.rcs * p);
            return m;
        };
        const double s1 = max_stoch(ctx.stochastic_tx), s2 = max_stoch(ctx.stochastic_rx);
        const double d1 = max_det(ctx.deterministic_tx), d2 = max_det(ctx.deterministic_rx);
        const double m = std::max({1.0, s1, s2, d1, d2, s1 * s2, d1 * d2});
        return smax * m;
    }

    TapList assemble_target_los(const TargetContext &ctx, double weight)
    {
        const AntennaArray &tx = *ctx.tx, &rx = *ctx.rx;
        const Target &t = *ctx.target;
        const Elements el(ctx);
        TapList taps(rx.size(), tx.size(), ctx.times.size());
        if (weight == 0.0)
            return taps;
        for (std::size_t k = 0; k < t.scattering_points.size(); ++k)
        {
            const Vec3 &sp = t.scattering_points[k];
            TargetRayContext c;
            c.sigma_target = t.rcs_per_sp[k];
            c.bistatic_distance = distance(tx.position, sp) + distance(sp, rx.position);
            c.tx_angles = angles_between(tx.position, sp);
            c.rx_angles = angles_between(rx.position, sp);
            c.v_tx = ctx.v_tx;
            c.v_rx = ctx.v_rx;
            c.v_target = t.velocity.vector();
            const auto rc = resolve_target(CaseLabel::LoS_tar, c, ctx.wavelength);
            const std::size_t i = taps.add(CaseLabel::LoS_tar, 0.0);
            double *d = taps.delays(i);
            for (std::size_t u = 0; u < rx.size(); ++u)
                for (std::size_t s = 0; s < tx.size(); ++s)
                    d[u * tx.size() + s] = (distance(el.tx[s], sp) + distance(sp, el.rx[u])) / speed_of_light;
            accumulate_path(rc, tx, rx, ctx.times, ctx.wavelength, weight, taps.coeffs(i));
        }
        return taps;
    }

    TapList assemble_target_nlos(int xi, const TargetContext &ctx, double weight, double floor_power)
    {
        if (xi < 1 || xi > 3)
            throw std::invalid_argument("assemble_target_nlos: component must be 1, 2 or 3");
        const AntennaArray &tx = *ctx.tx, &rx = *ctx.rx;
        const Target &t = *ctx.target;
        const Elements el(ctx);
        const std::size_t nt = tx.size(), nr = rx.size();
        TapList taps(nr, nt, ctx.times.size());
        if (weight == 0.0)
            return taps;
        Rng rng = make_stream(ctx.phase_seed, std::uint64_t(xi), Stream::cascade);
        const Vec3 vl = t.velocity.vector();
        const double lambda = ctx.wavelength;

        auto emit = [&](const TargetRayContext &c, CaseLabel label, auto &&delay_of)
        {
            const auto rc = resolve_target(label, c, lambda);
            if (std::norm(rc.gamma) < floor_power)
                return;
            const std::size_t i = taps.add(label, 0.0);
            double *d = taps.delays(i);
            for (std::size_t u = 0; u < nr; ++u)
                for (std::size_t s = 0; s < nt; ++s)
                    d[u * nt + s] = delay_of(u, s);
            accumulate_path(rc, tx, rx, ctx.times, lambda, weight, taps.coeffs(i));
        };
        auto base_ctx = [&](std::size_t k)
        {
            TargetRayContext c;
            c.sigma_target = t.rcs_per_sp[k];
            c.v_tx = ctx.v_tx;
            c.v_rx = ctx.v_rx;
            c.v_target = vl;
            return c;
        };

        const std::size_t n_sp = t.scattering_points.size();
        // One phase set per cluster SP, shared by all target SPs
        auto cluster_phases = [&](const std::vector<DeterministicCluster> &v)
        {
            std::vector<std::vector<PhaseQuad>> ph(v.size());
            for (std::size_t i = 0; i < v.size(); ++i)
                for (std::size_t j = 0; j < v[i].scattering_points.size(); ++j)
                    ph[i].push_back(phase_quad(rng));
            return ph;
        };
        if (xi == 1)
        {
            // Tx -> target LoS, target -> cluster -> Rx
            const auto dph = cluster_phases(ctx.deterministic_rx);
            for (std::size_t k = 0; k < n_sp; ++k)
            {
                const Vec3 &sp = t.scattering_points[k];
                for (const auto &r : ctx.stochastic_rx)
                {
                    auto c = base_ctx(k);
                    c.power_rx = r.power;
                    c.xpr = r.xpr;
                    c.phases = r.phases;
                    c.tx_angles = angles_between(tx.position, sp);
                    c.rx_angles = r.arrival;
                    c.cluster_dir_rx = spherical_unit(r.departure);
                    emit(c, CaseLabel::SNLoS1, [&](std::size_t, std::size_t s)
                         { return distance(el.tx[s], sp) / speed_of_light + r.delay; });
                }
                for (std::size_t i = 0; i < ctx.deterministic_rx.size(); ++i)
                    for (std::size_t k2 = 0; k2 < ctx.deterministic_rx[i].scattering_points.size(); ++k2)
                    {
                        const auto &dc = ctx.deterministic_rx[i];
                        const Vec3 &cp = dc.scattering_points[k2];
                        auto c = base_ctx(k);
                        c.sigma_cluster_rx = dc.rcs;
                        c.power_rx = dc.sp_power[k2];
                        c.xpr = std::pow(10.0, dc.xpr_db / 10.0);
                        c.phases = dph[i][k2];
                        c.tx_angles = angles_between(tx.position, sp);
                        c.rx_angles = angles_between(rx.position, cp);
                        c.cluster_dir_rx = unit(cp - sp);
                        c.v_cluster_rx = dc.velocity.vector();
                        emit(c, CaseLabel::DNLoS1, [&](std::size_t u, std::size_t s)
                             { return (distance(el.tx[s], sp) + distance(sp, cp) + distance(cp, el.rx[u])) / speed_of_light; });
                    }
            }
        }
        else if (xi == 2)
        {
            // Tx -> cluster -> target, target -> Rx LoS
            const auto dph = cluster_phases(ctx.deterministic_tx);
            for (std::size_t k = 0; k < n_sp; ++k)
            {
                const Vec3 &sp = t.scattering_points[k];
                for (const auto &r : ctx.stochastic_tx)
                {
                    auto c = base_ctx(k);
                    c.power_tx = r.power;
                    c.xpr = r.xpr;
                    c.phases = r.phases;
                    c.tx_angles = r.departure;
                    c.rx_angles = angles_between(rx.position, sp);
                    c.cluster_dir_tx = spherical_unit(r.arrival);
                    emit(c, CaseLabel::SNLoS2, [&](std::size_t u, std::size_t)
                         { return r.delay + distance(sp, el.rx[u]) / speed_of_light; });
                }
                for (std::size_t i = 0; i < ctx.deterministic_tx.size(); ++i)
                    for (std::size_t k1 = 0; k1 < ctx.deterministic_tx[i].scattering_points.size(); ++k1)
                    {
                        const auto &dc = ctx.deterministic_tx[i];
                        const Vec3 &cp = dc.scattering_points[k1];
                        auto c = base_ctx(k);
                        c.sigma_cluster_tx = dc.rcs;
                        c.power_tx = dc.sp_power[k1];
                        c.xpr = std::pow(10.0, dc.xpr_db / 10.0);
                        c.phases = dph[i][k1];
                        c.tx_angles = angles_between(tx.position, cp);
                        c.rx_angles = angles_between(rx.position, sp);
                        c.cluster_dir_tx = unit(cp - sp);
                        c.v_cluster_tx = dc.velocity.vector();
                        emit(c, CaseLabel::DNLoS2, [&](std::size_t u, std::size_t s)
                             { return (distance(el.tx[s], cp) + distance(cp, sp) + distance(sp, el.rx[u])) / speed_of_light; });
                    }
            }
        }
        else
        {
            // Clusters on both links
            const std::size_t n1 = ctx.stochastic_tx.size(), n2 = ctx.stochastic_rx.size();
            for (std::size_t a = 0; a < n1; ++a)
                for (std::size_t b = 0; b < n2; ++b)
                {
                    const auto &r1 = ctx.stochastic_tx[a];
                    const auto &r2 = ctx.stochastic_rx[b];
                    const PhaseQuad ph = phase_quad(rng);
                    const double tau = r1.delay + r2.delay;
                    for (std::size_t k = 0; k < n_sp; ++k)
                    {
                        if (t.rcs_per_sp[k] * r1.power * r2.power < floor_power)
                            continue;
                        auto c = base_ctx(k);
                        c.power_tx = r1.power;
                        c.power_rx = r2.power;
                        c.xpr = combine_xpr(r1.xpr, r2.xpr);
                        c.phases = ph;
                        c.tx_angles = r1.departure;
                        c.rx_angles = r2.arrival;
                        c.cluster_dir_tx = spherical_unit(r1.arrival);
                        c.cluster_dir_rx = spherical_unit(r2.departure);
                        emit(c, CaseLabel::SNLoS3, [&](std::size_t, std::size_t)
                             { return tau; });
                    }
                }
            for (const auto &c1 : ctx.deterministic_tx)
                for (std::size_t k1 = 0; k1 < c1.scattering_points.size(); ++k1)
                    for (const auto &c2 : ctx.deterministic_rx)
                        for (std::size_t k2 = 0; k2 < c2.scattering_points.size(); ++k2)
                        {
                            const Vec3 &p1 = c1.scattering_points[k1];
                            const Vec3 &p2 = c2.scattering_points[k2];
                            const PhaseQuad ph = phase_quad(rng);
                            for (std::size_t k = 0; k < n_sp; ++k)
                            {
                                const Vec3 &sp = t.scattering_points[k];
                                auto c = base_ctx(k);
                                c.sigma_cluster_tx = c1.rcs;
                                c.sigma_cluster_rx = c2.rcs;
                                c.power_tx = c1.sp_power[k1];
                                c.power_rx = c2.sp_power[k2];
                                c.xpr = combine_xpr(std::pow(10.0, c1.xpr_db / 10.0), std::pow(10.0, c2.xpr_db / 10.0));
                                c.phases = ph;
                                c.tx_angles = angles_between(tx.position, p1);
                                c.rx_angles = angles_between(rx.position, p2);
                                c.cluster_dir_tx = unit(p1 - sp);
                                c.cluster_dir_rx = unit(p2 - sp);
                                c.v_cluster_tx = c1.velocity.vector();
                                c.v_cluster_rx = c2.velocity.vector();
                                const double mid = distance(p1, sp) + distance(sp, p2);
                                emit(c, CaseLabel::DNLoS3, [&](std::size_t u, std::size_t s)
                                     { return (distance(el.tx[s], p1) + mid + distance(p2, el.rx[u])) / speed_of_light; });
                            }
                        }
        }
        return taps;
    }

    TapList assemble_target(int target_case, const TargetContext &ctx, double k1, double k2)
    {
        const auto g = target_gamma_weights(target_case, k1, k2);
        const double floor_power = max_target_path_power(ctx) * std::pow(10.0, ctx.path_threshold_db / 10.0);
        TapList taps = assemble_target_los(ctx, g[0]);
        for (int xi = 1; xi <= 3; ++xi)
            taps.append(assemble_target_nlos(xi, ctx, g[xi], floor_power));
        return taps;
    }

    ChannelRealization combine_isac(const TapList &background, const TapList &target, const std::vector<double> &times)
    {
        for (const TapList *t : {&background, &target})
            if (!t->empty() && t->n_snap != times.size())
                throw std::invalid_argument("combine_isac: snapshot grid mismatch");
        if (!background.empty() && !target.empty() &&
            (background.n_rx != target.n_rx || background.n_tx != target.n_tx))
            throw std::invalid_argument("combine_isac: antenna layout mismatch");
        ChannelRealization r;
        r.times = times;
        const TapList &ref = background.empty() ? target : background;
        r.n_rx = ref.n_rx;
        r.n_tx = ref.n_tx;
        r.background = background;
        r.target = target;
        return r;
    }

    // ---- discretization ----

    DiscretizationFilter parse_filter(const std::string &s)
    {
        if (s == "nearest_bin")
            return DiscretizationFilter::nearest_bin;
        if (s == "sinc_windowed")
            return DiscretizationFilter::sinc_windowed;
        throw std::invalid_argument("unknown discretization filter '" + s + "'");
    }

    double DiscreteCir::energy() const
    {
        double e = 0.0;
        for (const auto &v : h)
            e += std::norm(v);
        return e;
    }

    DiscreteCir discretize(const TapList &taps, double fs, DiscretizationFilter filter, std::size_t n_bins, double t0)
    {
        if (!(fs > 0.0))
            throw std::invalid_argument("discretize: sample rate must be positive");
        DiscreteCir out;
        out.n_snap = taps.n_snap;
        out.n_rx = taps.n_rx;
        out.n_tx = taps.n_tx;
        out.n_bins = n_bins;
        out.t0 = t0;
        out.h.assign(out.n_snap * out.n_rx * out.n_tx * n_bins, cd(0.0, 0.0));
        const std::size_t np = taps.pairs();
        constexpr int half = 32;
        constexpr double window_half = half + 1.0;

        for (std::size_t i = 0; i < taps.size(); ++i)
        {
            const double *d = taps.delays(i);
            const cd *c = taps.coeffs(i);
            for (std::size_t p = 0; p < np; ++p)
            {
                const double x = (d[p] - t0) * fs;
                const auto center = std::llround(x);
                const std::size_t u = p / taps.n_tx, s = p % taps.n_tx;
                if (filter == DiscretizationFilter::nearest_bin)
                {
                    if (center < 0 || center >= (long long)n_bins)
                        continue;
                    for (std::size_t k = 0; k < taps.n_snap; ++k)
                        out.at(k, u, s, std::size_t(center)) += c[k * np + p];
                    continue;
                }
                for (int j = -half; j <= half; ++j)
                {
                    const long long b = center + j;
                    if (b < 0 || b >= (long long)n_bins)
                        continue;
                    const double dx = x - double(b);
                    const double sinc = dx == 0.0 ? 1.0 : std::sin(pi * dx) / (pi * dx);
                    const double w = std::abs(dx) < window_half ? 0.5 * (1.0 + std::cos(pi * dx / window_half)) : 0.0;
                    for (std::size_t k = 0; k < taps.n_snap; ++k)
                        out.at(k, u, s, std::size_t(b)) += c[k * np + p] * (sinc * w);
                }
            }
        }
        return out;
    }

    std::vector<cd> frequency_response(const TapList &taps, double fs, std::size_t n, std::size_t L)
    {
        if (!(fs > 0.0) || n == 0 || L == 0)
            throw std::invalid_argument("frequency_response: invalid grid");
        const std::size_t np = taps.pairs(), ns = taps.n_snap, g = n * L;
        std::vector<cd> out(ns * n * np, cd(0.0, 0.0));
        if (taps.empty())
            return out;

        std::vector<std::vector<cd>> grid(ns * np, std::vector<cd>(g, cd(0.0, 0.0)));
        for (std::size_t i = 0; i < taps.size(); ++i)
        {
            const double *d = taps.delays(i);
            const cd *c = taps.coeffs(i);
            for (std::size_t p = 0; p < np; ++p)
            {
                long long b = std::llround(d[p] * fs * double(L)) % (long long)g;
                if (b < 0)
                    b += (long long)g;
                for (std::size_t k = 0; k < ns; ++k)
                    grid[k * np + p][std::size_t(b)] += c[k * np + p];
            }
        }

        Eigen::FFT<double> fft;
        std::vector<cd> spec(g);
        for (std::size_t k = 0; k < ns; ++k)
            for (std::size_t p = 0; p < np; ++p)
            {
                fft.fwd(spec, grid[k * np + p]);
                for (std::size_t m = 0; m < n; ++m)
                {
                    const std::size_t idx = m < n / 2 ? m : g - (n - m);
                    out[(k * n + m) * np + p] = spec[idx];
                }
            }
        return out;
    }

    void write_taps_csv(std::ostream &os, const TapList &taps, const std::vector<double> &times)
    {
        os << "snapshot_time_s,u,s,case_label,delay_s,re,im\n";
        char buf[256];
        const std::size_t np = taps.pairs();
        for (std::size_t k = 0; k < taps.n_snap; ++k)
            for (std::size_t i = 0; i < taps.size(); ++i)
            {
                const double *d = taps.delays(i);
                const cd *c = taps.coeffs(i) + k * np;
                const std::string lab = to_string(taps.label[i]);
                for (std::size_t p = 0; p < np; ++p)
                {
                    std::snprintf(buf, sizeof(buf), "%.17g,%zu,%zu,%s,%.17g,%.17g,%.17g\n",
                                  k < times.size() ? times[k] : 0.0, p / taps.n_tx, p % taps.n_tx, lab.c_str(),
                                  d[p], c[p].real(), c[p].imag());
                    os << buf;
                }
            }
    }
}
