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

#include "isac/smallscale.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace isac
{
    const std::array<double, 20> &ray_offsets()
    {
        static const std::array<double, 20> a = {
            0.0447, -0.0447, 0.1413, -0.1413, 0.2492, -0.2492, 0.3715, -0.3715, 0.5129, -0.5129,
            0.6797, -0.6797, 0.8844, -0.8844, 1.1481, -1.1481, 1.5195, -1.5195, 2.1551, -2.1551};
        return a;
    }

    static double lookup(const std::map<int, double> &t, int n)
    {
        if (auto it = t.find(n); it != t.end())
            return it->second;
        if (n <= t.begin()->first)
            return t.begin()->second;
        if (n >= t.rbegin()->first)
            return t.rbegin()->second;
        auto hi = t.upper_bound(n);
        auto lo = std::prev(hi);
        const double w = double(n - lo->first) / double(hi->first - lo->first);
        return lo->second + w * (hi->second - lo->second);
    }

    double azimuth_scaling(int n)
    {
        static const std::map<int, double> t = {{4, 0.779}, {5, 0.860}, {8, 1.018}, {10, 1.090}, {11, 1.123}, {12, 1.146}, {14, 1.190}, {15, 1.211}, {16, 1.226}, {19, 1.273}, {20, 1.289}, {25, 1.358}};
        return lookup(t, n);
    }

    double zenith_scaling(int n)
    {
        static const std::map<int, double> t = {{8, 0.889}, {10, 0.957}, {11, 1.031}, {12, 1.104}, {15, 1.1088}, {19, 1.184}, {20, 1.178}, {25, 1.282}};
        return lookup(t, n);
    }

    std::vector<double> draw_relative_delays(int n_clusters, double ds, double r_tau, Rng &rng)
    {
        if (n_clusters < 1)
            throw std::invalid_argument("draw_relative_delays: n_clusters must be >= 1");
        if (!(ds > 0.0))
            throw std::invalid_argument("draw_relative_delays: delay spread must be positive");
        std::vector<double> t(n_clusters);
        for (auto &v : t)
            v = -r_tau * ds * std::log(uniform_open0(rng));
        std::sort(t.begin(), t.end());
        const double t0 = t.front();
        for (auto &v : t)
            v -= t0;
        return t;
    }

    std::vector<double> scale_los_delays(const std::vector<double> &relative, double k)
    {
        const double c = 0.7705 - 0.0433 * k + 0.0002 * k * k + 0.000017 * k * k * k;
        std::vector<double> out(relative);
        for (auto &v : out)
            v /= c;
        return out;
    }

    double draw_excess_delay(const ConditionParameters &p, Rng &rng)
    {
        const double v = std::pow(10.0, normal(rng, p.excess_delay_lg.mu, p.excess_delay_lg.sigma));
        return std::min(v, p.excess_delay_max_s);
    }

    std::vector<double> absolutize_delays(const std::vector<double> &relative, double baseline, double excess,
                                          bool is_deterministic)
    {
        if (!(baseline > 0.0))
            throw std::invalid_argument("absolutize_delays: baseline must be positive");
        if (excess < 0.0)
            throw std::invalid_argument("absolutize_delays: excess must be non-negative");
        std::vector<double> out(relative.size());
        const double shift = baseline + (is_deterministic ? 0.0 : excess);
        for (std::size_t i = 0; i < relative.size(); ++i)
            out[i] = relative[i] + shift;
        return out;
    }

    ClusterPowers draw_cluster_powers(const std::vector<double> &tau, double ds, double r_tau,
                                      double zeta, std::optional<double> k_db, int m, Rng &rng)
    {
        ClusterPowers cp;
        const std::size_t n = tau.size();
        cp.per_cluster.resize(n);
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i)
        {
            const double z = normal(rng, 0.0, zeta);
            cp.per_cluster[i] = std::exp(-tau[i] * (r_tau - 1.0) / (r_tau * ds)) * std::pow(10.0, -z / 10.0);
            sum += cp.per_cluster[i];
        }
        for (auto &p : cp.per_cluster)
            p /= sum;

        cp.for_angles = cp.per_cluster;
        if (k_db && n > 0)
        {
            const double k = std::pow(10.0, *k_db / 10.0);
            for (auto &p : cp.for_angles)
                p /= (k + 1.0);
            cp.for_angles[0] += k / (k + 1.0);
        }

        cp.per_ray.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            cp.per_ray[i].assign(m, cp.per_cluster[i] / m);
        return cp;
    }

    ThresholdResult threshold_clusters(const std::vector<double> &powers, double threshold_db)
    {
        if (powers.empty())
            throw std::invalid_argument("threshold_clusters: empty power list");
        const auto imax = std::size_t(std::max_element(powers.begin(), powers.end()) - powers.begin());
        const double floor = powers[imax] * std::pow(10.0, threshold_db / 10.0);
        ThresholdResult r;
        double sum = 0.0;
        for (std::size_t i = 0; i < powers.size(); ++i)
            if (i == imax || !(powers[i] < floor))
            {
                r.kept.push_back(i);
                r.powers.push_back(powers[i]);
                sum += powers[i];
            }
        if (sum > 0.0)
            for (auto &p : r.powers)
                p /= sum;
        return r;
    }

    static double reflect_zenith_deg(double t)
    {
        t = std::fmod(t, 360.0);
        if (t < 0.0)
            t += 360.0;
        if (t > 180.0)
            t = 360.0 - t;
        return t;
    }

    RayAngles draw_ray_angles(const AngleInputs &in, Rng &rng)
    {
        constexpr double deg = pi / 180.0;
        const std::size_t n = in.powers.size();
        const int m = in.rays_per_cluster;
        const auto &alpha = ray_offsets();
        if (m > 20)
            throw std::invalid_argument("draw_ray_angles: at most 20 rays per cluster");
        if (n == 0)
            return {};

        const bool los = in.condition == Condition::LoS && in.lsp.k_db.has_value();
        double c_phi = azimuth_scaling(in.n_clusters_total);
        double c_theta = zenith_scaling(in.n_clusters_total);
        if (los)
        {
            const double k = *in.lsp.k_db;
            c_phi *= 1.1035 - 0.028 * k - 0.002 * k * k + 0.0001 * k * k * k;
            c_theta *= 1.3086 + 0.0339 * k - 0.0077 * k * k + 0.0002 * k * k * k;
        }
        const double pmax = *std::max_element(in.powers.begin(), in.powers.end());

        // Cluster centers in degrees; 'spread' is the LSP spread of that angle family
        auto azimuth_centers = [&](double spread, double los_deg)
        {
            std::vector<double> c(n);
            double first = 0.0;
            for (std::size_t i = 0; i < n; ++i)
            {
                const double r = std::max(in.powers[i] / pmax, 1e-300);
                const double base = 2.0 * (spread / 1.4) * std::sqrt(-std::log(r)) / c_phi;
                const double x = uniform01(rng) < 0.5 ? -1.0 : 1.0;
                const double y = normal(rng, 0.0, spread / 7.0);
                c[i] = x * base + y;
                if (i == 0)
                    first = c[i];
            }
            for (auto &v : c)
                v = (los ? v - first : v) + los_deg;
            return c;
        };
        auto zenith_centers = [&](double spread, double los_deg, double offset)
        {
            std::vector<double> c(n);
            double first = 0.0;
            for (std::size_t i = 0; i < n; ++i)
            {
                const double r = std::max(in.powers[i] / pmax, 1e-300);
                const double base = -spread * std::log(r) / c_theta;
                const double x = uniform01(rng) < 0.5 ? -1.0 : 1.0;
                const double y = normal(rng, 0.0, spread / 7.0);
                c[i] = x * base + y;
                if (i == 0)
                    first = c[i];
            }
            for (auto &v : c)
                v = los ? v - first + los_deg : v + los_deg + offset;
            return c;
        };

        const double aoa_los = in.los_arrival.azimuth / deg, zoa_los = in.los_arrival.zenith / deg;
        const double aod_los = in.los_departure.azimuth / deg, zod_los = in.los_departure.zenith / deg;
        const auto aoa = azimuth_centers(in.lsp.asa, aoa_los);
        const auto aod = azimuth_centers(in.lsp.asd, aod_los);
        const auto zoa = zenith_centers(in.lsp.zsa, zoa_los, 0.0);
        const auto zod = zenith_centers(in.lsp.zsd, zod_los, in.zod_offset_deg);
        const double c_zsd = 0.375 * std::pow(10.0, in.lg_zsd_mu);

        RayAngles ra;
        ra.departure.resize(n);
        ra.arrival.resize(n);
        for (std::size_t i = 0; i < n; ++i)
        {
            ra.departure[i].resize(m);
            ra.arrival[i].resize(m);
            for (int j = 0; j < m; ++j)
            {
                const double a = alpha[j];
                ra.arrival[i][j] = {reflect_zenith_deg(zoa[i] + in.cluster_zsa_deg * a) * deg,
                                    wrap_azimuth((aoa[i] + in.cluster_asa_deg * a) * deg)};
                ra.departure[i][j] = {reflect_zenith_deg(zod[i] + c_zsd * a) * deg,
                                      wrap_azimuth((aod[i] + in.cluster_asd_deg * a) * deg)};
            }
        }
        return ra;
    }

    // Fisher-Yates with the library's own uniform draw, portable across standard libraries
    static std::vector<std::size_t> permutation(std::size_t n, Rng &rng)
    {
        std::vector<std::size_t> p(n);
        std::iota(p.begin(), p.end(), 0);
        for (std::size_t i = n; i > 1; --i)
        {
            const auto j = std::size_t(uniform01(rng) * double(i));
            std::swap(p[i - 1], p[std::min(j, i - 1)]);
        }
        return p;
    }

    void couple_rays(RayAngles &a, Rng &rng)
    {
        for (std::size_t c = 0; c < a.arrival.size(); ++c)
        {
            auto &dep = a.departure[c];
            auto &arr = a.arrival[c];
            const std::size_t m = arr.size();
            const auto p_aod = permutation(m, rng), p_zod = permutation(m, rng);
            const auto p_aoa = permutation(m, rng), p_zoa = permutation(m, rng);
            const auto dep0 = dep, arr0 = arr;
            for (std::size_t j = 0; j < m; ++j)
            {
                dep[j].azimuth = dep0[p_aod[j]].azimuth;
                dep[j].zenith = dep0[p_zod[j]].zenith;
                arr[j].azimuth = arr0[p_aoa[j]].azimuth;
                arr[j].zenith = arr0[p_zoa[j]].zenith;
            }
        }
    }

    std::vector<double> draw_xpr(double mu_db, double sigma_db, std::size_t count, Rng &rng)
    {
        if (sigma_db < 0.0)
            throw std::invalid_argument("draw_xpr: sigma must be non-negative");
        std::vector<double> k(count);
        for (auto &v : k)
            v = std::pow(10.0, normal(rng, mu_db, sigma_db) / 10.0);
        return k;
    }

    std::vector<PhaseQuad> draw_phases(std::size_t count, Rng &rng)
    {
        std::vector<PhaseQuad> p(count);
        for (auto &q : p)
            for (auto &v : q)
                v = uniform_phase(rng);
        return p;
    }

    std::vector<std::vector<double>> ray_delays(const std::vector<double> &delays, const std::vector<double> &powers,
                                                double c_ds, int m)
    {
        const std::size_t n = delays.size();
        std::vector<std::vector<double>> out(n);
        for (std::size_t i = 0; i < n; ++i)
            out[i].assign(m, delays[i]);
        if (m != 20 || n == 0)
            return out;

        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b)
                         { return powers[a] > powers[b]; });

        // Ray groups (0-based) of the second and third sub-cluster
        static const int sub2[] = {8, 9, 10, 11, 16, 17};
        static const int sub3[] = {12, 13, 14, 15};
        for (std::size_t k = 0; k < std::min<std::size_t>(2, n); ++k)
        {
            auto &r = out[order[k]];
            for (int j : sub2)
                r[j] += 1.28 * c_ds;
            for (int j : sub3)
                r[j] += 2.56 * c_ds;
        }
        return out;
    }

    ClusterPartition partition_clusters(const std::vector<double> &delays, const std::vector<double> &powers,
                                        std::size_t n_det, DeterministicSelection sel,
                                        const std::vector<std::size_t> &explicit_indices)
    {
        const std::size_t n = delays.size();
        std::vector<bool> is_det(n, false);
        n_det = std::min(n_det, n);
        if (sel == DeterministicSelection::explicit_indices)
        {
            for (auto i : explicit_indices)
                if (i < n)
                    is_det[i] = true;
        }
        else
        {
            std::vector<std::size_t> order(n);
            std::iota(order.begin(), order.end(), 0);
            if (sel == DeterministicSelection::strongest)
                std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b)
                                 { return powers[a] > powers[b]; });
            else
                std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b)
                                 { return delays[a] < delays[b]; });
            for (std::size_t k = 0; k < n_det; ++k)
                is_det[order[k]] = true;
        }

        std::vector<std::size_t> by_delay(n);
        std::iota(by_delay.begin(), by_delay.end(), 0);
        std::stable_sort(by_delay.begin(), by_delay.end(), [&](std::size_t a, std::size_t b)
                         { return delays[a] < delays[b]; });
        ClusterPartition p;
        for (auto i : by_delay)
            (is_det[i] ? p.deterministic : p.stochastic).push_back(i);
        return p;
    }

    LinkClusters generate_link_clusters(const LinkState &link, const ConditionParameters &params,
                                        const SphericalAngles &los_departure, const SphericalAngles &los_arrival,
                                        double cluster_threshold_db, Rng &rng)
    {
        LinkClusters lc;
        lc.condition = link.condition;
        lc.baseline = link.distance_3d / speed_of_light;
        lc.rays_per_cluster = params.rays_per_cluster;
        lc.cluster_ds_s = params.cluster_ds_ns * 1e-9;
        lc.xpr_mu_db = params.xpr_db.mu;
        lc.xpr_sigma_db = params.xpr_db.sigma;

        const double ds = link.lsp.delay_spread;
        const double r_tau = params.delay_scaling;
        const auto tau = draw_relative_delays(params.n_clusters, ds, r_tau, rng);
        const auto pw = draw_cluster_powers(tau, ds, r_tau, params.cluster_shadowing_db, link.lsp.k_db,
                                            params.rays_per_cluster, rng);
        const auto kept = threshold_clusters(pw.per_cluster, cluster_threshold_db);

        const bool los = link.condition == Condition::LoS && link.lsp.k_db.has_value();
        const auto tau_scaled = los ? scale_los_delays(tau, *link.lsp.k_db) : tau;

        AngleInputs ai;
        ai.n_clusters_total = params.n_clusters;
        ai.rays_per_cluster = params.rays_per_cluster;
        ai.lsp = link.lsp;
        ai.los_departure = los_departure;
        ai.los_arrival = los_arrival;
        ai.condition = link.condition;
        ai.cluster_asd_deg = params.cluster_asd_deg;
        ai.cluster_asa_deg = params.cluster_asa_deg;
        ai.cluster_zsa_deg = params.cluster_zsa_deg;
        ai.lg_zsd_mu = params.lg_zsd.mu;
        ai.zod_offset_deg = params.zod_offset_deg;
        for (auto i : kept.kept)
        {
            lc.relative_delay.push_back(tau_scaled[i]);
            lc.is_los_cluster.push_back(i == 0);
            ai.powers.push_back(pw.for_angles[i]);
        }
        lc.power = kept.powers;

        lc.angles = draw_ray_angles(ai, rng);
        couple_rays(lc.angles, rng);

        const std::size_t n = lc.power.size();
        const std::size_t m = params.rays_per_cluster;
        lc.xpr.resize(n);
        lc.phases.resize(n);
        for (std::size_t i = 0; i < n; ++i)
        {
            lc.xpr[i] = draw_xpr(params.xpr_db.mu, params.xpr_db.sigma, m, rng);
            lc.phases[i] = draw_phases(m, rng);
        }
        lc.excess = draw_excess_delay(params, rng);
        return lc;
    }
}
