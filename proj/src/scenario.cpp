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

#include "isac/scenario.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>

using json = nlohmann::json;

namespace isac
{
    std::string to_string(Condition c)
    {
        return c == Condition::LoS ? "LoS" : "NLoS";
    }

    std::string to_string(ScenarioKind::Kind k)
    {
        switch (k)
        {
        case ScenarioKind::UMa:
            return "uma";
        case ScenarioKind::UMi:
            return "umi";
        case ScenarioKind::InF:
            return "inf";
        }
        return "";
    }

    ScenarioKind::Kind parse_scenario_kind(const std::string &name)
    {
        std::string s = name;
        std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c)
                       { return (char)std::tolower(c); });
        if (s == "uma")
            return ScenarioKind::UMa;
        if (s == "umi")
            return ScenarioKind::UMi;
        if (s == "inf")
            return ScenarioKind::InF;
        throw ParameterError("unknown scenario '" + name + "'");
    }

    void ScenarioKind::validate() const
    {
        if (!(clutter_density >= 0.0 && clutter_density <= 1.0))
            throw ParameterError("clutter_density must be in [0, 1]");
        if (!(clutter_height > 0.0))
            throw ParameterError("clutter_height must be positive");
        if (!(clutter_size > 0.0))
            throw ParameterError("clutter_size must be positive");
    }

    double LinkGeometry::distance_2d() const
    {
        const double dx = b.x - a.x, dy = b.y - a.y;
        return std::sqrt(dx * dx + dy * dy);
    }

    // ---- parameter tables ----

    static LogNormalParam read_param(const json &j, const char *key)
    {
        if (!j.contains(key))
            throw ParameterError(std::string("missing field '") + key + "'");
        const auto &o = j.at(key);
        return {o.at("mu").get<double>(), o.at("sigma").get<double>()};
    }

    static double read_scalar(const json &j, const char *key)
    {
        if (!j.contains(key))
            throw ParameterError(std::string("missing field '") + key + "'");
        return j.at(key).get<double>();
    }

    static ConditionParameters parse_condition(const json &j)
    {
        ConditionParameters p;
        p.scenario = j.at("scenario").get<std::string>();
        p.condition = j.at("condition").get<std::string>();
        p.carrier_hz = read_scalar(j, "carrier_hz");
        p.n_clusters = j.at("n_clusters").get<int>();
        p.rays_per_cluster = j.at("rays_per_cluster").get<int>();
        p.lg_ds = read_param(j, "lg_ds");
        p.lg_asd = read_param(j, "lg_asd");
        p.lg_asa = read_param(j, "lg_asa");
        p.lg_zsa = read_param(j, "lg_zsa");
        p.lg_zsd = read_param(j, "lg_zsd");
        p.zod_offset_deg = read_scalar(j, "zod_offset_deg");
        p.shadow_fading_sigma_db = read_scalar(j, "shadow_fading_sigma_db");
        p.delay_scaling = read_scalar(j, "delay_scaling");
        p.xpr_db = read_param(j, "xpr_db");
        p.cluster_shadowing_db = read_scalar(j, "cluster_shadowing_db");
        p.cluster_ds_ns = read_scalar(j, "cluster_ds_ns");
        p.cluster_asd_deg = read_scalar(j, "cluster_asd_deg");
        p.cluster_asa_deg = read_scalar(j, "cluster_asa_deg");
        p.cluster_zsa_deg = read_scalar(j, "cluster_zsa_deg");
        p.excess_delay_lg = read_param(j, "excess_delay_lg");
        p.excess_delay_max_s = j.at("excess_delay_lg").value("max_s", 2e-6);

        const bool los = p.condition == "LoS";
        if (!los && p.condition != "NLoS")
            throw ParameterError("condition must be 'LoS' or 'NLoS'");
        if (los)
            p.k_factor_db = read_param(j, "k_factor_db");

        const auto &c = j.at("correlation");
        const std::size_t n = los ? 7 : 6;
        if (c.size() != n)
            throw ParameterError("correlation matrix must be " + std::to_string(n) + "x" + std::to_string(n));
        p.correlation.resize((Eigen::Index)n, (Eigen::Index)n);
        for (std::size_t r = 0; r < n; ++r)
        {
            if (c[r].size() != n)
                throw ParameterError("correlation matrix row has wrong length");
            for (std::size_t k = 0; k < n; ++k)
                p.correlation((Eigen::Index)r, (Eigen::Index)k) = c[r][k].get<double>();
        }

        if (p.n_clusters < 1 || p.rays_per_cluster < 1)
            throw ParameterError("n_clusters and rays_per_cluster must be >= 1");
        for (const auto *lp : {&p.lg_ds, &p.lg_asd, &p.lg_asa, &p.lg_zsa, &p.lg_zsd, &p.xpr_db, &p.k_factor_db, &p.excess_delay_lg})
            if (lp->sigma < 0.0)
                throw ParameterError("negative standard deviation in parameter table");
        if (p.shadow_fading_sigma_db < 0.0 || p.cluster_shadowing_db < 0.0 || p.delay_scaling <= 0.0)
            throw ParameterError("invalid shadowing or delay scaling");
        if ((p.correlation - p.correlation.transpose()).cwiseAbs().maxCoeff() > 1e-12)
            throw ParameterError("correlation matrix is not symmetric");

        Eigen::LLT<Eigen::MatrixXd> llt(p.correlation);
        if (llt.info() != Eigen::Success)
            throw ParameterError("correlation matrix is not positive definite");
        p.sqrt_correlation = llt.matrixL();
        return p;
    }

    ConditionParameters load_condition_parameters(const std::string &path)
    {
        std::ifstream f(path);
        if (!f)
            throw ParameterError("cannot open parameter table '" + path + "'");
        json j;
        try
        {
            f >> j;
            return parse_condition(j);
        }
        catch (const json::exception &e)
        {
            throw ParameterError("parameter table '" + path + "': " + e.what());
        }
    }

    ScenarioParameterTable load_parameter_table(const std::string &los_path, const std::string &nlos_path)
    {
        ScenarioParameterTable t;
        t.los = load_condition_parameters(los_path);
        t.nlos = load_condition_parameters(nlos_path);
        if (!t.los.has_k() || t.nlos.has_k())
            throw ParameterError("LoS table needs 7 correlated parameters, NLoS table 6");
        return t;
    }

    std::string default_data_dir()
    {
        if (const char *env = std::getenv("ISAC_DATA_DIR"))
            return env;
#ifdef ISAC_DATA_DIR
        return ISAC_DATA_DIR;
#else
        return "data";
#endif
    }

    ScenarioParameterTable load_default_table(ScenarioKind::Kind kind, const std::string &data_dir)
    {
        const std::string dir = (data_dir.empty() ? default_data_dir() : data_dir) + "/scenarios/";
        const std::string name = to_string(kind);
        return load_parameter_table(dir + name + "_los.json", dir + name + "_nlos.json");
    }

    // ---- LoS probability ----

    double los_probability(const LinkGeometry &link, const ScenarioKind &sc)
    {
        const double d = link.distance_2d();
        const double h_bs = std::max(link.a.z, link.b.z);
        const double h_ut = std::min(link.a.z, link.b.z);
        switch (sc.kind)
        {
        case ScenarioKind::UMi:
            if (d <= 18.0)
                return 1.0;
            return 18.0 / d + std::exp(-d / 36.0) * (1.0 - 18.0 / d);
        case ScenarioKind::UMa:
        {
            if (d <= 18.0)
                return 1.0;
            const double c = h_ut <= 13.0 ? 0.0 : std::pow((h_ut - 13.0) / 10.0, 1.5);
            return (18.0 / d + std::exp(-d / 63.0) * (1.0 - 18.0 / d)) *
                   (1.0 + c * 1.25 * std::pow(d / 100.0, 3.0) * std::exp(-d / 150.0));
        }
        case ScenarioKind::InF:
        {
            const double hc = sc.clutter_height;
            if (h_ut >= hc)
                return 1.0; // both ends above the clutter
            const double r = sc.clutter_density;
            if (r <= 0.0)
                return 1.0;
            if (r >= 1.0)
                return d > 0.0 ? 0.0 : 1.0;
            double k = -sc.clutter_size / std::log(1.0 - r);
            if (h_bs > hc)
                k *= (h_bs - h_ut) / (hc - h_ut);
            return std::exp(-d / k);
        }
        }
        return 1.0;
    }

    Condition assign_condition(const LinkGeometry &link, const ScenarioKind &scenario, Rng &rng,
                               std::optional<Condition> forced)
    {
        const double u = uniform01(rng); // consumed even when forced, keeps streams aligned
        if (forced)
            return *forced;
        return u < los_probability(link, scenario) ? Condition::LoS : Condition::NLoS;
    }

    // ---- path loss ----

    double free_space_path_loss(double distance_m, double carrier_hz)
    {
        return 20.0 * std::log10(4.0 * pi * distance_m * carrier_hz / speed_of_light);
    }

    double path_loss(const LinkGeometry &link, Condition condition, const ScenarioKind &sc, double carrier_hz)
    {
        const double fc = carrier_hz / 1e9;
        if (!(fc >= 0.5 && fc <= 100.0))
            throw ParameterError("carrier frequency outside 0.5-100 GHz path-loss validity");
        const double d3 = link.distance_3d();
        const double d2 = link.distance_2d();
        const double d_max = sc.kind == ScenarioKind::InF ? 600.0 : 5000.0;
        if (!(d3 > 1.0) || d3 > d_max)
            throw ParameterError("link distance outside path-loss validity range");

        const double h_bs = std::max(link.a.z, link.b.z);
        const double h_ut = std::min(link.a.z, link.b.z);
        const double lfc = std::log10(fc);
        const double ld = std::log10(d3);

        auto breakpoint = [&]
        {
            const double hb = std::max(h_bs - 1.0, 0.1), hu = std::max(h_ut - 1.0, 0.1);
            return 4.0 * hb * hu * carrier_hz / speed_of_light;
        };

        double los = 0.0, nlos = 0.0;
        switch (sc.kind)
        {
        case ScenarioKind::UMa:
        {
            const double bp = breakpoint();
            los = d2 <= bp ? 28.0 + 22.0 * ld + 20.0 * lfc
                           : 28.0 + 40.0 * ld + 20.0 * lfc - 9.0 * std::log10(bp * bp + (h_bs - h_ut) * (h_bs - h_ut));
            nlos = 13.54 + 39.08 * ld + 20.0 * lfc - 0.6 * (h_ut - 1.5);
            break;
        }
        case ScenarioKind::UMi:
        {
            const double bp = breakpoint();
            los = d2 <= bp ? 32.4 + 21.0 * ld + 20.0 * lfc
                           : 32.4 + 40.0 * ld + 20.0 * lfc - 9.5 * std::log10(bp * bp + (h_bs - h_ut) * (h_bs - h_ut));
            nlos = 35.3 * ld + 22.4 + 21.3 * lfc - 0.3 * (h_ut - 1.5);
            break;
        }
        case ScenarioKind::InF:
        {
            los = 31.84 + 21.5 * ld + 19.0 * lfc;
            const bool dense = sc.clutter_density >= 0.4;
            const bool high = h_bs > sc.clutter_height;
            if (!dense && !high)
                nlos = 33.0 + 25.5 * ld + 20.0 * lfc;
            else if (dense && !high)
                nlos = 18.6 + 35.7 * ld + 20.0 * lfc;
            else if (!dense && high)
                nlos = 32.4 + 23.0 * ld + 20.0 * lfc;
            else
                nlos = 33.63 + 21.9 * ld + 20.0 * lfc;
            break;
        }
        }
        return condition == Condition::LoS ? los : std::max(los, nlos);
    }

    // ---- large-scale parameters ----

    LspSet draw_lsps(Condition condition, const ScenarioParameterTable &table, Rng &rng)
    {
        const ConditionParameters &p = table.at(condition);
        const Eigen::Index n = p.correlation.rows();
        Eigen::VectorXd z(n);
        for (Eigen::Index i = 0; i < n; ++i)
            z(i) = standard_normal(rng);
        const Eigen::VectorXd x = p.sqrt_correlation * z;

        LspSet l;
        Eigen::Index i = 0;
        l.shadow_fading_db = p.shadow_fading_sigma_db * x(i++);
        if (p.has_k())
            l.k_db = p.k_factor_db.mu + p.k_factor_db.sigma * x(i++);
        l.delay_spread = std::pow(10.0, p.lg_ds.mu + p.lg_ds.sigma * x(i++));
        l.asd = std::min(std::pow(10.0, p.lg_asd.mu + p.lg_asd.sigma * x(i++)), 104.0);
        l.asa = std::min(std::pow(10.0, p.lg_asa.mu + p.lg_asa.sigma * x(i++)), 104.0);
        l.zsd = std::min(std::pow(10.0, p.lg_zsd.mu + p.lg_zsd.sigma * x(i++)), 52.0);
        l.zsa = std::min(std::pow(10.0, p.lg_zsa.mu + p.lg_zsa.sigma * x(i++)), 52.0);
        return l;
    }

    int target_channel_condition(Condition tx_target, Condition target_rx)
    {
        if (tx_target == Condition::LoS)
            return target_rx == Condition::LoS ? 1 : 2;
        return target_rx == Condition::LoS ? 3 : 4;
    }
}
