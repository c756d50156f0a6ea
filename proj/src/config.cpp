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

#include "isac/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace isac
{
    using nlohmann::json;

    namespace
    {
        json vec_json(const Vec3 &v) { return json::array({v.x, v.y, v.z}); }

        Vec3 vec_from(const json &j, const std::string &where)
        {
            if (!j.is_array() || j.size() != 3)
                throw ConfigError(where + ": expected [x, y, z]");
            return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
        }

        json velocity_json(const Velocity &v)
        {
            return {{"speed_mps", v.speed},
                    {"zenith_rad", v.direction.zenith},
                    {"azimuth_rad", v.direction.azimuth}};
        }

        Velocity velocity_from(const json &j)
        {
            Velocity v;
            v.speed = j.at("speed_mps").get<double>();
            v.direction = normalize_angles(j.at("zenith_rad").get<double>(), j.at("azimuth_rad").get<double>());
            return v;
        }

        std::string pattern_name(FieldPattern::Kind k)
        {
            return k == FieldPattern::isotropic ? "isotropic" : "tr38901";
        }

        FieldPattern::Kind parse_pattern(const std::string &s)
        {
            if (s == "isotropic")
                return FieldPattern::isotropic;
            if (s == "tr38901")
                return FieldPattern::tr38901_element;
            throw ConfigError("unknown antenna pattern '" + s + "'");
        }

        std::string selection_name(DeterministicSelection s)
        {
            switch (s)
            {
            case DeterministicSelection::strongest:
                return "strongest";
            case DeterministicSelection::first:
                return "first";
            default:
                return "explicit";
            }
        }

        DeterministicSelection parse_selection(const std::string &s)
        {
            if (s == "strongest")
                return DeterministicSelection::strongest;
            if (s == "first")
                return DeterministicSelection::first;
            if (s == "explicit")
                return DeterministicSelection::explicit_indices;
            throw ConfigError("unknown cluster selection '" + s + "'");
        }

        json condition_json(const std::optional<Condition> &c)
        {
            return c ? json(to_string(*c)) : json(nullptr);
        }

        std::optional<Condition> condition_from(const json &j)
        {
            if (j.is_null())
                return std::nullopt;
            const auto s = j.get<std::string>();
            if (s == "LoS")
                return Condition::LoS;
            if (s == "NLoS")
                return Condition::NLoS;
            throw ConfigError("forced condition must be \"LoS\", \"NLoS\" or null");
        }

        json node_json(const NodeConfig &n)
        {
            return {{"position", vec_json(n.position)},
                    {"velocity", velocity_json(n.velocity)},
                    {"array",
                     {{"rows", n.rows},
                      {"cols", n.cols},
                      {"spacing_wavelengths", n.spacing_wavelengths},
                      {"boresight_azimuth_deg", n.boresight_azimuth_deg ? json(*n.boresight_azimuth_deg) : json(nullptr)},
                      {"pattern", pattern_name(n.pattern)}}}};
        }

        NodeConfig node_from(const json &j, const std::string &where)
        {
            NodeConfig n;
            n.position = vec_from(j.at("position"), where + ".position");
            n.velocity = velocity_from(j.at("velocity"));
            const auto &a = j.at("array");
            n.rows = a.at("rows").get<int>();
            n.cols = a.at("cols").get<int>();
            n.spacing_wavelengths = a.at("spacing_wavelengths").get<double>();
            if (!a.at("boresight_azimuth_deg").is_null())
                n.boresight_azimuth_deg = a.at("boresight_azimuth_deg").get<double>();
            n.pattern = parse_pattern(a.at("pattern").get<std::string>());
            return n;
        }

        json target_json(const TargetConfig &t)
        {
            json offs = json::array();
            for (const auto &o : t.sp_offsets)
                offs.push_back(vec_json(o));
            return {{"position", vec_json(t.position)},
                    {"sp_count", t.sp_count},
                    {"sp_offsets", offs},
                    {"rcs",
                     {{"model", t.rcs.kind == RcsModel::constant ? "constant" : "lognormal"},
                      {"value_m2", t.rcs.value_m2},
                      {"a_dbsm", t.rcs.a_dbsm},
                      {"b1_db", t.rcs.b1_db},
                      {"b2_db", t.rcs.b2_db}}},
                    {"rcs_split", t.rcs_split == TargetConfig::amplitude ? "amplitude" : "power"},
                    {"velocity", velocity_json(t.velocity)}};
        }

        TargetConfig target_from(const json &j)
        {
            TargetConfig t;
            t.position = vec_from(j.at("position"), "target.position");
            t.sp_count = j.at("sp_count").get<int>();
            for (const auto &o : j.at("sp_offsets"))
                t.sp_offsets.push_back(vec_from(o, "target.sp_offsets"));
            const auto &r = j.at("rcs");
            const auto model = r.at("model").get<std::string>();
            if (model == "constant")
                t.rcs.kind = RcsModel::constant;
            else if (model == "lognormal")
                t.rcs.kind = RcsModel::lognormal;
            else
                throw ConfigError("unknown RCS model '" + model + "'");
            t.rcs.value_m2 = r.at("value_m2").get<double>();
            t.rcs.a_dbsm = r.at("a_dbsm").get<double>();
            t.rcs.b1_db = r.at("b1_db").get<double>();
            t.rcs.b2_db = r.at("b2_db").get<double>();
            const auto split = j.at("rcs_split").get<std::string>();
            if (split == "amplitude")
                t.rcs_split = TargetConfig::amplitude;
            else if (split == "power")
                t.rcs_split = TargetConfig::power;
            else
                throw ConfigError("unknown rcs_split '" + split + "'");
            t.velocity = velocity_from(j.at("velocity"));
            return t;
        }

        // Overlays 'patch' on 'base'; keys unknown to 'base' are rejected
        void merge_strict(json &base, const json &patch, const std::string &path)
        {
            if (!patch.is_object())
                throw ConfigError(path.empty() ? "config root must be an object" : path + ": expected an object");
            for (auto it = patch.begin(); it != patch.end(); ++it)
            {
                const std::string key = path.empty() ? it.key() : path + "." + it.key();
                if (!base.contains(it.key()))
                    throw ConfigError("unknown config key '" + key + "'");
                json &b = base[it.key()];
                if (b.is_object() && it->is_object())
                    merge_strict(b, *it, key);
                else
                    b = *it;
            }
        }

        void normalize_targets(json &j)
        {
            const json def = target_json(TargetConfig{});
            if (!j["targets"].is_array())
                throw ConfigError("targets: expected an array");
            for (auto &t : j["targets"])
            {
                json full = def;
                merge_strict(full, t, "targets[]");
                t = full;
            }
        }

        void require(bool ok, const std::string &msg)
        {
            if (!ok)
                throw ConfigError(msg);
        }
    }

    RunConfig default_config()
    {
        RunConfig c;
        c.scenario.kind = ScenarioKind::UMi;
        c.tx.position = {0.0, 0.0, 5.0};
        c.rx.position = {0.0, 5.0, 5.0};
        c.targets.push_back(TargetConfig{});
        return c;
    }

    json config_to_json(const RunConfig &c)
    {
        json targets = json::array();
        for (const auto &t : c.targets)
            targets.push_back(target_json(t));
        json roc_pos = json::array();
        for (const auto &p : c.roc.target_positions)
            roc_pos.push_back(vec_json(p));

        return {
            {"scenario",
             {{"name", to_string(c.scenario.kind)},
              {"clutter_density", c.scenario.clutter_density},
              {"clutter_height_m", c.scenario.clutter_height},
              {"clutter_size_m", c.scenario.clutter_size},
              {"parameter_dir", c.parameter_dir}}},
            {"tx", node_json(c.tx)},
            {"rx", node_json(c.rx)},
            {"targets", targets},
            {"deterministic_clusters",
             {{"count_tx_target", c.clusters.count_tx_target},
              {"count_target_rx", c.clusters.count_target_rx},
              {"sp_count", c.clusters.sp_count},
              {"rcs_m2", c.clusters.rcs_m2},
              {"velocity", velocity_json(c.clusters.velocity)},
              {"xpr_db", c.clusters.xpr_db},
              {"selection", selection_name(c.clusters.selection)},
              {"indices_tx_target", c.clusters.indices_tx_target},
              {"indices_target_rx", c.clusters.indices_target_rx}}},
            {"forced_conditions",
             {{"background", condition_json(c.forced.background)},
              {"tx_target", condition_json(c.forced.tx_target)},
              {"target_rx", condition_json(c.forced.target_rx)}}},
            {"waveform",
             {{"n_subcarriers", c.waveform.n_subcarriers},
              {"cp_length", c.waveform.cp_length},
              {"modulation", c.waveform.modulation},
              {"carrier_hz", c.waveform.carrier_hz},
              {"sample_rate_hz", c.waveform.sample_rate_hz},
              {"oversampling", c.waveform.oversampling}}},
            {"snapshots", {{"count", c.n_snapshots}, {"interval_s", c.snapshot_interval_s}}},
            {"thresholds", {{"cluster_db", c.cluster_threshold_db}, {"path_db", c.path_threshold_db}}},
            {"target_power", c.target_power},
            {"discretization", c.discretization},
            {"run", {{"drops", c.drops}, {"seed", c.seed}, {"threads", c.threads}}},
            {"experiments",
             {{"ber",
               {{"snr_db", c.ber.snr_db},
                {"min_bits", c.ber.min_bits},
                {"min_errors", c.ber.min_errors},
                {"include_baseline", c.ber.include_baseline}}},
              {"capacity",
               {{"rcs_m2", c.capacity.rcs_m2},
                {"snr_db", c.capacity.snr_db},
                {"include_baseline", c.capacity.include_baseline}}},
              {"range", {{"snr_db", c.range.snr_db}, {"rcs_m2", c.range.rcs_m2}, {"ifft_size", c.range.ifft_size}}},
              {"roc",
               {{"tx", vec_json(c.roc.tx)},
                {"rx", vec_json(c.roc.rx)},
                {"target_positions", roc_pos},
                {"labels", c.roc.labels},
                {"rcs_m2", c.roc.rcs_m2},
                {"sensing_snr_db", c.roc.sensing_snr_db},
                {"reference_rcs_m2", c.roc.reference_rcs_m2},
                {"reference_geometry", c.roc.reference_geometry},
                {"gate_lead_bins", c.roc.gate_lead_bins},
                {"gate_tail_bins", c.roc.gate_tail_bins},
                {"max_gate_bins", c.roc.max_gate_bins},
                {"n_thresholds", c.roc.n_thresholds},
                {"drops", c.roc.drops}}},
              {"export", {{"drops", c.export_drops}}}}}};
    }

    RunConfig config_from_json(const json &user)
    {
        json j = config_to_json(default_config());
        merge_strict(j, user, "");
        normalize_targets(j);

        RunConfig c;
        try
        {
            const auto &s = j.at("scenario");
            c.scenario.kind = parse_scenario_kind(s.at("name").get<std::string>());
            c.scenario.clutter_density = s.at("clutter_density").get<double>();
            c.scenario.clutter_height = s.at("clutter_height_m").get<double>();
            c.scenario.clutter_size = s.at("clutter_size_m").get<double>();
            c.parameter_dir = s.at("parameter_dir").get<std::string>();

            c.tx = node_from(j.at("tx"), "tx");
            c.rx = node_from(j.at("rx"), "rx");
            for (const auto &t : j.at("targets"))
                c.targets.push_back(target_from(t));

            const auto &d = j.at("deterministic_clusters");
            c.clusters.count_tx_target = d.at("count_tx_target").get<int>();
            c.clusters.count_target_rx = d.at("count_target_rx").get<int>();
            c.clusters.sp_count = d.at("sp_count").get<int>();
            c.clusters.rcs_m2 = d.at("rcs_m2").get<double>();
            c.clusters.velocity = velocity_from(d.at("velocity"));
            c.clusters.xpr_db = d.at("xpr_db").get<double>();
            c.clusters.selection = parse_selection(d.at("selection").get<std::string>());
            c.clusters.indices_tx_target = d.at("indices_tx_target").get<std::vector<std::size_t>>();
            c.clusters.indices_target_rx = d.at("indices_target_rx").get<std::vector<std::size_t>>();

            const auto &f = j.at("forced_conditions");
            c.forced.background = condition_from(f.at("background"));
            c.forced.tx_target = condition_from(f.at("tx_target"));
            c.forced.target_rx = condition_from(f.at("target_rx"));

            const auto &w = j.at("waveform");
            c.waveform.n_subcarriers = w.at("n_subcarriers").get<int>();
            c.waveform.cp_length = w.at("cp_length").get<int>();
            c.waveform.modulation = w.at("modulation").get<std::string>();
            c.waveform.carrier_hz = w.at("carrier_hz").get<double>();
            c.waveform.sample_rate_hz = w.at("sample_rate_hz").get<double>();
            c.waveform.oversampling = w.at("oversampling").get<int>();

            c.n_snapshots = j.at("snapshots").at("count").get<int>();
            c.snapshot_interval_s = j.at("snapshots").at("interval_s").get<double>();
            c.cluster_threshold_db = j.at("thresholds").at("cluster_db").get<double>();
            c.path_threshold_db = j.at("thresholds").at("path_db").get<double>();
            c.target_power = j.at("target_power").get<std::string>();
            c.discretization = j.at("discretization").get<std::string>();

            const auto &r = j.at("run");
            c.drops = r.at("drops").get<int>();
            c.seed = r.at("seed").get<std::uint64_t>();
            c.threads = r.at("threads").get<int>();

            const auto &e = j.at("experiments");
            const auto &b = e.at("ber");
            c.ber.snr_db = b.at("snr_db").get<std::vector<double>>();
            c.ber.min_bits = b.at("min_bits").get<std::uint64_t>();
            c.ber.min_errors = b.at("min_errors").get<std::uint64_t>();
            c.ber.include_baseline = b.at("include_baseline").get<bool>();
            const auto &cap = e.at("capacity");
            c.capacity.rcs_m2 = cap.at("rcs_m2").get<std::vector<double>>();
            c.capacity.snr_db = cap.at("snr_db").get<double>();
            c.capacity.include_baseline = cap.at("include_baseline").get<bool>();
            const auto &rg = e.at("range");
            c.range.snr_db = rg.at("snr_db").get<std::vector<double>>();
            c.range.rcs_m2 = rg.at("rcs_m2").get<double>();
            c.range.ifft_size = rg.at("ifft_size").get<int>();
            const auto &ro = e.at("roc");
            c.roc.tx = vec_from(ro.at("tx"), "roc.tx");
            c.roc.rx = vec_from(ro.at("rx"), "roc.rx");
            c.roc.target_positions.clear();
            for (const auto &p : ro.at("target_positions"))
                c.roc.target_positions.push_back(vec_from(p, "roc.target_positions"));
            c.roc.labels = ro.at("labels").get<std::vector<std::string>>();
            c.roc.rcs_m2 = ro.at("rcs_m2").get<std::vector<double>>();
            c.roc.sensing_snr_db = ro.at("sensing_snr_db").get<double>();
            c.roc.reference_rcs_m2 = ro.at("reference_rcs_m2").get<double>();
            c.roc.reference_geometry = ro.at("reference_geometry").get<std::size_t>();
            c.roc.gate_lead_bins = ro.at("gate_lead_bins").get<int>();
            c.roc.gate_tail_bins = ro.at("gate_tail_bins").get<int>();
            c.roc.max_gate_bins = ro.at("max_gate_bins").get<int>();
            c.roc.n_thresholds = ro.at("n_thresholds").get<int>();
            c.roc.drops = ro.at("drops").get<int>();
            c.export_drops = e.at("export").at("drops").get<int>();
        }
        catch (const json::exception &ex)
        {
            throw ConfigError(std::string("config type error: ") + ex.what());
        }
        catch (const std::invalid_argument &ex)
        {
            throw ConfigError(ex.what());
        }
        c.validate();
        return c;
    }

    void RunConfig::validate() const
    {
        try
        {
            scenario.validate();
            for (const auto &t : targets)
            {
                t.rcs.validate();
                require(t.sp_count >= 1, "targets: sp_count must be at least 1");
                require(t.sp_offsets.empty() || int(t.sp_offsets.size()) == t.sp_count,
                        "targets: sp_offsets must be empty or list sp_count entries");
                require(t.velocity.speed >= 0.0, "targets: speed must be non-negative");
            }
        }
        catch (const std::invalid_argument &ex)
        {
            throw ConfigError(ex.what());
        }
        for (const NodeConfig *n : {&tx, &rx})
        {
            require(n->rows >= 1 && n->cols >= 1, "array rows and cols must be at least 1");
            require(n->spacing_wavelengths > 0.0, "array spacing must be positive");
            require(n->velocity.speed >= 0.0, "node speed must be non-negative");
        }
        require(distance(tx.position, rx.position) > 1e-9, "Tx and Rx coincide");
        require(clusters.count_tx_target >= 0 && clusters.count_target_rx >= 0,
                "deterministic cluster counts must be non-negative");
        require(clusters.sp_count >= 1, "deterministic_clusters.sp_count must be at least 1");
        require(clusters.rcs_m2 >= 0.0, "deterministic_clusters.rcs_m2 must be non-negative");
        require(clusters.velocity.speed >= 0.0, "deterministic cluster speed must be non-negative");
        require(waveform.n_subcarriers >= 2, "waveform.n_subcarriers must be at least 2");
        require(waveform.cp_length >= 0 && waveform.cp_length < waveform.n_subcarriers,
                "waveform.cp_length must be in [0, n_subcarriers)");
        require(waveform.modulation == "qpsk", "waveform.modulation: only \"qpsk\" (4-QAM) is supported");
        require(waveform.carrier_hz >= 0.5e9 && waveform.carrier_hz <= 100e9, "waveform.carrier_hz must be in 0.5-100 GHz");
        require(waveform.sample_rate_hz > 0.0, "waveform.sample_rate_hz must be positive");
        require(waveform.oversampling >= 1, "waveform.oversampling must be at least 1");
        require(n_snapshots >= 1, "snapshots.count must be at least 1");
        require(snapshot_interval_s > 0.0, "snapshots.interval_s must be positive");
        require(cluster_threshold_db <= 0.0 && path_threshold_db <= 0.0, "thresholds must be <= 0 dB");
        require(target_power == "bistatic_radar" || target_power == "unit",
                "target_power must be \"bistatic_radar\" or \"unit\"");
        require(discretization == "nearest_bin" || discretization == "sinc_windowed",
                "discretization must be \"nearest_bin\" or \"sinc_windowed\"");
        require(drops >= 1, "run.drops must be at least 1");
        require(threads >= 0, "run.threads must be non-negative");
        require(!ber.snr_db.empty() && ber.min_bits > 0, "experiments.ber needs an SNR grid and min_bits > 0");
        for (double r : capacity.rcs_m2)
            require(r >= 0.0, "experiments.capacity.rcs_m2 must be non-negative");
        require(!range.snr_db.empty() && range.rcs_m2 >= 0.0, "experiments.range needs an SNR grid and rcs_m2 >= 0");
        require(range.ifft_size >= 16, "experiments.range.ifft_size must be at least 16");
        require(!roc.target_positions.empty() && roc.labels.size() == roc.target_positions.size(),
                "experiments.roc: one label per target position");
        require(roc.reference_geometry < roc.target_positions.size(), "experiments.roc.reference_geometry out of range");
        for (double r : roc.rcs_m2)
            require(r >= 0.0, "experiments.roc.rcs_m2 must be non-negative");
        require(roc.reference_rcs_m2 > 0.0, "experiments.roc.reference_rcs_m2 must be positive");
        require(roc.gate_lead_bins >= 0 && roc.gate_tail_bins >= 0 && roc.max_gate_bins >= 1,
                "experiments.roc gate bins must be non-negative");
        require(roc.n_thresholds >= 2, "experiments.roc.n_thresholds must be at least 2");
        require(roc.drops >= 1, "experiments.roc.drops must be at least 1");
        require(export_drops >= 1, "experiments.export.drops must be at least 1");
    }

    std::string canonical_config(const RunConfig &c)
    {
        return config_to_json(c).dump(2) + "\n";
    }

    std::string config_hash(const RunConfig &c)
    {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char ch : canonical_config(c))
        {
            h ^= ch;
            h *= 0x100000001b3ULL;
        }
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx", (unsigned long long)h);
        return buf;
    }

    void apply_override(json &j, const std::string &assignment)
    {
        const auto eq = assignment.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ConfigError("override '" + assignment + "' is not of the form key=value");
        const std::string key = assignment.substr(0, eq);
        const std::string text = assignment.substr(eq + 1);

        std::string pointer;
        std::stringstream ss(key);
        std::string part;
        while (std::getline(ss, part, '.'))
            pointer += "/" + part;
        const json::json_pointer ptr(pointer);
        if (!j.contains(ptr))
            throw ConfigError("override key '" + key + "' does not exist");

        json value;
        try
        {
            value = json::parse(text);
        }
        catch (const json::parse_error &)
        {
            value = text;
        }
        j[ptr] = value;
    }

    RunConfig load_config(const std::string &path, const std::vector<std::string> &overrides)
    {
        std::ifstream in(path);
        if (!in)
            throw std::ios_base::failure("cannot open config '" + path + "'");
        json user;
        try
        {
            user = json::parse(in, nullptr, true, true);
        }
        catch (const json::parse_error &ex)
        {
            throw ConfigError(std::string("config parse error: ") + ex.what());
        }

        json full = config_to_json(default_config());
        merge_strict(full, user, "");
        normalize_targets(full);
        try
        {
            for (const auto &o : overrides)
                apply_override(full, o);
        }
        catch (const json::exception &ex)
        {
            throw ConfigError(std::string("override error: ") + ex.what());
        }
        return config_from_json(full);
    }
}
