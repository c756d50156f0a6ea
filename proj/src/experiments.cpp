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

#include "isac/experiments.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#ifndef ISAC_VERSION
#define ISAC_VERSION "unknown"
#endif

namespace isac
{
    std::string code_version() { return ISAC_VERSION; }

    void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)> &fn)
    {
        std::size_t nt = threads > 0 ? std::size_t(threads) : std::max(1u, std::thread::hardware_concurrency());
        nt = std::min(nt, std::max<std::size_t>(n, 1));
        if (nt <= 1)
        {
            for (std::size_t i = 0; i < n; ++i)
                fn(i);
            return;
        }
        std::atomic<std::size_t> next{0};
        std::exception_ptr error;
        std::mutex m;
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < nt; ++t)
            pool.emplace_back([&]
                              {
                for (std::size_t i = next++; i < n; i = next++)
                {
                    try
                    {
                        fn(i);
                    }
                    catch (...)
                    {
                        std::lock_guard<std::mutex> lock(m);
                        if (!error)
                            error = std::current_exception();
                        next = n;
                    }
                } });
        for (auto &th : pool)
            th.join();
        if (error)
            std::rethrow_exception(error);
    }

    namespace
    {
        class Ticker
        {
        public:
            Ticker(const Progress &p, std::string what, std::size_t total) : p_(p), what_(std::move(what)), total_(total) {}
            void tick()
            {
                const std::size_t done = ++done_;
                if (!p_ || total_ == 0)
                    return;
                const std::size_t step = std::max<std::size_t>(1, total_ / 10);
                if (done % step == 0 || done == total_)
                {
                    std::lock_guard<std::mutex> lock(m_);
                    p_(what_ + ": " + std::to_string(done) + "/" + std::to_string(total_) + " drops");
                }
            }

        private:
            const Progress &p_;
            std::string what_;
            std::size_t total_;
            std::atomic<std::size_t> done_{0};
            std::mutex m_;
        };

        void scale_add(FrequencyChannel &dst, const FrequencyChannel &src, double a)
        {
            for (std::size_t i = 0; i < dst.h.size(); ++i)
                dst.h[i] += src.h[i] * a;
        }

        void check_finite(double v, const std::string &what)
        {
            if (!std::isfinite(v))
                throw NumericalError("non-finite " + what);
        }
    }

    BerResult compute_ber(const SimulationSetup &setup, const Progress &progress)
    {
        const RunConfig &cfg = setup.config;
        const OfdmConfig ofdm = OfdmConfig::from(cfg.waveform);
        const std::size_t drops = std::size_t(cfg.drops);
        const std::size_t bits_per_symbol = ofdm.n_subcarriers * setup.tx.size() * 2;
        const std::size_t n_symbols =
            std::max<std::size_t>(1, (cfg.ber.min_bits + drops * bits_per_symbol - 1) / (drops * bits_per_symbol));

        std::vector<std::vector<BerPoint>> prop(drops), base(drops);
        std::vector<char> cp(drops, 0);
        Ticker tick(progress, "ber", drops);
        parallel_for(drops, cfg.threads, [&](std::size_t d)
                     {
            const auto r = generate_drop(setup, d);
            const auto hb = to_frequency(r.background, ofdm);
            const auto hp = hb + to_frequency(r.target, ofdm);
            TapList all = r.background;
            all.append(r.target);
            cp[d] = exceeds_cp(all, ofdm);
            ber_drop(hp, cfg.ber.snr_db, n_symbols, cfg.seed, d, prop[d]);
            if (cfg.ber.include_baseline)
                ber_drop(hb, cfg.ber.snr_db, n_symbols, cfg.seed, d, base[d]);
            tick.tick(); });

        BerResult res;
        res.drops = drops;
        for (double s : cfg.ber.snr_db)
        {
            res.proposed.push_back({s, 0, 0});
            res.baseline.push_back({s, 0, 0});
        }
        for (std::size_t d = 0; d < drops; ++d)
        {
            res.cp_exceeded += cp[d];
            for (std::size_t i = 0; i < prop[d].size(); ++i)
            {
                res.proposed[i].bits += prop[d][i].bits;
                res.proposed[i].errors += prop[d][i].errors;
            }
            for (std::size_t i = 0; i < base[d].size(); ++i)
            {
                res.baseline[i].bits += base[d][i].bits;
                res.baseline[i].errors += base[d][i].errors;
            }
        }
        if (!cfg.ber.include_baseline)
            res.baseline.clear();
        return res;
    }

    CapacityResult compute_capacity(const SimulationSetup &setup, const Progress &progress)
    {
        const RunConfig &cfg = setup.config;
        const OfdmConfig ofdm = OfdmConfig::from(cfg.waveform);
        const std::size_t drops = std::size_t(cfg.drops);
        const double nv = std::pow(10.0, -cfg.capacity.snr_db / 10.0);
        const auto &rcs = cfg.capacity.rcs_m2;

        std::vector<double> base(drops, 0.0);
        std::vector<std::vector<double>> prop(drops);
        DropOptions opt;
        opt.rcs_m2 = 1.0;
        Ticker tick(progress, "capacity", drops);
        parallel_for(drops, cfg.threads, [&](std::size_t d)
                     {
            const auto r = generate_drop(setup, d, opt);
            const auto hb = to_frequency(r.background, ofdm);
            const auto ht = to_frequency(r.target, ofdm);
            base[d] = ergodic_capacity(hb, nv);
            for (double s : rcs)
            {
                FrequencyChannel h = hb;
                scale_add(h, ht, std::sqrt(s));
                prop[d].push_back(ergodic_capacity(h, nv));
            }
            tick.tick(); });

        CapacityResult res;
        res.drops = drops;
        res.rcs_m2 = rcs;
        res.proposed.assign(rcs.size(), 0.0);
        for (std::size_t d = 0; d < drops; ++d)
        {
            res.baseline += base[d];
            for (std::size_t i = 0; i < rcs.size(); ++i)
                res.proposed[i] += prop[d][i];
        }
        res.baseline /= double(drops);
        check_finite(res.baseline, "baseline capacity");
        for (auto &v : res.proposed)
        {
            v /= double(drops);
            check_finite(v, "capacity");
        }
        return res;
    }

    RangeResult compute_range(const SimulationSetup &setup, const Progress &progress)
    {
        const RunConfig &cfg = setup.config;
        const OfdmConfig ofdm = OfdmConfig::from(cfg.waveform);
        const std::size_t drops = std::size_t(cfg.drops);
        const auto &snr = cfg.range.snr_db;
        const double baseline_m = distance(cfg.tx.position, cfg.rx.position);

        std::vector<std::vector<RangeEstimate>> est(drops);
        DropOptions opt;
        opt.rcs_m2 = cfg.range.rcs_m2;
        Ticker tick(progress, "range", drops);
        parallel_for(drops, cfg.threads, [&](std::size_t d)
                     {
            const auto r = generate_drop(setup, d, opt);
            if (r.target.empty())
                throw NumericalError("range: drop without target paths");
            const auto hb = to_frequency(r.background, ofdm);
            const auto ht = to_frequency(r.target, ofdm);
            const auto hi = hb + ht;
            Rng rng = make_stream(cfg.seed, d, Stream::noise);
            std::vector<double> unit(2 * hi.h.size());
            for (auto &v : unit)
                v = standard_normal(rng);
            const double truth = strongest_path_range(r.target);
            for (double s : snr)
                est[d].push_back(estimate_range(hi, hb, ht.mean_power(), ofdm, s, unit,
                                                std::size_t(cfg.range.ifft_size), baseline_m, truth));
            tick.tick(); });

        RangeResult res;
        res.drops = drops;
        res.snr_db = snr;
        res.mean_error_m.assign(snr.size(), 0.0);
        res.outage_rate.assign(snr.size(), 0.0);
        for (std::size_t d = 0; d < drops; ++d)
            for (std::size_t i = 0; i < snr.size(); ++i)
            {
                res.mean_error_m[i] += est[d][i].error_m;
                res.outage_rate[i] += est[d][i].outage ? 1.0 : 0.0;
            }
        for (std::size_t i = 0; i < snr.size(); ++i)
        {
            res.mean_error_m[i] /= double(drops);
            res.outage_rate[i] /= double(drops);
            check_finite(res.mean_error_m[i], "range error");
        }
        return res;
    }

    RocResult compute_roc(const RunConfig &config, const Progress &progress)
    {
        const RocExperiment &rc = config.roc;
        const OfdmConfig ofdm = OfdmConfig::from(config.waveform);
        const std::size_t drops = std::size_t(rc.drops), ng = rc.target_positions.size();
        const std::size_t nbins = ofdm.n_subcarriers;
        const double bw = 1.0 / ofdm.sample_rate_hz;

        struct Echo
        {
            Gate gate;
            std::vector<cd> g; // gate bins only
            double energy = 0.0;
        };
        std::vector<std::vector<Echo>> echo(ng, std::vector<Echo>(drops));
        std::size_t n_pairs = 0;

        for (std::size_t gi = 0; gi < ng; ++gi)
        {
            RunConfig cfg = config;
            cfg.tx.position = rc.tx;
            cfg.rx.position = rc.rx;
            if (cfg.targets.empty())
                cfg.targets.push_back(TargetConfig{});
            cfg.targets.resize(1);
            cfg.targets[0].position = rc.target_positions[gi];
            const SimulationSetup setup(cfg);
            n_pairs = setup.tx.size() * setup.rx.size();
            DropOptions opt;
            opt.background = false;
            opt.rcs_m2 = 1.0;
            Ticker tick(progress, "roc " + rc.labels[gi], drops);
            parallel_for(drops, cfg.threads, [&](std::size_t d)
                         {
                const auto r = generate_drop(setup, d, opt);
                const auto ht = to_frequency(r.target, ofdm);
                const auto g = delay_response(ht, nbins);
                Echo &e = echo[gi][d];
                e.gate = sensing_gate(r.meta.bistatic_delay.at(0), r.target.empty() ? r.meta.bistatic_delay[0] : r.target.max_delay(),
                                      bw, rc.gate_lead_bins, rc.gate_tail_bins, rc.max_gate_bins, nbins);
                e.g.assign(g.begin() + std::ptrdiff_t(e.gate.first * n_pairs),
                           g.begin() + std::ptrdiff_t((e.gate.first + e.gate.count) * n_pairs));
                e.energy = ht.mean_power();
                tick.tick(); });
        }

        double ref = 0.0;
        for (const auto &e : echo[rc.reference_geometry])
            ref += e.energy;
        ref = ref / double(drops) * rc.reference_rcs_m2;
        const double n0 = ref * std::pow(10.0, -rc.sensing_snr_db / 10.0);
        const double nv = n0 / double(ofdm.n_subcarriers);
        if (!(nv > 0.0))
            throw NumericalError("roc: reference echo energy is zero");

        RocResult res;
        res.noise_per_bin = nv;
        res.drops = drops;
        for (std::size_t gi = 0; gi < ng; ++gi)
        {
            std::vector<double> h0(drops);
            for (std::size_t d = 0; d < drops; ++d)
            {
                Rng rng = make_stream(config.seed, d, Stream::noise_h0, gi);
                h0[d] = gate_energy({}, n_pairs, Gate{0, echo[gi][d].gate.count}, 0.0, nv, rng);
            }
            for (double s : rc.rcs_m2)
            {
                std::vector<double> h1(drops);
                for (std::size_t d = 0; d < drops; ++d)
                {
                    Rng rng = make_stream(config.seed, d, Stream::noise, gi);
                    h1[d] = gate_energy(echo[gi][d].g, n_pairs, Gate{0, echo[gi][d].gate.count}, std::sqrt(s), nv, rng);
                }
                RocCurve c;
                c.geometry = rc.labels[gi];
                c.rcs_m2 = s;
                c.points = roc_curve(h0, h1, std::size_t(rc.n_thresholds));
                c.auc = roc_auc(c.points);
                c.pfa_at_pd90 = pfa_at(c.points, 0.9);
                res.curves.push_back(std::move(c));
            }
        }
        return res;
    }

    const std::vector<std::string> &experiment_names()
    {
        static const std::vector<std::string> names{"ber", "capacity", "range", "roc", "export"};
        return names;
    }

    namespace
    {
        std::string fmt(double v)
        {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.12g", v);
            return buf;
        }

        std::ofstream open_out(const std::filesystem::path &p)
        {
            std::ofstream f(p, std::ios::binary);
            if (!f)
                throw std::ios_base::failure("cannot write '" + p.string() + "'");
            return f;
        }

        void close_out(std::ofstream &f, const std::filesystem::path &p)
        {
            f.close();
            if (!f)
                throw std::ios_base::failure("write failed for '" + p.string() + "'");
        }
    }

    std::vector<std::string> run_experiment(const RunConfig &config, const std::string &experiment,
                                            const std::string &out_dir, const Progress &progress)
    {
        if (std::find(experiment_names().begin(), experiment_names().end(), experiment) == experiment_names().end())
            throw ConfigError("unknown experiment '" + experiment + "'");
        namespace fs = std::filesystem;
        const fs::path dir(out_dir);
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec || !fs::is_directory(dir))
            throw std::ios_base::failure("cannot create output directory '" + out_dir + "'");

        const std::string hash = config_hash(config);
        const std::string stamp = "# config_hash=" + hash + "\n";
        std::vector<std::string> files;
        nlohmann::json summary = nlohmann::json::object();
        std::size_t drops = std::size_t(config.drops);

        auto write = [&](const std::string &name, const std::function<void(std::ostream &)> &body)
        {
            const fs::path p = dir / name;
            auto f = open_out(p);
            f << stamp;
            body(f);
            close_out(f, p);
            files.push_back(name);
        };

        if (experiment == "ber")
        {
            const SimulationSetup setup(config);
            const auto r = compute_ber(setup, progress);
            write("ber.csv", [&](std::ostream &os)
                  {
                os << "model,snr_db,ber,bits,errors\n";
                auto rows = [&](const char *model, const std::vector<BerPoint> &c)
                {
                    for (const auto &p : c)
                        os << model << ',' << fmt(p.snr_db) << ',' << fmt(p.ber()) << ',' << p.bits << ',' << p.errors << '\n';
                };
                rows("proposed", r.proposed);
                rows("baseline", r.baseline); });
            summary["cp_exceeded_drops"] = r.cp_exceeded;
            summary["snr_at_ber_1e-3_proposed"] = fmt(snr_at_ber(r.proposed, 1e-3));
            if (!r.baseline.empty())
                summary["snr_at_ber_1e-3_baseline"] = fmt(snr_at_ber(r.baseline, 1e-3));
        }
        else if (experiment == "capacity")
        {
            const SimulationSetup setup(config);
            const auto r = compute_capacity(setup, progress);
            write("capacity.csv", [&](std::ostream &os)
                  {
                os << "model,rcs_m2,capacity_bps_hz,drops\n";
                if (config.capacity.include_baseline)
                    os << "baseline,0," << fmt(r.baseline) << ',' << r.drops << '\n';
                for (std::size_t i = 0; i < r.rcs_m2.size(); ++i)
                    os << "proposed," << fmt(r.rcs_m2[i]) << ',' << fmt(r.proposed[i]) << ',' << r.drops << '\n'; });
        }
        else if (experiment == "range")
        {
            const SimulationSetup setup(config);
            const auto r = compute_range(setup, progress);
            write("range.csv", [&](std::ostream &os)
                  {
                os << "snr_db,mean_error_m,outage_rate,drops\n";
                for (std::size_t i = 0; i < r.snr_db.size(); ++i)
                    os << fmt(r.snr_db[i]) << ',' << fmt(r.mean_error_m[i]) << ',' << fmt(r.outage_rate[i]) << ','
                       << r.drops << '\n'; });
        }
        else if (experiment == "roc")
        {
            const auto r = compute_roc(config, progress);
            drops = r.drops;
            write("roc.csv", [&](std::ostream &os)
                  {
                os << "geometry,rcs_m2,threshold,p_fa,p_d\n";
                for (const auto &c : r.curves)
                    for (const auto &p : c.points)
                        os << c.geometry << ',' << fmt(c.rcs_m2) << ',' << fmt(p.threshold) << ',' << fmt(p.p_fa) << ','
                           << fmt(p.p_d) << '\n'; });
            write("roc_summary.csv", [&](std::ostream &os)
                  {
                os << "geometry,rcs_m2,auc,pfa_at_pd_0.9\n";
                for (const auto &c : r.curves)
                    os << c.geometry << ',' << fmt(c.rcs_m2) << ',' << fmt(c.auc) << ',' << fmt(c.pfa_at_pd90) << '\n'; });
            summary["noise_per_bin"] = fmt(r.noise_per_bin);
        }
        else
        {
            const SimulationSetup setup(config);
            drops = std::size_t(config.export_drops);
            nlohmann::json meta = nlohmann::json::array();
            for (std::size_t d = 0; d < drops; ++d)
            {
                const auto r = generate_drop(setup, d);
                TapList all = r.background;
                all.append(r.target);
                char name[64];
                std::snprintf(name, sizeof(name), "drop_%04zu.csv", d);
                write(name, [&](std::ostream &os)
                      { write_taps_csv(os, all, r.times); });
                nlohmann::json m;
                m["drop"] = d;
                m["background_condition"] = to_string(r.meta.background_condition);
                m["gamma"] = fmt(r.meta.background_weights.gamma);
                m["gamma_tilde"] = fmt(r.meta.background_weights.gamma_tilde);
                nlohmann::json tg = nlohmann::json::array();
                for (std::size_t l = 0; l < r.meta.target_case.size(); ++l)
                {
                    nlohmann::json t;
                    t["case"] = r.meta.target_case[l];
                    t["tx_target_condition"] = to_string(r.meta.tx_target_condition[l]);
                    t["target_rx_condition"] = to_string(r.meta.target_rx_condition[l]);
                    nlohmann::json w = nlohmann::json::array();
                    for (double v : r.meta.target_weights[l])
                        w.push_back(fmt(v));
                    t["weights"] = w;
                    t["bistatic_delay_s"] = fmt(r.meta.bistatic_delay[l]);
                    t["gain"] = fmt(r.meta.target_gain[l]);
                    tg.push_back(t);
                }
                m["targets"] = tg;
                m["warnings"] = r.meta.warnings;
                meta.push_back(m);
                if (progress)
                    progress("export: drop " + std::to_string(d + 1) + "/" + std::to_string(drops));
            }
            summary["drops"] = meta;
        }

        nlohmann::json manifest;
        manifest["experiment"] = experiment;
        manifest["scenario"] = to_string(config.scenario.kind);
        manifest["seed"] = config.seed;
        manifest["drops"] = drops;
        manifest["config_hash"] = hash;
        manifest["code_version"] = code_version();
        manifest["files"] = files;
        manifest["summary"] = summary;
        manifest["config"] = config_to_json(config);
        const fs::path mp = dir / "manifest.json";
        auto f = open_out(mp);
        f << manifest.dump(2) << '\n';
        close_out(f, mp);
        files.push_back("manifest.json");
        return files;
    }
}
