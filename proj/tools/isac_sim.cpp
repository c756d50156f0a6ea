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

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

namespace
{
    constexpr int exit_schema = 2;
    constexpr int exit_io = 3;
    constexpr int exit_numeric = 4;
}

int main(int argc, char **argv)
{
    CLI::App app{"Bistatic ISAC channel simulator"};
    app.require_subcommand(1);

    std::string config_path, experiment, out_dir, scenario;
    std::vector<std::string> overrides;
    int drops = 0, threads = -1;
    std::uint64_t seed = 0;
    bool have_seed = false, quiet = false;

    auto *run = app.add_subcommand("run", "Run one experiment and write CSV files plus manifest.json");
    run->add_option("CONFIG", config_path, "Run configuration (JSON)")->required();
    run->add_option("EXPERIMENT", experiment, "ber | capacity | range | roc | export");
    run->add_option("OUT_DIR", out_dir, "Output directory");
    run->add_option("--experiment", experiment, "Experiment (alternative to the positional form)");
    run->add_option("--out", out_dir, "Output directory (alternative to the positional form)");
    run->add_option("--drops", drops, "Number of drops")->check(CLI::PositiveNumber);
    run->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t &s)
                                            { seed = s, have_seed = true; }, "Base seed");
    run->add_option("--scenario", scenario, "UMa | UMi | InF");
    run->add_option("--threads", threads, "Worker threads, 0 for all cores")->check(CLI::NonNegativeNumber);
    run->add_option("--override", overrides, "Config override key=value, keys are dotted JSON paths");
    run->add_flag("--quiet", quiet, "No progress output");

    std::string show_path;
    auto *show = app.add_subcommand("canonical", "Print the validated canonical configuration and its hash");
    show->add_option("CONFIG", show_path, "Run configuration (JSON)")->required();
    show->add_option("--override", overrides, "Config override key=value");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*show)
        {
            const auto cfg = isac::load_config(show_path, overrides);
            std::cout << isac::canonical_config(cfg);
            std::cerr << "config_hash " << isac::config_hash(cfg) << "\n";
            return 0;
        }

        if (experiment.empty() || out_dir.empty())
        {
            std::cerr << "error: experiment and output directory are required\n";
            return exit_schema;
        }
        std::vector<std::string> all = overrides;
        if (drops > 0)
        {
            all.push_back("run.drops=" + std::to_string(drops));
            if (experiment == "roc")
                all.push_back("experiments.roc.drops=" + std::to_string(drops));
            if (experiment == "export")
                all.push_back("experiments.export.drops=" + std::to_string(drops));
        }
        if (have_seed)
            all.push_back("run.seed=" + std::to_string(seed));
        if (!scenario.empty())
            all.push_back("scenario.name=" + scenario);
        if (threads >= 0)
            all.push_back("run.threads=" + std::to_string(threads));

        const auto cfg = isac::load_config(config_path, all);
        isac::Progress progress;
        if (!quiet)
            progress = [](const std::string &msg)
            { std::cerr << msg << "\n"; };
        if (!quiet)
            std::cerr << "isac_sim " << isac::code_version() << ": " << experiment << " on "
                      << isac::to_string(cfg.scenario.kind) << ", config " << isac::config_hash(cfg) << "\n";
        const auto files = isac::run_experiment(cfg, experiment, out_dir, progress);
        if (!quiet)
            for (const auto &f : files)
                std::cerr << "wrote " << (std::filesystem::path(out_dir) / f).string() << "\n";
        return 0;
    }
    catch (const isac::ConfigError &e)
    {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_schema;
    }
    catch (const isac::ParameterError &e)
    {
        std::cerr << "parameter table error: " << e.what() << "\n";
        return exit_schema;
    }
    catch (const std::ios_base::failure &e)
    {
        std::cerr << "I/O error: " << e.what() << "\n";
        return exit_io;
    }
    catch (const std::filesystem::filesystem_error &e)
    {
        std::cerr << "I/O error: " << e.what() << "\n";
        return exit_io;
    }
    catch (const std::exception &e)
    {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return exit_numeric;
    }
}
