// SPDX-License-Identifier: Apache-2.0
//
// beamsync-sim: over-the-air phase and frequency synchronization between distributed APs
// Copyright (C) 2026 The beamsync-sim authors
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

#include "beamsync/scenario_io.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

int main(int argc, char **argv)
{
    CLI::App app{"Monte-Carlo simulator for over-the-air AP phase and frequency synchronization"};
    app.set_version_flag("--version", std::string(beamsync::kVersion));

    std::string subcommand;
    std::string scenario_path;
    std::string preset_name;
    std::string out_path = "-";
    std::optional<std::size_t> trials;
    std::optional<std::uint64_t> seed;
    unsigned workers = 1;

    app.add_option("command", subcommand, "phase-rmse | freq-rmse | gain-timeline | deviation-timeline | crb | budget | schedule")
        ->required()
        ->check(CLI::IsMember(beamsync::subcommands()));
    app.add_option("--scenario", scenario_path, "Scenario file (key = value lines)")->check(CLI::ExistingFile);
    app.add_option("--preset", preset_name, "Figure preset applied before the scenario file")
        ->check(CLI::IsMember(beamsync::preset_names()));
    app.add_option("--out", out_path, "Output CSV path, '-' for stdout");
    app.add_option("--trials", trials, "Override the trial count");
    app.add_option("--seed", seed, "Override the master seed");
    app.add_option("--workers", workers, "Worker threads")->check(CLI::Range(1u, 1024u));

    CLI11_PARSE(app, argc, argv);

    beamsync::Scenario scenario;
    try
    {
        if (!preset_name.empty())
            scenario = beamsync::preset(preset_name);
        if (!scenario_path.empty())
        {
            auto parsed = beamsync::parse_scenario(scenario_path, scenario);
            for (const auto &w : parsed.warnings)
                std::cerr << "warning: " << w << '\n';
            scenario = parsed.scenario;
        }
        if (trials)
            scenario.trials = *trials;
        if (seed)
            scenario.seed = *seed;
        beamsync::validate(scenario);
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }

    return beamsync::run_command(subcommand, scenario, out_path, workers);
}
