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

#ifndef BEAMSYNC_SCENARIO_IO_H
#define BEAMSYNC_SCENARIO_IO_H

#include "beamsync/experiments.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace beamsync
{
    inline constexpr std::string_view kVersion = "beamsync-sim 1.0.0";

    // Scenario file problem with the offending key and 1-based line (0 when not from the file)
    class ScenarioParseError : public std::invalid_argument
    {
    public:
        ScenarioParseError(std::string source, std::size_t line, std::string key, const std::string &what);
        std::size_t line() const { return line_; }
        const std::string &key() const { return key_; }

    private:
        std::size_t line_;
        std::string key_;
    };

    struct ParsedScenario
    {
        Scenario scenario;
        std::vector<std::string> warnings;
    };

    // "key = value" lines; '#' starts a comment; unset keys keep the given base values
    ParsedScenario parse_scenario_text(std::string_view text, const std::string &source = "<scenario>",
                                       const Scenario &base = {});
    ParsedScenario parse_scenario(const std::filesystem::path &path, const Scenario &base = {});

    // Lossless text form accepted by parse_scenario_text
    std::string scenario_to_text(const Scenario &s);

    std::vector<std::string> preset_names();
    Scenario preset(std::string_view name);

    std::vector<std::string> subcommands();

    // Writes the CSV for one subcommand; returns a process exit status
    int run_command(std::string_view subcommand, const Scenario &s, const std::filesystem::path &out_path,
                    unsigned workers = 1, std::ostream *diagnostics = nullptr);

    // CSV body and metadata for one subcommand
    std::string render_csv(std::string_view subcommand, const Scenario &s, unsigned workers = 1);

    std::string format_number(double v);
}

#endif
