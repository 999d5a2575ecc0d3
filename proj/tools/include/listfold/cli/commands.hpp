/*
 * Copyright 2026 The ListFold Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef LISTFOLD_CLI_COMMANDS_HPP_
#define LISTFOLD_CLI_COMMANDS_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "listfold/cli/run_config.hpp"

namespace listfold::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitDivergence = 3;
inline constexpr int kExitVerifyFailed = 4;

const std::vector<std::string>& command_names();

// Runs one subcommand. Errors are reported on `err` and mapped to exit codes.
int run_command(const std::string& name, const RunConfig& config,
                std::ostream& out, std::ostream& err);

}  // namespace listfold::cli

#endif  // LISTFOLD_CLI_COMMANDS_HPP_
