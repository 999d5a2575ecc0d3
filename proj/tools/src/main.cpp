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

#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "listfold/cli/commands.hpp"
#include "listfold/cli/run_config.hpp"

int main(int argc, char** argv) {
  using listfold::cli::RunConfig;

  CLI::App app{"ListFold ranking losses, consistency checks and long-short backtests"};
  app.require_subcommand(1);

  const std::map<std::string, std::string> about = {
      {"backtest", "train every model over rolling windows and backtest the strategies"},
      {"verify", "golden loss values, minimizer checks and counterexample search"},
      {"simulate", "Monte Carlo vase or plank-dart sampler against analytic probabilities"},
      {"synth", "write a synthetic planted-signal panel"},
      {"train", "train one model on one window and write a checkpoint"},
      {"score", "score one week with a checkpoint"},
  };

  std::string config_path;
  std::map<std::string, std::string> overrides;
  for (const auto& name : listfold::cli::command_names()) {
    CLI::App* sub = app.add_subcommand(name, about.at(name));
    sub->add_option("--config", config_path, "key = value config file");
    for (const auto& key : RunConfig::known_keys()) {
      sub->add_option("--" + key.key, overrides[key.key], key.help);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : listfold::cli::kExitConfig;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  RunConfig config;
  try {
    if (!config_path.empty()) config = RunConfig::load(config_path);
    const CLI::App* sub = app.get_subcommand(command);
    for (const auto& key : RunConfig::known_keys()) {
      if (sub->count("--" + key.key) > 0) config.set(key.key, overrides[key.key]);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return listfold::cli::kExitConfig;
  }
  return listfold::cli::run_command(command, config, std::cout, std::cerr);
}
