/*
 * Copyright 2026 The cxlmu Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cxlmu/driver/commands.hpp"
#include "cxlmu/driver/config.hpp"

namespace {

using namespace cxlmu::driver;

struct ConfigArgs {
  std::string file;
  std::vector<std::string> sets;
};

void add_config_options(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("-c,--config", args.file, "key = value config file");
  cmd->add_option("--set", args.sets, "override one key (key=value); repeatable")->allow_extra_args(false);
}

ConfigStore load_store(const ConfigArgs& args) {
  ConfigStore store;
  if (!args.file.empty()) store.load_file(args.file);
  for (const auto& s : args.sets) store.set_assignment(s);
  return store;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = item.find_last_not_of(" \t");
    out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cxlmu: offload analysis and timing simulation for far-memory programs"};
  app.require_subcommand(1);

  ConfigArgs run_args;
  auto* run = app.add_subcommand("run", "analyze and simulate one configuration");
  add_config_options(run, run_args);

  ConfigArgs sweep_args;
  std::string param;
  std::string values;
  std::string modes;
  std::string csv_path;
  auto* sweep = app.add_subcommand("sweep", "run one configuration over a list of values");
  add_config_options(sweep, sweep_args);
  sweep->add_option("--param", param, "numeric config key to vary")->required();
  sweep->add_option("--values", values, "comma-separated values, in output order");
  sweep->add_option("--modes", modes, "comma-separated modes; default: the configured mode");
  sweep->add_option("-o,--out", csv_path, "CSV path; default: <output>/sweep.csv");

  std::string report_a;
  std::string report_b;
  auto* compare = app.add_subcommand("compare", "compare two report.json files");
  compare->add_option("a", report_a, "first report")->required();
  compare->add_option("b", report_b, "second report")->required();

  ConfigArgs dump_args;
  auto* dump = app.add_subcommand("dump-config", "list every config key with its effective value");
  add_config_options(dump, dump_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const auto cfg = resolve(load_store(run_args));
      return cmd_run(cfg, std::cout, std::cerr);
    }
    if (sweep->parsed()) {
      const auto store = load_store(sweep_args);
      const auto cfg = resolve(store);
      SweepRequest req{param, split_list(values), split_list(modes)};
      const auto path = csv_path.empty() ? cfg.output + "/sweep.csv" : csv_path;
      return cmd_sweep(store, req, path, std::cout, std::cerr);
    }
    if (compare->parsed()) return cmd_compare(report_a, report_b, std::cout, std::cerr);
    if (dump->parsed()) {
      std::cout << dump_config(load_store(dump_args));
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitFailure;
}
