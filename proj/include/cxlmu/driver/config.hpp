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

#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cxlmu/analysis/cost_model.hpp"
#include "cxlmu/analysis/slices.hpp"
#include "cxlmu/host/structures.hpp"
#include "cxlmu/workloads/generate.hpp"

namespace cxlmu::driver {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ValueType : std::uint8_t { Integer, Real, Boolean, Text };

struct KeySpec {
  std::string name;
  ValueType type = ValueType::Text;
  std::string default_value;  // empty with `derived_from` set
  std::string derived_from;   // key whose value is used when this one is unset
  std::string help;
};

/// Every recognised key, in dump order.
const std::vector<KeySpec>& config_keys();
const KeySpec* find_key(std::string_view name);
bool is_numeric_key(std::string_view name);

/**
 * Raw key/value settings. Later writes win, so apply the file first and the
 * command-line overrides after it.
 */
class ConfigStore {
 public:
  /// Throws ConfigError naming the key when it is unknown.
  void set(std::string_view key, std::string_view value);
  /// `key=value` as given to --set.
  void set_assignment(std::string_view assignment);
  /// Line-oriented `key = value`; `#` starts a comment.
  void load_text(std::string_view text, std::string_view origin = "<config>");
  void load_file(const std::string& path);

  bool is_set(std::string_view key) const;
  /// The effective value: explicit, else derived, else the default.
  std::string get(std::string_view key) const;

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

struct RunConfig {
  workloads::WorkloadSpec workload;
  std::string program_path;
  std::string memory_path;
  std::string trace_path;

  std::string topology = "line";
  fabric::Cycles host_switch_latency = 150;
  fabric::Cycles switch_endpoint_latency = 150;
  fabric::Cycles topology_latency = 0;  // nonzero: override every edge of a file topology
  double bandwidth = 8.0;

  analysis::CostModel cost;
  host::CoreConfig core;
  analysis::SliceOptions slicing;
  double alpha = 0.5;

  std::string mode = "offload";
  std::size_t rounds = 4;
  std::uint64_t seed = 0;
  std::string output = "out";

  std::uint64_t step_budget = 0;
  bool verify = true;
  bool message_log = false;
  bool cycle_trace = false;
};

/// Parses and checks every key. Throws ConfigError naming the offending key.
RunConfig resolve(const ConfigStore& store);

/// `key = value  # help` for every key, using the store's effective values.
std::string dump_config(const ConfigStore& store);

}  // namespace cxlmu::driver
