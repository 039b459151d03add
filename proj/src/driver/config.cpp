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

#include "cxlmu/driver/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cxlmu/ir/interpret.hpp"

namespace cxlmu::driver {

namespace {

using VT = ValueType;

std::vector<KeySpec> make_keys() {
  return {
      {"workload.kind", VT::Text, "pointer_chase", "", "pointer_chase | strided | hash_probe | indirect_gather"},
      {"workload.n", VT::Integer, "1024", "", "elements"},
      {"workload.stride", VT::Integer, "64", "", "bytes between strided elements"},
      {"workload.seed", VT::Integer, "1", "", "generator seed"},
      {"workload.space", VT::Text, "remote(2)", "", "local | remote(E)"},
      {"workload.work_per_element", VT::Integer, "4", "", "independent host adds per element"},
      {"workload.region_limit", VT::Integer, "1073741824", "", "largest region a workload may span, bytes"},
      {"workload.program", VT::Text, "", "", "IR program file; replaces the generator"},
      {"workload.memory", VT::Text, "", "", "memory image file for workload.program"},
      {"workload.trace", VT::Text, "", "", "address trace file; replaces the generator"},
      {"topology", VT::Text, "line", "", "direct | line | two-endpoint | path to a topology file"},
      {"fabric.hop_latency", VT::Integer, "150", "", "per-link latency, cycles"},
      {"fabric.host_switch_latency", VT::Integer, "", "fabric.hop_latency", "host-switch link latency of builtin topologies"},
      {"fabric.switch_endpoint_latency", VT::Integer, "", "fabric.hop_latency", "switch-endpoint link latency of builtin topologies"},
      {"fabric.bandwidth", VT::Real, "8", "", "link bandwidth, bytes per cycle"},
      {"cost.submit_overhead", VT::Real, "20", "", "cycles to issue a slice"},
      {"cost.hop_latency", VT::Real, "", "fabric.hop_latency", "planner's per-hop latency"},
      {"cost.line_transfer", VT::Real, "", "", "cycles per result line; default 64 / fabric.bandwidth"},
      {"cost.near_cpi", VT::Real, "2", "", "near-core cycles per instruction"},
      {"cost.host_cpi", VT::Real, "1", "", "host cycles per ALU instruction"},
      {"cost.l1_hit", VT::Real, "4", "", "host L1 hit latency"},
      {"cost.local_mem", VT::Real, "40", "", "memory latency at the owning node"},
      {"core.rob", VT::Integer, "64", "", "reorder buffer entries"},
      {"core.mshr", VT::Integer, "8", "", "miss status holding registers"},
      {"core.l1_size", VT::Integer, "32768", "", "L1 bytes"},
      {"core.l1_assoc", VT::Integer, "8", "", "L1 ways"},
      {"core.mailbox_depth", VT::Integer, "8", "", "mailbox entries"},
      {"core.issue_width", VT::Integer, "1", "", "dispatches per cycle"},
      {"analysis.batching", VT::Boolean, "true", "", "merge independent straight-line chains"},
      {"analysis.max_slice_len", VT::Integer, "64", "", "instruction cap per slice; 0 disables slicing"},
      {"adaptive.alpha", VT::Real, "0.5", "", "EMA weight of the newest observation"},
      {"mode", VT::Text, "offload", "", "baseline | offload | adaptive"},
      {"rounds", VT::Integer, "4", "", "adaptive rounds"},
      {"seed", VT::Integer, "0", "", "recorded in reports"},
      {"output", VT::Text, "out", "", "output directory"},
      {"sim.step_budget", VT::Integer, std::to_string(ir::kDefaultStepBudget), "", "dynamic instruction cap"},
      {"sim.verify", VT::Boolean, "true", "", "check against the interpreter"},
      {"sim.message_log", VT::Boolean, "false", "", "write messages.log"},
      {"sim.cycle_trace", VT::Boolean, "false", "", "write cycle_trace.txt"},
  };
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::uint64_t as_uint(std::string_view key, const std::string& v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw ConfigError(std::string(key) + ": expected a non-negative integer, got '" + v + "'");
  return out;
}

double as_real(std::string_view key, const std::string& v) {
  double out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size() || !std::isfinite(out))
    throw ConfigError(std::string(key) + ": expected a number, got '" + v + "'");
  return out;
}

bool as_bool(std::string_view key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(std::string(key) + ": expected true or false, got '" + v + "'");
}

ir::AddressSpace as_space(std::string_view key, const std::string& v) {
  if (v == "local") return ir::AddressSpace::local();
  if (v.starts_with("remote(") && v.ends_with(")")) {
    const auto inner = v.substr(7, v.size() - 8);
    return ir::AddressSpace::remote(static_cast<ir::NodeId>(as_uint(key, inner)));
  }
  throw ConfigError(std::string(key) + ": expected local or remote(E), got '" + v + "'");
}

template <typename T>
T narrow(std::string_view key, std::uint64_t v) {
  if (v > std::numeric_limits<T>::max()) throw ConfigError(std::string(key) + ": value out of range");
  return static_cast<T>(v);
}

}  // namespace

const std::vector<KeySpec>& config_keys() {
  static const std::vector<KeySpec> keys = make_keys();
  return keys;
}

const KeySpec* find_key(std::string_view name) {
  for (const auto& k : config_keys())
    if (k.name == name) return &k;
  return nullptr;
}

bool is_numeric_key(std::string_view name) {
  const auto* k = find_key(name);
  return k && (k->type == VT::Integer || k->type == VT::Real);
}

void ConfigStore::set(std::string_view key, std::string_view value) {
  if (!find_key(key)) throw ConfigError("unknown config key '" + std::string(key) + "'");
  values_[std::string(key)] = std::string(trim(value));
}

void ConfigStore::set_assignment(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw ConfigError("expected key=value, got '" + std::string(assignment) + "'");
  set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

void ConfigStore::load_text(std::string_view text, std::string_view origin) {
  std::size_t lineno = 0;
  while (!text.empty()) {
    ++lineno;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(std::string(origin) + ":" + std::to_string(lineno) + ": expected key = value");
    try {
      set(trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void ConfigStore::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  load_text(ss.str(), path);
}

bool ConfigStore::is_set(std::string_view key) const { return values_.find(key) != values_.end(); }

std::string ConfigStore::get(std::string_view key) const {
  const auto* spec = find_key(key);
  if (!spec) throw ConfigError("unknown config key '" + std::string(key) + "'");
  if (auto it = values_.find(key); it != values_.end()) return it->second;
  if (!spec->derived_from.empty()) return get(spec->derived_from);
  if (spec->name == "cost.line_transfer") {
    std::ostringstream ss;
    ss << 64.0 / as_real("fabric.bandwidth", get("fabric.bandwidth"));
    return ss.str();
  }
  return spec->default_value;
}

RunConfig resolve(const ConfigStore& s) {
  RunConfig c;
  auto u = [&](const char* k) { return as_uint(k, s.get(k)); };
  auto r = [&](const char* k) { return as_real(k, s.get(k)); };
  auto b = [&](const char* k) { return as_bool(k, s.get(k)); };

  const auto kind = s.get("workload.kind");
  const auto pk = workloads::parse_kind(kind);
  if (!pk) throw ConfigError("workload.kind: unknown workload '" + kind + "'");
  c.workload.kind = *pk;
  c.workload.n = u("workload.n");
  c.workload.stride = u("workload.stride");
  c.workload.seed = u("workload.seed");
  c.workload.space = as_space("workload.space", s.get("workload.space"));
  c.workload.work_per_element = narrow<std::uint32_t>("workload.work_per_element", u("workload.work_per_element"));
  c.workload.region_limit = u("workload.region_limit");
  c.program_path = s.get("workload.program");
  c.memory_path = s.get("workload.memory");
  c.trace_path = s.get("workload.trace");
  if (!c.program_path.empty() && !c.trace_path.empty())
    throw ConfigError("workload.program and workload.trace are mutually exclusive");
  if (!c.memory_path.empty() && c.program_path.empty())
    throw ConfigError("workload.memory requires workload.program");
  if (c.program_path.empty() && c.trace_path.empty()) {
    if (auto err = c.workload.check(); !err.empty()) throw ConfigError("workload: " + err);
  }

  c.topology = s.get("topology");
  if (c.topology.empty()) throw ConfigError("topology: empty");
  c.host_switch_latency = u("fabric.host_switch_latency");
  c.switch_endpoint_latency = u("fabric.switch_endpoint_latency");
  if (s.is_set("fabric.hop_latency")) c.topology_latency = u("fabric.hop_latency");
  c.bandwidth = r("fabric.bandwidth");
  if (!(c.bandwidth > 0)) throw ConfigError("fabric.bandwidth: must be > 0");

  c.cost.submit_overhead = r("cost.submit_overhead");
  c.cost.hop_latency = r("cost.hop_latency");
  c.cost.line_transfer = r("cost.line_transfer");
  c.cost.near_cpi = r("cost.near_cpi");
  c.cost.host_cpi = r("cost.host_cpi");
  c.cost.l1_hit = r("cost.l1_hit");
  c.cost.local_mem = r("cost.local_mem");
  if (auto err = c.cost.check(); !err.empty()) throw ConfigError("cost: " + err);

  c.core.rob_capacity = narrow<std::uint32_t>("core.rob", u("core.rob"));
  c.core.mshr_capacity = narrow<std::uint32_t>("core.mshr", u("core.mshr"));
  c.core.l1_size = u("core.l1_size");
  c.core.l1_assoc = narrow<std::uint32_t>("core.l1_assoc", u("core.l1_assoc"));
  c.core.mailbox_depth = narrow<std::uint32_t>("core.mailbox_depth", u("core.mailbox_depth"));
  c.core.issue_width = narrow<std::uint32_t>("core.issue_width", u("core.issue_width"));
  if (auto err = c.core.check(); !err.empty()) throw ConfigError("core: " + err);

  c.slicing.batching = b("analysis.batching");
  c.slicing.max_slice_len = u("analysis.max_slice_len");
  c.alpha = r("adaptive.alpha");
  if (!(c.alpha > 0 && c.alpha <= 1)) throw ConfigError("adaptive.alpha: must be in (0, 1]");

  c.mode = s.get("mode");
  if (c.mode != "baseline" && c.mode != "offload" && c.mode != "adaptive")
    throw ConfigError("mode: expected baseline, offload or adaptive, got '" + c.mode + "'");
  c.rounds = u("rounds");
  if (c.rounds == 0) throw ConfigError("rounds: must be >= 1");
  c.seed = u("seed");
  c.output = s.get("output");
  if (c.output.empty()) throw ConfigError("output: empty");

  c.step_budget = u("sim.step_budget");
  if (c.step_budget == 0) throw ConfigError("sim.step_budget: must be >= 1");
  c.verify = b("sim.verify");
  c.message_log = b("sim.message_log");
  c.cycle_trace = b("sim.cycle_trace");
  return c;
}

std::string dump_config(const ConfigStore& store) {
  std::ostringstream out;
  for (const auto& k : config_keys()) {
    out << k.name << " = " << store.get(k.name) << "  # " << k.help;
    if (!k.derived_from.empty()) out << " (default: " << k.derived_from << ")";
    out << '\n';
  }
  return out.str();
}

}  // namespace cxlmu::driver
