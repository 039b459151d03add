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

#include "cxlmu/host/report.hpp"

#include <set>
#include <stdexcept>

#include <json.hpp>

namespace cxlmu::host {

using json = nlohmann::ordered_json;

std::string to_json(const SimReport& r) {
  json j;
  j["format_version"] = r.format_version;
  j["mode"] = r.mode;
  j["workload_digest"] = r.workload_digest;
  j["seed"] = r.seed;
  j["status"] = r.status;
  j["message"] = r.message;
  j["total_cycles"] = r.total_cycles;
  j["instructions_retired"] = r.instructions_retired;
  j["stalls"] = {{"l1_miss", r.stalls.l1_miss},
                 {"mshr_full", r.stalls.mshr_full},
                 {"rob_full", r.stalls.rob_full},
                 {"awaiting_mailbox", r.stalls.awaiting_mailbox},
                 {"total", r.stalls.total()}};
  j["l1"] = {{"hits", r.l1_hits}, {"misses", r.l1_misses}};
  j["max_rob_occupancy"] = r.max_rob_occupancy;
  j["max_mshr_occupancy"] = r.max_mshr_occupancy;
  j["fabric_messages"] = r.fabric_messages;
  auto& labels = j["labels"] = json::array();
  for (const auto& l : r.labels)
    labels.push_back(json{{"id", l.id}, {"hits", l.hits}, {"first_hit_cycle", l.first_hit_cycle}});
  auto& slices = j["slices"] = json::array();
  for (const auto& s : r.slices)
    slices.push_back(json{{"slice", s.slice},
                          {"site", s.site},
                          {"anchor_label", s.anchor_label},
                          {"est_window", s.est_window},
                          {"submit_cycle", s.submit_cycle},
                          {"complete_cycle", s.complete_cycle},
                          {"consume_cycle", s.consume_cycle},
                          {"window", s.consume_cycle - s.submit_cycle},
                          {"retired_in_window", s.retired_in_window},
                          {"near_cycles", s.near_cycles},
                          {"consumed", s.consumed}});
  j["return_value"] = r.return_value ? json(*r.return_value) : json(nullptr);
  auto& trace = j["load_trace"] = json::array();
  for (const auto& l : r.load_trace) trace.push_back(json::array({l.inst, l.value}));
  j["oracle_checked"] = r.oracle_checked;
  return j.dump(2) + "\n";
}

SimReport report_from_json(const std::string& text) {
  SimReport r;
  try {
    const json j = json::parse(text);
    r.format_version = j.at("format_version").get<int>();
    if (r.format_version != kReportFormatVersion)
      throw std::runtime_error("unsupported format_version " + std::to_string(r.format_version));
    r.mode = j.at("mode").get<std::string>();
    r.workload_digest = j.at("workload_digest").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.status = j.at("status").get<std::string>();
    r.message = j.at("message").get<std::string>();
    r.total_cycles = j.at("total_cycles").get<std::uint64_t>();
    r.instructions_retired = j.at("instructions_retired").get<std::uint64_t>();
    const auto& st = j.at("stalls");
    r.stalls = {st.at("l1_miss").get<std::uint64_t>(), st.at("mshr_full").get<std::uint64_t>(),
                st.at("rob_full").get<std::uint64_t>(), st.at("awaiting_mailbox").get<std::uint64_t>()};
    r.l1_hits = j.at("l1").at("hits").get<std::uint64_t>();
    r.l1_misses = j.at("l1").at("misses").get<std::uint64_t>();
    r.max_rob_occupancy = j.at("max_rob_occupancy").get<std::uint64_t>();
    r.max_mshr_occupancy = j.at("max_mshr_occupancy").get<std::uint64_t>();
    for (const auto& [k, v] : j.at("fabric_messages").items()) r.fabric_messages[k] = v.get<std::uint64_t>();
    for (const auto& l : j.at("labels"))
      r.labels.push_back({l.at("id").get<std::uint32_t>(), l.at("hits").get<std::uint64_t>(),
                          l.at("first_hit_cycle").get<std::uint64_t>()});
    for (const auto& s : j.at("slices")) {
      SliceRecord x;
      x.slice = s.at("slice").get<ir::SliceId>();
      x.site = s.at("site").get<std::string>();
      x.anchor_label = s.at("anchor_label").get<std::uint32_t>();
      x.est_window = s.at("est_window").get<double>();
      x.submit_cycle = s.at("submit_cycle").get<std::uint64_t>();
      x.complete_cycle = s.at("complete_cycle").get<std::uint64_t>();
      x.consume_cycle = s.at("consume_cycle").get<std::uint64_t>();
      x.retired_in_window = s.at("retired_in_window").get<std::uint64_t>();
      x.near_cycles = s.at("near_cycles").get<std::uint64_t>();
      x.consumed = s.at("consumed").get<bool>();
      r.slices.push_back(std::move(x));
    }
    if (!j.at("return_value").is_null()) r.return_value = j.at("return_value").get<ir::Value>();
    for (const auto& l : j.at("load_trace"))
      r.load_trace.push_back({l.at(0).get<ir::InstId>(), l.at(1).get<ir::Value>()});
    r.oracle_checked = j.at("oracle_checked").get<bool>();
  } catch (const json::exception& e) {
    throw std::runtime_error(e.what());
  }
  return r;
}

WindowMeasure measure_window(const SimReport& r, ir::SliceId slice) {
  WindowMeasure m;
  std::uint64_t total_window = 0;
  bool seen = false;
  for (const auto& s : r.slices) {
    if (s.slice != slice) continue;
    seen = true;
    if (!s.consumed) throw std::runtime_error("slice " + std::to_string(slice) + " was never consumed");
    total_window += s.consume_cycle - s.submit_cycle;
    m.retired += s.retired_in_window;
    ++m.executions;
  }
  if (!seen) throw std::runtime_error("slice " + std::to_string(slice) + " not in report");
  m.window = static_cast<double>(total_window) / static_cast<double>(m.executions);
  m.utilization = total_window ? static_cast<double>(m.retired) / static_cast<double>(total_window) : 0.0;
  return m;
}

double mean_utilization(const SimReport& r) {
  std::set<ir::SliceId> ids;
  for (const auto& s : r.slices)
    if (s.consumed) ids.insert(s.slice);
  if (ids.empty()) return 0.0;
  double sum = 0;
  for (auto id : ids) sum += measure_window(r, id).utilization;
  return sum / static_cast<double>(ids.size());
}

}  // namespace cxlmu::host
