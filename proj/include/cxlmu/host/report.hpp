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

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cxlmu/ir/interpret.hpp"

namespace cxlmu::host {

inline constexpr int kReportFormatVersion = 1;

struct StallBreakdown {
  std::uint64_t l1_miss = 0;
  std::uint64_t mshr_full = 0;
  std::uint64_t rob_full = 0;
  std::uint64_t awaiting_mailbox = 0;

  std::uint64_t total() const { return l1_miss + mshr_full + rob_full + awaiting_mailbox; }
  friend bool operator==(const StallBreakdown&, const StallBreakdown&) = default;
};

/// One dynamic execution of a slice.
struct SliceRecord {
  ir::SliceId slice = 0;
  std::string site;
  std::uint32_t anchor_label = 0;
  double est_window = 0;
  std::uint64_t submit_cycle = 0;    // submit starts executing
  std::uint64_t complete_cycle = 0;  // completion accepted into the mailbox
  std::uint64_t consume_cycle = 0;   // await entry resumed
  std::uint64_t retired_in_window = 0;
  std::uint64_t near_cycles = 0;
  bool consumed = false;
  friend bool operator==(const SliceRecord&, const SliceRecord&) = default;
};

struct LabelRecord {
  std::uint32_t id = 0;
  std::uint64_t hits = 0;
  std::uint64_t first_hit_cycle = 0;
  friend bool operator==(const LabelRecord&, const LabelRecord&) = default;
};

struct SimReport {
  int format_version = kReportFormatVersion;
  std::string mode;
  std::string workload_digest;
  std::uint64_t seed = 0;
  std::string status = "ok";  // ok | trap | budget
  std::string message;

  std::uint64_t total_cycles = 0;
  std::uint64_t instructions_retired = 0;
  StallBreakdown stalls;
  std::uint64_t l1_hits = 0;
  std::uint64_t l1_misses = 0;
  std::uint64_t max_rob_occupancy = 0;
  std::uint64_t max_mshr_occupancy = 0;
  std::map<std::string, std::uint64_t> fabric_messages;
  std::vector<LabelRecord> labels;
  std::vector<SliceRecord> slices;
  std::optional<ir::Value> return_value;
  std::vector<ir::LoadRecord> load_trace;
  bool oracle_checked = false;

  // Not serialized.
  std::vector<std::string> message_log;
  std::vector<std::string> cycle_trace;
  std::map<ir::Reg, ir::Value> final_registers;
  std::uint64_t data_messages = 0;       // ReadResp + WriteReq delivered
  std::uint64_t payload_violations = 0;  // of those, payload != 64 bytes
  /// delivered counts keyed "Kind src->dst"
  std::map<std::string, std::uint64_t> message_pairs;
};

std::string to_json(const SimReport& r);
/// Throws std::runtime_error on malformed input.
SimReport report_from_json(const std::string& text);

struct WindowMeasure {
  double window = 0;       // mean consume - submit over executions
  double utilization = 0;  // retired_in_window / window, summed over executions
  std::uint64_t retired = 0;
  std::uint64_t executions = 0;
};

/// Realized window of a slice; throws std::runtime_error when the slice never
/// ran to consumption.
WindowMeasure measure_window(const SimReport& r, ir::SliceId slice);

/// Mean utilization over every slice in the report (0 with no slices).
double mean_utilization(const SimReport& r);

}  // namespace cxlmu::host
