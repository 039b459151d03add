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

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cxlmu/ir/interpret.hpp"
#include "cxlmu/ir/types.hpp"

namespace cxlmu::analysis {

using ir::InstId;
using ir::SliceId;

/// Where a slice executes.
struct Site {
  enum class Kind : std::uint8_t { Host, Switch, Endpoint };
  Kind kind = Kind::Host;
  ir::NodeId node = 0;

  static Site host() { return {}; }
  static Site switch_node(ir::NodeId n) { return {Kind::Switch, n}; }
  static Site endpoint(ir::NodeId n) { return {Kind::Endpoint, n}; }
  friend bool operator==(const Site&, const Site&) = default;
};

std::string to_string(const Site& s);
/// Parses "host", "switch(N)", "endpoint(N)".
std::optional<Site> parse_site(std::string_view text);

/**
 * A group of instructions shipped to a near-memory core as one unit.
 *
 * For a counted loop the slice is the loop-side partition plus a copy of the
 * induction update; it runs as a do-while on the counter, and the counter is
 * passed in as a live-in.
 */
struct OffloadSlice {
  SliceId id = 0;
  std::string function;
  std::vector<InstId> instructions;      // program order, counter update included
  std::vector<ir::Instruction> body;     // copies of those instructions
  std::optional<ir::Reg> counter;
  std::optional<InstId> counter_update;
  std::optional<InstId> loop_header;     // label instruction of the fissioned loop
  std::vector<ir::Reg> live_ins;
  std::vector<ir::Reg> live_outs;
  std::set<ir::NodeId> touched_endpoints;
  std::uint32_t anchor_label = 0;
  Site site;
  double est_window = 0;
  std::uint64_t expected_trips = 1;

  bool is_loop() const { return counter.has_value(); }
  std::size_t load_count() const;
  bool has_stores() const;
  ir::SliceCode code() const;
};

struct SliceOptions {
  bool batching = true;
  std::size_t max_slice_len = 64;
};

/**
 * Collects backward slices of Remote loads. Loops with a recognizable
 * down-counter are fissioned; straight-line chains are grouped by dependence
 * and batched up to the length cap. Slices never cross a call, label or
 * branch that is not the loop's own back-edge.
 */
std::vector<OffloadSlice> extract_slices(const ir::Program& p, const SliceOptions& opts = {});

/// Structural closure check: every operand is a live-in or defined earlier.
bool slice_is_closed(const OffloadSlice& s);

}  // namespace cxlmu::analysis
