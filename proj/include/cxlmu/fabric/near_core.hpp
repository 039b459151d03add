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

#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cxlmu/fabric/topology.hpp"
#include "cxlmu/ir/interpret.hpp"
#include "cxlmu/ir/memory.hpp"

namespace cxlmu::fabric {

struct NearJob {
  ir::SliceId slice = 0;
  Cycles arrival = 0;
  Cycles start = 0;
  Cycles finish = 0;
};

/// The weak in-order core colocated with a switch or endpoint. It runs one
/// slice at a time, first come first served.
struct NearCoreState {
  NodeId node = 0;
  double near_cpi = 2.0;
  Cycles local_latency = 40;
  Cycles busy_until = 0;
  std::deque<NearJob> queue;  // started or waiting, in arrival order
};

struct NearResult {
  std::vector<ir::Value> live_outs;
  std::vector<Addr> lines_newest_first;
  std::vector<ir::LoadRecord> loads;
  std::vector<ir::StoreRecord> stores;
  std::uint64_t dynamic_instructions = 0;
  std::uint64_t access_cycles = 0;
  Cycles cycles = 0;
  std::optional<std::string> error;
};

/**
 * Executes a slice at `nc.node`. Cost is near_cpi per dynamic instruction
 * plus, per load, the local latency when this node owns the line or the
 * fabric round trip (twice the route latency) to the owning endpoint.
 * Lines that no endpoint owns produce an error result.
 */
NearResult near_execute(const ir::SliceCode& code, std::span<const ir::Value> live_ins,
                        ir::MemoryImage& mem, const NearCoreState& nc, const Topology& topo,
                        std::uint64_t step_budget = ir::kDefaultStepBudget);

}  // namespace cxlmu::fabric
