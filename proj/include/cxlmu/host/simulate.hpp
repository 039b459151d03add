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
#include <string>
#include <vector>

#include "cxlmu/analysis/cost_model.hpp"
#include "cxlmu/analysis/rewrite.hpp"
#include "cxlmu/fabric/topology.hpp"
#include "cxlmu/host/report.hpp"
#include "cxlmu/host/structures.hpp"
#include "cxlmu/ir/memory.hpp"

namespace cxlmu::host {

class OracleMismatch : public SimError {
 public:
  using SimError::SimError;
};

struct SimOptions {
  /// Compare the load-value trace against interpret() of the original program.
  bool verify = true;
  std::uint64_t step_budget = ir::kDefaultStepBudget;
  bool message_log = false;  // fill SimReport::message_log
  bool cycle_trace = false;  // fill SimReport::cycle_trace
  std::vector<ir::Addr> warm_lines;  // preloaded into L1
  std::string mode;
  std::string workload_digest;
  std::uint64_t seed = 0;  // recorded only; the model has no randomness
  std::map<ir::Reg, ir::Value> inputs;
};

/**
 * Cycle-level run of the host core against the fabric.
 *
 * Instructions dispatch in order, one per cycle, into the ROB; they execute
 * once their producers finish and commit in order, one per cycle. Values are
 * computed at dispatch, so the timing model never needs speculation. A
 * submit_slice hands the slice to the fabric; the matching await parks in the
 * ROB until the mailbox delivers the completion.
 *
 * Throws SimError on deadlock or a malformed setup, and OracleMismatch when
 * verification is on and the loads differ from the interpreter.
 */
SimReport simulate(const ir::Program& p, const ir::MemoryImage& mem, const fabric::Topology& topo,
                   const analysis::CostModel& cm, const CoreConfig& cc, const SimOptions& opts = {});

SimReport simulate(const analysis::OffloadedProgram& op, const ir::MemoryImage& mem,
                   const fabric::Topology& topo, const analysis::CostModel& cm, const CoreConfig& cc,
                   const SimOptions& opts = {});


}  // namespace cxlmu::host
