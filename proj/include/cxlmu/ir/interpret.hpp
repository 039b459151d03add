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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cxlmu/ir/memory.hpp"
#include "cxlmu/ir/types.hpp"

namespace cxlmu::ir {

inline constexpr std::uint64_t kDefaultStepBudget = 100'000'000;

struct LoadRecord {
  InstId inst = 0;
  Value value = 0;
  friend bool operator==(const LoadRecord&, const LoadRecord&) = default;
};

struct StoreRecord {
  Addr addr = 0;
  std::uint32_t size = 0;
  Value value = 0;
  friend bool operator==(const StoreRecord&, const StoreRecord&) = default;
};

struct ArchResult {
  enum class Status { Ok, Trap, BudgetExceeded };
  Status status = Status::Ok;
  InstId fault_inst = 0;
  std::string message;

  std::vector<LoadRecord> load_trace;
  std::map<Reg, Value> final_registers;  // main's frame at return
  std::optional<Value> return_value;
  std::vector<StoreRecord> stores;
  std::uint64_t steps = 0;

  bool ok() const { return status == Status::Ok; }
  friend bool operator==(const ArchResult&, const ArchResult&) = default;
};

/**
 * Executable form of an offloaded slice. The body runs once, or, when
 * `counter` is set, repeats until that register reads zero after an
 * iteration (the do-while shape of the counted loop it was lifted from).
 */
struct SliceCode {
  SliceId id = 0;
  std::vector<Instruction> body;
  std::optional<Reg> counter;
  std::vector<Reg> live_ins;
  std::vector<Reg> live_outs;
};

struct SliceOutcome {
  std::vector<Value> live_outs;
  std::vector<LoadRecord> loads;
  std::vector<StoreRecord> stores;
  std::vector<Addr> lines_newest_first;  // distinct lines loaded
  std::uint64_t dynamic_instructions = 0;
  std::optional<std::string> trap;
  InstId trap_inst = 0;
};

/// Idealized slice executor: functional only, no timing.
SliceOutcome run_slice(const SliceCode& code, std::span<const Value> live_in_values,
                       MemoryImage& mem, std::uint64_t step_budget = kDefaultStepBudget);

struct InterpretOptions {
  std::uint64_t step_budget = kDefaultStepBudget;
  /// Required for programs containing submit_slice / await_mailbox.
  const std::vector<SliceCode>* slices = nullptr;
};

/// Timing-free sequential execution; the functional oracle for every
/// simulation mode. `mem` is copied; the caller's image is untouched.
ArchResult interpret(const Program& p, MemoryImage mem,
                     const std::map<Reg, Value>& inputs = {}, const InterpretOptions& opts = {});

Value evaluate(const Instruction& inst, Value a, Value b);

/// Per-instruction load-value sequences. Two traces are equivalent when every
/// instruction loaded the same values in the same order, regardless of how
/// independent instructions were interleaved.
std::map<InstId, std::vector<Value>> loads_by_instruction(std::span<const LoadRecord> trace);

}  // namespace cxlmu::ir
