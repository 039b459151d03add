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
#include <vector>

#include "cxlmu/ir/types.hpp"

namespace cxlmu::analysis {

/// label L; straight-line body; t = add t, -1; branch t, L
struct CountedLoop {
  std::size_t header = 0;  // index of the label
  std::size_t update = 0;  // index of the counter decrement
  std::size_t latch = 0;   // index of the back-edge branch
  ir::Reg counter = 0;
};

std::vector<CountedLoop> find_counted_loops(const ir::Function& f);

/// Half-open range of instructions free of control flow and loops.
struct Run {
  std::size_t begin = 0;
  std::size_t end = 0;
};

std::vector<Run> plain_runs(const ir::Function& f, const std::vector<CountedLoop>& loops);

bool is_slice_legal(const ir::Instruction& inst);

/// What code motion needs to know about a candidate slice.
struct SliceShape {
  std::vector<std::size_t> members;   // indices leaving the host stream
  std::optional<CountedLoop> loop;
  std::set<ir::Reg> live_ins;
  std::set<ir::Reg> defined;          // registers the await will write
  bool has_stores = false;
};

/// submit goes before `submit_at`, await before `await_at` (original indices).
struct Placement {
  std::size_t submit_at = 0;
  std::size_t await_at = 0;
};

/// Earliest legal submit and latest legal await, or nullopt when the
/// instructions left between the slice members make the motion unsound.
std::optional<Placement> plan_placement(const ir::Function& f, const SliceShape& shape,
                                        const std::vector<CountedLoop>& loops);

}  // namespace cxlmu::analysis
