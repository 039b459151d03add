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
#include <stdexcept>
#include <string>
#include <string_view>

#include "cxlmu/ir/memory.hpp"
#include "cxlmu/ir/types.hpp"

namespace cxlmu::workloads {

enum class Kind : std::uint8_t { PointerChase, Strided, HashProbe, IndirectGather };

std::string_view kind_name(Kind k);
std::optional<Kind> parse_kind(std::string_view name);

inline constexpr ir::Addr kRegionBase = 0x10000000;

struct WorkloadSpec {
  Kind kind = Kind::PointerChase;
  std::uint64_t n = 1024;
  std::uint64_t stride = 64;  // Strided only
  std::uint64_t seed = 1;
  ir::AddressSpace space = ir::AddressSpace::remote(2);
  std::uint32_t work_per_element = 4;
  std::uint64_t region_limit = 1ull << 30;  // bytes one region may span

  /// Empty when valid.
  std::string check() const;
};

class WorkloadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Workload {
  ir::Program program;
  ir::MemoryImage memory;
};

/**
 * Builds one counted loop over a single region:
 *
 *   PointerChase    r1 = load [r1], over a one-cycle random permutation of lines
 *   Strided         load [p]; p += stride; each element holds its own address
 *   IndirectGather  i = load idx[k]; v = load data[i * 64]
 *   HashProbe       probe D consecutive slots from a key's home slot, branch-free
 *
 * Every iteration also runs `work_per_element` independent adds.
 */
Workload generate(const WorkloadSpec& spec);

}  // namespace cxlmu::workloads
