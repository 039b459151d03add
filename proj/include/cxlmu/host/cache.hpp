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
#include <optional>
#include <vector>

#include "cxlmu/ir/types.hpp"

namespace cxlmu::host {

using ir::Addr;

/// Set-associative, tags-only L1 with LRU replacement. Data values live in
/// the functional memory image; the cache only decides hit or miss.
class L1Cache {
 public:
  L1Cache(std::uint64_t size_bytes, std::uint32_t associativity);

  /// Hit test that also refreshes LRU order on a hit.
  bool lookup(Addr line);
  bool contains(Addr line) const;
  /// Inserts as most recently used; returns the evicted line, if any.
  std::optional<Addr> fill(Addr line);

  std::size_t set_of(Addr line) const;
  std::size_t sets() const { return sets_.size(); }
  std::uint32_t associativity() const { return assoc_; }
  std::size_t resident() const;
  std::size_t capacity_lines() const { return sets_.size() * assoc_; }
  /// Lines of one set, most recently used first.
  const std::vector<Addr>& set_contents(std::size_t set) const { return sets_[set]; }

 private:
  std::uint32_t assoc_;
  std::vector<std::vector<Addr>> sets_;
};

}  // namespace cxlmu::host
