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

#include "cxlmu/host/cache.hpp"

#include <algorithm>
#include <stdexcept>

namespace cxlmu::host {

L1Cache::L1Cache(std::uint64_t size_bytes, std::uint32_t associativity) : assoc_(associativity) {
  if (associativity == 0 || size_bytes < ir::kLineBytes * associativity ||
      size_bytes % (ir::kLineBytes * associativity) != 0)
    throw std::invalid_argument("l1 size must be a positive multiple of 64 * associativity");
  sets_.resize(size_bytes / ir::kLineBytes / associativity);
}

std::size_t L1Cache::set_of(Addr line) const {
  return static_cast<std::size_t>((line / ir::kLineBytes) % sets_.size());
}

bool L1Cache::lookup(Addr line) {
  auto& set = sets_[set_of(line)];
  auto it = std::find(set.begin(), set.end(), line);
  if (it == set.end()) return false;
  std::rotate(set.begin(), it, it + 1);
  return true;
}

bool L1Cache::contains(Addr line) const {
  const auto& set = sets_[set_of(line)];
  return std::find(set.begin(), set.end(), line) != set.end();
}

std::optional<Addr> L1Cache::fill(Addr line) {
  if (lookup(line)) return std::nullopt;
  auto& set = sets_[set_of(line)];
  std::optional<Addr> victim;
  if (set.size() == assoc_) {
    victim = set.back();
    set.pop_back();
  }
  set.insert(set.begin(), line);
  return victim;
}

std::size_t L1Cache::resident() const {
  std::size_t n = 0;
  for (const auto& s : sets_) n += s.size();
  return n;
}

}  // namespace cxlmu::host
