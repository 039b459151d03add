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

#include <array>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cxlmu/ir/types.hpp"

namespace cxlmu::ir {

using Line = std::array<std::uint8_t, kLineBytes>;

struct MemoryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/**
 * Sparse byte-addressable memory made of 64-byte lines. Only addresses inside
 * a declared region may be touched; unpopulated in-region lines read as zero.
 */
class MemoryImage {
 public:
  MemoryImage() = default;
  explicit MemoryImage(std::vector<RegionDecl> regions) : regions_(std::move(regions)) {}

  const std::vector<RegionDecl>& regions() const { return regions_; }
  const std::map<Addr, Line>& lines() const { return lines_; }

  bool in_region(Addr a, std::uint64_t n = 1) const;

  /// Little-endian read of min(size, 8) bytes, zero-extended. Throws
  /// MemoryError outside any region or when the access straddles a line.
  Value read(Addr a, std::uint32_t size) const;
  /// Writes `size` bytes: the value little-endian, then zero padding.
  void write(Addr a, std::uint32_t size, Value v);

  Line line(Addr line_addr) const;
  void set_line(Addr line_addr, const Line& data);

  friend bool operator==(const MemoryImage&, const MemoryImage&) = default;

 private:
  void check(Addr a, std::uint64_t n) const;

  std::vector<RegionDecl> regions_;
  std::map<Addr, Line> lines_;
};

/// `address: <32 hex> <32 hex> <32 hex> <32 hex>` per populated line.
std::string print_memory_image(const MemoryImage& mem);
MemoryImage parse_memory_image(std::string_view text, std::vector<RegionDecl> regions);

}  // namespace cxlmu::ir
