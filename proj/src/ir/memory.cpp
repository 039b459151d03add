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

#include "cxlmu/ir/memory.hpp"

#include <cstdio>
#include <sstream>

namespace cxlmu::ir {

bool MemoryImage::in_region(Addr a, std::uint64_t n) const {
  for (const auto& r : regions_)
    if (r.contains(a, n)) return true;
  return false;
}

void MemoryImage::check(Addr a, std::uint64_t n) const {
  if (a % kLineBytes + n > kLineBytes) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "access of %llu bytes at 0x%llx straddles a line",
                  static_cast<unsigned long long>(n), static_cast<unsigned long long>(a));
    throw MemoryError(buf);
  }
  if (!in_region(a, n)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "address 0x%llx outside every region",
                  static_cast<unsigned long long>(a));
    throw MemoryError(buf);
  }
}

Value MemoryImage::read(Addr a, std::uint32_t size) const {
  check(a, size);
  auto it = lines_.find(line_of(a));
  if (it == lines_.end()) return 0;
  const auto off = a % kLineBytes;
  Value v = 0;
  for (std::uint32_t i = 0; i < size && i < 8; ++i)
    v |= static_cast<Value>(it->second[off + i]) << (8 * i);
  return v;
}

void MemoryImage::write(Addr a, std::uint32_t size, Value v) {
  check(a, size);
  auto& l = lines_.try_emplace(line_of(a), Line{}).first->second;
  const auto off = a % kLineBytes;
  for (std::uint32_t i = 0; i < size; ++i)
    l[off + i] = i < 8 ? static_cast<std::uint8_t>(v >> (8 * i)) : 0;
}

Line MemoryImage::line(Addr line_addr) const {
  auto it = lines_.find(line_of(line_addr));
  return it == lines_.end() ? Line{} : it->second;
}

void MemoryImage::set_line(Addr line_addr, const Line& data) {
  if (line_addr % kLineBytes != 0) throw MemoryError("line address not 64-byte aligned");
  check(line_addr, kLineBytes);
  lines_[line_addr] = data;
}

std::string print_memory_image(const MemoryImage& mem) {
  std::string out;
  char buf[8];
  for (const auto& [addr, data] : mem.lines()) {
    char head[32];
    std::snprintf(head, sizeof head, "%016llx:", static_cast<unsigned long long>(addr));
    out += head;
    for (std::size_t i = 0; i < kLineBytes; ++i) {
      if (i % 16 == 0) out += ' ';
      std::snprintf(buf, sizeof buf, "%02x", data[i]);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

MemoryImage parse_memory_image(std::string_view text, std::vector<RegionDecl> regions) {
  MemoryImage mem(std::move(regions));
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  auto fail = [&](const std::string& why) {
    throw MemoryError("memory image line " + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(in, raw)) {
    ++lineno;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    std::istringstream ls(raw);
    std::string addr_tok;
    if (!(ls >> addr_tok)) continue;
    if (addr_tok.back() != ':') fail("expected 'address:'");
    addr_tok.pop_back();
    Addr addr = 0;
    try {
      addr = std::stoull(addr_tok, nullptr, 16);
    } catch (const std::exception&) {
      fail("bad address");
    }
    if (addr % kLineBytes != 0) fail("address not 64-byte aligned");
    Line data{};
    std::size_t pos = 0;
    std::string group;
    int groups = 0;
    while (ls >> group) {
      if (group.size() != 32) fail("each group must be 16 bytes of hex");
      for (std::size_t i = 0; i < 32; i += 2) {
        unsigned v = 0;
        if (std::sscanf(group.c_str() + i, "%2x", &v) != 1) fail("bad hex");
        data[pos++] = static_cast<std::uint8_t>(v);
      }
      if (++groups > 4) fail("too many groups");
    }
    if (groups != 4) fail("expected four 16-byte groups");
    try {
      mem.set_line(addr, data);
    } catch (const MemoryError& e) {
      fail(e.what());
    }
  }
  return mem;
}

}  // namespace cxlmu::ir
