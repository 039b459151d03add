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

#include "cxlmu/workloads/generate.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "cxlmu/ir/validate.hpp"

namespace cxlmu::workloads {

using ir::Addr;
using ir::Instruction;
using ir::Opcode;
using ir::Operand;
using ir::Reg;

std::string_view kind_name(Kind k) {
  switch (k) {
    case Kind::PointerChase: return "pointer_chase";
    case Kind::Strided: return "strided";
    case Kind::HashProbe: return "hash_probe";
    case Kind::IndirectGather: return "indirect_gather";
  }
  return "?";
}

std::optional<Kind> parse_kind(std::string_view name) {
  for (Kind k : {Kind::PointerChase, Kind::Strided, Kind::HashProbe, Kind::IndirectGather})
    if (kind_name(k) == name) return k;
  return std::nullopt;
}

std::string WorkloadSpec::check() const {
  if (n == 0) return "n must be >= 1";
  if (stride == 0 || stride % 8 != 0) return "stride must be a positive multiple of 8";
  if (space.is_remote() && space.endpoint == 0) return "remote space needs an endpoint id";
  return {};
}

namespace {

constexpr Reg kPtr = 1;
constexpr Reg kCount = 2;
constexpr Reg kWorkBase = 32;

Addr round_up(std::uint64_t v) { return (v + ir::kLineBytes - 1) / ir::kLineBytes * ir::kLineBytes; }

// Emits instructions with sequential ids.
class Builder {
 public:
  void constant(Reg d, std::int64_t v) { op(Opcode::Const, d, {Operand::imm(v)}); }
  void add(Reg d, Operand a, Operand b) { op(Opcode::Add, d, {a, b}); }
  void mul(Reg d, Operand a, Operand b) { op(Opcode::Mul, d, {a, b}); }
  void cmp_eq(Reg d, Operand a, Operand b) {
    op(Opcode::Cmp, d, {a, b});
    body.back().pred = ir::CmpPred::Eq;
  }
  void load(Reg d, Reg addr) {
    op(Opcode::Load, d, {Operand::reg(addr)});
    body.back().size = 8;
  }
  void label(const std::string& name) {
    op(Opcode::Label, std::nullopt, {});
    body.back().target = name;
  }
  void branch(Reg c, const std::string& name) {
    op(Opcode::Branch, std::nullopt, {Operand::reg(c)});
    body.back().target = name;
  }
  void ret(Reg r) { op(Opcode::Ret, std::nullopt, {Operand::reg(r)}); }

  std::vector<Instruction> body;

 private:
  void op(Opcode o, std::optional<Reg> d, std::vector<Operand> args) {
    Instruction i;
    i.id = static_cast<ir::InstId>(body.size() + 1);
    i.op = o;
    i.dest = d;
    i.args = std::move(args);
    body.push_back(std::move(i));
  }
};

Operand R(Reg r) { return Operand::reg(r); }
Operand I(std::int64_t v) { return Operand::imm(v); }

void check_size(const WorkloadSpec& spec, std::uint64_t bytes) {
  if (bytes > spec.region_limit)
    throw WorkloadError("region too small: " + std::string(kind_name(spec.kind)) + " with n=" +
                        std::to_string(spec.n) + " needs " + std::to_string(bytes) + " bytes, limit is " +
                        std::to_string(spec.region_limit));
}

void work_inits(Builder& b, const WorkloadSpec& spec) {
  for (std::uint32_t w = 0; w < spec.work_per_element; ++w) b.constant(kWorkBase + w, 0);
}

void work_body(Builder& b, const WorkloadSpec& spec) {
  for (std::uint32_t w = 0; w < spec.work_per_element; ++w) b.add(kWorkBase + w, R(kWorkBase + w), I(w + 1));
}

void loop_tail(Builder& b, Reg result) {
  b.add(kCount, R(kCount), I(-1));
  b.branch(kCount, "loop");
  b.ret(result);
}

// Fisher-Yates with rng() % (i + 1), shared by every generator.
std::vector<std::uint64_t> shuffled(std::uint64_t n, std::mt19937_64& rng) {
  std::vector<std::uint64_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  for (std::uint64_t i = n; i-- > 1;) std::swap(v[i], v[rng() % (i + 1)]);
  return v;
}

Workload finish(const WorkloadSpec& spec, Builder& b, std::uint64_t bytes,
                const std::vector<std::pair<Addr, ir::Value>>& words) {
  Workload w;
  ir::RegionDecl r{std::string(kind_name(spec.kind)), kRegionBase, round_up(bytes), spec.space};
  w.program.regions.push_back(r);
  ir::Function f;
  f.name = "main";
  f.body = std::move(b.body);
  w.program.functions.push_back(std::move(f));
  w.memory = ir::MemoryImage(w.program.regions);
  for (auto [a, v] : words) w.memory.write(a, 8, v);
  if (auto diags = ir::validate(w.program); !diags.empty())
    throw WorkloadError("generated program failed validation: " + diags.front().message);
  return w;
}

Workload pointer_chase(const WorkloadSpec& spec) {
  const std::uint64_t bytes = spec.n * ir::kLineBytes;
  check_size(spec, bytes);
  std::mt19937_64 rng(spec.seed);
  const auto order = shuffled(spec.n, rng);
  std::vector<std::pair<Addr, ir::Value>> words;
  auto node = [](std::uint64_t i) { return kRegionBase + i * ir::kLineBytes; };
  for (std::uint64_t k = 0; k < spec.n; ++k) words.emplace_back(node(order[k]), node(order[(k + 1) % spec.n]));

  Builder b;
  work_inits(b, spec);
  b.constant(kPtr, static_cast<std::int64_t>(node(order[0])));
  b.constant(kCount, static_cast<std::int64_t>(spec.n));
  b.label("loop");
  b.load(kPtr, kPtr);
  work_body(b, spec);
  loop_tail(b, kPtr);
  return finish(spec, b, bytes, words);
}

Workload strided(const WorkloadSpec& spec) {
  const std::uint64_t bytes = spec.n * spec.stride;
  check_size(spec, bytes);
  std::vector<std::pair<Addr, ir::Value>> words;
  for (std::uint64_t i = 0; i < spec.n; ++i) words.emplace_back(kRegionBase + i * spec.stride, kRegionBase + i * spec.stride);

  constexpr Reg kVal = 3, kSum = 4;
  Builder b;
  work_inits(b, spec);
  b.constant(kSum, 0);
  b.constant(kPtr, static_cast<std::int64_t>(kRegionBase));
  b.constant(kCount, static_cast<std::int64_t>(spec.n));
  b.label("loop");
  b.load(kVal, kPtr);
  b.add(kSum, R(kSum), R(kVal));
  b.add(kPtr, R(kPtr), I(static_cast<std::int64_t>(spec.stride)));
  work_body(b, spec);
  loop_tail(b, kSum);
  return finish(spec, b, bytes, words);
}

Workload indirect_gather(const WorkloadSpec& spec) {
  const std::uint64_t index_bytes = round_up(spec.n * 8);
  const std::uint64_t bytes = index_bytes + spec.n * ir::kLineBytes;
  check_size(spec, bytes);
  std::mt19937_64 rng(spec.seed);
  const Addr data = kRegionBase + index_bytes;
  std::vector<std::pair<Addr, ir::Value>> words;
  for (std::uint64_t k = 0; k < spec.n; ++k) words.emplace_back(kRegionBase + 8 * k, rng() % spec.n);
  for (std::uint64_t i = 0; i < spec.n; ++i) words.emplace_back(data + i * ir::kLineBytes, rng());

  constexpr Reg kIdx = 3, kOff = 4, kAddr = 5, kSum = 6, kVal = 7;
  Builder b;
  work_inits(b, spec);
  b.constant(kSum, 0);
  b.constant(kPtr, static_cast<std::int64_t>(kRegionBase));
  b.constant(kCount, static_cast<std::int64_t>(spec.n));
  b.label("loop");
  b.load(kIdx, kPtr);
  b.mul(kOff, R(kIdx), I(static_cast<std::int64_t>(ir::kLineBytes)));
  b.add(kAddr, R(kOff), I(static_cast<std::int64_t>(data)));
  b.load(kVal, kAddr);
  b.add(kSum, R(kSum), R(kVal));
  b.add(kPtr, R(kPtr), I(8));
  work_body(b, spec);
  loop_tail(b, kSum);
  return finish(spec, b, bytes, words);
}

// Query array of (key, home-slot address) pairs followed by a table of
// 16-byte (key, value) slots at load factor 0.25. Insertion probes linearly
// into overflow slots past the end instead of wrapping, so every key sits
// within D slots of its home and the probe loop needs no branches.
Workload hash_probe(const WorkloadSpec& spec) {
  constexpr std::uint64_t kSlot = 16;
  const std::uint64_t slots = 4 * spec.n;
  const std::uint64_t query_bytes = round_up(spec.n * 16);
  const std::uint64_t bytes = query_bytes + (slots + spec.n) * kSlot;
  check_size(spec, bytes);
  const Addr table = kRegionBase + query_bytes;

  std::mt19937_64 rng(spec.seed);
  std::set<std::uint64_t> used;
  std::vector<std::uint64_t> keys;
  while (keys.size() < spec.n) {
    const std::uint64_t k = rng() | 1;  // 0 marks an empty slot
    if (used.insert(k).second) keys.push_back(k);
  }
  std::vector<std::uint64_t> slot_key(slots + spec.n, 0);
  std::uint64_t depth = 1;
  std::vector<std::pair<Addr, ir::Value>> words;
  for (std::uint64_t i = 0; i < spec.n; ++i) {
    const std::uint64_t home = keys[i] % slots;
    std::uint64_t s = home;
    while (slot_key[s] != 0) ++s;
    slot_key[s] = keys[i];
    depth = std::max(depth, s - home + 1);
    words.emplace_back(table + s * kSlot, keys[i]);
    words.emplace_back(table + s * kSlot + 8, i + 1);
    words.emplace_back(kRegionBase + 16 * i, keys[i]);
    words.emplace_back(kRegionBase + 16 * i + 8, table + home * kSlot);
  }

  constexpr Reg kKey = 3, kHomeAddr = 4, kHome = 5, kSlotAddr = 6, kSlotKey = 7, kHit = 8, kHits = 9;
  Builder b;
  work_inits(b, spec);
  b.constant(kHits, 0);
  b.constant(kPtr, static_cast<std::int64_t>(kRegionBase));
  b.constant(kCount, static_cast<std::int64_t>(spec.n));
  b.label("loop");
  b.load(kKey, kPtr);
  b.add(kHomeAddr, R(kPtr), I(8));
  b.load(kHome, kHomeAddr);
  for (std::uint64_t d = 0; d < depth; ++d) {
    b.add(kSlotAddr, R(kHome), I(static_cast<std::int64_t>(d * kSlot)));
    b.load(kSlotKey, kSlotAddr);
    b.cmp_eq(kHit, R(kSlotKey), R(kKey));
    b.add(kHits, R(kHits), R(kHit));
  }
  b.add(kPtr, R(kPtr), I(16));
  work_body(b, spec);
  loop_tail(b, kHits);
  return finish(spec, b, bytes, words);
}

}  // namespace

Workload generate(const WorkloadSpec& spec) {
  if (auto err = spec.check(); !err.empty()) throw WorkloadError(err);
  switch (spec.kind) {
    case Kind::PointerChase: return pointer_chase(spec);
    case Kind::Strided: return strided(spec);
    case Kind::IndirectGather: return indirect_gather(spec);
    case Kind::HashProbe: return hash_probe(spec);
  }
  throw WorkloadError("unknown workload kind");
}

}  // namespace cxlmu::workloads
