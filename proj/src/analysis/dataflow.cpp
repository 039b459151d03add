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

#include "cxlmu/analysis/dataflow.hpp"

#include <algorithm>

namespace cxlmu::analysis {

using ir::Opcode;

namespace {

bool is_barrier(const ir::Instruction& inst) {
  switch (inst.op) {
    case Opcode::Label:
    case Opcode::Branch:
    case Opcode::Jump:
    case Opcode::Ret:
    case Opcode::Call:
    case Opcode::SubmitSlice:
    case Opcode::AwaitMailbox:
      return true;
    default:
      return false;
  }
}

bool is_decrement_of(const ir::Instruction& inst, ir::Reg t) {
  if (inst.op != Opcode::Add || inst.dest != t || inst.args.size() != 2) return false;
  const auto& a = inst.args[0];
  const auto& b = inst.args[1];
  return (a.is_reg() && a.as_reg() == t && !b.is_reg() && b.value == -1) ||
         (b.is_reg() && b.as_reg() == t && !a.is_reg() && a.value == -1);
}

bool touches_shared_memory(const ir::Instruction& inst) {
  return inst.is_memory() && inst.space.kind != ir::SpaceAnnotation::Kind::Local;
}

bool mem_conflict(const ir::Instruction& inst, bool slice_has_stores) {
  if (!touches_shared_memory(inst)) return false;
  return inst.op == Opcode::Store || slice_has_stores;
}

template <class Set>
bool intersects(const std::vector<ir::Reg>& regs, const Set& s) {
  return std::any_of(regs.begin(), regs.end(), [&](ir::Reg r) { return s.count(r) != 0; });
}

}  // namespace

std::vector<CountedLoop> find_counted_loops(const ir::Function& f) {
  std::vector<CountedLoop> out;
  const auto& body = f.body;
  for (std::size_t a = 0; a < body.size(); ++a) {
    if (body[a].op != Opcode::Label) continue;
    const std::string& name = body[a].target;
    std::vector<std::size_t> refs;
    for (std::size_t i = 0; i < body.size(); ++i)
      if ((body[i].op == Opcode::Branch || body[i].op == Opcode::Jump) && body[i].target == name)
        refs.push_back(i);
    if (refs.size() != 1) continue;
    const std::size_t b = refs[0];
    if (b <= a || body[b].op != Opcode::Branch || !body[b].args[0].is_reg()) continue;
    const ir::Reg t = body[b].args[0].as_reg();

    bool ok = true;
    std::optional<std::size_t> update;
    for (std::size_t i = a + 1; i < b && ok; ++i) {
      if (is_barrier(body[i])) ok = false;
      const auto d = body[i].defs();
      if (std::find(d.begin(), d.end(), t) != d.end()) {
        if (update || !is_decrement_of(body[i], t)) ok = false;
        update = i;
      }
    }
    if (ok && update) out.push_back({a, *update, b, t});
  }
  return out;
}

std::vector<Run> plain_runs(const ir::Function& f, const std::vector<CountedLoop>& loops) {
  std::vector<bool> in_loop(f.body.size(), false);
  for (const auto& l : loops)
    for (std::size_t i = l.header; i <= l.latch; ++i) in_loop[i] = true;
  std::vector<Run> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= f.body.size(); ++i) {
    const bool stop = i == f.body.size() || in_loop[i] || is_barrier(f.body[i]);
    if (stop) {
      if (i > start) out.push_back({start, i});
      start = i + 1;
    }
  }
  return out;
}

bool is_slice_legal(const ir::Instruction& inst) {
  switch (inst.op) {
    case Opcode::Const:
    case Opcode::Add:
    case Opcode::Mul:
    case Opcode::Cmp:
      return true;
    case Opcode::Load:
    case Opcode::Store:
      return inst.space.is_remote();
    default:
      return false;
  }
}

std::optional<Placement> plan_placement(const ir::Function& f, const SliceShape& shape,
                                        const std::vector<CountedLoop>& loops) {
  if (shape.members.empty() && !shape.loop) return std::nullopt;
  const auto& body = f.body;
  std::vector<bool> in_loop(body.size(), false);
  for (const auto& l : loops)
    for (std::size_t i = l.header; i <= l.latch; ++i) in_loop[i] = true;
  auto plain = [&](std::size_t i) { return !in_loop[i] && !is_barrier(body[i]); };

  std::set<std::size_t> members(shape.members.begin(), shape.members.end());
  std::size_t first = 0;
  std::size_t last = 0;

  if (shape.loop) {
    first = shape.loop->header;
    last = shape.loop->latch;
    for (std::size_t i = first + 1; i < last; ++i) {
      if (members.count(i) || i == shape.loop->update) continue;
      const auto& x = body[i];
      if (mem_conflict(x, shape.has_stores) || intersects(x.uses(), shape.defined)) return std::nullopt;
    }
  } else {
    first = *members.begin();
    last = *members.rbegin();
    std::set<ir::Reg> written;
    for (std::size_t i = first; i <= last; ++i) {
      const auto& x = body[i];
      if (!plain(i)) return std::nullopt;
      if (members.count(i)) {
        for (ir::Reg r : x.defs()) written.insert(r);
        continue;
      }
      if (intersects(x.defs(), shape.live_ins) || intersects(x.uses(), written) ||
          intersects(x.defs(), written) || mem_conflict(x, shape.has_stores))
        return std::nullopt;
    }
  }

  std::size_t q = first;
  while (q > 0 && plain(q - 1)) {
    const auto& x = body[q - 1];
    if (q == 1 && x.op == Opcode::ProfileLabel) break;  // the entry label stays first
    if (intersects(x.defs(), shape.live_ins) || mem_conflict(x, shape.has_stores)) break;
    --q;
  }
  std::size_t w = last + 1;
  while (w < body.size() && plain(w)) {
    const auto& x = body[w];
    if (intersects(x.uses(), shape.defined) || intersects(x.defs(), shape.defined) ||
        mem_conflict(x, shape.has_stores))
      break;
    ++w;
  }
  return Placement{q, w};
}

}  // namespace cxlmu::analysis
