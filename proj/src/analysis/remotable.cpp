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

#include "cxlmu/analysis/remotable.hpp"

#include <algorithm>
#include <deque>
#include <map>

#include "cxlmu/ir/cfg.hpp"
#include "cxlmu/ir/interpret.hpp"

namespace cxlmu::analysis {

using ir::Opcode;
using ir::SpaceAnnotation;
using Kind = AbsVal::Kind;

RegionMap RegionMap::from(const ir::Program& p) {
  RegionMap rm;
  for (const auto& r : p.regions) rm.add(r.base, r.length, r.space);
  return rm;
}

void RegionMap::add(Addr base, std::uint64_t length, AddressSpace space) {
  entries_.push_back({base, length, space});
  std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) { return a.base < b.base; });
}

std::optional<AddressSpace> RegionMap::lookup(Addr a) const {
  for (const auto& e : entries_)
    if (a >= e.base && a - e.base < e.length) return e.space;
  return std::nullopt;
}

namespace {

std::optional<AddressSpace> region_space(std::int64_t c, const RegionMap& rm) {
  return rm.lookup(static_cast<Addr>(c));
}

AbsVal with_remote(AbsVal v, bool may) {
  v.may_remote = v.may_remote || may;
  return v;
}

AbsVal const_val(std::int64_t c, const RegionMap& rm) {
  AbsVal v = AbsVal::constant(c);
  auto s = region_space(c, rm);
  v.may_remote = s && s->is_remote();
  return v;
}

AbsVal add_vals(const AbsVal& a, const AbsVal& b, const RegionMap& rm) {
  const bool may = a.may_remote || b.may_remote;
  if (a.kind == Kind::Bottom || b.kind == Kind::Bottom) return AbsVal::bottom();
  if (a.kind == Kind::Top || b.kind == Kind::Top) return with_remote(AbsVal::top(), may);
  if (a.kind == Kind::Const && b.kind == Kind::Const) return const_val(a.c + b.c, rm);
  if (b.kind == Kind::Const) return add_vals(b, a, rm);
  if (a.kind == Kind::Const) {
    auto s = region_space(a.c, rm);
    if (b.kind == Kind::Scalar) return with_remote(s ? AbsVal::ptr(*s) : AbsVal::scalar(), may);
    // b is Ptr
    if (!s || *s == b.space) return with_remote(AbsVal::ptr(b.space), may);
    return with_remote(AbsVal::top(), may);
  }
  if (a.kind == Kind::Scalar && b.kind == Kind::Scalar) return with_remote(AbsVal::scalar(), may);
  if (a.kind == Kind::Ptr && b.kind == Kind::Ptr) return with_remote(AbsVal::top(), may);
  return with_remote(AbsVal::ptr(a.kind == Kind::Ptr ? a.space : b.space), may);
}

AbsVal arith_vals(const ir::Instruction& inst, const AbsVal& a, const AbsVal& b, const RegionMap& rm) {
  if (a.kind == Kind::Bottom || b.kind == Kind::Bottom) return AbsVal::bottom();
  if (a.kind == Kind::Const && b.kind == Kind::Const)
    return const_val(static_cast<std::int64_t>(
                         ir::evaluate(inst, static_cast<ir::Value>(a.c), static_cast<ir::Value>(b.c))),
                     rm);
  if (inst.op == Opcode::Mul && (a.kind == Kind::Top || b.kind == Kind::Top)) return AbsVal::top();
  return AbsVal::scalar();
}

}  // namespace

AbsVal join(const AbsVal& a, const AbsVal& b, const RegionMap& rm) {
  if (a.kind == Kind::Bottom) return b;
  if (b.kind == Kind::Bottom) return a;
  const bool may = a.may_remote || b.may_remote;
  if (a.kind == Kind::Top || b.kind == Kind::Top) return with_remote(AbsVal::top(), may);
  if (a.kind == Kind::Const && b.kind == Kind::Const) {
    if (a.c == b.c) return with_remote(a, may);
    auto sa = region_space(a.c, rm);
    auto sb = region_space(b.c, rm);
    if (!sa && !sb) return with_remote(AbsVal::scalar(), may);
    if (sa && sb && *sa == *sb) return with_remote(AbsVal::ptr(*sa), may);
    return with_remote(AbsVal::top(), may);
  }
  if (b.kind == Kind::Const) return join(b, a, rm);
  if (a.kind == Kind::Const) {
    auto s = region_space(a.c, rm);
    if (b.kind == Kind::Scalar) return with_remote(s ? AbsVal::top() : AbsVal::scalar(), may);
    if (s && *s == b.space) return with_remote(AbsVal::ptr(b.space), may);
    return with_remote(AbsVal::top(), may);
  }
  if (a.kind == Kind::Scalar && b.kind == Kind::Scalar) return with_remote(AbsVal::scalar(), may);
  if (a.kind == Kind::Ptr && b.kind == Kind::Ptr && a.space == b.space)
    return with_remote(AbsVal::ptr(a.space), may);
  return with_remote(AbsVal::top(), may);
}

namespace {

SpaceAnnotation annotate(const AbsVal& addr, const RegionMap& rm) {
  switch (addr.kind) {
    case Kind::Const: {
      auto s = region_space(addr.c, rm);
      if (!s) return SpaceAnnotation::unknown();
      return s->is_remote() ? SpaceAnnotation::remote(s->endpoint) : SpaceAnnotation::local();
    }
    case Kind::Ptr:
      return addr.space.is_remote() ? SpaceAnnotation::remote(addr.space.endpoint)
                                    : SpaceAnnotation::local();
    default:
      return SpaceAnnotation::unknown();
  }
}

struct FunctionFacts {
  std::vector<SpaceAnnotation> annotations;                 // per instruction
  std::vector<std::pair<std::size_t, std::vector<AbsVal>>> calls;  // (index, arg values)
};

using State = std::vector<AbsVal>;

FunctionFacts analyze_function(const ir::Function& f, const RegionMap& rm, const State& param_seeds) {
  const std::size_t n = f.body.size();
  FunctionFacts facts;
  facts.annotations.assign(n, SpaceAnnotation::unanalyzed());
  if (n == 0) return facts;
  const std::size_t width = f.max_reg() + 1;
  const auto succ = ir::successors(f);

  State entry(width, AbsVal::bottom());
  for (std::size_t i = 0; i < f.params.size() && i < param_seeds.size(); ++i)
    entry[f.params[i]] = param_seeds[i];

  std::vector<State> in(n, State(width, AbsVal::bottom()));
  std::vector<bool> reached(n, false);
  in[0] = entry;
  reached[0] = true;

  auto operand = [&](const State& s, const ir::Operand& o) {
    return o.is_reg() ? s[o.as_reg()] : const_val(o.value, rm);
  };

  auto transfer = [&](std::size_t i, const State& s) {
    const auto& inst = f.body[i];
    State o = s;
    switch (inst.op) {
      case Opcode::Const:
        o[*inst.dest] = const_val(inst.args[0].value, rm);
        break;
      case Opcode::Add:
        o[*inst.dest] = add_vals(operand(s, inst.args[0]), operand(s, inst.args[1]), rm);
        break;
      case Opcode::Mul:
      case Opcode::Cmp:
        o[*inst.dest] = arith_vals(inst, operand(s, inst.args[0]), operand(s, inst.args[1]), rm);
        break;
      case Opcode::Load: {
        const AbsVal addr = operand(s, inst.args[0]);
        if (addr.kind == Kind::Bottom) {
          o[*inst.dest] = AbsVal::bottom();
          break;
        }
        const auto ann = annotate(addr, rm);
        if (ann.kind == SpaceAnnotation::Kind::Remote)
          o[*inst.dest] = AbsVal::ptr(AddressSpace::remote(ann.endpoint));
        else if (ann.kind == SpaceAnnotation::Kind::Local)
          o[*inst.dest] = AbsVal::ptr(AddressSpace::local());
        else
          o[*inst.dest] = with_remote(AbsVal::top(), addr.may_remote);
        break;
      }
      case Opcode::Call:
        if (inst.dest) o[*inst.dest] = AbsVal::top();
        break;
      case Opcode::AwaitMailbox:
        for (Reg r : inst.outs) o[r] = AbsVal::top();
        break;
      default:
        break;
    }
    return o;
  };

  std::deque<std::size_t> work{0};
  std::vector<bool> queued(n, false);
  queued[0] = true;
  while (!work.empty()) {
    const auto i = work.front();
    work.pop_front();
    queued[i] = false;
    const State out = transfer(i, in[i]);
    for (auto s : succ[i]) {
      State merged(width);
      bool changed = !reached[s];
      for (std::size_t r = 0; r < width; ++r) {
        merged[r] = reached[s] ? join(in[s][r], out[r], rm) : out[r];
        if (!(merged[r] == in[s][r])) changed = true;
      }
      if (changed) {
        in[s] = std::move(merged);
        reached[s] = true;
        if (!queued[s]) {
          queued[s] = true;
          work.push_back(s);
        }
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto& inst = f.body[i];
    if (inst.is_memory())
      facts.annotations[i] = annotate(operand(in[i], inst.args[0]), rm);
    if (inst.op == Opcode::Call) {
      std::vector<AbsVal> args;
      for (const auto& a : inst.args) args.push_back(reached[i] ? operand(in[i], a) : AbsVal::bottom());
      facts.calls.emplace_back(i, std::move(args));
    }
  }
  return facts;
}

void apply(ir::Function& f, const FunctionFacts& facts) {
  for (std::size_t i = 0; i < f.body.size(); ++i)
    if (f.body[i].is_memory()) f.body[i].space = facts.annotations[i];
}

}  // namespace

ir::Program mark_remotable(const ir::Program& p, const RegionMap& rm) {
  ir::Program out = p;
  for (auto& f : out.functions) {
    State seeds(f.params.size(), AbsVal::top());
    apply(f, analyze_function(f, rm, seeds));
  }
  return out;
}

RemotePropagation propagate_remote_pointers(const ir::Program& p, const RegionMap& rm) {
  std::map<std::string, State> seeds;
  for (const auto& f : p.functions)
    seeds[f.name] = State(f.params.size(), f.name == "main" ? AbsVal::top() : AbsVal::bottom());

  RemotePropagation res;
  std::map<std::string, FunctionFacts> facts;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& f : p.functions) {
      facts[f.name] = analyze_function(f, rm, seeds[f.name]);
      for (const auto& [idx, args] : facts[f.name].calls) {
        const std::string& callee = f.body[idx].target;
        auto it = seeds.find(callee);
        if (it == seeds.end()) continue;
        for (std::size_t k = 0; k < args.size() && k < it->second.size(); ++k) {
          if (args[k].may_remote) res.functions.insert(callee);
          AbsVal j = join(it->second[k], args[k], rm);
          if (!(j == it->second[k])) {
            it->second[k] = j;
            changed = true;
          }
        }
      }
    }
  }

  res.program = p;
  for (auto& f : res.program.functions) apply(f, facts[f.name]);
  return res;
}

}  // namespace cxlmu::analysis
