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

#include "cxlmu/ir/validate.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "cxlmu/ir/cfg.hpp"

namespace cxlmu::ir {
namespace {

std::string where(const Function& f, std::size_t i) {
  return f.name + ":" + std::to_string(i);
}

void check_definite_assignment(const Function& f, std::vector<Diagnostic>& out) {
  const std::size_t n = f.body.size();
  if (n == 0) return;
  const Reg width = f.max_reg() + 1;
  using Set = std::vector<bool>;
  const auto succ = successors(f);
  std::vector<std::vector<std::size_t>> pred(n);
  for (std::size_t i = 0; i < n; ++i)
    for (auto s : succ[i]) pred[s].push_back(i);

  Set entry(width, false);
  for (Reg p : f.params) entry[p] = true;
  std::vector<Set> in(n, Set(width, true));
  std::vector<Set> outs(n, Set(width, true));
  in[0] = entry;

  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      Set cur = i == 0 ? entry : Set(width, true);
      for (auto p : pred[i])
        for (Reg r = 0; r < width; ++r) cur[r] = cur[r] && outs[p][r];
      if (i != 0 && pred[i].empty()) cur.assign(width, true);  // unreachable
      Set o = cur;
      for (Reg r : f.body[i].defs()) o[r] = true;
      if (cur != in[i] || o != outs[i]) {
        in[i] = std::move(cur);
        outs[i] = std::move(o);
        changed = true;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (Reg r : f.body[i].uses())
      if (!in[i][r])
        out.push_back({f.body[i].line, "register r" + std::to_string(r) +
                                           " used before assignment at " + where(f, i)});
}

}  // namespace

std::vector<Diagnostic> validate(const Program& p) {
  std::vector<Diagnostic> out;

  std::set<std::string> names;
  int mains = 0;
  for (const auto& f : p.functions) {
    if (!names.insert(f.name).second) out.push_back({0, "duplicate function " + f.name});
    if (f.name == "main") ++mains;
  }
  if (!p.functions.empty() && mains != 1)
    out.push_back({0, "program must define exactly one function named main"});

  for (std::size_t i = 0; i < p.regions.size(); ++i) {
    const auto& r = p.regions[i];
    if (r.base % kLineBytes != 0 || r.length % kLineBytes != 0)
      out.push_back({0, "unaligned region " + r.name});
    if (r.length == 0) out.push_back({0, "empty region " + r.name});
    for (std::size_t j = 0; j < i; ++j) {
      const auto& o = p.regions[j];
      if (r.base < o.base + o.length && o.base < r.base + r.length)
        out.push_back({0, "region overlap: " + o.name + " and " + r.name});
    }
  }

  for (const auto& f : p.functions) {
    std::set<std::string> labels;
    for (const auto& inst : f.body)
      if (inst.op == Opcode::Label && !labels.insert(inst.target).second)
        out.push_back({inst.line, "duplicate label " + inst.target + " in " + f.name});

    std::set<Reg> params;
    for (Reg r : f.params)
      if (!params.insert(r).second)
        out.push_back({0, "duplicate parameter r" + std::to_string(r) + " in " + f.name});

    std::map<SliceId, int> submits, awaits;
    bool structural_ok = true;
    for (std::size_t i = 0; i < f.body.size(); ++i) {
      const auto& inst = f.body[i];
      switch (inst.op) {
        case Opcode::Branch:
        case Opcode::Jump:
          if (!labels.count(inst.target)) {
            out.push_back({inst.line, "undefined label " + inst.target});
            structural_ok = false;
          }
          break;
        case Opcode::Call: {
          const Function* callee = p.find(inst.target);
          if (!callee)
            out.push_back({inst.line, "call to undefined function " + inst.target});
          else if (callee->params.size() != inst.args.size())
            out.push_back({inst.line, "arity mismatch calling " + inst.target});
          break;
        }
        case Opcode::Load:
        case Opcode::Store: {
          if (!is_valid_access_size(inst.size))
            out.push_back({inst.line, "invalid access size at " + where(f, i)});
          const auto& a = inst.args[0];
          if (!a.is_reg()) {
            const Addr addr = static_cast<Addr>(a.value);
            if (addr % kLineBytes + inst.size > kLineBytes)
              out.push_back({inst.line, "access straddles a line at " + where(f, i)});
            else if (!p.region_of(addr, inst.size))
              out.push_back({inst.line, "constant address outside every region at " + where(f, i)});
          }
          break;
        }
        case Opcode::SubmitSlice:
          ++submits[inst.number];
          break;
        case Opcode::AwaitMailbox:
          ++awaits[inst.number];
          break;
        default:
          break;
      }
    }
    for (auto [id, n] : submits)
      if (n != 1 || awaits[id] != 1)
        out.push_back({0, "slice " + std::to_string(id) + " needs exactly one submit and one await in " + f.name});
    for (auto [id, n] : awaits)
      if (!submits.count(id))
        out.push_back({0, "await without submit for slice " + std::to_string(id) + " in " + f.name});

    if (structural_ok) check_definite_assignment(f, out);
  }
  return out;
}

}  // namespace cxlmu::ir
