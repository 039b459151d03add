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

#include "cxlmu/ir/types.hpp"

#include <algorithm>

namespace cxlmu::ir {

std::string_view opcode_name(Opcode op) {
  switch (op) {
    case Opcode::Const: return "const";
    case Opcode::Add: return "add";
    case Opcode::Mul: return "mul";
    case Opcode::Cmp: return "cmp";
    case Opcode::Load: return "load";
    case Opcode::Store: return "store";
    case Opcode::Branch: return "branch";
    case Opcode::Jump: return "jump";
    case Opcode::Call: return "call";
    case Opcode::Ret: return "ret";
    case Opcode::Label: return "label";
    case Opcode::ProfileLabel: return "profile_label";
    case Opcode::SubmitSlice: return "submit_slice";
    case Opcode::AwaitMailbox: return "await_mailbox";
  }
  return "?";
}

std::string_view pred_name(CmpPred p) {
  switch (p) {
    case CmpPred::Eq: return "eq";
    case CmpPred::Ne: return "ne";
    case CmpPred::Lt: return "lt";
    case CmpPred::Le: return "le";
    case CmpPred::Gt: return "gt";
    case CmpPred::Ge: return "ge";
  }
  return "?";
}

std::vector<Reg> Instruction::uses() const {
  std::vector<Reg> out;
  for (const auto& a : args)
    if (a.is_reg()) out.push_back(a.as_reg());
  return out;
}

std::vector<Reg> Instruction::defs() const {
  if (op == Opcode::AwaitMailbox) return outs;
  if (dest) return {*dest};
  return {};
}

std::map<std::string, std::size_t> Function::labels() const {
  std::map<std::string, std::size_t> out;
  for (std::size_t i = 0; i < body.size(); ++i)
    if (body[i].op == Opcode::Label) out.emplace(body[i].target, i);
  return out;
}

Reg Function::max_reg() const {
  Reg m = 0;
  for (Reg p : params) m = std::max(m, p);
  for (const auto& inst : body) {
    for (Reg r : inst.uses()) m = std::max(m, r);
    for (Reg r : inst.defs()) m = std::max(m, r);
  }
  return m;
}

const Function* Program::find(std::string_view name) const {
  for (const auto& f : functions)
    if (f.name == name) return &f;
  return nullptr;
}

Function* Program::find(std::string_view name) {
  for (auto& f : functions)
    if (f.name == name) return &f;
  return nullptr;
}

const RegionDecl* Program::region_of(Addr a, std::uint64_t n) const {
  for (const auto& r : regions)
    if (r.contains(a, n)) return &r;
  return nullptr;
}

InstId Program::max_id() const {
  InstId m = 0;
  for (const auto& f : functions)
    for (const auto& inst : f.body) m = std::max(m, inst.id);
  return m;
}

bool structurally_equal(const Instruction& a, const Instruction& b) {
  return a.op == b.op && a.dest == b.dest && a.args == b.args && a.outs == b.outs &&
         a.pred == b.pred && a.target == b.target && a.size == b.size &&
         a.number == b.number && a.space == b.space;
}

bool structurally_equal(const Program& a, const Program& b) {
  if (a.regions != b.regions || a.functions.size() != b.functions.size()) return false;
  for (std::size_t i = 0; i < a.functions.size(); ++i) {
    const auto& fa = a.functions[i];
    const auto& fb = b.functions[i];
    if (fa.name != fb.name || fa.params != fb.params || fa.body.size() != fb.body.size())
      return false;
    for (std::size_t j = 0; j < fa.body.size(); ++j)
      if (!structurally_equal(fa.body[j], fb.body[j])) return false;
  }
  return true;
}

bool is_valid_access_size(std::uint32_t size) {
  return size != 0 && size <= kLineBytes && (size & (size - 1)) == 0;
}

}  // namespace cxlmu::ir
