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

#include <cstdio>

#include "cxlmu/ir/parser.hpp"

namespace cxlmu::ir {
namespace {

std::string operand(const Operand& o) {
  return o.is_reg() ? "r" + std::to_string(o.as_reg()) : std::to_string(o.value);
}

std::string reg_list(const std::vector<Reg>& rs) {
  std::string s = "(";
  for (std::size_t i = 0; i < rs.size(); ++i) {
    if (i) s += ", ";
    s += "r" + std::to_string(rs[i]);
  }
  return s + ")";
}

std::string annotation(const SpaceAnnotation& a) {
  switch (a.kind) {
    case SpaceAnnotation::Kind::Unanalyzed: return "";
    case SpaceAnnotation::Kind::Local: return " @local";
    case SpaceAnnotation::Kind::Unknown: return " @unknown";
    case SpaceAnnotation::Kind::Remote: return " @remote(" + std::to_string(a.endpoint) + ")";
  }
  return "";
}

std::string hex(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string print_annotation(const SpaceAnnotation& a) {
  const std::string s = annotation(a);
  return s.empty() ? "unanalyzed" : s.substr(2);
}

std::string print_space(const AddressSpace& s) {
  return s.is_remote() ? "remote(" + std::to_string(s.endpoint) + ")" : "local";
}

std::string print_instruction(const Instruction& inst) {
  std::string s;
  if (inst.op == Opcode::Label) return inst.target + ":";
  if (inst.dest) s = "r" + std::to_string(*inst.dest) + " = ";
  s += opcode_name(inst.op);
  switch (inst.op) {
    case Opcode::Const:
      s += " " + operand(inst.args[0]);
      break;
    case Opcode::Add:
    case Opcode::Mul:
      s += " " + operand(inst.args[0]) + ", " + operand(inst.args[1]);
      break;
    case Opcode::Cmp:
      s += " ";
      s += pred_name(inst.pred);
      s += " " + operand(inst.args[0]) + ", " + operand(inst.args[1]);
      break;
    case Opcode::Load:
      s += " " + std::to_string(inst.size) + " [" + operand(inst.args[0]) + "]" +
           annotation(inst.space);
      break;
    case Opcode::Store:
      s += " " + std::to_string(inst.size) + " [" + operand(inst.args[0]) + "], " +
           operand(inst.args[1]) + annotation(inst.space);
      break;
    case Opcode::Branch:
      s += " " + operand(inst.args[0]) + ", " + inst.target;
      break;
    case Opcode::Jump:
      s += " " + inst.target;
      break;
    case Opcode::Call: {
      s += " " + inst.target + "(";
      for (std::size_t i = 0; i < inst.args.size(); ++i) {
        if (i) s += ", ";
        s += operand(inst.args[i]);
      }
      s += ")";
      break;
    }
    case Opcode::Ret:
      if (!inst.args.empty()) s += " " + operand(inst.args[0]);
      break;
    case Opcode::ProfileLabel:
      s += " " + std::to_string(inst.number);
      break;
    case Opcode::SubmitSlice:
      s += " " + std::to_string(inst.number) + " " + reg_list(inst.uses());
      break;
    case Opcode::AwaitMailbox:
      s += " " + std::to_string(inst.number);
      if (!inst.outs.empty()) s += " -> " + reg_list(inst.outs);
      break;
    case Opcode::Label:
      break;
  }
  return s;
}

std::string print_program(const Program& p) {
  std::string out;
  for (const auto& r : p.regions)
    out += "region " + r.name + " " + hex(r.base) + " " + hex(r.length) + " " +
           print_space(r.space) + "\n";
  for (const auto& f : p.functions) {
    if (!out.empty()) out += "\n";
    out += "fn " + f.name + reg_list(f.params) + " {\n";
    for (const auto& inst : f.body)
      out += (inst.op == Opcode::Label ? "" : "  ") + print_instruction(inst) + "\n";
    out += "}\n";
  }
  return out;
}

}  // namespace cxlmu::ir
