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

#include "cxlmu/ir/interpret.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace cxlmu::ir {

Value evaluate(const Instruction& inst, Value a, Value b) {
  const auto sa = static_cast<std::int64_t>(a);
  const auto sb = static_cast<std::int64_t>(b);
  switch (inst.op) {
    case Opcode::Const: return a;
    case Opcode::Add: return a + b;
    case Opcode::Mul: return a * b;
    case Opcode::Cmp:
      switch (inst.pred) {
        case CmpPred::Eq: return a == b;
        case CmpPred::Ne: return a != b;
        case CmpPred::Lt: return sa < sb;
        case CmpPred::Le: return sa <= sb;
        case CmpPred::Gt: return sa > sb;
        case CmpPred::Ge: return sa >= sb;
      }
      break;
    default:
      break;
  }
  return 0;
}

SliceOutcome run_slice(const SliceCode& code, std::span<const Value> live_in_values,
                       MemoryImage& mem, std::uint64_t step_budget) {
  SliceOutcome out;
  std::unordered_map<Reg, Value> regs;
  for (std::size_t i = 0; i < code.live_ins.size() && i < live_in_values.size(); ++i)
    regs[code.live_ins[i]] = live_in_values[i];
  auto val = [&](const Operand& o) -> Value {
    return o.is_reg() ? regs[o.as_reg()] : static_cast<Value>(o.value);
  };
  std::vector<Addr> touched;

  bool again = true;
  while (again) {
    for (const auto& inst : code.body) {
      if (++out.dynamic_instructions > step_budget) {
        out.trap = "slice step budget exceeded";
        out.trap_inst = inst.id;
        return out;
      }
      try {
        switch (inst.op) {
          case Opcode::Const:
          case Opcode::Add:
          case Opcode::Mul:
          case Opcode::Cmp:
            regs[*inst.dest] = evaluate(inst, val(inst.args[0]),
                                        inst.args.size() > 1 ? val(inst.args[1]) : 0);
            break;
          case Opcode::Load: {
            const Addr a = val(inst.args[0]);
            const Value v = mem.read(a, inst.size);
            regs[*inst.dest] = v;
            out.loads.push_back({inst.id, v});
            touched.push_back(line_of(a));
            break;
          }
          case Opcode::Store: {
            const Addr a = val(inst.args[0]);
            const Value v = val(inst.args[1]);
            mem.write(a, inst.size, v);
            out.stores.push_back({a, inst.size, v});
            break;
          }
          case Opcode::ProfileLabel:
            break;
          default:
            out.trap = std::string("opcode not allowed in a slice: ") +
                       std::string(opcode_name(inst.op));
            out.trap_inst = inst.id;
            return out;
        }
      } catch (const MemoryError& e) {
        out.trap = e.what();
        out.trap_inst = inst.id;
        return out;
      }
    }
    again = code.counter && regs[*code.counter] != 0;
  }

  for (Reg r : code.live_outs) out.live_outs.push_back(regs[r]);
  std::unordered_set<Addr> seen;
  for (auto it = touched.rbegin(); it != touched.rend(); ++it)
    if (seen.insert(*it).second) out.lines_newest_first.push_back(*it);
  return out;
}

namespace {

struct Frame {
  const Function* fn = nullptr;
  std::size_t pc = 0;
  std::vector<Value> regs;
  std::vector<bool> assigned;
  std::optional<Reg> ret_dest;
  std::map<std::string, std::size_t> labels;
};

constexpr std::size_t kMaxCallDepth = 10000;

}  // namespace

ArchResult interpret(const Program& p, MemoryImage mem, const std::map<Reg, Value>& inputs,
                     const InterpretOptions& opts) {
  ArchResult res;
  const Function* main = p.find("main");
  if (!main) return res;

  auto make_frame = [](const Function& f) {
    Frame fr;
    fr.fn = &f;
    fr.regs.assign(f.max_reg() + 1, 0);
    fr.assigned.assign(f.max_reg() + 1, false);
    fr.labels = f.labels();
    return fr;
  };

  std::vector<Frame> stack;
  stack.push_back(make_frame(*main));
  for (auto [r, v] : inputs) {
    if (r >= stack[0].regs.size()) {
      stack[0].regs.resize(r + 1, 0);
      stack[0].assigned.resize(r + 1, false);
    }
    stack[0].regs[r] = v;
    stack[0].assigned[r] = true;
  }

  std::unordered_map<SliceId, SliceOutcome> pending;
  auto trap = [&](ArchResult::Status st, InstId id, std::string msg) {
    res.status = st;
    res.fault_inst = id;
    res.message = std::move(msg);
  };
  auto finish_main = [&](const Frame& fr, std::optional<Value> rv) {
    for (Reg r = 0; r < fr.regs.size(); ++r)
      if (fr.assigned[r]) res.final_registers[r] = fr.regs[r];
    res.return_value = rv;
  };

  while (!stack.empty()) {
    Frame& fr = stack.back();
    if (fr.pc >= fr.fn->body.size()) {
      // implicit return
      std::optional<Reg> dest = fr.ret_dest;
      if (stack.size() == 1) {
        finish_main(fr, std::nullopt);
        stack.pop_back();
        break;
      }
      stack.pop_back();
      if (dest) {
        stack.back().regs[*dest] = 0;
        stack.back().assigned[*dest] = true;
      }
      continue;
    }
    const Instruction& inst = fr.fn->body[fr.pc];
    if (++res.steps > opts.step_budget) {
      trap(ArchResult::Status::BudgetExceeded, inst.id, "step budget exceeded");
      return res;
    }
    auto val = [&](const Operand& o) -> Value {
      return o.is_reg() ? fr.regs[o.as_reg()] : static_cast<Value>(o.value);
    };
    auto set = [&](Reg r, Value v) {
      fr.regs[r] = v;
      fr.assigned[r] = true;
    };
    std::size_t next_pc = fr.pc + 1;

    try {
      switch (inst.op) {
        case Opcode::Const:
        case Opcode::Add:
        case Opcode::Mul:
        case Opcode::Cmp:
          set(*inst.dest,
              evaluate(inst, val(inst.args[0]), inst.args.size() > 1 ? val(inst.args[1]) : 0));
          break;
        case Opcode::Load: {
          const Value v = mem.read(val(inst.args[0]), inst.size);
          set(*inst.dest, v);
          res.load_trace.push_back({inst.id, v});
          break;
        }
        case Opcode::Store: {
          const Addr a = val(inst.args[0]);
          const Value v = val(inst.args[1]);
          mem.write(a, inst.size, v);
          res.stores.push_back({a, inst.size, v});
          break;
        }
        case Opcode::Branch:
          if (val(inst.args[0]) != 0) next_pc = fr.labels.at(inst.target);
          break;
        case Opcode::Jump:
          next_pc = fr.labels.at(inst.target);
          break;
        case Opcode::Label:
        case Opcode::ProfileLabel:
          break;
        case Opcode::Call: {
          const Function* callee = p.find(inst.target);
          if (!callee) {
            trap(ArchResult::Status::Trap, inst.id, "call to undefined function " + inst.target);
            return res;
          }
          if (stack.size() >= kMaxCallDepth) {
            trap(ArchResult::Status::Trap, inst.id, "call depth exceeded");
            return res;
          }
          Frame callee_fr = make_frame(*callee);
          for (std::size_t i = 0; i < callee->params.size() && i < inst.args.size(); ++i) {
            callee_fr.regs[callee->params[i]] = val(inst.args[i]);
            callee_fr.assigned[callee->params[i]] = true;
          }
          callee_fr.ret_dest = inst.dest;
          fr.pc = next_pc;
          stack.push_back(std::move(callee_fr));
          continue;
        }
        case Opcode::Ret: {
          std::optional<Value> rv;
          if (!inst.args.empty()) rv = val(inst.args[0]);
          std::optional<Reg> dest = fr.ret_dest;
          if (stack.size() == 1) {
            finish_main(fr, rv);
            stack.pop_back();
            continue;
          }
          stack.pop_back();
          if (dest) {
            stack.back().regs[*dest] = rv.value_or(0);
            stack.back().assigned[*dest] = true;
          }
          continue;
        }
        case Opcode::SubmitSlice: {
          const SliceCode* code = nullptr;
          if (opts.slices)
            for (const auto& s : *opts.slices)
              if (s.id == inst.number) code = &s;
          if (!code) {
            trap(ArchResult::Status::Trap, inst.id,
                 "submit_slice " + std::to_string(inst.number) + " has no slice code");
            return res;
          }
          std::vector<Value> ins;
          for (const auto& a : inst.args) ins.push_back(val(a));
          SliceOutcome o = run_slice(*code, ins, mem, opts.step_budget - res.steps);
          res.steps += o.dynamic_instructions;
          res.load_trace.insert(res.load_trace.end(), o.loads.begin(), o.loads.end());
          res.stores.insert(res.stores.end(), o.stores.begin(), o.stores.end());
          if (o.trap) {
            trap(ArchResult::Status::Trap, o.trap_inst, *o.trap);
            return res;
          }
          pending[inst.number] = std::move(o);
          break;
        }
        case Opcode::AwaitMailbox: {
          auto it = pending.find(inst.number);
          if (it == pending.end()) {
            trap(ArchResult::Status::Trap, inst.id,
                 "await_mailbox " + std::to_string(inst.number) + " before submit");
            return res;
          }
          for (std::size_t i = 0; i < inst.outs.size() && i < it->second.live_outs.size(); ++i)
            set(inst.outs[i], it->second.live_outs[i]);
          pending.erase(it);
          break;
        }
      }
    } catch (const MemoryError& e) {
      trap(ArchResult::Status::Trap, inst.id, e.what());
      return res;
    }
    fr.pc = next_pc;
  }
  return res;
}

std::map<InstId, std::vector<Value>> loads_by_instruction(std::span<const LoadRecord> trace) {
  std::map<InstId, std::vector<Value>> out;
  for (const auto& r : trace) out[r.inst].push_back(r.value);
  return out;
}

}  // namespace cxlmu::ir
