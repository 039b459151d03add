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

#include "cxlmu/fabric/near_core.hpp"

#include <cmath>
#include <unordered_map>
#include <unordered_set>

namespace cxlmu::fabric {

NearResult near_execute(const ir::SliceCode& code, std::span<const ir::Value> live_ins,
                        ir::MemoryImage& mem, const NearCoreState& nc, const Topology& topo,
                        std::uint64_t step_budget) {
  using ir::Opcode;
  NearResult out;
  std::unordered_map<ir::Reg, ir::Value> regs;
  for (std::size_t i = 0; i < code.live_ins.size() && i < live_ins.size(); ++i)
    regs[code.live_ins[i]] = live_ins[i];
  auto val = [&](const ir::Operand& o) {
    return o.is_reg() ? regs[o.as_reg()] : static_cast<ir::Value>(o.value);
  };
  std::unordered_map<NodeId, Cycles> round_trip;
  auto access_cost = [&](Addr a) -> std::optional<Cycles> {
    auto owner = topo.owner_of(a);
    if (!owner) return std::nullopt;
    if (*owner == nc.node) return nc.local_latency;
    auto [it, fresh] = round_trip.try_emplace(*owner, 0);
    if (fresh) it->second = 2 * topo.route_latency(nc.node, *owner);
    return it->second;
  };
  auto fail = [&](std::string why) {
    out.error = std::move(why);
    out.cycles = 0;
    return out;
  };

  std::vector<Addr> touched;
  if (code.body.empty()) return out;
  for (bool again = true; again;) {
    for (const auto& inst : code.body) {
      if (++out.dynamic_instructions > step_budget) return fail("near core step budget exceeded");
      switch (inst.op) {
        case Opcode::Const:
        case Opcode::Add:
        case Opcode::Mul:
        case Opcode::Cmp:
          regs[*inst.dest] =
              ir::evaluate(inst, val(inst.args[0]), inst.args.size() > 1 ? val(inst.args[1]) : 0);
          break;
        case Opcode::Load:
        case Opcode::Store: {
          const Addr a = val(inst.args[0]);
          auto cost = access_cost(a);
          if (!cost) return fail("slice touched unowned line 0x" + [&] {
            char b[24];
            std::snprintf(b, sizeof b, "%llx", static_cast<unsigned long long>(ir::line_of(a)));
            return std::string(b);
          }());
          try {
            if (inst.op == Opcode::Load) {
              const auto v = mem.read(a, inst.size);
              regs[*inst.dest] = v;
              out.loads.push_back({inst.id, v});
              touched.push_back(ir::line_of(a));
              out.access_cycles += *cost;
            } else {
              const auto v = val(inst.args[1]);
              mem.write(a, inst.size, v);
              out.stores.push_back({a, inst.size, v});
            }
          } catch (const ir::MemoryError& e) {
            return fail(e.what());
          }
          break;
        }
        case Opcode::ProfileLabel:
          break;
        default:
          return fail("opcode not executable on the near core: " + std::string(ir::opcode_name(inst.op)));
      }
    }
    again = code.counter && regs[*code.counter] != 0;
  }

  for (ir::Reg r : code.live_outs) out.live_outs.push_back(regs[r]);
  std::unordered_set<Addr> seen;
  for (auto it = touched.rbegin(); it != touched.rend(); ++it)
    if (seen.insert(*it).second) out.lines_newest_first.push_back(*it);
  out.cycles = static_cast<Cycles>(std::llround(static_cast<double>(out.dynamic_instructions) * nc.near_cpi)) +
               out.access_cycles;
  return out;
}

}  // namespace cxlmu::fabric
