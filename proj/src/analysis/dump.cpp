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

#include "cxlmu/analysis/dump.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "cxlmu/ir/parser.hpp"

namespace cxlmu::analysis {

namespace {

std::string regs(const std::vector<ir::Reg>& rs) {
  std::string out;
  for (auto r : rs) out += (out.empty() ? "r" : ", r") + std::to_string(r);
  return out;
}

std::vector<const OffloadSlice*> all_slices(const OffloadedProgram& op) {
  std::vector<const OffloadSlice*> out;
  for (const auto& s : op.slices) out.push_back(&s);
  for (const auto& s : op.inline_slices) out.push_back(&s);
  std::sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->id < b->id; });
  return out;
}

}  // namespace

std::string analysis_text(const OffloadedProgram& op) {
  std::ostringstream os;
  os << "annotations\n";
  for (const auto& f : op.source.functions)
    for (const auto& inst : f.body)
      if (inst.is_memory())
        os << "  " << f.name << " #" << inst.id << " " << ir::opcode_name(inst.op) << " "
           << ir::print_annotation(inst.space) << "\n";
  os << "slices\n";
  for (const auto* s : all_slices(op)) {
    os << "  slice " << s->id << " fn=" << s->function << " len=" << s->body.size()
       << " loads=" << s->load_count() << " trips=" << s->expected_trips << " in=(" << regs(s->live_ins)
       << ") out=(" << regs(s->live_outs) << ") site=" << to_string(s->site)
       << " est=" << s->est_window;
    if (auto it = op.overlap_regions.find(s->id); it != op.overlap_regions.end() && op.find(s->id))
      os << " overlap=" << it->second.length();
    os << "\n";
  }
  return os.str();
}

std::string analysis_json(const OffloadedProgram& op) {
  nlohmann::ordered_json j;
  auto& ann = j["annotations"] = nlohmann::ordered_json::array();
  for (const auto& f : op.source.functions)
    for (const auto& inst : f.body)
      if (inst.is_memory())
        ann.push_back(nlohmann::ordered_json{{"function", f.name},
                                             {"inst", inst.id},
                                             {"op", std::string(ir::opcode_name(inst.op))},
                                             {"space", ir::print_annotation(inst.space)}});
  auto& sl = j["slices"] = nlohmann::ordered_json::array();
  for (const auto* s : all_slices(op)) {
    nlohmann::ordered_json e = {{"id", s->id},
                                {"function", s->function},
                                {"length", s->body.size()},
                                {"loads", s->load_count()},
                                {"expected_trips", s->expected_trips},
                                {"instructions", s->instructions},
                                {"live_ins", s->live_ins},
                                {"live_outs", s->live_outs},
                                {"touched_endpoints", s->touched_endpoints},
                                {"anchor_label", s->anchor_label},
                                {"site", to_string(s->site)},
                                {"est_window", s->est_window},
                                {"offloaded", op.find(s->id) != nullptr}};
    if (auto it = op.overlap_regions.find(s->id); it != op.overlap_regions.end() && op.find(s->id))
      e["overlap_length"] = it->second.length();
    sl.push_back(std::move(e));
  }
  return j.dump(2);
}

}  // namespace cxlmu::analysis
