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

#include "cxlmu/analysis/labels.hpp"

namespace cxlmu::analysis {

using ir::Opcode;

std::uint32_t entry_label_id(std::size_t function_index) {
  return static_cast<std::uint32_t>(function_index);
}

std::uint32_t anchor_label_id(const ir::Program& p, SliceId slice) {
  return static_cast<std::uint32_t>(p.functions.size()) + slice;
}

namespace {

bool label_before(const ir::Function& f, std::size_t at, std::uint32_t number) {
  return at > 0 && f.body[at - 1].op == Opcode::ProfileLabel && f.body[at - 1].number == number;
}

}  // namespace

ir::Program insert_profile_labels(const ir::Program& p, std::vector<OffloadSlice>& slices) {
  ir::Program out = p;
  ir::InstId next_id = out.max_id();
  auto make_label = [&](std::uint32_t number) {
    ir::Instruction l;
    l.id = ++next_id;
    l.op = Opcode::ProfileLabel;
    l.number = number;
    return l;
  };

  for (auto& s : slices) {
    s.anchor_label = anchor_label_id(p, s.id);
    ir::Function* f = out.find(s.function);
    if (!f || s.instructions.empty()) continue;
    const ir::InstId target = s.loop_header ? *s.loop_header : s.instructions.front();
    for (std::size_t i = 0; i < f->body.size(); ++i) {
      if (f->body[i].id != target) continue;
      if (!label_before(*f, i, s.anchor_label))
        f->body.insert(f->body.begin() + static_cast<std::ptrdiff_t>(i), make_label(s.anchor_label));
      break;
    }
  }

  for (std::size_t fi = 0; fi < out.functions.size(); ++fi) {
    auto& body = out.functions[fi].body;
    const auto id = entry_label_id(fi);
    if (body.empty() || body.front().op != Opcode::ProfileLabel || body.front().number != id)
      body.insert(body.begin(), make_label(id));
  }
  return out;
}

}  // namespace cxlmu::analysis
