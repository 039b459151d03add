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

#include "cxlmu/analysis/rewrite.hpp"

#include <algorithm>

#include "cxlmu/analysis/dataflow.hpp"
#include "cxlmu/analysis/labels.hpp"
#include "cxlmu/analysis/remotable.hpp"

namespace cxlmu::analysis {

using ir::Opcode;

const OffloadSlice* OffloadedProgram::find(SliceId id) const {
  for (const auto& s : slices)
    if (s.id == id) return &s;
  return nullptr;
}

std::vector<ir::SliceCode> OffloadedProgram::codes() const {
  std::vector<ir::SliceCode> out;
  for (const auto& s : slices) out.push_back(s.code());
  return out;
}

namespace {

std::size_t index_of(const ir::Function& f, InstId id) {
  for (std::size_t i = 0; i < f.body.size(); ++i)
    if (f.body[i].id == id) return i;
  throw RewriteError("instruction " + std::to_string(id) + " not found in " + f.name);
}

void rewrite_one(ir::Function& f, OffloadSlice& s, ir::InstId& next_id) {
  const auto loops = find_counted_loops(f);
  SliceShape shape;
  shape.live_ins.insert(s.live_ins.begin(), s.live_ins.end());
  shape.defined.insert(s.live_outs.begin(), s.live_outs.end());
  shape.has_stores = s.has_stores();
  for (InstId id : s.instructions)
    if (id != s.counter_update) shape.members.push_back(index_of(f, id));
  std::sort(shape.members.begin(), shape.members.end());

  bool remnant_empty = false;
  if (s.loop_header) {
    const std::size_t h = index_of(f, *s.loop_header);
    auto it = std::find_if(loops.begin(), loops.end(), [&](const CountedLoop& l) { return l.header == h; });
    if (it == loops.end()) throw RewriteError("slice " + std::to_string(s.id) + ": loop not recognized");
    shape.loop = *it;
    remnant_empty = true;
    for (std::size_t i = it->header + 1; i < it->latch; ++i) {
      if (i == it->update || f.body[i].op == Opcode::ProfileLabel) continue;
      if (!std::binary_search(shape.members.begin(), shape.members.end(), i)) remnant_empty = false;
    }
    if (remnant_empty) shape.defined.insert(it->counter);
  }

  const auto plan = plan_placement(f, shape, loops);
  if (!plan) throw RewriteError("slice " + std::to_string(s.id) + " has no legal placement");

  std::vector<bool> removed(f.body.size(), false);
  for (auto i : shape.members) removed[i] = true;
  if (shape.loop && remnant_empty)
    for (std::size_t i = shape.loop->header; i <= shape.loop->latch; ++i) removed[i] = true;

  const std::size_t first = shape.loop ? shape.loop->header : shape.members.front();
  std::optional<std::size_t> anchor;
  if (first > plan->submit_at && f.body[first - 1].op == Opcode::ProfileLabel &&
      f.body[first - 1].number == s.anchor_label)
    anchor = first - 1;

  if (remnant_empty) {
    s.live_outs.push_back(*s.counter);
    std::sort(s.live_outs.begin(), s.live_outs.end());
    s.live_outs.erase(std::unique(s.live_outs.begin(), s.live_outs.end()), s.live_outs.end());
  }

  ir::Instruction submit;
  submit.id = ++next_id;
  submit.op = Opcode::SubmitSlice;
  submit.number = s.id;
  for (auto r : s.live_ins) submit.args.push_back(ir::Operand::reg(r));
  ir::Instruction await;
  await.id = ++next_id;
  await.op = Opcode::AwaitMailbox;
  await.number = s.id;
  await.outs = s.live_outs;

  std::vector<ir::Instruction> body;
  for (std::size_t i = 0; i <= f.body.size(); ++i) {
    if (i == plan->submit_at) {
      if (anchor) body.push_back(f.body[*anchor]);
      body.push_back(submit);
    }
    if (i == plan->await_at) body.push_back(await);
    if (i == f.body.size()) break;
    if (!removed[i] && i != anchor) body.push_back(f.body[i]);
  }
  f.body = std::move(body);
}

}  // namespace

OffloadedProgram rewrite_with_offload(const ir::Program& labeled, std::vector<OffloadSlice> slices) {
  OffloadedProgram out;
  out.source = labeled;
  out.program = labeled;
  ir::InstId next_id = labeled.max_id();
  for (auto& s : slices) {
    ir::Function* f = out.program.find(s.function);
    if (!f) throw RewriteError("slice " + std::to_string(s.id) + ": no function " + s.function);
    rewrite_one(*f, s, next_id);
  }
  out.slices = std::move(slices);

  for (const auto& f : out.program.functions) {
    std::map<SliceId, std::size_t> submits;
    for (std::size_t i = 0; i < f.body.size(); ++i) {
      if (f.body[i].op == Opcode::SubmitSlice) submits[f.body[i].number] = i;
      if (f.body[i].op == Opcode::AwaitMailbox)
        out.overlap_regions[f.body[i].number] = {f.name, submits[f.body[i].number] + 1, i};
    }
  }
  return out;
}

OffloadedProgram replan(const ir::Program& labeled, std::vector<OffloadSlice> slices) {
  std::vector<OffloadSlice> remote;
  std::vector<OffloadSlice> host;
  for (auto& s : slices) (s.site.kind == Site::Kind::Host ? host : remote).push_back(std::move(s));
  auto out = rewrite_with_offload(labeled, std::move(remote));
  out.inline_slices = std::move(host);
  return out;
}

OffloadedProgram plan_offload(const ir::Program& p, const fabric::Topology& topo,
                              const OffloadOptions& opts) {
  const auto rm = RegionMap::from(p);
  const auto annotated = propagate_remote_pointers(mark_remotable(p, rm), rm).program;
  auto slices = extract_slices(annotated, opts.slicing);
  const auto labeled = insert_profile_labels(annotated, slices);
  for (auto& s : slices) {
    s.site = choose_site(s, opts.cost, topo);
    s.est_window = estimate_window(s, opts.cost, topo, s.site);
  }
  return replan(labeled, std::move(slices));
}

std::vector<std::string> check_offloaded(const OffloadedProgram& op) {
  std::vector<std::string> errs;
  for (const auto& s : op.slices) {
    const std::string tag = "slice " + std::to_string(s.id);
    const ir::Function* f = op.program.find(s.function);
    if (!f) {
      errs.push_back(tag + ": missing function");
      continue;
    }
    int submits = 0, awaits = 0;
    std::size_t si = 0, ai = 0;
    for (std::size_t i = 0; i < f->body.size(); ++i) {
      const auto& inst = f->body[i];
      if (inst.number != s.id) continue;
      if (inst.op == Opcode::SubmitSlice) ++submits, si = i;
      if (inst.op == Opcode::AwaitMailbox) ++awaits, ai = i;
    }
    if (submits != 1 || awaits != 1) {
      errs.push_back(tag + ": expected one submit and one await");
      continue;
    }
    if (ai < si) errs.push_back(tag + ": await before submit");
    for (std::size_t i = si + 1; i < ai; ++i) {
      const auto& inst = f->body[i];
      if (inst.op == Opcode::Ret || inst.op == Opcode::Jump || inst.op == Opcode::Call)
        errs.push_back(tag + ": control transfer inside overlap region");
      for (auto r : inst.uses())
        if (std::find(s.live_outs.begin(), s.live_outs.end(), r) != s.live_outs.end() &&
            inst.op != Opcode::SubmitSlice)
          errs.push_back(tag + ": overlap instruction " + std::to_string(inst.id) + " reads r" +
                         std::to_string(r));
    }
    if (!slice_is_closed(s)) errs.push_back(tag + ": slice not dependence-closed");
  }
  return errs;
}

}  // namespace cxlmu::analysis
