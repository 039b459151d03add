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

#include "cxlmu/analysis/slices.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <map>
#include <numeric>

#include "cxlmu/analysis/dataflow.hpp"

namespace cxlmu::analysis {

using ir::Opcode;
using ir::Reg;

std::string to_string(const Site& s) {
  switch (s.kind) {
    case Site::Kind::Host: return "host";
    case Site::Kind::Switch: return "switch(" + std::to_string(s.node) + ")";
    case Site::Kind::Endpoint: return "endpoint(" + std::to_string(s.node) + ")";
  }
  return "?";
}

std::optional<Site> parse_site(std::string_view text) {
  if (text == "host") return Site::host();
  auto with_node = [&](std::string_view prefix) -> std::optional<ir::NodeId> {
    if (text.size() <= prefix.size() + 2 || text.substr(0, prefix.size()) != prefix) return std::nullopt;
    if (text[prefix.size()] != '(' || text.back() != ')') return std::nullopt;
    auto digits = text.substr(prefix.size() + 1, text.size() - prefix.size() - 2);
    ir::NodeId n = 0;
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
    if (ec != std::errc() || p != digits.data() + digits.size()) return std::nullopt;
    return n;
  };
  if (auto n = with_node("switch")) return Site::switch_node(*n);
  if (auto n = with_node("endpoint")) return Site::endpoint(*n);
  return std::nullopt;
}

std::size_t OffloadSlice::load_count() const {
  return static_cast<std::size_t>(
      std::count_if(body.begin(), body.end(), [](const auto& i) { return i.op == Opcode::Load; }));
}

bool OffloadSlice::has_stores() const {
  return std::any_of(body.begin(), body.end(), [](const auto& i) { return i.op == Opcode::Store; });
}

ir::SliceCode OffloadSlice::code() const {
  ir::SliceCode c;
  c.id = id;
  c.body = body;
  c.counter = counter;
  c.live_ins = live_ins;
  c.live_outs = live_outs;
  return c;
}

bool slice_is_closed(const OffloadSlice& s) {
  std::set<Reg> avail(s.live_ins.begin(), s.live_ins.end());
  for (const auto& inst : s.body) {
    for (Reg r : inst.uses())
      if (!avail.count(r)) return false;
    for (Reg r : inst.defs()) avail.insert(r);
  }
  if (s.counter && !avail.count(*s.counter)) return false;
  return std::all_of(s.live_outs.begin(), s.live_outs.end(), [&](Reg r) { return avail.count(r); });
}

namespace {

struct Candidate {
  std::size_t first = 0;
  std::set<std::size_t> members;  // excludes the loop's counter update
  std::optional<CountedLoop> loop;
  bool remnant_empty = false;
};

bool defines(const ir::Instruction& inst, Reg r) {
  const auto d = inst.defs();
  return std::find(d.begin(), d.end(), r) != d.end();
}

// Body of the slice as it will run on the near core, in program order.
std::vector<std::size_t> slice_order(const Candidate& c) {
  std::vector<std::size_t> order(c.members.begin(), c.members.end());
  if (c.loop) {
    order.push_back(c.loop->update);
    std::sort(order.begin(), order.end());
  }
  return order;
}

SliceShape shape_of(const ir::Function& f, const Candidate& c) {
  SliceShape s;
  s.members.assign(c.members.begin(), c.members.end());
  s.loop = c.loop;
  std::set<Reg> defined;
  for (std::size_t i : slice_order(c)) {
    const auto& inst = f.body[i];
    for (Reg r : inst.uses())
      if (!defined.count(r)) s.live_ins.insert(r);
    for (Reg r : inst.defs()) defined.insert(r);
    if (inst.op == Opcode::Store) s.has_stores = true;
  }
  if (c.loop) {
    s.live_ins.insert(c.loop->counter);
    if (!c.remnant_empty) defined.erase(c.loop->counter);
  }
  s.defined = defined;
  return s;
}

std::uint64_t trips_before(const ir::Function& f, const CountedLoop& l) {
  for (std::size_t i = l.header; i-- > 0;) {
    const auto& inst = f.body[i];
    if (inst.op == Opcode::Label || inst.is_control() || inst.op == Opcode::Call) break;
    if (defines(inst, l.counter)) {
      if (inst.op == Opcode::Const && inst.args[0].value >= 1)
        return static_cast<std::uint64_t>(inst.args[0].value);
      break;
    }
  }
  return 1;
}

std::optional<Candidate> loop_candidate(const ir::Function& f, const CountedLoop& l,
                                        const SliceOptions& opts) {
  const auto& body = f.body;
  std::vector<std::size_t> span;  // loop body, counter update included
  for (std::size_t i = l.header + 1; i < l.latch; ++i) span.push_back(i);

  // Reaching in-loop definition of r at position k: nearest earlier def in
  // the iteration, otherwise the last def from the previous iteration.
  auto reaching = [&](Reg r, std::size_t k) -> std::optional<std::size_t> {
    std::optional<std::size_t> best;
    for (std::size_t i : span)
      if (i < k && defines(body[i], r)) best = i;
    if (best) return best;
    for (std::size_t i : span)
      if (i >= k && defines(body[i], r)) best = i;
    return best;
  };

  std::set<std::size_t> S;
  std::vector<std::size_t> work;
  for (std::size_t i : span)
    if (body[i].op == Opcode::Load && body[i].space.is_remote()) work.push_back(i);
  if (work.empty()) return std::nullopt;

  auto close = [&] {
    while (!work.empty()) {
      const auto x = work.back();
      work.pop_back();
      if (x == l.update || !S.insert(x).second) continue;
      for (Reg r : body[x].uses()) {
        if (r == l.counter) continue;
        if (auto d = reaching(r, x); d && *d != l.update && !S.count(*d)) work.push_back(*d);
      }
    }
  };
  close();

  for (bool grew = true; grew;) {
    grew = false;
    std::set<Reg> s_regs;
    for (std::size_t i : S) {
      for (Reg r : body[i].uses()) s_regs.insert(r);
      for (Reg r : body[i].defs()) s_regs.insert(r);
    }
    s_regs.erase(l.counter);
    for (std::size_t y : span) {
      if (y == l.update || S.count(y)) continue;
      bool pull = false;
      for (Reg r : body[y].uses()) {
        if (r == l.counter) continue;
        if (auto d = reaching(r, y); d && S.count(*d)) pull = true;
      }
      for (Reg r : body[y].defs())
        if (s_regs.count(r)) pull = true;
      if (pull) {
        work.push_back(y);
        grew = true;
      }
    }
    close();
  }

  Candidate c;
  c.loop = l;
  c.members = S;
  c.first = l.header;
  if (S.size() + 1 > opts.max_slice_len) return std::nullopt;
  bool stores = false;
  for (std::size_t i : S) {
    if (!is_slice_legal(body[i])) return std::nullopt;
    if (body[i].op == Opcode::Store) stores = true;
  }
  c.remnant_empty = true;
  for (std::size_t i : span) {
    if (i == l.update || S.count(i)) continue;
    const auto& x = body[i];
    if (x.is_memory() && x.space.kind != ir::SpaceAnnotation::Kind::Local &&
        (x.op == Opcode::Store || stores))
      return std::nullopt;
    if (x.op != Opcode::ProfileLabel) c.remnant_empty = false;
  }
  return c;
}

// Backward closure of `root` inside the run; producers that cannot be
// offloaded cut the chain and their results become live-ins.
std::set<std::size_t> straight_closure(const ir::Function& f, const Run& run, std::size_t root) {
  std::set<std::size_t> S;
  std::vector<std::size_t> work{root};
  while (!work.empty()) {
    const auto x = work.back();
    work.pop_back();
    if (!S.insert(x).second) continue;
    for (Reg r : f.body[x].uses()) {
      for (std::size_t i = x; i-- > run.begin;) {
        if (!defines(f.body[i], r)) continue;
        if (is_slice_legal(f.body[i])) work.push_back(i);
        break;
      }
    }
  }
  return S;
}

std::vector<Candidate> straight_candidates(const ir::Function& f, const Run& run,
                                           const std::vector<CountedLoop>& loops,
                                           const SliceOptions& opts) {
  std::vector<std::size_t> roots;
  for (std::size_t i = run.begin; i < run.end; ++i)
    if (f.body[i].op == Opcode::Load && f.body[i].space.is_remote()) roots.push_back(i);
  if (roots.empty()) return {};

  std::vector<std::set<std::size_t>> closures;
  for (auto r : roots) closures.push_back(straight_closure(f, run, r));
  std::vector<std::size_t> parent(roots.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    return parent[x] == x ? x : parent[x] = find(parent[x]);
  };
  for (std::size_t a = 0; a < roots.size(); ++a)
    for (std::size_t b = a + 1; b < roots.size(); ++b)
      if (std::any_of(closures[a].begin(), closures[a].end(),
                      [&](std::size_t i) { return closures[b].count(i) != 0; }))
        parent[find(b)] = find(a);

  std::map<std::size_t, std::set<std::size_t>> chains;
  for (std::size_t a = 0; a < roots.size(); ++a)
    chains[find(a)].insert(closures[a].begin(), closures[a].end());

  std::vector<Candidate> pieces;
  for (auto& [_, S] : chains) {
    std::vector<std::size_t> order(S.begin(), S.end());
    for (std::size_t k = 0; k < order.size(); k += opts.max_slice_len) {
      Candidate c;
      const auto end = std::min(order.size(), k + opts.max_slice_len);
      c.members.insert(order.begin() + static_cast<std::ptrdiff_t>(k),
                       order.begin() + static_cast<std::ptrdiff_t>(end));
      c.first = *c.members.begin();
      const bool has_load = std::any_of(c.members.begin(), c.members.end(), [&](std::size_t i) {
        return f.body[i].op == Opcode::Load;
      });
      if (has_load && plan_placement(f, shape_of(f, c), loops)) pieces.push_back(std::move(c));
    }
  }
  std::sort(pieces.begin(), pieces.end(),
            [](const Candidate& a, const Candidate& b) { return a.first < b.first; });

  if (!opts.batching || pieces.size() < 2) return pieces;
  std::vector<Candidate> merged;
  Candidate cur = pieces[0];
  for (std::size_t k = 1; k < pieces.size(); ++k) {
    Candidate next = cur;
    next.members.insert(pieces[k].members.begin(), pieces[k].members.end());
    if (next.members.size() <= opts.max_slice_len && plan_placement(f, shape_of(f, next), loops)) {
      cur = std::move(next);
    } else {
      merged.push_back(std::move(cur));
      cur = pieces[k];
    }
  }
  merged.push_back(std::move(cur));
  return merged;
}

OffloadSlice materialize(const ir::Function& f, const Candidate& c, SliceId id) {
  OffloadSlice s;
  s.id = id;
  s.function = f.name;
  const SliceShape shape = shape_of(f, c);
  for (std::size_t i : slice_order(c)) {
    const auto& inst = f.body[i];
    s.instructions.push_back(inst.id);
    s.body.push_back(inst);
    if (inst.is_memory() && inst.space.is_remote()) s.touched_endpoints.insert(inst.space.endpoint);
  }
  s.live_ins.assign(shape.live_ins.begin(), shape.live_ins.end());
  std::set<Reg> outs = shape.defined;
  if (c.loop) {
    s.counter = c.loop->counter;
    s.counter_update = f.body[c.loop->update].id;
    s.loop_header = f.body[c.loop->header].id;
    s.expected_trips = trips_before(f, *c.loop);
    outs.erase(c.loop->counter);
  }
  s.live_outs.assign(outs.begin(), outs.end());
  return s;
}

}  // namespace

std::vector<OffloadSlice> extract_slices(const ir::Program& p, const SliceOptions& opts) {
  std::vector<OffloadSlice> out;
  if (opts.max_slice_len == 0) return out;
  for (const auto& f : p.functions) {
    const auto loops = find_counted_loops(f);
    std::vector<Candidate> cands;
    for (const auto& l : loops) {
      auto c = loop_candidate(f, l, opts);
      if (c && plan_placement(f, shape_of(f, *c), loops)) cands.push_back(std::move(*c));
    }
    for (const auto& run : plain_runs(f, loops)) {
      auto more = straight_candidates(f, run, loops, opts);
      cands.insert(cands.end(), more.begin(), more.end());
    }
    std::sort(cands.begin(), cands.end(),
              [](const Candidate& a, const Candidate& b) { return a.first < b.first; });
    for (const auto& c : cands) out.push_back(materialize(f, c, static_cast<SliceId>(out.size())));
  }
  return out;
}

}  // namespace cxlmu::analysis
