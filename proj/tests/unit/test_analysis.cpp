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

#include <random>

#include "common.hpp"
#include "cxlmu/analysis/cost_model.hpp"
#include "cxlmu/analysis/labels.hpp"
#include "cxlmu/analysis/remotable.hpp"
#include "cxlmu/analysis/rewrite.hpp"
#include "cxlmu/analysis/slices.hpp"
#include "cxlmu/ir/interpret.hpp"
#include "cxlmu/ir/validate.hpp"
#include "cxlmu/workloads/generate.hpp"

using namespace cxlmu;
using namespace cxlmu::analysis;
using testing::parse_ok;
using testing::topology_for;

namespace {

using Ann = ir::SpaceAnnotation;

ir::Program annotate(const ir::Program& p) {
  const auto rm = RegionMap::from(p);
  return propagate_remote_pointers(mark_remotable(p, rm), rm).program;
}

std::vector<Ann> memory_annotations(const ir::Program& p, std::string_view fn = "main") {
  std::vector<Ann> out;
  for (const auto& i : p.find(fn)->body)
    if (i.is_memory()) out.push_back(i.space);
  return out;
}

// Extract, label and rewrite every slice at `site`, bypassing site choice.
OffloadedProgram force_offload(const ir::Program& p, Site site = Site::endpoint(2)) {
  const auto annotated = annotate(p);
  auto slices = extract_slices(annotated);
  const auto labeled = insert_profile_labels(annotated, slices);
  for (auto& s : slices) s.site = site;
  return rewrite_with_offload(labeled, slices);
}

std::map<ir::InstId, std::vector<ir::Value>> per_inst(const ir::ArchResult& r) {
  return ir::loads_by_instruction(r.load_trace);
}

workloads::Workload make(workloads::Kind k, std::uint64_t seed, std::uint64_t n, std::uint32_t work) {
  workloads::WorkloadSpec s;
  s.kind = k;
  s.seed = seed;
  s.n = n;
  s.work_per_element = work;
  return workloads::generate(s);
}

constexpr workloads::Kind kKinds[] = {workloads::Kind::PointerChase, workloads::Kind::Strided,
                                      workloads::Kind::HashProbe, workloads::Kind::IndirectGather};

// Three loads forming a chain, for the cost-model examples.
OffloadSlice chain_slice(const ir::Program& raw) {
  const auto p = annotate(raw);
  OffloadSlice s;
  for (const auto& i : p.functions[0].body)
    if (i.op == ir::Opcode::Load) {
      s.instructions.push_back(i.id);
      s.body.push_back(i);
    }
  s.function = "main";
  s.live_ins = {1};
  s.live_outs = {1};
  s.touched_endpoints = {2};
  return s;
}

}  // namespace

TEST_CASE("mark_remotable: examples") {
  auto direct = annotate(parse_ok(
      "region far 0x10000000 0x1000 remote(2)\nfn main() { r1 = load 8 [0x10000040]; ret r1 }"));
  CHECK(memory_annotations(direct) == std::vector<Ann>{Ann::remote(2)});

  auto offset = annotate(parse_ok(R"(region far 0x10000000 0x1000 remote(2)
fn main() {
  r1 = const 0x10000000
  r2 = add r1, 8
  r3 = load 8 [r2]
  ret r3
})"));
  CHECK(memory_annotations(offset) == std::vector<Ann>{Ann::remote(2)});

  auto merge = annotate(parse_ok(R"(region near 0x1000 0x1000 local
region far 0x10000000 0x1000 remote(2)
fn main(r9) {
  r1 = const 0x1000
  branch r9, other
  jump join
other:
  r1 = const 0x10000000
join:
  r2 = load 8 [r1]
  ret r2
})"));
  CHECK(memory_annotations(merge) == std::vector<Ann>{Ann::unknown()});

  auto local = annotate(parse_ok(
      "region near 0x1000 0x1000 local\nfn main() { r1 = const 0x1000; r2 = load 8 [r1]; ret r2 }"));
  CHECK(memory_annotations(local) == std::vector<Ann>{Ann::local()});
}

TEST_CASE("mark_remotable: a loaded pointer stays in its space") {
  auto p = annotate(parse_ok(R"(region far 0x10000000 0x1000 remote(3)
fn main() {
  r1 = const 0x10000000
  r1 = load 8 [r1]
  r1 = load 8 [r1]
  r2 = add r1, 16
  store 8 [r2], 5
  ret
})"));
  CHECK(memory_annotations(p) == std::vector<Ann>(3, Ann::remote(3)));
}

TEST_CASE("propagate_remote_pointers: examples") {
  auto chain = parse_ok(R"(region far 0x10000000 0x1000 remote(2)
fn g(r1) { r2 = load 8 [r1]; ret r2 }
fn f(r1) { r2 = call g(r1); ret r2 }
fn main() { r1 = const 0x10000000; r2 = call f(r1); ret r2 }
)");
  const auto rm = RegionMap::from(chain);
  auto res = propagate_remote_pointers(mark_remotable(chain, rm), rm);
  CHECK(res.functions == std::set<std::string>{"f", "g"});
  CHECK(memory_annotations(res.program, "g") == std::vector<Ann>{Ann::remote(2)});

  auto none = parse_ok(testing::kChase3);
  CHECK(propagate_remote_pointers(mark_remotable(none, RegionMap::from(none)), RegionMap::from(none))
            .functions.empty());

  auto mixed = parse_ok(R"(region near 0x1000 0x1000 local
region far 0x10000000 0x1000 remote(2)
fn f(r1) { r2 = load 8 [r1]; ret r2 }
fn main() {
  r1 = const 0x1000
  r2 = call f(r1)
  r3 = const 0x10000000
  r4 = call f(r3)
  ret r4
})");
  const auto rm2 = RegionMap::from(mixed);
  auto res2 = propagate_remote_pointers(mark_remotable(mixed, rm2), rm2);
  CHECK(res2.functions.count("f") == 1);
  CHECK(memory_annotations(res2.program, "f") == std::vector<Ann>{Ann::unknown()});
}

TEST_CASE("propagate_remote_pointers: recursion converges") {
  auto p = parse_ok(R"(region far 0x10000000 0x1000 remote(2)
fn walk(r1, r2) {
  branch r2, more
  ret r1
more:
  r3 = load 8 [r1]
  r4 = add r2, -1
  r5 = call walk(r3, r4)
  ret r5
}
fn main() { r1 = const 0x10000000; r2 = call walk(r1, 3); ret r2 }
)");
  const auto rm = RegionMap::from(p);
  auto res = propagate_remote_pointers(mark_remotable(p, rm), rm);
  CHECK(res.functions == std::set<std::string>{"walk"});
  CHECK(memory_annotations(res.program, "walk") == std::vector<Ann>{Ann::remote(2)});
}

TEST_CASE("extract_slices: counted pointer-chase loop") {
  auto p = annotate(parse_ok(R"(region far 0x10000000 0x1000 remote(2)
fn main(r2) {
  r1 = const 0x10000000
loop:
  r1 = load 8 [r1]
  r2 = add r2, -1
  branch r2, loop
  ret r1
})"));
  const auto slices = extract_slices(p);
  REQUIRE(slices.size() == 1);
  const auto& s = slices[0];
  CHECK(s.is_loop());
  CHECK(s.instructions.size() == 2);
  CHECK(s.load_count() == 1);
  CHECK(std::set<ir::Reg>(s.live_ins.begin(), s.live_ins.end()) == std::set<ir::Reg>{1, 2});
  CHECK(s.live_outs == std::vector<ir::Reg>{1});
  CHECK(s.touched_endpoints == std::set<ir::NodeId>{2});
  CHECK(slice_is_closed(s));
}

TEST_CASE("extract_slices: batching and the length cap") {
  const char* two = R"(region far 0x10000000 0x1000 remote(2)
fn main() {
  r1 = load 8 [0x10000000]
  r2 = load 8 [0x10000040]
  r3 = add r1, r2
  ret r3
})";
  auto p = annotate(parse_ok(two));
  auto batched = extract_slices(p);
  REQUIRE(batched.size() == 1);
  CHECK(batched[0].load_count() == 2);
  CHECK(batched[0].live_outs.size() == 2);

  SliceOptions off;
  off.batching = false;
  CHECK(extract_slices(p, off).size() == 2);

  auto chain = annotate(parse_ok(testing::kChase3));
  SliceOptions tight;
  tight.max_slice_len = 2;
  const auto pieces = extract_slices(chain, tight);
  CHECK(pieces.size() >= 2);
  std::size_t loads = 0;
  for (const auto& s : pieces) {
    CHECK(s.instructions.size() <= 2);
    CHECK(slice_is_closed(s));
    loads += s.load_count();
  }
  CHECK(loads == 3);

  SliceOptions zero;
  zero.max_slice_len = 0;
  CHECK(extract_slices(chain, zero).empty());
}

TEST_CASE("extract_slices: local and unknown accesses are never sliced") {
  auto local = annotate(parse_ok(
      "region near 0x1000 0x1000 local\nfn main() { r1 = load 8 [0x1000]; r2 = load 8 [r1]; ret r2 }"));
  CHECK(extract_slices(local).empty());
  auto unknown = annotate(parse_ok(R"(region far 0x10000000 0x1000 remote(2)
fn main(r1) { r2 = load 8 [r1]; ret r2 })"));
  CHECK(extract_slices(unknown).empty());
}

TEST_CASE("insert_profile_labels: counts and idempotence") {
  auto p = annotate(parse_ok(testing::kChase3));
  auto slices = extract_slices(p);
  REQUIRE(slices.size() == 1);
  auto labeled = insert_profile_labels(p, slices);
  CHECK(testing::count_op(labeled, ir::Opcode::ProfileLabel) == 2);
  CHECK(slices[0].anchor_label == anchor_label_id(labeled, slices[0].id));
  auto again = insert_profile_labels(labeled, slices);
  CHECK(ir::structurally_equal(again, labeled));
  CHECK(ir::validate(labeled).empty());

  auto three = parse_ok("fn a() { ret }\nfn b() { ret }\nfn main() { ret }\n");
  std::vector<OffloadSlice> none;
  auto l3 = insert_profile_labels(three, none);
  CHECK(testing::count_op(l3, ir::Opcode::ProfileLabel) == 3);
  for (std::size_t i = 0; i < l3.functions.size(); ++i) {
    REQUIRE(l3.functions[i].body[0].op == ir::Opcode::ProfileLabel);
    CHECK(l3.functions[i].body[0].number == entry_label_id(i));
  }
}

TEST_CASE("estimate_window: examples") {
  auto p = parse_ok(testing::kChase3);
  auto topo = topology_for(p, "line");
  const auto s = chain_slice(p);
  CostModel cm;
  cm.line_transfer = 10;
  CHECK(result_lines(s) == 1);
  CHECK(estimate_window(s, cm, topo, Site::endpoint(2)) == doctest::Approx(756));

  const double host = estimate_window(s, cm, topo, Site::host());
  CHECK(host >= 1800);
  CHECK(host < 1900);

  OffloadSlice empty;
  empty.touched_endpoints = {2};
  auto direct = topology_for(p, "direct");
  CHECK(estimate_window(empty, cm, direct, Site::endpoint(2)) == doctest::Approx(20 + 2 * 150));

  CHECK_THROWS_AS(estimate_window(s, cm, topo, Site::endpoint(7)), CostError);
}

TEST_CASE("choose_site: examples") {
  auto p = parse_ok(testing::kChase3);
  auto topo = topology_for(p, "line");
  auto s = chain_slice(p);
  CHECK(choose_site(s, CostModel{}, topo) == Site::endpoint(2));

  auto two = parse_ok(R"(region a 0x10000000 0x1000 remote(2)
region b 0x20000000 0x1000 remote(3)
fn main() {
  r1 = load 8 [0x10000000]
  r2 = load 8 [0x20000000]
  r3 = add r1, r2
  ret r3
})");
  auto t2 = topology_for(two, "two-endpoint");
  auto slices = extract_slices(annotate(two));
  REQUIRE(slices.size() == 1);
  CHECK(slices[0].touched_endpoints == std::set<ir::NodeId>{2, 3});
  CHECK(choose_site(slices[0], CostModel{}, t2) == Site::switch_node(1));

  CostModel slow;
  slow.near_cpi = 5000;
  CHECK(choose_site(s, slow, topo) == Site::host());
}

TEST_CASE("property: choose_site equals a brute-force argmin") {
  std::mt19937_64 rng(11);
  const std::vector<std::string> names{"direct", "line", "two-endpoint"};
  for (int trial = 0; trial < 300; ++trial) {
    fabric::BuiltinParams bp;
    bp.host_switch_latency = 1 + rng() % 400;
    bp.switch_endpoint_latency = 1 + rng() % 400;
    bp.bandwidth = 1 + static_cast<double>(rng() % 16);
    const std::string name = names[rng() % names.size()];
    auto topo = fabric::builtin_topology(name, bp);
    topo.finalize();

    OffloadSlice s;
    const auto eps = topo.endpoints();
    const auto nloads = 1 + rng() % 4;
    for (std::size_t k = 0; k < nloads; ++k) {
      ir::Instruction ld;
      ld.op = ir::Opcode::Load;
      ld.dest = 1;
      ld.size = 8;
      ld.args = {ir::Operand::reg(1)};
      const auto e = eps[rng() % eps.size()];
      ld.space = Ann::remote(e);
      s.touched_endpoints.insert(e);
      s.body.push_back(ld);
    }
    for (std::size_t k = 0, extra = rng() % 6; k < extra; ++k) {
      ir::Instruction add;
      add.op = ir::Opcode::Add;
      add.dest = 2;
      add.args = {ir::Operand::reg(2), ir::Operand::imm(1)};
      s.body.push_back(add);
    }
    for (std::size_t k = 0; k < s.body.size(); ++k) s.instructions.push_back(static_cast<ir::InstId>(k));
    s.live_ins = {1, 2};
    s.live_outs.resize(1 + rng() % 12, 1);
    if (rng() % 2) {
      s.counter = 3;
      s.expected_trips = 1 + rng() % 50;
    }

    CostModel cm;
    cm.submit_overhead = 1 + rng() % 100;
    cm.hop_latency = static_cast<double>(bp.host_switch_latency);
    cm.host_cpi = 1 + rng() % 3;
    cm.near_cpi = cm.host_cpi + rng() % 8;
    cm.local_mem = 1 + rng() % 200;
    cm.line_transfer = 1 + rng() % 20;

    // Brute force: every host/switch node plus touched endpoints, ties by
    // kind rank then node id.
    std::vector<Site> all{Site::host()};
    for (auto n : topo.switches()) all.push_back(Site::switch_node(n));
    for (auto n : s.touched_endpoints) all.push_back(Site::endpoint(n));
    auto rank = [](const Site& x) { return x.kind == Site::Kind::Endpoint ? 0 : x.kind == Site::Kind::Switch ? 1 : 2; };
    Site best = all[0];
    double best_w = estimate_window(s, cm, topo, best);
    for (const auto& site : all) {
      const double w = estimate_window(s, cm, topo, site);
      if (w < best_w || (w == best_w && (rank(site) < rank(best) ||
                                         (rank(site) == rank(best) && site.node < best.node)))) {
        best = site;
        best_w = w;
      }
    }
    CHECK(choose_site(s, cm, topo) == best);
  }
}

TEST_CASE("property: estimate_window is strictly monotone") {
  auto p = parse_ok(testing::kChase3);
  auto topo = topology_for(p, "line");
  const auto s = chain_slice(p);
  for (const Site site : {Site::endpoint(2), Site::switch_node(1)}) {
    CostModel lo;
    CostModel hi = lo;
    hi.hop_latency += 1;
    CHECK(estimate_window(s, hi, topo, site) > estimate_window(s, lo, topo, site));
    hi = lo;
    hi.near_cpi += 0.5;
    CHECK(estimate_window(s, hi, topo, site) > estimate_window(s, lo, topo, site));
    auto longer = s;
    ir::Instruction add;
    add.op = ir::Opcode::Add;
    add.dest = 2;
    add.args = {ir::Operand::reg(1), ir::Operand::imm(1)};
    longer.body.push_back(add);
    longer.instructions.push_back(99);
    CHECK(estimate_window(longer, lo, topo, site) > estimate_window(s, lo, topo, site));
  }
}

TEST_CASE("property: marking matches the region map on constant addresses") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    std::string text;
    std::vector<std::pair<ir::Addr, ir::AddressSpace>> regions;
    for (int k = 0; k < 4; ++k) {
      const ir::Addr base = 0x100000 * (k + 1);
      const auto sp = rng() % 2 ? ir::AddressSpace::local() : ir::AddressSpace::remote(2 + rng() % 2);
      regions.push_back({base, sp});
      text += "region r" + std::to_string(k) + " " + std::to_string(base) + " 4096 " + ir::print_space(sp) + "\n";
    }
    text += "fn main() {\n";
    std::vector<ir::AddressSpace> expect;
    for (int k = 0; k < 10; ++k) {
      const auto& [base, sp] = regions[rng() % regions.size()];
      const ir::Addr a = base + 8 * (rng() % 512);
      text += "  r" + std::to_string(k + 1) + " = load 8 [" + std::to_string(a) + "]\n";
      expect.push_back(sp);
    }
    text += "  ret\n}\n";
    const auto p = parse_ok(text);
    const auto rm = RegionMap::from(p);
    const auto anns = memory_annotations(mark_remotable(p, rm));
    REQUIRE(anns.size() == expect.size());
    for (std::size_t k = 0; k < anns.size(); ++k)
      CHECK(anns[k] == (expect[k].is_remote() ? Ann::remote(expect[k].endpoint) : Ann::local()));
  }
}

TEST_CASE("property: adding a remote region never makes an access local") {
  for (auto kind : kKinds)
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      auto w = make(kind, seed, 16, 1);
      for (auto& r : w.program.regions) r.space = ir::AddressSpace::local();
      RegionMap partial;
      const auto& regions = w.program.regions;
      for (std::size_t k = 1; k < regions.size(); ++k)
        partial.add(regions[k].base, regions[k].length, regions[k].space);
      RegionMap fuller = partial;
      fuller.add(regions[0].base, regions[0].length, ir::AddressSpace::remote(2));
      const auto before = memory_annotations(mark_remotable(w.program, partial));
      const auto after = memory_annotations(mark_remotable(w.program, fuller));
      REQUIRE(before.size() == after.size());
      for (std::size_t k = 0; k < before.size(); ++k) {
        if (before[k].kind == Ann::Kind::Remote || before[k].kind == Ann::Kind::Unknown)
          CHECK(after[k].kind != Ann::Kind::Local);
      }
    }
}

TEST_CASE("rewrite: overlap lengths") {
  auto zero = parse_ok(R"(region far 0x10000000 0x1000 remote(2)
fn main() {
  r1 = const 0x10000000
  r2 = load 8 [r1]
  r3 = add r2, 1
  ret r3
})");
  auto op0 = force_offload(zero);
  REQUIRE(op0.slices.size() == 1);
  CHECK(op0.overlap_regions.at(op0.slices[0].id).length() == 0);
  CHECK(check_offloaded(op0).empty());

  auto five = parse_ok(R"(region far 0x10000000 0x1000 remote(2)
fn main() {
  r1 = const 0x10000000
  r2 = load 8 [r1]
  r3 = const 1
  r4 = add r3, 1
  r5 = add r4, 1
  r6 = add r5, 1
  r7 = add r6, 1
  r8 = add r2, r7
  ret r8
})");
  auto op5 = force_offload(five);
  REQUIRE(op5.slices.size() == 1);
  CHECK(op5.overlap_regions.at(op5.slices[0].id).length() == 5);
  CHECK(check_offloaded(op5).empty());
  CHECK(ir::validate(op5.program).empty());
  CHECK(testing::count_op(op5.program, ir::Opcode::SubmitSlice) == 1);
  CHECK(testing::count_op(op5.program, ir::Opcode::AwaitMailbox) == 1);
}

TEST_CASE("rewrite: the anchor label precedes the submit") {
  auto p = parse_ok(testing::kChase3);
  auto op = plan_offload(p, topology_for(p));
  REQUIRE(op.slices.size() == 1);
  const auto& body = op.program.functions[0].body;
  for (std::size_t i = 0; i < body.size(); ++i)
    if (body[i].op == ir::Opcode::SubmitSlice) {
      REQUIRE(i > 0);
      CHECK(body[i - 1].op == ir::Opcode::ProfileLabel);
      CHECK(body[i - 1].number == op.slices[0].anchor_label);
    }
}

TEST_CASE("rewrite: interpret equivalence on the chase") {
  auto p = parse_ok(testing::kChase3);
  ir::MemoryImage m(p.regions);
  m.write(0x10000000, 8, 0x10000040);
  m.write(0x10000040, 8, 0x10000080);
  auto op = plan_offload(p, topology_for(p));
  const auto codes = op.codes();
  ir::InterpretOptions io;
  io.slices = &codes;
  const auto a = ir::interpret(p, m);
  const auto b = ir::interpret(op.program, m, {}, io);
  CHECK(per_inst(a) == per_inst(b));
  CHECK(a.return_value == b.return_value);
}

TEST_CASE("property: rewrite soundness over workloads and seeds") {
  for (auto kind : kKinds)
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      const auto w = make(kind, seed, 4 + seed % 29, static_cast<std::uint32_t>(seed % 5));
      const auto topo = topology_for(w.program);
      OffloadOptions oo;
      oo.slicing.batching = seed % 2 == 0;
      const auto op = plan_offload(w.program, topo, oo);
      CHECK(check_offloaded(op).empty());
      CHECK(ir::validate(op.program).empty());
      for (const auto& s : op.slices) CHECK(slice_is_closed(s));
      const auto codes = op.codes();
      ir::InterpretOptions io;
      io.slices = &codes;
      const auto a = ir::interpret(w.program, w.memory);
      const auto b = ir::interpret(op.program, w.memory, {}, io);
      REQUIRE(a.ok());
      REQUIRE(b.ok());
      CHECK(per_inst(a) == per_inst(b));
      CHECK(a.final_registers == b.final_registers);
      CHECK(a.return_value == b.return_value);
      if (kind == workloads::Kind::PointerChase) CHECK(!op.slices.empty());
    }
}

TEST_CASE("slices: every generated workload yields closed slices") {
  for (auto kind : kKinds) {
    const auto w = make(kind, 3, 64, 2);
    const auto slices = extract_slices(annotate(w.program));
    CHECK(!slices.empty());
    for (const auto& s : slices) {
      CHECK(slice_is_closed(s));
      CHECK(s.load_count() >= 1);
      for (const auto& i : s.body)
        if (i.is_memory()) CHECK(i.space.is_remote());
    }
  }
}

TEST_CASE("site parsing round trip") {
  for (const Site s : {Site::host(), Site::switch_node(1), Site::endpoint(12)})
    CHECK(parse_site(to_string(s)) == s);
  CHECK_FALSE(parse_site("endpoint").has_value());
}

TEST_CASE("cost model check") {
  CostModel cm;
  CHECK(cm.check().empty());
  cm.near_cpi = 0.5;
  CHECK_FALSE(cm.check().empty());
  cm = CostModel{};
  cm.hop_latency = 0;
  CHECK(cm.check().find("hop_latency") != std::string::npos);
}
