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
#include "cxlmu/analysis/labels.hpp"
#include "cxlmu/analysis/remotable.hpp"
#include "cxlmu/analysis/rewrite.hpp"
#include "cxlmu/analysis/slices.hpp"
#include "cxlmu/host/simulate.hpp"
#include "cxlmu/workloads/generate.hpp"

using namespace cxlmu;
using namespace cxlmu::host;
using testing::parse_ok;
using testing::topology_for;

namespace {

ir::MemoryImage chase3_image(const ir::Program& p) {
  ir::MemoryImage m(p.regions);
  m.write(0x10000000, 8, 0x10000040);
  m.write(0x10000040, 8, 0x10000080);
  m.write(0x10000080, 8, 0);
  return m;
}

analysis::OffloadedProgram force_offload(const ir::Program& p, analysis::Site site = analysis::Site::endpoint(2)) {
  const auto rm = analysis::RegionMap::from(p);
  const auto annotated = analysis::propagate_remote_pointers(analysis::mark_remotable(p, rm), rm).program;
  auto slices = analysis::extract_slices(annotated);
  const auto labeled = analysis::insert_profile_labels(annotated, slices);
  for (auto& s : slices) s.site = site;
  return analysis::rewrite_with_offload(labeled, slices);
}

workloads::Workload make(workloads::Kind k, std::uint64_t seed, std::uint64_t n, std::uint32_t work = 0) {
  workloads::WorkloadSpec s;
  s.kind = k;
  s.seed = seed;
  s.n = n;
  s.work_per_element = work;
  return workloads::generate(s);
}

constexpr workloads::Kind kKinds[] = {workloads::Kind::PointerChase, workloads::Kind::Strided,
                                      workloads::Kind::HashProbe, workloads::Kind::IndirectGather};

std::uint64_t pair(const SimReport& r, const std::string& key) {
  auto it = r.message_pairs.find(key);
  return it == r.message_pairs.end() ? 0 : it->second;
}

}  // namespace

TEST_CASE("L1: LRU within a set") {
  L1Cache c(32768, 8);
  CHECK(c.sets() == 64);
  const ir::Addr stride = 64 * 64;
  for (int k = 0; k < 9; ++k) c.fill(0x10000 + k * stride);
  CHECK_FALSE(c.contains(0x10000));
  for (int k = 1; k < 9; ++k) CHECK(c.contains(0x10000 + k * stride));
  CHECK(c.resident() == 8);

  CHECK(c.lookup(0x10000 + stride));  // refresh, then the next fill evicts k=2
  c.fill(0x10000 + 9 * stride);
  CHECK(c.contains(0x10000 + stride));
  CHECK_FALSE(c.contains(0x10000 + 2 * stride));
}

TEST_CASE("mailbox_resume: examples") {
  L1Cache l1(32768, 8);
  Rob rob(8);
  AsyncEngine eng(8);
  ir::Instruction await;
  await.op = ir::Opcode::AwaitMailbox;

  RobEntry other;
  other.seq = 0;
  other.inst = &await;
  other.state = EntryState::Waiting;
  rob.push(other);
  RobEntry e;
  e.seq = 1;
  e.inst = &await;
  e.state = EntryState::AwaitingMailbox;
  rob.push(e);
  eng.open(7, 3, 100);
  eng.bind_await(7, 1);

  const ir::Addr stride = 64 * 64;
  MailboxEntry done;
  done.slice = 3;
  done.job = 7;
  done.values = {42};
  for (int k = 8; k >= 0; --k) done.lines_newest_first.push_back(0x20000 + k * stride);
  mailbox_resume(eng, rob, l1, done, 500);

  const auto* entry = rob.find(1);
  REQUIRE(entry);
  CHECK(entry->state == EntryState::Ready);
  CHECK(entry->mailbox_values == std::vector<ir::Value>{42});
  CHECK(entry->done_at == 500);
  CHECK(rob.find(0)->state == EntryState::Waiting);
  CHECK(rob.head().seq == 0);
  CHECK(l1.resident() == 8);
  CHECK_FALSE(l1.contains(0x20000));
  CHECK(l1.contains(0x20000 + 8 * stride));
  CHECK(eng.ticket(7) == nullptr);

  CHECK_THROWS_AS(mailbox_resume(eng, rob, l1, done, 501), SimError);
}

TEST_CASE("mailbox_resume: an error payload faults the await entry") {
  L1Cache l1(32768, 8);
  Rob rob(4);
  AsyncEngine eng(8);
  ir::Instruction await;
  await.op = ir::Opcode::AwaitMailbox;
  RobEntry e;
  e.inst = &await;
  e.state = EntryState::AwaitingMailbox;
  rob.push(e);
  eng.open(1, 0, 0);
  eng.bind_await(1, 0);
  MailboxEntry done;
  done.job = 1;
  done.error = "unowned line";
  mailbox_resume(eng, rob, l1, done, 10);
  CHECK(rob.head().fault.has_value());
}

TEST_CASE("async engine: a full mailbox refuses") {
  AsyncEngine eng(2);
  CHECK(eng.offer({}));
  CHECK(eng.offer({}));
  CHECK_FALSE(eng.offer({}));
}

TEST_CASE("simulate: warm local load") {
  auto p = parse_ok("region d 0x1000 0x1000 local\nfn main() { r1 = load 8 [0x1000]; ret r1 }");
  auto topo = topology_for(p);
  SimOptions o;
  o.warm_lines = {0x1000};
  const auto r = simulate(p, ir::MemoryImage(p.regions), topo, {}, {}, o);
  CHECK(r.status == "ok");
  CHECK(r.stalls.total() == 0);
  CHECK(r.l1_hits == 1);
  CHECK(r.total_cycles <= 2 + 4 + 1);
}

TEST_CASE("simulate: 3-deep remote chase, baseline and offloaded") {
  auto p = parse_ok(testing::kChase3);
  auto topo = topology_for(p);
  const auto mem = chase3_image(p);
  const auto base = simulate(p, mem, topo, {}, {});
  REQUIRE(base.status == "ok");
  CHECK(base.return_value == 0u);
  CHECK(base.stalls.total() == doctest::Approx(1800).epsilon(0.05));
  CHECK(base.l1_misses == 3);

  const auto off = simulate(force_offload(p), mem, topo, {}, {});
  REQUIRE(off.status == "ok");
  REQUIRE(off.slices.size() == 1);
  CHECK(off.slices[0].near_cycles == 4 * 2 + 3 * 40);  // the const rides along
  CHECK(off.stalls.total() == doctest::Approx(600 + 126 + 20).epsilon(0.05));
  CHECK(off.stalls.total() < base.stalls.total());
  CHECK(off.return_value == base.return_value);
}

TEST_CASE("measure_window: hand-built reports") {
  SimReport r;
  SliceRecord s;
  s.slice = 4;
  s.submit_cycle = 1000;
  s.consume_cycle = 1100;
  s.retired_in_window = 5;
  s.consumed = true;
  r.slices.push_back(s);
  const auto m = measure_window(r, 4);
  CHECK(m.window == 100);
  CHECK(m.utilization == doctest::Approx(0.05));
  CHECK_THROWS(measure_window(r, 9));

  r.slices[0].consumed = false;
  CHECK_THROWS(measure_window(r, 4));
}

TEST_CASE("measure_window: zero overlap and a tiny ROB give no utilization") {
  auto p = parse_ok(testing::kChase3);
  auto topo = topology_for(p);
  const auto op = force_offload(p);
  REQUIRE(op.overlap_regions.at(0).length() == 0);
  const auto r = simulate(op, chase3_image(p), topo, {}, {});
  CHECK(measure_window(r, 0).utilization == 0);

  auto q = parse_ok(R"(region far 0x10000000 0x1000 remote(2)
fn main() {
  r1 = const 0x10000000
  r1 = load 8 [r1]
  r1 = load 8 [r1]
  r2 = const 1
  r3 = add r2, 1
  r4 = add r3, 1
  r5 = add r4, 1
  r6 = add r1, r5
  ret r6
})");
  const auto oq = force_offload(q);
  CoreConfig small;
  small.rob_capacity = 2;
  const auto rq = simulate(oq, chase3_image(q), topology_for(q), {}, small);
  REQUIRE(rq.status == "ok");
  const auto w = measure_window(rq, 0);
  CoreConfig roomy;
  const auto rr = simulate(oq, chase3_image(q), topology_for(q), {}, roomy);
  CHECK(measure_window(rr, 0).utilization > 0);
  CHECK(rq.stalls.rob_full > 0);
  CHECK(rq.max_rob_occupancy <= 2);
  CHECK(w.retired <= measure_window(rr, 0).retired);
}

TEST_CASE("simulate: near-core errors surface as a trap") {
  auto p = parse_ok(testing::kChase3);
  auto topo = topology_for(p);
  ir::MemoryImage m(p.regions);
  m.write(0x10000000, 8, 0x30000000);  // wild pointer outside every region
  const auto base = simulate(p, m, topo, {}, {});
  const auto off = simulate(force_offload(p), m, topo, {}, {});
  CHECK(base.status == "trap");
  CHECK(off.status == "trap");
  CHECK(off.oracle_checked);
}

TEST_CASE("simulate: unowned remote regions are rejected up front") {
  auto p = parse_ok(testing::kChase3);
  auto topo = fabric::builtin_topology("line");
  topo.finalize();
  CHECK_THROWS_AS(simulate(p, chase3_image(p), topo, {}, {}), SimError);
}

TEST_CASE("property: functional equivalence with the interpreter in both modes") {
  for (auto kind : kKinds)
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto w = make(kind, seed, 24, static_cast<std::uint32_t>(seed % 3));
      const auto topo = topology_for(w.program);
      const auto base = simulate(w.program, w.memory, topo, {}, {});
      CHECK(base.oracle_checked);
      const auto op = analysis::plan_offload(w.program, topo);
      const auto off = simulate(op, w.memory, topo, {}, {});
      CHECK(off.oracle_checked);
      const auto forced = simulate(force_offload(w.program), w.memory, topo, {}, {});
      CHECK(forced.oracle_checked);
      CHECK(forced.return_value == base.return_value);
    }
}

TEST_CASE("property: message conservation and one-line payloads") {
  for (auto kind : kKinds) {
    const auto w = make(kind, 3, 32);
    const auto topo = topology_for(w.program);
    for (const auto& r : {simulate(w.program, w.memory, topo, {}, {}),
                          simulate(force_offload(w.program), w.memory, topo, {}, {})}) {
      CHECK(pair(r, "ReadReq 0->2") == pair(r, "ReadResp 2->0"));
      CHECK(pair(r, "WriteReq 0->2") == pair(r, "WriteAck 2->0"));
      CHECK(pair(r, "SliceSubmit 0->2") == pair(r, "SliceDone 2->0"));
      CHECK(r.payload_violations == 0);
      CHECK(r.data_messages == pair(r, "ReadResp 2->0") + pair(r, "WriteReq 0->2"));
    }
  }
}

TEST_CASE("property: MSHR coalescing sends one request per line") {
  auto p = parse_ok(R"(region far 0x10000000 0x1000 remote(2)
fn main() {
  r1 = load 8 [0x10000000]
  r2 = load 8 [0x10000008]
  r3 = load 8 [0x10000010]
  ret r3
})");
  const auto r = simulate(p, ir::MemoryImage(p.regions), topology_for(p), {}, {});
  CHECK(pair(r, "ReadReq 0->2") == 1);
  CHECK(r.l1_misses + r.l1_hits == 3);
}

TEST_CASE("property: total cycles never fall as hop latency rises") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto kind = kKinds[rng() % 4];
    const auto w = make(kind, rng() % 1000, 8 + rng() % 24, static_cast<std::uint32_t>(rng() % 4));
    CoreConfig cc;
    cc.mshr_capacity = 1 + static_cast<std::uint32_t>(rng() % 8);
    const bool offload = rng() % 2;
    std::uint64_t prev = 0;
    for (fabric::Cycles hop : {20, 60, 150, 400}) {
      const auto topo = topology_for(w.program, "line", {hop, hop, 8.0});
      analysis::CostModel cm;
      cm.hop_latency = static_cast<double>(hop);
      const auto r = offload ? simulate(force_offload(w.program), w.memory, topo, cm, cc)
                             : simulate(w.program, w.memory, topo, cm, cc);
      CHECK(r.total_cycles >= prev);
      prev = r.total_cycles;
    }
  }
}

TEST_CASE("property: determinism and bounded structures") {
  for (auto kind : kKinds) {
    const auto w = make(kind, 9, 40, 2);
    const auto topo = topology_for(w.program);
    CoreConfig cc;
    cc.rob_capacity = 6;
    cc.mshr_capacity = 2;
    SimOptions o;
    o.message_log = true;
    o.cycle_trace = true;
    const auto op = force_offload(w.program);
    const auto a = simulate(op, w.memory, topo, {}, cc, o);
    const auto b = simulate(op, w.memory, topo, {}, cc, o);
    CHECK(to_json(a) == to_json(b));
    CHECK(a.message_log == b.message_log);
    CHECK(a.cycle_trace == b.cycle_trace);
    CHECK(a.max_rob_occupancy <= 6);
    CHECK(a.max_mshr_occupancy <= 2);
  }
}

TEST_CASE("report: json round trip") {
  const auto w = make(workloads::Kind::HashProbe, 2, 16, 1);
  const auto topo = topology_for(w.program);
  const auto r = simulate(force_offload(w.program), w.memory, topo, {}, {});
  const auto back = report_from_json(to_json(r));
  CHECK(to_json(back) == to_json(r));
  CHECK_THROWS(report_from_json("{"));
}
