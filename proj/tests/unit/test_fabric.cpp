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

#include "common.hpp"
#include "cxlmu/fabric/fabric.hpp"
#include "cxlmu/fabric/near_core.hpp"

using namespace cxlmu;
using namespace cxlmu::fabric;

namespace {

Topology line(Cycles hs = 150, Cycles se = 150) {
  auto t = builtin_topology("line", {hs, se, 8.0});
  t.add_ownership(2, 0x10000000, 0x1000);
  t.finalize();
  return t;
}

Topology one_hop(Cycles latency = 150) {
  return parse_topology("node 0 host\nnode 2 endpoint\nedge 0 2 " + std::to_string(latency) + " 8\n");
}

ir::MemoryImage chase_image() {
  ir::MemoryImage m({{"far", 0x10000000, 0x1000, ir::AddressSpace::remote(2)}});
  m.write(0x10000000, 8, 0x10000040);
  m.write(0x10000040, 8, 0x10000080);
  m.write(0x10000080, 8, 0);
  return m;
}

ir::SliceCode chase_code(int depth) {
  ir::SliceCode c;
  for (int k = 0; k < depth; ++k) {
    ir::Instruction ld;
    ld.id = static_cast<ir::InstId>(k + 1);
    ld.op = ir::Opcode::Load;
    ld.dest = 1;
    ld.size = 8;
    ld.args = {ir::Operand::reg(1)};
    ld.space = ir::SpaceAnnotation::remote(2);
    c.body.push_back(ld);
  }
  c.live_ins = {1};
  c.live_outs = {1};
  return c;
}

FabricMessage msg(MsgKind k, NodeId src, NodeId dst, Cycles issue) {
  FabricMessage m;
  m.kind = k;
  m.src = src;
  m.dst = dst;
  m.issue_time = issue;
  if (m.data_bearing()) m.payload.assign(64, 0);
  return m;
}

}  // namespace

TEST_CASE("route: examples") {
  auto t = line();
  CHECK(t.route(2, 2).empty());
  CHECK(t.route(0, 2).size() == 2);
  CHECK(t.hops(0, 2) == 2);
  CHECK(t.route_latency(0, 2) == 300);
  CHECK_THROWS_AS(t.route(0, 9), TopologyError);

  auto broken = parse_topology("node 0 host\nnode 1 switch\nnode 2 endpoint\nedge 0 1 10 8\n");
  try {
    broken.finalize();
    FAIL("expected a disconnected-topology error");
  } catch (const TopologyError& e) {
    const std::string what = e.what();
    CHECK(what.find('0') != std::string::npos);
    CHECK(what.find('2') != std::string::npos);
  }
}

TEST_CASE("route: ties break towards the smallest node sequence") {
  auto t = parse_topology(R"(node 0 host
node 4 switch
node 3 switch
node 7 endpoint
edge 0 4 10 8
edge 0 3 10 8
edge 4 7 10 8
edge 3 7 10 8
)");
  t.finalize();
  const auto r = t.route(0, 7);
  REQUIRE(r.size() == 2);
  const auto& first = t.edges()[r[0]];
  CHECK((first.a == 3 || first.b == 3));
}

TEST_CASE("topology: text round trip and builtin shapes") {
  auto t = line();
  auto again = parse_topology(print_topology(t));
  again.finalize();
  CHECK(again.nodes().size() == t.nodes().size());
  CHECK(again.edges().size() == t.edges().size());
  CHECK(again.route_latency(0, 2) == 300);

  auto two = builtin_topology("two-endpoint");
  two.finalize();
  CHECK(two.endpoints() == std::vector<NodeId>{2, 3});
  CHECK(two.switches() == std::vector<NodeId>{1});
  CHECK_THROWS_AS(builtin_topology("ring"), TopologyError);
  CHECK_THROWS_AS(parse_topology("node 0 mainframe\n"), TopologyError);
}

TEST_CASE("topology: region adoption checks endpoints") {
  auto t = builtin_topology("line");
  CHECK_THROWS_AS(t.adopt_regions({{"x", 0x1000, 0x1000, ir::AddressSpace::remote(5)}}), TopologyError);
  t.adopt_regions({{"x", 0x1000, 0x1000, ir::AddressSpace::remote(2)}});
  t.finalize();
  CHECK(t.owner_of(0x1800) == 2u);
  CHECK_FALSE(t.owner_of(0x3000).has_value());
}

TEST_CASE("fabric_send: delivery times") {
  auto t = one_hop();
  t.finalize();
  Fabric f(t, nullptr);
  f.send(msg(MsgKind::ReadReq, 0, 2, 1000));
  f.send(msg(MsgKind::ReadResp, 2, 0, 1000));
  f.send(msg(MsgKind::WriteAck, 0, 0, 1000));
  CHECK(f.deliver_time(0, 2, 1000, 0) == 1150);
  CHECK(f.deliver_time(2, 0, 1000, 64) == 1158);
  CHECK(f.deliver_time(0, 0, 1000, 64) == 1000);
  CHECK(f.next_delivery() == 1000u);
}

TEST_CASE("fabric_send: data-bearing messages must carry one line") {
  auto t = one_hop();
  t.finalize();
  Fabric f(t, nullptr);
  auto bad = msg(MsgKind::ReadResp, 2, 0, 0);
  bad.payload.resize(32);
  CHECK_THROWS(f.send(bad));
}

TEST_CASE("fabric_step: ordering") {
  auto t = line();
  Fabric f(t, nullptr);
  CHECK(f.step(1'000'000).empty());

  auto a = msg(MsgKind::WriteAck, 2, 0, 0);
  a.line = 0xA0;
  auto b = msg(MsgKind::WriteAck, 2, 0, 0);
  b.line = 0xB0;
  const auto sa = f.send(a);
  const auto sb = f.send(b);
  CHECK(sa < sb);
  CHECK(f.step(299).empty());
  const auto got = f.step(300);
  REQUIRE(got.size() == 2);
  CHECK(got[0].line == 0xA0);
  CHECK(got[1].line == 0xB0);
  CHECK(got[0].seq < got[1].seq);
}

TEST_CASE("fabric_step: endpoints answer reads with their line") {
  auto t = line();
  auto mem = chase_image();
  Fabric f(t, &mem);
  auto r = msg(MsgKind::ReadReq, 0, 2, 10);
  r.line = 0x10000040;
  f.send(r);
  CHECK(f.step(309).empty());
  CHECK(f.step(310).empty());  // request delivered, response in flight
  const auto got = f.step(10 + 300 + 300 + 8);
  REQUIRE(got.size() == 1);
  CHECK(got[0].kind == MsgKind::ReadResp);
  CHECK(got[0].payload.size() == 64);
  CHECK(got[0].wire_bytes() == 64);
  ir::Value v = 0;
  for (int k = 7; k >= 0; --k) v = (v << 8) | got[0].payload[k];
  CHECK(v == 0x10000080u);
}

TEST_CASE("fabric_step: a busy near core queues submissions FIFO") {
  auto t = line();
  Fabric f(t, nullptr);
  auto submit = [&](ir::SliceId id, Cycles issue, Cycles cycles) {
    SliceJob job;
    job.cycles = cycles;
    job.live_outs = {id};
    auto m = msg(MsgKind::SliceSubmit, 0, 2, issue);
    m.slice = id;
    m.job = f.register_job(job);
    m.values = {1};
    f.send(m);
  };
  submit(0, 0, 1000);   // arrives 301, runs 301..1301
  submit(1, 100, 50);   // arrives 401, waits until 1301
  std::vector<FabricMessage> done;
  for (Cycles now = 0; now < 5000; ++now)
    for (auto& m : f.step(now)) done.push_back(m);
  REQUIRE(done.size() == 2);
  CHECK(done[0].slice == 0);
  CHECK(done[0].issue_time == 1301);
  CHECK(done[1].slice == 1);
  CHECK(done[1].issue_time == 1351);
  CHECK(done[0].wire_bytes() == 64);
  CHECK(f.near_core(2).busy_until == 1351);
}

TEST_CASE("near_execute: examples") {
  auto t = line();
  auto mem = chase_image();
  NearCoreState nc{2, 2.0, 40, 0, {}};
  const ir::Value in[] = {0x10000000};
  auto r = near_execute(chase_code(3), in, mem, nc, t);
  REQUIRE_FALSE(r.error.has_value());
  CHECK(r.cycles == 126);
  CHECK(r.live_outs == std::vector<ir::Value>{0});
  CHECK(r.lines_newest_first == std::vector<ir::Addr>{0x10000080, 0x10000040, 0x10000000});

  auto empty = near_execute(ir::SliceCode{}, {}, mem, nc, t);
  CHECK(empty.cycles == 0);
  CHECK(empty.lines_newest_first.empty());

  auto near = line(150, 50);
  NearCoreState sw{1, 2.0, 40, 0, {}};
  auto at_switch = near_execute(chase_code(3), in, mem, sw, near);
  CHECK(at_switch.cycles == 3 * 2 + 3 * (2 * 50));
}

TEST_CASE("near_execute: unowned lines return an error") {
  auto t = line();
  ir::MemoryImage mem({{"far", 0x10000000, 0x1000, ir::AddressSpace::remote(2)},
                       {"loose", 0x20000000, 0x1000, ir::AddressSpace::remote(2)}});
  NearCoreState nc{2, 2.0, 40, 0, {}};
  const ir::Value in[] = {0x20000000};
  auto r = near_execute(chase_code(1), in, mem, nc, t);
  CHECK(r.error.has_value());
}

TEST_CASE("near_execute: matches the idealized slice executor") {
  auto t = line();
  for (int depth = 1; depth <= 3; ++depth) {
    auto m1 = chase_image();
    auto m2 = chase_image();
    NearCoreState nc{2, 2.0, 40, 0, {}};
    const ir::Value in[] = {0x10000000};
    const auto code = chase_code(depth);
    auto r = near_execute(code, in, m1, nc, t);
    auto o = ir::run_slice(code, in, m2);
    CHECK(r.live_outs == o.live_outs);
    CHECK(r.loads == o.loads);
  }
}

TEST_CASE("message log lines have a fixed field order") {
  auto m = msg(MsgKind::ReadResp, 2, 0, 5);
  m.deliver_time = 313;
  m.seq = 9;
  m.line = 0x40;
  CHECK(format_log_line(m) == "313 9 ReadResp 2 0 5 64 0x40 0");
}
