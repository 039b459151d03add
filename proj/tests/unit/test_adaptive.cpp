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

#include <cmath>

#include "common.hpp"
#include "cxlmu/adaptive/runtime.hpp"
#include "cxlmu/analysis/labels.hpp"
#include "cxlmu/analysis/remotable.hpp"
#include "cxlmu/analysis/slices.hpp"
#include "cxlmu/ir/validate.hpp"
#include "cxlmu/workloads/generate.hpp"

using namespace cxlmu;
using namespace cxlmu::adaptive;
using analysis::Site;
using testing::parse_ok;
using testing::topology_for;

namespace {

host::SimReport one_slice_report(ir::SliceId id, std::uint64_t window, double est) {
  host::SimReport r;
  host::SliceRecord s;
  s.slice = id;
  s.site = "endpoint(2)";
  s.anchor_label = 1;
  s.est_window = est;
  s.submit_cycle = 1000;
  s.consume_cycle = 1000 + window;
  s.consumed = true;
  r.slices.push_back(s);
  r.labels.push_back({1, 1, 10});
  r.labels.push_back({2, 0, 0});
  return r;
}

ProfileStore store_with(ir::SliceId id, double measured, double estimated) {
  ProfileStore ps;
  auto& sp = ps.slices[id];
  sp.observations = 1;
  sp.measured = measured;
  sp.estimated = estimated;
  return ps;
}

analysis::OffloadedProgram force_offload(const ir::Program& p, Site site) {
  const auto rm = analysis::RegionMap::from(p);
  const auto annotated = analysis::propagate_remote_pointers(analysis::mark_remotable(p, rm), rm).program;
  auto slices = analysis::extract_slices(annotated);
  const auto labeled = analysis::insert_profile_labels(annotated, slices);
  for (auto& s : slices) s.site = site;
  return analysis::rewrite_with_offload(labeled, slices);
}

constexpr const char* kTwoEndpointChain = R"(region a 0x10000000 0x1000 remote(2)
region b 0x20000000 0x1000 remote(3)
fn main() {
  r1 = load 8 [0x10000000]
  r2 = load 8 [0x20000000]
  r3 = add r1, r2
  ret r3
}
)";

ir::MemoryImage two_endpoint_image(const ir::Program& p) {
  ir::MemoryImage m(p.regions);
  m.write(0x10000000, 8, 5);
  m.write(0x20000000, 8, 7);
  return m;
}

}  // namespace

TEST_CASE("record: examples") {
  ProfileStore ps;
  ps = record(ps, one_slice_report(0, 100, 90));
  REQUIRE(ps.slices.count(0));
  CHECK(ps.slices[0].measured == 100);
  CHECK(ps.slices[0].estimated == 90);
  CHECK(*ps.labels[1].window == 100);
  CHECK(ps.labels.count(2) == 0);

  ps = record(ps, one_slice_report(0, 200, 90));
  CHECK(ps.slices[0].measured == 150);
  CHECK(ps.slices[0].observations == 2);
  CHECK(ps.labels[1].hits == 2);
  CHECK(ps.slices[0].sites == std::vector<std::string>{"endpoint(2)"});
}

TEST_CASE("update_cost_model: examples") {
  analysis::CostModel cm;
  CHECK(update_cost_model(store_with(0, 500, 500), cm) == cm);
  CHECK(update_cost_model(ProfileStore{}, cm) == cm);

  const auto doubled = update_cost_model(store_with(0, 800, 400), cm);
  CHECK(doubled.hop_latency == 2 * cm.hop_latency);
  CHECK(doubled.near_cpi == 2 * cm.near_cpi);
  CHECK(doubled.submit_overhead == cm.submit_overhead);
  CHECK(doubled.local_mem == cm.local_mem);

  const auto clamped = update_cost_model(store_with(0, 4000, 400), cm);
  CHECK(clamped.hop_latency == 4 * cm.hop_latency);
  const auto low = update_cost_model(store_with(0, 1, 400), cm);
  CHECK(low.hop_latency == cm.hop_latency / 4);

  CHECK(update_cost_model(store_with(0, 800, 0), cm) == cm);
}

TEST_CASE("adapt: zero slices is the identity") {
  auto p = parse_ok("region d 0x1000 0x1000 local\nfn main() { r1 = load 8 [0x1000]; ret r1 }");
  auto topo = topology_for(p);
  const auto op = analysis::plan_offload(p, topo);
  REQUIRE(op.slices.empty());
  const auto again = adapt(op, {}, {}, topo);
  CHECK(ir::structurally_equal(again.program, op.program));
}

TEST_CASE("adapt: a slice touching two endpoints flips to the switch") {
  auto p = parse_ok(kTwoEndpointChain);
  auto topo = topology_for(p, "two-endpoint");
  const auto op = force_offload(p, Site::endpoint(2));
  const auto mem = two_endpoint_image(p);
  const double host_cost = analysis::estimate_window(op.slices[0], {}, topo, Site::host());
  std::vector<AdaptDecision> log;
  const auto next = adapt(op, store_with(op.slices[0].id, host_cost - 1, host_cost), {}, topo, &log, 1);
  REQUIRE(next.slices.size() == 1);
  CHECK(next.slices[0].site == Site::switch_node(1));
  REQUIRE(log.size() == 1);
  CHECK(log[0].old_site == "endpoint(2)");
  CHECK(log[0].new_site == "switch(1)");
  CHECK(analysis::check_offloaded(next).empty());
  CHECK(host::simulate(next, mem, topo, {}, {}).oracle_checked);

  // The realized window at the far endpoint is worse than staying home.
  const auto r = host::simulate(op, mem, topo, {}, {});
  CHECK(host::measure_window(r, 0).window > host_cost);
  CHECK(adapt(op, record({}, r), {}, topo).slices.empty());
}

TEST_CASE("adapt: a window worse than the host cost reverts the slice") {
  auto p = parse_ok(testing::kChase3);
  auto topo = topology_for(p);
  const auto op = force_offload(p, Site::endpoint(2));
  REQUIRE(op.slices.size() == 1);
  const auto id = op.slices[0].id;
  const double host_cost = analysis::estimate_window(op.slices[0], {}, topo, Site::host());
  const auto next = adapt(op, store_with(id, host_cost + 1, 100), {}, topo);
  CHECK(next.slices.empty());
  REQUIRE(next.inline_slices.size() == 1);
  CHECK(testing::count_op(next.program, ir::Opcode::SubmitSlice) == 0);
  CHECK(ir::validate(next.program).empty());
  ir::MemoryImage m(p.regions);
  m.write(0x10000000, 8, 0x10000040);
  const auto r = host::simulate(next, m, topo, {}, {});
  CHECK(r.oracle_checked);

  const auto kept = adapt(op, store_with(id, host_cost, 100), {}, topo);
  CHECK(kept.slices.size() == 1);
}

TEST_CASE("run_adaptive: examples") {
  workloads::WorkloadSpec s;
  s.n = 128;
  s.work_per_element = 0;
  const auto w = workloads::generate(s);
  const auto topo = topology_for(w.program);

  AdaptiveOptions one;
  one.rounds = 1;
  const auto single = run_adaptive(w.program, w.memory, topo, {}, {}, {}, one);
  CHECK(single.reports.size() == 1);
  CHECK(single.decisions.empty());

  AdaptiveOptions four;
  const auto run = run_adaptive(w.program, w.memory, topo, {}, {}, {}, four);
  REQUIRE(run.reports.size() == 4);
  const auto& last = run.reports.back();
  REQUIRE_FALSE(last.slices.empty());
  for (const auto& rec : last.slices) {
    const double measured = host::measure_window(last, rec.slice).window;
    CHECK(std::abs(rec.est_window - measured) / measured <= 0.10);
  }

  AdaptiveOptions zero;
  zero.rounds = 0;
  CHECK_THROWS(run_adaptive(w.program, w.memory, topo, {}, {}, {}, zero));
}

TEST_CASE("run_adaptive: a mis-estimated model converges") {
  workloads::WorkloadSpec s;
  s.n = 128;
  const auto w = workloads::generate(s);
  const auto topo = topology_for(w.program);
  analysis::CostModel belief;
  belief.hop_latency = 75;
  const auto run = run_adaptive(w.program, w.memory, topo, {}, belief, {}, {});
  auto error = [](const host::SimReport& r) {
    const auto& rec = r.slices.front();
    const double m = host::measure_window(r, rec.slice).window;
    return std::abs(rec.est_window - m) / m;
  };
  REQUIRE_FALSE(run.reports.front().slices.empty());
  CHECK(error(run.reports.back()) < error(run.reports.front()));
  CHECK(error(run.reports.back()) <= 0.10);
}

TEST_CASE("run_adaptive: a region map change re-slices") {
  auto local = parse_ok(R"(region far 0x10000000 0x1000 local
fn main() {
  r1 = const 0x10000000
  r1 = load 8 [r1]
  r1 = load 8 [r1]
  r1 = load 8 [r1]
  ret r1
})");
  ir::MemoryImage m(local.regions);
  m.write(0x10000000, 8, 0x10000040);
  m.write(0x10000040, 8, 0x10000080);
  auto topo = fabric::builtin_topology("line");
  topo.finalize();
  auto remote = local.regions;
  remote[0].space = ir::AddressSpace::remote(2);
  AdaptiveOptions o;
  o.rounds = 3;
  o.region_schedule = {local.regions, remote, remote};
  const auto run = run_adaptive(local, m, topo, {}, {}, {}, o);
  REQUIRE(run.reports.size() == 3);
  CHECK(run.reports[0].slices.empty());
  CHECK_FALSE(run.reports[1].slices.empty());
  CHECK(run.reports[2].return_value == run.reports[0].return_value);
}

TEST_CASE("property: adaptation preserves the load-value trace") {
  for (auto kind : {workloads::Kind::PointerChase, workloads::Kind::Strided, workloads::Kind::HashProbe,
                    workloads::Kind::IndirectGather})
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      workloads::WorkloadSpec s;
      s.kind = kind;
      s.seed = seed;
      s.n = 24;
      s.work_per_element = static_cast<std::uint32_t>(seed);
      const auto w = workloads::generate(s);
      const auto topo = topology_for(w.program);
      analysis::CostModel belief;
      belief.near_cpi = 40;
      AdaptiveOptions o;
      o.rounds = 3;
      const auto run = run_adaptive(w.program, w.memory, topo, {}, belief, {}, o);
      for (std::size_t k = 0; k < run.reports.size(); ++k) {
        CHECK(run.reports[k].oracle_checked);
        CHECK(ir::validate(run.programs[k].program).empty());
        CHECK(analysis::check_offloaded(run.programs[k]).empty());
        CHECK(ir::loads_by_instruction(run.reports[k].load_trace) ==
              ir::loads_by_instruction(run.reports[0].load_trace));
      }
    }
}

TEST_CASE("decision lines and profile json") {
  CHECK(format_decision({2, 0, "endpoint(2)", "switch(1)", 745.0, 760.5}) ==
        "2, 0, endpoint(2), switch(1), 745.0, 760.5");
  const auto ps = record({}, one_slice_report(3, 120, 100));
  const auto j = profile_json(ps);
  CHECK(j.find("\"observations\": 1") != std::string::npos);
  CHECK(j == profile_json(ps));
}
