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

#include <fstream>
#include <set>

#include "common.hpp"
#include "cxlmu/ir/interpret.hpp"
#include "cxlmu/ir/validate.hpp"
#include "cxlmu/workloads/generate.hpp"
#include "cxlmu/workloads/trace_file.hpp"

using namespace cxlmu;
using namespace cxlmu::workloads;

namespace {

std::vector<ir::Value> trace_values(const ir::ArchResult& r) {
  std::vector<ir::Value> v;
  for (const auto& l : r.load_trace) v.push_back(l.value);
  return v;
}

WorkloadSpec spec(Kind k, std::uint64_t n, std::uint64_t seed = 1, std::uint32_t work = 4) {
  WorkloadSpec s;
  s.kind = k;
  s.n = n;
  s.seed = seed;
  s.work_per_element = work;
  return s;
}

// An image where every 8-byte word holds its own address.
ir::MemoryImage self_addressed(const ir::Program& p) {
  ir::MemoryImage m(p.regions);
  for (const auto& r : p.regions)
    for (ir::Addr a = r.base; a < r.base + r.length; a += 8) m.write(a, 8, a);
  return m;
}

constexpr Kind kKinds[] = {Kind::PointerChase, Kind::Strided, Kind::HashProbe, Kind::IndirectGather};

}  // namespace

TEST_CASE("generate: PointerChase n=1") {
  const auto w = generate(spec(Kind::PointerChase, 1));
  const auto r = ir::interpret(w.program, w.memory);
  REQUIRE(r.ok());
  CHECK(r.load_trace.size() == 1);
  CHECK(testing::count_op(w.program, ir::Opcode::Load) == 1);
}

TEST_CASE("generate: PointerChase n=8 seed=42 is a single cycle") {
  const auto w = generate(spec(Kind::PointerChase, 8, 42));
  const auto r = ir::interpret(w.program, w.memory);
  REQUIRE(r.ok());
  const auto v = trace_values(r);
  REQUIRE(v.size() == 8);
  const ir::Addr start = v.back();
  std::set<ir::Addr> lines{ir::line_of(start)};
  for (std::size_t k = 0; k + 1 < v.size(); ++k) lines.insert(ir::line_of(v[k]));
  CHECK(lines.size() == 8);
  CHECK(w.program.regions.front().contains(start, 8));
}

TEST_CASE("generate: Strided n=4 stride=64 walks base + k*64") {
  auto s = spec(Kind::Strided, 4);
  s.stride = 64;
  const auto w = generate(s);
  const auto r = ir::interpret(w.program, self_addressed(w.program));
  REQUIRE(r.ok());
  CHECK(trace_values(r) == std::vector<ir::Value>{kRegionBase, kRegionBase + 64, kRegionBase + 128,
                                                  kRegionBase + 192});
}

TEST_CASE("generate: invalid specs and region sizing") {
  CHECK_THROWS_AS(generate(spec(Kind::Strided, 0)), WorkloadError);
  auto s = spec(Kind::Strided, 4);
  s.stride = 12;
  CHECK_THROWS_AS(generate(s), WorkloadError);
  auto big = spec(Kind::PointerChase, 1024);
  big.region_limit = 4096;
  CHECK_THROWS_AS(generate(big), WorkloadError);
  CHECK(parse_kind("hash_probe") == Kind::HashProbe);
  CHECK_FALSE(parse_kind("bogus").has_value());
}

TEST_CASE("generate: local space produces no remote regions") {
  auto s = spec(Kind::IndirectGather, 16);
  s.space = ir::AddressSpace::local();
  const auto w = generate(s);
  for (const auto& r : w.program.regions) CHECK_FALSE(r.space.is_remote());
}

TEST_CASE("generate: IndirectGather makes two loads per element") {
  const auto w = generate(spec(Kind::IndirectGather, 16, 5, 0));
  const auto r = ir::interpret(w.program, w.memory);
  REQUIRE(r.ok());
  CHECK(r.load_trace.size() == 32);
}

TEST_CASE("load_trace_text: examples") {
  auto empty = load_trace_text("region d 0x1000 0x1000 local\n");
  REQUIRE(empty.ok());
  REQUIRE(empty.program.functions.size() == 1);
  CHECK(empty.program.functions[0].body.empty());

  auto two = load_trace_text("region d 0x1000 0x1000 remote(2)\nL 0x1000 8\nS 0x1040 4\n");
  REQUIRE(two.ok());
  CHECK(two.program.functions[0].body.size() == 2);
  CHECK(two.program.functions[0].body[1].op == ir::Opcode::Store);

  auto outside = load_trace_text("region d 0x1000 0x1000 local\nL 0x9000 8\n");
  REQUIRE_FALSE(outside.ok());
  CHECK(outside.diagnostics[0].line == 2);

  auto bad = load_trace_text("region d 0x1000 0x1000 local\nL 0x1000\nX 1 2\nL 0x1000 3\n");
  REQUIRE(bad.diagnostics.size() == 3);
  CHECK(bad.diagnostics[0].line == 2);
  CHECK(bad.diagnostics[1].line == 3);
  CHECK(bad.diagnostics[2].line == 4);
}

TEST_CASE("load_trace_file: files") {
  const std::string path = "test_workloads_trace.txt";
  {
    std::ofstream f(path);
    f << "# captured\nregion d 0x1000 0x1000 local\nL 0x1000 8\n";
  }
  auto r = load_trace_file(path);
  CHECK(r.ok());
  CHECK(r.program.functions[0].body.size() == 1);
  std::remove(path.c_str());

  auto missing = load_trace_file("no/such/trace.txt");
  REQUIRE_FALSE(missing.ok());
  CHECK(missing.diagnostics[0].line == 0);
}

TEST_CASE("property: determinism") {
  for (auto kind : kKinds)
    for (std::uint64_t seed : {1ull, 99ull, 123456789ull}) {
      const auto a = generate(spec(kind, 50, seed));
      const auto b = generate(spec(kind, 50, seed));
      CHECK(ir::print_program(a.program) == ir::print_program(b.program));
      CHECK(ir::print_memory_image(a.memory) == ir::print_memory_image(b.memory));
    }
}

TEST_CASE("property: generated programs validate and terminate within 100n steps") {
  for (auto kind : kKinds)
    for (std::uint64_t n : {1ull, 2ull, 17ull, 200ull})
      for (std::uint32_t work : {0u, 4u, 16u}) {
        const auto w = generate(spec(kind, n, n * 7 + work, work));
        CHECK(ir::validate(w.program).empty());
        ir::InterpretOptions o;
        o.step_budget = 100 * n;
        const auto r = ir::interpret(w.program, w.memory, {}, o);
        CHECK(r.ok());
      }
}

TEST_CASE("property: pointer chase never repeats a line before step n") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const std::uint64_t n = 5 + seed * 3;
    const auto w = generate(spec(Kind::PointerChase, n, seed, 0));
    const auto v = trace_values(ir::interpret(w.program, w.memory));
    REQUIRE(v.size() == n);
    std::set<ir::Addr> lines;
    for (std::size_t k = 0; k + 1 < v.size(); ++k) lines.insert(ir::line_of(v[k]));
    CHECK(lines.size() == n - 1);
    CHECK(lines.count(ir::line_of(v.back())) == 0);
  }
}

TEST_CASE("property: strided addresses form an arithmetic progression") {
  for (std::uint64_t stride : {8ull, 24ull, 64ull, 200ull, 4096ull}) {
    auto s = spec(Kind::Strided, 13, 1, 1);
    s.stride = stride;
    const auto w = generate(s);
    const auto v = trace_values(ir::interpret(w.program, self_addressed(w.program)));
    REQUIRE(v.size() == 13);
    for (std::size_t k = 0; k < v.size(); ++k) CHECK(v[k] == kRegionBase + k * stride);
  }
}
