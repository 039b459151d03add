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

#pragma once

#include <string>
#include <string_view>

#include "cxlmu/fabric/topology.hpp"
#include "cxlmu/ir/parser.hpp"
#include "doctest.h"

namespace cxlmu::testing {

inline ir::Program parse_ok(std::string_view text) {
  auto r = ir::parse_program(text);
  if (!r.ok()) FAIL("parse failed at line " << r.diagnostics[0].line << ": " << r.diagnostics[0].message);
  return r.program;
}

/// Builtin topology with the program's regions adopted, ready to use.
inline fabric::Topology topology_for(const ir::Program& p, std::string_view name = "line",
                                     const fabric::BuiltinParams& params = {}) {
  auto t = fabric::builtin_topology(name, params);
  t.adopt_regions(p.regions);
  t.finalize();
  return t;
}

inline std::size_t count_op(const ir::Program& p, ir::Opcode op) {
  std::size_t n = 0;
  for (const auto& f : p.functions)
    for (const auto& i : f.body)
      if (i.op == op) ++n;
  return n;
}

/// Three-line remote chain A -> B -> C -> 0 at 0x10000000.
inline constexpr const char* kChase3 = R"(region far 0x10000000 0x1000 remote(2)
fn main() {
  r1 = const 0x10000000
  r1 = load 8 [r1]
  r1 = load 8 [r1]
  r1 = load 8 [r1]
  ret r1
}
)";

}  // namespace cxlmu::testing
