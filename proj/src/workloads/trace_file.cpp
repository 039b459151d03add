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

#include "cxlmu/workloads/trace_file.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "cxlmu/ir/validate.hpp"

namespace cxlmu::workloads {

namespace {

std::optional<std::uint64_t> number(std::string_view s) {
  int base = 10;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    s.remove_prefix(2);
    base = 16;
  }
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

}  // namespace

ir::ParseResult load_trace_text(std::string_view text) {
  ir::ParseResult res;
  ir::Function main;
  main.name = "main";
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  bool seen_access = false;
  auto diag = [&](std::string msg) { res.diagnostics.push_back({lineno, std::move(msg)}); };

  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string op;
    if (!(ls >> op)) continue;

    if (op == "region") {
      if (seen_access) {
        diag("region declared after the first access");
        continue;
      }
      auto parsed = ir::parse_program(line);
      if (!parsed.ok()) {
        diag(parsed.diagnostics.front().message);
        continue;
      }
      for (auto& r : parsed.program.regions) res.program.regions.push_back(r);
      continue;
    }
    if (op != "L" && op != "S") {
      diag("expected 'L', 'S' or 'region', found '" + op + "'");
      continue;
    }
    seen_access = true;
    std::string addr_s, size_s, extra;
    if (!(ls >> addr_s >> size_s) || (ls >> extra)) {
      diag("malformed access: expected '" + op + " addr size'");
      continue;
    }
    auto addr = number(addr_s);
    auto size = number(size_s);
    if (!addr || !size) {
      diag("malformed number in access");
      continue;
    }
    if (*size > 64 || !ir::is_valid_access_size(static_cast<std::uint32_t>(*size))) {
      diag("invalid access size " + size_s);
      continue;
    }
    const ir::RegionDecl* region = nullptr;
    for (const auto& r : res.program.regions)
      if (r.contains(*addr, *size)) region = &r;
    if (!region) {
      diag("access to " + addr_s + " is outside every declared region");
      continue;
    }
    if (ir::line_of(*addr) != ir::line_of(*addr + *size - 1)) {
      diag("access at " + addr_s + " straddles a 64-byte line");
      continue;
    }
    ir::Instruction inst;
    inst.id = static_cast<ir::InstId>(main.body.size() + 1);
    inst.line = lineno;
    inst.size = static_cast<std::uint32_t>(*size);
    if (op == "L") {
      inst.op = ir::Opcode::Load;
      inst.dest = 1;
      inst.args = {ir::Operand::imm(static_cast<std::int64_t>(*addr))};
    } else {
      inst.op = ir::Opcode::Store;
      inst.args = {ir::Operand::imm(static_cast<std::int64_t>(*addr)), ir::Operand::imm(0)};
    }
    main.body.push_back(std::move(inst));
  }

  res.program.functions.push_back(std::move(main));
  if (res.ok())
    for (auto& d : ir::validate(res.program)) res.diagnostics.push_back(std::move(d));
  return res;
}

ir::ParseResult load_trace_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) {
    ir::ParseResult res;
    res.diagnostics.push_back({0, "cannot read trace file " + path});
    return res;
  }
  std::ostringstream ss;
  ss << f.rdbuf();
  return load_trace_text(ss.str());
}

}  // namespace cxlmu::workloads
