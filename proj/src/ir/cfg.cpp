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

#include "cxlmu/ir/cfg.hpp"

#include <optional>

namespace cxlmu::ir {

std::vector<std::vector<std::size_t>> successors(const Function& f) {
  const auto labels = f.labels();
  const std::size_t n = f.body.size();
  std::vector<std::vector<std::size_t>> succ(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& inst = f.body[i];
    auto target = [&]() -> std::optional<std::size_t> {
      auto it = labels.find(inst.target);
      if (it == labels.end()) return std::nullopt;
      return it->second;
    };
    switch (inst.op) {
      case Opcode::Ret:
        break;
      case Opcode::Jump:
        if (auto t = target()) succ[i].push_back(*t);
        break;
      case Opcode::Branch:
        if (auto t = target()) succ[i].push_back(*t);
        if (i + 1 < n && (succ[i].empty() || succ[i][0] != i + 1)) succ[i].push_back(i + 1);
        break;
      default:
        if (i + 1 < n) succ[i].push_back(i + 1);
        break;
    }
  }
  return succ;
}

}  // namespace cxlmu::ir
