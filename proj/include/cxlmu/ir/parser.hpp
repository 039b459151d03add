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
#include <vector>

#include "cxlmu/ir/types.hpp"

namespace cxlmu::ir {

struct ParseResult {
  Program program;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return diagnostics.empty(); }
};

/**
 * Parses the line-oriented IR text. Statements are separated by newlines or
 * `;`. On success the program has also passed validate(); otherwise every
 * diagnostic carries a source line. Never throws on malformed input.
 *
 * See docs/ir.md for the grammar.
 */
ParseResult parse_program(std::string_view text);

std::string print_instruction(const Instruction& inst);
std::string print_program(const Program& p);

std::string print_space(const AddressSpace& s);
/// "local", "remote(E)", "unknown" or "unanalyzed".
std::string print_annotation(const SpaceAnnotation& a);

}  // namespace cxlmu::ir
