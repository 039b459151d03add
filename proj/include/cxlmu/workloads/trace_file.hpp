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

#include "cxlmu/ir/parser.hpp"

namespace cxlmu::workloads {

/**
 * Replays an address trace as a straight-line main:
 *
 *   # comment
 *   region heap 0x10000000 4096 remote(2)
 *   L 0x10000040 8
 *   S 0x10000080 4
 *
 * Region lines form the header and use the IR syntax. Every access must fall
 * inside a declared region. Diagnostics carry the file line number.
 */
ir::ParseResult load_trace_text(std::string_view text);
/// Reads the file; an unreadable path yields a single diagnostic on line 0.
ir::ParseResult load_trace_file(const std::string& path);

}  // namespace cxlmu::workloads
