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

#include "cxlmu/analysis/rewrite.hpp"

namespace cxlmu::analysis {

/// Per-access annotations of op.source followed by one line per slice.
std::string analysis_text(const OffloadedProgram& op);
/// Same content as a JSON document (two-space indent).
std::string analysis_json(const OffloadedProgram& op);

}  // namespace cxlmu::analysis
