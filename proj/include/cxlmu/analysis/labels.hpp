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

#include <vector>

#include "cxlmu/analysis/slices.hpp"

namespace cxlmu::analysis {

/// Entry label of function i has id i; the anchor of slice s has id F + s.id.
std::uint32_t entry_label_id(std::size_t function_index);
std::uint32_t anchor_label_id(const ir::Program& p, SliceId slice);

/**
 * Adds a profile_label at each function entry and right before each slice's
 * first instruction (before the loop label for loop slices), and records the
 * anchor id in the slice. Labels already in place are left alone.
 */
ir::Program insert_profile_labels(const ir::Program& p, std::vector<OffloadSlice>& slices);

}  // namespace cxlmu::analysis
