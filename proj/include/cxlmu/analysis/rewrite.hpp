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

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "cxlmu/analysis/cost_model.hpp"
#include "cxlmu/analysis/slices.hpp"
#include "cxlmu/fabric/topology.hpp"

namespace cxlmu::analysis {

/// Instructions strictly between a slice's submit and its await.
struct OverlapRegion {
  std::string function;
  std::size_t begin = 0;  // index after the submit
  std::size_t end = 0;    // index of the await
  std::size_t length() const { return end - begin; }
};

struct OffloadedProgram {
  ir::Program program;                     // with submit_slice / await_mailbox
  ir::Program source;                      // labeled program before the rewrite
  std::vector<OffloadSlice> slices;        // rewritten slices
  std::vector<OffloadSlice> inline_slices; // extracted but left on the host
  std::map<SliceId, OverlapRegion> overlap_regions;

  const OffloadSlice* find(SliceId id) const;
  std::vector<ir::SliceCode> codes() const;
};

class RewriteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * Replaces every given slice with submit_slice at its earliest legal point
 * and await_mailbox right before the first consumer. A loop whose host side
 * has nothing left but its control is deleted, and its counter joins the
 * slice's live-outs.
 */
OffloadedProgram rewrite_with_offload(const ir::Program& labeled, std::vector<OffloadSlice> slices);

struct OffloadOptions {
  SliceOptions slicing;
  CostModel cost;
};

/// annotate -> extract -> label -> choose sites -> rewrite the non-host slices.
OffloadedProgram plan_offload(const ir::Program& p, const fabric::Topology& topo,
                              const OffloadOptions& opts = {});

/// Re-runs site choice and the rewrite on an existing labeled source.
OffloadedProgram replan(const ir::Program& labeled, std::vector<OffloadSlice> slices);

/// Validates the structural invariants of an OffloadedProgram; empty when ok.
std::vector<std::string> check_offloaded(const OffloadedProgram& op);

}  // namespace cxlmu::analysis
