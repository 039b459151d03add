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
#include <optional>
#include <string>
#include <vector>

#include "cxlmu/analysis/rewrite.hpp"
#include "cxlmu/host/report.hpp"
#include "cxlmu/host/simulate.hpp"

namespace cxlmu::adaptive {

struct LabelProfile {
  std::uint64_t hits = 0;
  std::optional<double> window;  // EMA of windows of slices anchored here
  double last_utilization = 0;
};

struct SliceProfile {
  std::uint64_t observations = 0;
  double measured = 0;   // EMA of realized windows
  double estimated = 0;  // estimate recorded with the latest observation
  std::vector<std::string> sites;  // site history, one entry per change
};

struct ProfileStore {
  double alpha = 0.5;
  std::map<std::uint32_t, LabelProfile> labels;
  std::map<ir::SliceId, SliceProfile> slices;
};

/// Folds one report into the store. Labels that were never hit get no entry.
ProfileStore record(ProfileStore ps, const host::SimReport& report);

/// Scales hop_latency and near_cpi by the mean measured/estimated ratio,
/// clamped to [0.25, 4]. Slices with a zero estimate are skipped.
analysis::CostModel update_cost_model(const ProfileStore& ps, const analysis::CostModel& cm);

struct AdaptDecision {
  std::size_t round = 0;
  ir::SliceId slice = 0;
  std::string old_site;
  std::string new_site;
  double est = 0;
  double measured = 0;
};

/// `round, slice, old-site, new-site, est, measured`
std::string format_decision(const AdaptDecision& d);

/**
 * Re-chooses each slice's site under `cm` and rebuilds the rewrite from the
 * labeled source. An offloaded slice goes back inline when its measured
 * window exceeds the estimated cost of running it on the host.
 */
analysis::OffloadedProgram adapt(const analysis::OffloadedProgram& op, const ProfileStore& ps,
                                 const analysis::CostModel& cm, const fabric::Topology& topo,
                                 std::vector<AdaptDecision>* log = nullptr, std::size_t round = 0);

struct AdaptiveOptions {
  std::size_t rounds = 4;
  analysis::SliceOptions slicing;
  double alpha = 0.5;
  /// Optional per-round region maps (index = round - 1). A change triggers a
  /// fresh analysis of the program under the new map.
  std::vector<std::vector<ir::RegionDecl>> region_schedule;
};

struct AdaptiveRun {
  std::vector<host::SimReport> reports;
  std::vector<analysis::OffloadedProgram> programs;  // the program each round ran
  std::vector<analysis::CostModel> beliefs;          // the model each round planned with
  std::vector<AdaptDecision> decisions;
  ProfileStore profile;
};

/**
 * analyze -> simulate -> record -> update_cost_model -> adapt, `rounds` times.
 * `hardware` drives the simulator and never changes; `belief` is what the
 * analyzer plans with and is recalibrated after every round.
 */
AdaptiveRun run_adaptive(const ir::Program& p, const ir::MemoryImage& mem, const fabric::Topology& topo,
                         const analysis::CostModel& hardware, const analysis::CostModel& belief,
                         const host::CoreConfig& cc, const AdaptiveOptions& opts,
                         const host::SimOptions& sim = {});

std::string profile_json(const ProfileStore& ps);

}  // namespace cxlmu::adaptive
