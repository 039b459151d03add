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

#include "cxlmu/adaptive/runtime.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include <json.hpp>

namespace cxlmu::adaptive {

using analysis::Site;

ProfileStore record(ProfileStore ps, const host::SimReport& report) {
  auto ema = [&](double old, double x) { return ps.alpha * x + (1 - ps.alpha) * old; };
  for (const auto& l : report.labels) {
    if (l.hits == 0) continue;
    ps.labels[l.id].hits += l.hits;
  }
  std::set<ir::SliceId> seen;
  for (const auto& rec : report.slices) {
    if (!rec.consumed || !seen.insert(rec.slice).second) continue;
    const auto m = host::measure_window(report, rec.slice);
    auto& sp = ps.slices[rec.slice];
    sp.measured = sp.observations == 0 ? m.window : ema(sp.measured, m.window);
    ++sp.observations;
    sp.estimated = rec.est_window;
    if (sp.sites.empty() || sp.sites.back() != rec.site) sp.sites.push_back(rec.site);
    auto& lp = ps.labels[rec.anchor_label];
    lp.window = lp.window ? ema(*lp.window, m.window) : m.window;
    lp.last_utilization = m.utilization;
  }
  return ps;
}

analysis::CostModel update_cost_model(const ProfileStore& ps, const analysis::CostModel& cm) {
  double sum = 0;
  std::size_t n = 0;
  for (const auto& [id, sp] : ps.slices) {
    if (sp.observations == 0 || !(sp.estimated > 0)) continue;
    sum += sp.measured / sp.estimated;
    ++n;
  }
  if (n == 0) return cm;
  const double ratio = std::clamp(sum / static_cast<double>(n), 0.25, 4.0);
  analysis::CostModel out = cm;
  out.hop_latency *= ratio;
  out.near_cpi = std::max(out.near_cpi * ratio, out.host_cpi);
  return out;
}

std::string format_decision(const AdaptDecision& d) {
  char buf[64];
  std::string out = std::to_string(d.round) + ", " + std::to_string(d.slice) + ", " + d.old_site + ", " +
                    d.new_site + ", ";
  std::snprintf(buf, sizeof buf, "%.1f, %.1f", d.est, d.measured);
  return out + buf;
}

analysis::OffloadedProgram adapt(const analysis::OffloadedProgram& op, const ProfileStore& ps,
                                 const analysis::CostModel& cm, const fabric::Topology& topo,
                                 std::vector<AdaptDecision>* log, std::size_t round) {
  if (op.slices.empty() && op.inline_slices.empty()) return op;
  std::vector<analysis::OffloadSlice> all;
  for (const auto& s : op.slices) all.push_back(s);
  for (const auto& s : op.inline_slices) all.push_back(s);
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.id < b.id; });

  for (auto& s : all) {
    const std::string old_site = analysis::to_string(s.site);
    const bool offloaded = s.site.kind != Site::Kind::Host;
    auto prof = ps.slices.find(s.id);
    const double measured = prof != ps.slices.end() ? prof->second.measured : 0.0;

    Site next = analysis::choose_site(s, cm, topo);
    const double host_cost = analysis::estimate_window(s, cm, topo, Site::host());
    if (offloaded && prof != ps.slices.end() && prof->second.observations > 0 && measured > host_cost)
      next = Site::host();
    s.site = next;
    s.est_window = analysis::estimate_window(s, cm, topo, next);
    if (log) log->push_back({round, s.id, old_site, analysis::to_string(next), s.est_window, measured});
  }
  return analysis::replan(op.source, std::move(all));
}

namespace {

ir::MemoryImage remap(const ir::MemoryImage& mem, const std::vector<ir::RegionDecl>& regions) {
  ir::MemoryImage out(regions);
  for (const auto& [addr, line] : mem.lines())
    if (out.in_region(addr, ir::kLineBytes)) out.set_line(addr, line);
  return out;
}

}  // namespace

AdaptiveRun run_adaptive(const ir::Program& p, const ir::MemoryImage& mem, const fabric::Topology& topo,
                         const analysis::CostModel& hardware, const analysis::CostModel& belief,
                         const host::CoreConfig& cc, const AdaptiveOptions& opts,
                         const host::SimOptions& sim) {
  if (opts.rounds == 0) throw std::invalid_argument("rounds must be >= 1");
  AdaptiveRun run;
  run.profile.alpha = opts.alpha;

  ir::Program prog = p;
  ir::MemoryImage image = mem;
  fabric::Topology fabric = topo;
  analysis::CostModel cm = belief;
  std::optional<analysis::OffloadedProgram> op;

  for (std::size_t round = 1; round <= opts.rounds; ++round) {
    if (round - 1 < opts.region_schedule.size() && opts.region_schedule[round - 1] != prog.regions) {
      prog.regions = opts.region_schedule[round - 1];
      image = remap(image, prog.regions);
      fabric.adopt_regions(prog.regions);
      op.reset();
      run.profile.slices.clear();
    }
    if (!op) op = analysis::plan_offload(prog, fabric, {opts.slicing, cm});

    host::SimOptions so = sim;
    so.mode = "adaptive";
    auto report = host::simulate(*op, image, fabric, hardware, cc, so);
    run.programs.push_back(*op);
    run.beliefs.push_back(cm);

    run.profile = record(std::move(run.profile), report);
    run.reports.push_back(std::move(report));
    if (round == opts.rounds) break;
    cm = update_cost_model(run.profile, cm);
    op = adapt(*op, run.profile, cm, fabric, &run.decisions, round);
  }
  return run;
}

std::string profile_json(const ProfileStore& ps) {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["alpha"] = ps.alpha;
  auto& labels = j["labels"] = nlohmann::ordered_json::array();
  for (const auto& [id, l] : ps.labels) {
    nlohmann::ordered_json e{{"id", id}, {"hits", l.hits}, {"last_utilization", l.last_utilization}};
    e["window"] = l.window ? nlohmann::ordered_json(*l.window) : nlohmann::ordered_json(nullptr);
    labels.push_back(std::move(e));
  }
  auto& slices = j["slices"] = nlohmann::ordered_json::array();
  for (const auto& [id, s] : ps.slices)
    slices.push_back(nlohmann::ordered_json{{"slice", id},
                                            {"observations", s.observations},
                                            {"measured", s.measured},
                                            {"estimated", s.estimated},
                                            {"sites", s.sites}});
  return j.dump(2) + "\n";
}

}  // namespace cxlmu::adaptive
