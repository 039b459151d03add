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

#include "cxlmu/analysis/cost_model.hpp"

#include <cmath>

namespace cxlmu::analysis {

using fabric::NodeKind;

std::string CostModel::check() const {
  const std::pair<const char*, double> fields[] = {
      {"submit_overhead", submit_overhead}, {"hop_latency", hop_latency},
      {"line_transfer", line_transfer},     {"near_cpi", near_cpi},
      {"host_cpi", host_cpi},               {"l1_hit", l1_hit},
      {"local_mem", local_mem}};
  for (const auto& [name, v] : fields)
    if (!(v > 0) || !std::isfinite(v)) return std::string(name) + " must be > 0";
  if (near_cpi < host_cpi) return "near_cpi must be >= host_cpi";
  return {};
}

std::uint64_t result_lines(const OffloadSlice& s) {
  return (8 * s.live_outs.size() + ir::kLineBytes - 1) / ir::kLineBytes;
}

namespace {

ir::NodeId site_node(const Site& site, const fabric::Topology& topo) {
  if (site.kind == Site::Kind::Host) return topo.host();
  const NodeKind want = site.kind == Site::Kind::Switch ? NodeKind::Switch : NodeKind::Endpoint;
  if (!topo.has_node(site.node) || topo.kind(site.node) != want)
    throw CostError("unreachable site " + to_string(site) + ": no such node " +
                    std::to_string(site.node));
  return site.node;
}

}  // namespace

double estimate_window(const OffloadSlice& s, const CostModel& cm, const fabric::Topology& topo,
                       const Site& site) {
  const ir::NodeId node = site_node(site, topo);
  const double trips = static_cast<double>(s.expected_trips);
  const double cpi = site.kind == Site::Kind::Host ? cm.host_cpi : cm.near_cpi;

  double access = 0;
  for (const auto& inst : s.body) {
    if (inst.op != ir::Opcode::Load) continue;
    const ir::NodeId owner = inst.space.endpoint;
    if (!topo.has_node(owner))
      throw CostError("unreachable site: endpoint " + std::to_string(owner) + " not in topology");
    if (site.kind == Site::Kind::Endpoint && owner == node)
      access += cm.local_mem;
    else
      access += 2.0 * static_cast<double>(topo.hops(node, owner)) * cm.hop_latency;
  }

  return cm.submit_overhead + 2.0 * static_cast<double>(topo.hops(topo.host(), node)) * cm.hop_latency +
         trips * static_cast<double>(s.body.size()) * cpi +
         static_cast<double>(result_lines(s)) * cm.line_transfer + trips * access;
}

std::vector<Site> candidate_sites(const OffloadSlice& s, const fabric::Topology& topo) {
  std::vector<Site> out{Site::host()};
  for (auto n : topo.switches()) out.push_back(Site::switch_node(n));
  for (auto n : topo.endpoints())
    if (s.touched_endpoints.count(n)) out.push_back(Site::endpoint(n));
  return out;
}

Site choose_site(const OffloadSlice& s, const CostModel& cm, const fabric::Topology& topo) {
  auto rank = [](const Site& x) {
    return x.kind == Site::Kind::Endpoint ? 0 : x.kind == Site::Kind::Switch ? 1 : 2;
  };
  Site best = Site::host();
  double best_cost = estimate_window(s, cm, topo, best);
  for (const auto& site : candidate_sites(s, topo)) {
    const double c = estimate_window(s, cm, topo, site);
    const bool better = c < best_cost ||
                        (c == best_cost && (rank(site) < rank(best) ||
                                            (rank(site) == rank(best) && site.node < best.node)));
    if (better) {
      best = site;
      best_cost = c;
    }
  }
  return best;
}

}  // namespace cxlmu::analysis
