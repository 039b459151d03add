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

#include <stdexcept>
#include <string>
#include <vector>

#include "cxlmu/analysis/slices.hpp"
#include "cxlmu/fabric/topology.hpp"

namespace cxlmu::analysis {

/// Cycle costs used to predict a slice's window. All fields must be > 0 and
/// the near core may not be faster than the host.
struct CostModel {
  double submit_overhead = 20;
  double hop_latency = 150;
  double line_transfer = 8;
  double near_cpi = 2;
  double host_cpi = 1;
  double l1_hit = 4;
  double local_mem = 40;

  /// Empty when valid, otherwise a message naming the offending field.
  std::string check() const;
  friend bool operator==(const CostModel&, const CostModel&) = default;
};

class CostError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Lines needed to carry the live-outs back: ceil(8 * |live_outs| / 64).
std::uint64_t result_lines(const OffloadSlice& s);

/**
 * Predicted cycles from submit until the results sit in the mailbox:
 *
 *   submit_overhead
 *   + 2 * hops(host, site) * hop_latency
 *   + trips * |body| * cpi(site)
 *   + result_lines * line_transfer
 *   + trips * sum over body loads of access(site, owner)
 *
 * cpi is host_cpi at the host and near_cpi elsewhere. access is local_mem when
 * the site is the owning endpoint, otherwise 2 * hops(site, owner) * hop_latency.
 * trips is 1 for straight-line slices. Throws CostError for a site that is not
 * a node of the right kind in `topo`.
 */
double estimate_window(const OffloadSlice& s, const CostModel& cm, const fabric::Topology& topo,
                       const Site& site);

/// Host, every switch, and every endpoint the slice touches.
std::vector<Site> candidate_sites(const OffloadSlice& s, const fabric::Topology& topo);

/// argmin of estimate_window; ties prefer Endpoint, then Switch, then Host,
/// then the lower node id.
Site choose_site(const OffloadSlice& s, const CostModel& cm, const fabric::Topology& topo);

}  // namespace cxlmu::analysis
