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

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cxlmu/ir/types.hpp"

namespace cxlmu::fabric {

using ir::Addr;
using ir::NodeId;
using Cycles = std::uint64_t;

struct TopologyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class NodeKind : std::uint8_t { HostRC, Switch, Endpoint };

std::string_view node_kind_name(NodeKind k);

struct Node {
  NodeId id = 0;
  NodeKind kind = NodeKind::Endpoint;
};

struct Edge {
  NodeId a = 0;
  NodeId b = 0;
  Cycles latency = 0;      // per direction
  double bandwidth = 8.0;  // bytes per cycle
};

struct Ownership {
  NodeId endpoint = 0;
  Addr base = 0;
  std::uint64_t length = 0;
};

/**
 * Host / switch / endpoint graph. Call finalize() after construction; it
 * checks the invariants and precomputes every route. Routes are shortest by
 * hop count with ties broken towards the lexicographically smallest node
 * sequence.
 */
class Topology {
 public:
  void add_node(NodeId id, NodeKind kind);
  void add_edge(NodeId a, NodeId b, Cycles latency, double bandwidth);
  void add_ownership(NodeId endpoint, Addr base, std::uint64_t length);
  /// Grants every Remote(e) region to endpoint e unless an ownership entry
  /// already covers it. Throws when e is not an endpoint.
  void adopt_regions(const std::vector<ir::RegionDecl>& regions);
  void finalize();

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Ownership>& ownership() const { return owners_; }

  bool has_node(NodeId id) const;
  NodeKind kind(NodeId id) const;
  NodeId host() const;
  std::vector<NodeId> switches() const;
  std::vector<NodeId> endpoints() const;

  /// Edge indices from src to dst; empty when src == dst.
  const std::vector<std::size_t>& route(NodeId src, NodeId dst) const;
  std::size_t hops(NodeId src, NodeId dst) const { return route(src, dst).size(); }
  Cycles route_latency(NodeId src, NodeId dst) const;
  double bottleneck_bandwidth(NodeId src, NodeId dst) const;

  std::optional<NodeId> owner_of(Addr a) const;

  /// Sets every edge's latency; used by parameter sweeps.
  void set_all_latencies(Cycles latency);

 private:
  std::size_t index(NodeId id) const;

  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<Ownership> owners_;
  std::vector<std::vector<std::vector<std::size_t>>> routes_;  // [src idx][dst idx]
  bool finalized_ = false;
};

/// `node id kind` / `edge a b latency bandwidth` / `owns endpoint base len`.
Topology parse_topology(std::string_view text);
std::string print_topology(const Topology& t);

struct BuiltinParams {
  Cycles host_switch_latency = 150;
  Cycles switch_endpoint_latency = 150;
  double bandwidth = 8.0;
};

/**
 * Named topologies:
 *   direct        host(0) - endpoint(2)
 *   line          host(0) - switch(1) - endpoint(2)
 *   two-endpoint  host(0) - switch(1) - {endpoint(2), endpoint(3)}
 * Returned unfinalized so callers can adopt program regions first.
 */
Topology builtin_topology(std::string_view name, const BuiltinParams& params = {});

}  // namespace cxlmu::fabric
