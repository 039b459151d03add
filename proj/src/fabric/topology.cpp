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

#include "cxlmu/fabric/topology.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <limits>
#include <sstream>

namespace cxlmu::fabric {

std::string_view node_kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::HostRC: return "host";
    case NodeKind::Switch: return "switch";
    case NodeKind::Endpoint: return "endpoint";
  }
  return "?";
}

void Topology::add_node(NodeId id, NodeKind kind) {
  if (has_node(id)) throw TopologyError("duplicate node " + std::to_string(id));
  nodes_.push_back({id, kind});
  finalized_ = false;
}

void Topology::add_edge(NodeId a, NodeId b, Cycles latency, double bandwidth) {
  if (a == b) throw TopologyError("self edge on node " + std::to_string(a));
  if (bandwidth <= 0) throw TopologyError("edge bandwidth must be positive");
  for (const auto& e : edges_)
    if ((e.a == a && e.b == b) || (e.a == b && e.b == a))
      throw TopologyError("duplicate edge " + std::to_string(a) + "-" + std::to_string(b));
  edges_.push_back({a, b, latency, bandwidth});
  finalized_ = false;
}

void Topology::add_ownership(NodeId endpoint, Addr base, std::uint64_t length) {
  owners_.push_back({endpoint, base, length});
}

void Topology::adopt_regions(const std::vector<ir::RegionDecl>& regions) {
  for (const auto& r : regions) {
    if (!r.space.is_remote()) continue;
    const NodeId e = r.space.endpoint;
    if (!has_node(e) || kind(e) != NodeKind::Endpoint)
      throw TopologyError("region " + r.name + " names endpoint " + std::to_string(e) +
                          " which is not an endpoint in the topology");
    bool covered = false;
    for (const auto& o : owners_)
      if (o.endpoint == e && r.base >= o.base && r.base + r.length <= o.base + o.length)
        covered = true;
    if (!covered) owners_.push_back({e, r.base, r.length});
  }
}

bool Topology::has_node(NodeId id) const {
  return std::any_of(nodes_.begin(), nodes_.end(), [&](const Node& n) { return n.id == id; });
}

std::size_t Topology::index(NodeId id) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].id == id) return i;
  throw TopologyError("node " + std::to_string(id) + " absent from topology");
}

NodeKind Topology::kind(NodeId id) const { return nodes_[index(id)].kind; }

NodeId Topology::host() const {
  for (const auto& n : nodes_)
    if (n.kind == NodeKind::HostRC) return n.id;
  throw TopologyError("topology has no host root complex");
}

std::vector<NodeId> Topology::switches() const {
  std::vector<NodeId> out;
  for (const auto& n : nodes_)
    if (n.kind == NodeKind::Switch) out.push_back(n.id);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<NodeId> Topology::endpoints() const {
  std::vector<NodeId> out;
  for (const auto& n : nodes_)
    if (n.kind == NodeKind::Endpoint) out.push_back(n.id);
  std::sort(out.begin(), out.end());
  return out;
}

void Topology::finalize() {
  const std::size_t n = nodes_.size();
  if (std::count_if(nodes_.begin(), nodes_.end(),
                    [](const Node& x) { return x.kind == NodeKind::HostRC; }) != 1)
    throw TopologyError("topology needs exactly one host root complex");
  for (const auto& e : edges_) {
    index(e.a);
    index(e.b);
  }
  for (const auto& o : owners_) {
    if (!has_node(o.endpoint) || kind(o.endpoint) != NodeKind::Endpoint)
      throw TopologyError("owns line names non-endpoint " + std::to_string(o.endpoint));
  }
  for (std::size_t i = 0; i < owners_.size(); ++i)
    for (std::size_t j = 0; j < i; ++j) {
      const auto& a = owners_[i];
      const auto& b = owners_[j];
      if (a.base < b.base + b.length && b.base < a.base + a.length && a.endpoint != b.endpoint)
        throw TopologyError("address range owned by two endpoints");
    }

  // neighbours: (node index, edge index), sorted by node id
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(n);
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    const auto ia = index(edges_[k].a);
    const auto ib = index(edges_[k].b);
    adj[ia].push_back({ib, k});
    adj[ib].push_back({ia, k});
  }
  for (auto& v : adj)
    std::sort(v.begin(), v.end(), [&](auto x, auto y) { return nodes_[x.first].id < nodes_[y.first].id; });

  constexpr auto kInf = std::numeric_limits<std::size_t>::max();
  routes_.assign(n, std::vector<std::vector<std::size_t>>(n));
  for (std::size_t dst = 0; dst < n; ++dst) {
    std::vector<std::size_t> dist(n, kInf);
    dist[dst] = 0;
    std::deque<std::size_t> q{dst};
    while (!q.empty()) {
      auto u = q.front();
      q.pop_front();
      for (auto [v, _] : adj[u])
        if (dist[v] == kInf) {
          dist[v] = dist[u] + 1;
          q.push_back(v);
        }
    }
    for (std::size_t src = 0; src < n; ++src) {
      if (dist[src] == kInf)
        throw TopologyError("topology disconnected: no route between nodes " +
                            std::to_string(nodes_[src].id) + " and " + std::to_string(nodes_[dst].id));
      std::size_t cur = src;
      auto& r = routes_[src][dst];
      while (cur != dst) {
        for (auto [v, k] : adj[cur])
          if (dist[v] + 1 == dist[cur]) {
            r.push_back(k);
            cur = v;
            break;
          }
      }
    }
  }
  finalized_ = true;
}

const std::vector<std::size_t>& Topology::route(NodeId src, NodeId dst) const {
  if (!finalized_) throw TopologyError("topology not finalized");
  return routes_[index(src)][index(dst)];
}

Cycles Topology::route_latency(NodeId src, NodeId dst) const {
  Cycles c = 0;
  for (auto k : route(src, dst)) c += edges_[k].latency;
  return c;
}

double Topology::bottleneck_bandwidth(NodeId src, NodeId dst) const {
  double bw = std::numeric_limits<double>::infinity();
  for (auto k : route(src, dst)) bw = std::min(bw, edges_[k].bandwidth);
  return bw;
}

std::optional<NodeId> Topology::owner_of(Addr a) const {
  for (const auto& o : owners_)
    if (a >= o.base && a - o.base < o.length) return o.endpoint;
  return std::nullopt;
}

void Topology::set_all_latencies(Cycles latency) {
  for (auto& e : edges_) e.latency = latency;
}

Topology parse_topology(std::string_view text) {
  Topology t;
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  auto fail = [&](const std::string& why) {
    throw TopologyError("topology line " + std::to_string(lineno) + ": " + why);
  };
  auto num = [&](const std::string& s) -> std::uint64_t {
    try {
      std::size_t used = 0;
      auto v = std::stoull(s, &used, 0);
      if (used != s.size()) fail("bad number '" + s + "'");
      return v;
    } catch (const std::logic_error&) {
      fail("bad number '" + s + "'");
    }
    return 0;
  };
  while (std::getline(in, raw)) {
    ++lineno;
    if (auto h = raw.find('#'); h != std::string::npos) raw.resize(h);
    std::istringstream ls(raw);
    std::vector<std::string> w;
    for (std::string s; ls >> s;) w.push_back(s);
    if (w.empty()) continue;
    try {
      if (w[0] == "node" && w.size() == 3) {
        NodeKind k;
        if (w[2] == "host") k = NodeKind::HostRC;
        else if (w[2] == "switch") k = NodeKind::Switch;
        else if (w[2] == "endpoint") k = NodeKind::Endpoint;
        else fail("unknown node kind '" + w[2] + "'");
        t.add_node(static_cast<NodeId>(num(w[1])), k);
      } else if (w[0] == "edge" && w.size() == 5) {
        double bw = 0;
        try {
          bw = std::stod(w[4]);
        } catch (const std::logic_error&) {
          fail("bad bandwidth");
        }
        t.add_edge(static_cast<NodeId>(num(w[1])), static_cast<NodeId>(num(w[2])), num(w[3]), bw);
      } else if (w[0] == "owns" && w.size() == 4) {
        t.add_ownership(static_cast<NodeId>(num(w[1])), num(w[2]), num(w[3]));
      } else {
        fail("expected 'node id kind', 'edge a b latency bandwidth' or 'owns endpoint base len'");
      }
    } catch (const TopologyError& e) {
      if (std::string_view(e.what()).starts_with("topology line")) throw;
      fail(e.what());
    }
  }
  return t;
}

std::string print_topology(const Topology& t) {
  std::string out;
  char buf[128];
  for (const auto& n : t.nodes())
    out += "node " + std::to_string(n.id) + " " + std::string(node_kind_name(n.kind)) + "\n";
  for (const auto& e : t.edges()) {
    std::snprintf(buf, sizeof buf, "edge %u %u %llu %g\n", e.a, e.b,
                  static_cast<unsigned long long>(e.latency), e.bandwidth);
    out += buf;
  }
  for (const auto& o : t.ownership()) {
    std::snprintf(buf, sizeof buf, "owns %u 0x%llx 0x%llx\n", o.endpoint,
                  static_cast<unsigned long long>(o.base), static_cast<unsigned long long>(o.length));
    out += buf;
  }
  return out;
}

Topology builtin_topology(std::string_view name, const BuiltinParams& p) {
  Topology t;
  t.add_node(0, NodeKind::HostRC);
  if (name == "direct") {
    t.add_node(2, NodeKind::Endpoint);
    t.add_edge(0, 2, p.host_switch_latency + p.switch_endpoint_latency, p.bandwidth);
  } else if (name == "line") {
    t.add_node(1, NodeKind::Switch);
    t.add_node(2, NodeKind::Endpoint);
    t.add_edge(0, 1, p.host_switch_latency, p.bandwidth);
    t.add_edge(1, 2, p.switch_endpoint_latency, p.bandwidth);
  } else if (name == "two-endpoint") {
    t.add_node(1, NodeKind::Switch);
    t.add_node(2, NodeKind::Endpoint);
    t.add_node(3, NodeKind::Endpoint);
    t.add_edge(0, 1, p.host_switch_latency, p.bandwidth);
    t.add_edge(1, 2, p.switch_endpoint_latency, p.bandwidth);
    t.add_edge(1, 3, p.switch_endpoint_latency, p.bandwidth);
  } else {
    throw TopologyError("unknown builtin topology '" + std::string(name) + "'");
  }
  return t;
}

}  // namespace cxlmu::fabric
