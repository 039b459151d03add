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
#include <queue>
#include <vector>

#include "cxlmu/fabric/message.hpp"
#include "cxlmu/fabric/near_core.hpp"

namespace cxlmu::fabric {

struct FabricConfig {
  double near_cpi = 2.0;
  Cycles near_local_latency = 40;
  bool keep_log = true;
};

/// Precomputed outcome of a slice, handed to the near core at submit time.
struct SliceJob {
  std::vector<ir::Value> live_outs;
  std::vector<Addr> lines;
  Cycles cycles = 0;
  std::optional<std::string> error;
};

/**
 * Discrete-event model of the fabric. Messages sit in one queue ordered by
 * (deliver_time, seq). Endpoints answer reads and writes immediately on
 * arrival; near cores answer slice submissions when their FIFO reaches them.
 * Messages addressed to the host are handed back from step().
 */
class Fabric {
 public:
  Fabric(const Topology& topo, const ir::MemoryImage* mem, FabricConfig cfg = {});

  /// Computes deliver_time, assigns the next sequence number, enqueues.
  std::uint64_t send(FabricMessage msg);
  std::uint64_t register_job(SliceJob job);

  /// Delivers every message with deliver_time <= now, in order. Returns the
  /// ones addressed to the host.
  std::vector<FabricMessage> step(Cycles now);

  std::optional<Cycles> next_delivery() const;
  bool idle() const { return queue_.empty(); }

  Cycles deliver_time(NodeId src, NodeId dst, Cycles issue, std::uint64_t bytes) const;

  const Topology& topology() const { return topo_; }
  const std::vector<FabricMessage>& log() const { return log_; }
  const std::map<MsgKind, std::uint64_t>& delivered_counts() const { return counts_; }
  NearCoreState& near_core(NodeId node);
  const std::map<NodeId, NearCoreState>& near_cores() const { return near_; }

 private:
  struct Later {
    bool operator()(const FabricMessage& a, const FabricMessage& b) const {
      return a.deliver_time != b.deliver_time ? a.deliver_time > b.deliver_time : a.seq > b.seq;
    }
  };

  void handle_at_node(const FabricMessage& m);

  const Topology& topo_;
  const ir::MemoryImage* mem_;
  FabricConfig cfg_;
  std::priority_queue<FabricMessage, std::vector<FabricMessage>, Later> queue_;
  std::uint64_t next_seq_ = 0;
  std::vector<FabricMessage> log_;
  std::map<MsgKind, std::uint64_t> counts_;
  std::map<NodeId, NearCoreState> near_;
  std::map<std::uint64_t, SliceJob> jobs_;
  std::uint64_t next_job_ = 0;
};

}  // namespace cxlmu::fabric
