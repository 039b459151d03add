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

#include "cxlmu/fabric/fabric.hpp"

#include <cmath>
#include <cstdio>

namespace cxlmu::fabric {

std::string_view msg_kind_name(MsgKind k) {
  switch (k) {
    case MsgKind::ReadReq: return "ReadReq";
    case MsgKind::ReadResp: return "ReadResp";
    case MsgKind::WriteReq: return "WriteReq";
    case MsgKind::WriteAck: return "WriteAck";
    case MsgKind::SliceSubmit: return "SliceSubmit";
    case MsgKind::SliceDone: return "SliceDone";
  }
  return "?";
}

std::uint64_t FabricMessage::wire_bytes() const {
  switch (kind) {
    case MsgKind::ReadReq:
    case MsgKind::WriteAck:
      return 0;
    case MsgKind::ReadResp:
    case MsgKind::WriteReq:
      return payload.size();
    case MsgKind::SliceSubmit:
      return 8 * values.size();
    case MsgKind::SliceDone:
      return ir::kLineBytes * ((8 * values.size() + ir::kLineBytes - 1) / ir::kLineBytes);
  }
  return 0;
}

std::string format_log_line(const FabricMessage& m) {
  char buf[192];
  std::snprintf(buf, sizeof buf, "%llu %llu %s %u %u %llu %llu 0x%llx %u",
                static_cast<unsigned long long>(m.deliver_time),
                static_cast<unsigned long long>(m.seq), std::string(msg_kind_name(m.kind)).c_str(),
                m.src, m.dst, static_cast<unsigned long long>(m.issue_time),
                static_cast<unsigned long long>(m.wire_bytes()),
                static_cast<unsigned long long>(m.line), m.slice);
  return buf;
}

Fabric::Fabric(const Topology& topo, const ir::MemoryImage* mem, FabricConfig cfg)
    : topo_(topo), mem_(mem), cfg_(cfg) {
  for (const auto& n : topo_.nodes())
    if (n.kind != NodeKind::HostRC)
      near_[n.id] = NearCoreState{n.id, cfg_.near_cpi, cfg_.near_local_latency, 0, {}};
}

Cycles Fabric::deliver_time(NodeId src, NodeId dst, Cycles issue, std::uint64_t bytes) const {
  if (src == dst) return issue;
  Cycles t = issue + topo_.route_latency(src, dst);
  if (bytes > 0)
    t += static_cast<Cycles>(std::ceil(static_cast<double>(bytes) / topo_.bottleneck_bandwidth(src, dst)));
  return t;
}

std::uint64_t Fabric::send(FabricMessage msg) {
  if (msg.data_bearing() && msg.payload.size() != ir::kLineBytes)
    throw std::logic_error("data-bearing fabric message must carry exactly one 64-byte line");
  msg.seq = next_seq_++;
  msg.deliver_time = deliver_time(msg.src, msg.dst, msg.issue_time, msg.wire_bytes());
  const auto seq = msg.seq;
  queue_.push(std::move(msg));
  return seq;
}

std::uint64_t Fabric::register_job(SliceJob job) {
  jobs_.emplace(next_job_, std::move(job));
  return next_job_++;
}

std::optional<Cycles> Fabric::next_delivery() const {
  if (queue_.empty()) return std::nullopt;
  return queue_.top().deliver_time;
}

NearCoreState& Fabric::near_core(NodeId node) {
  auto it = near_.find(node);
  if (it == near_.end()) throw TopologyError("no near core at node " + std::to_string(node));
  return it->second;
}

std::vector<FabricMessage> Fabric::step(Cycles now) {
  std::vector<FabricMessage> to_host;
  const NodeId host = topo_.host();
  while (!queue_.empty() && queue_.top().deliver_time <= now) {
    FabricMessage m = queue_.top();
    queue_.pop();
    ++counts_[m.kind];
    if (cfg_.keep_log) log_.push_back(m);
    if (m.dst == host)
      to_host.push_back(std::move(m));
    else
      handle_at_node(m);
  }
  return to_host;
}

void Fabric::handle_at_node(const FabricMessage& m) {
  FabricMessage r;
  r.src = m.dst;
  r.dst = m.src;
  r.issue_time = m.deliver_time;
  r.line = m.line;
  switch (m.kind) {
    case MsgKind::ReadReq: {
      r.kind = MsgKind::ReadResp;
      const ir::Line data = mem_ ? mem_->line(m.line) : ir::Line{};
      r.payload.assign(data.begin(), data.end());
      send(std::move(r));
      break;
    }
    case MsgKind::WriteReq:
      r.kind = MsgKind::WriteAck;
      send(std::move(r));
      break;
    case MsgKind::SliceSubmit: {
      auto& nc = near_core(m.dst);
      auto jit = jobs_.find(m.job);
      if (jit == jobs_.end()) throw std::logic_error("slice submit without a registered job");
      SliceJob job = std::move(jit->second);
      jobs_.erase(jit);
      while (!nc.queue.empty() && nc.queue.front().finish <= m.deliver_time) nc.queue.pop_front();
      NearJob nj{m.slice, m.deliver_time, std::max(m.deliver_time, nc.busy_until), 0};
      nj.finish = nj.start + job.cycles;
      nc.busy_until = nj.finish;
      nc.queue.push_back(nj);
      r.kind = MsgKind::SliceDone;
      r.issue_time = nj.finish;
      r.slice = m.slice;
      r.job = m.job;
      r.values = std::move(job.live_outs);
      r.lines = std::move(job.lines);
      if (job.error) r.error = *job.error;
      send(std::move(r));
      break;
    }
    default:
      throw std::logic_error(std::string("unexpected ") + std::string(msg_kind_name(m.kind)) +
                             " at node " + std::to_string(m.dst));
  }
}

}  // namespace cxlmu::fabric
