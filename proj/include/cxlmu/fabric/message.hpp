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

#include <string>
#include <vector>

#include "cxlmu/fabric/topology.hpp"

namespace cxlmu::fabric {

enum class MsgKind : std::uint8_t { ReadReq, ReadResp, WriteReq, WriteAck, SliceSubmit, SliceDone };

std::string_view msg_kind_name(MsgKind k);

/**
 * One request/response on the fabric. Read responses and write requests move
 * exactly one 64-byte line. Slice messages carry register values: a submit
 * carries 8 bytes per live-in, a completion carries its live-outs padded to
 * whole 64-byte flits plus the addresses of the lines the slice touched.
 */
struct FabricMessage {
  MsgKind kind = MsgKind::ReadReq;
  NodeId src = 0;
  NodeId dst = 0;
  Cycles issue_time = 0;
  Cycles deliver_time = 0;
  std::uint64_t seq = 0;

  Addr line = 0;
  std::vector<std::uint8_t> payload;
  ir::SliceId slice = 0;
  std::uint64_t job = 0;  // near-core job handle for slice traffic
  std::vector<ir::Value> values;
  std::vector<Addr> lines;
  std::string error;

  bool data_bearing() const { return kind == MsgKind::ReadResp || kind == MsgKind::WriteReq; }
  std::uint64_t wire_bytes() const;
};

/// Fixed-field log line: deliver seq kind src dst issue bytes line slice.
std::string format_log_line(const FabricMessage& m);

}  // namespace cxlmu::fabric
