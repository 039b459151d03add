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

#include <deque>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cxlmu/fabric/topology.hpp"
#include "cxlmu/host/cache.hpp"
#include "cxlmu/ir/types.hpp"

namespace cxlmu::host {

using fabric::Cycles;

struct CoreConfig {
  std::uint32_t rob_capacity = 64;
  std::uint32_t mshr_capacity = 8;
  std::uint64_t l1_size = 32768;
  std::uint32_t l1_assoc = 8;
  std::uint32_t mailbox_depth = 8;
  std::uint32_t issue_width = 1;

  std::string check() const;
  friend bool operator==(const CoreConfig&, const CoreConfig&) = default;
};

class SimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EntryState : std::uint8_t { Waiting, Ready, AwaitingMailbox, Done };

std::string_view state_name(EntryState s);

struct RobEntry {
  std::uint64_t seq = 0;
  const ir::Instruction* inst = nullptr;
  EntryState state = EntryState::Waiting;
  std::vector<std::uint64_t> producers;  // seqs this entry waits on
  Cycles done_at = 0;                    // meaningful once Ready

  // memory operations
  Addr addr = 0;
  bool remote = false;
  ir::NodeId owner = 0;
  bool mshr_blocked = false;
  bool waiting_fill = false;
  ir::Value value = 0;

  // slices
  std::optional<std::uint64_t> job;
  std::vector<ir::Value> mailbox_values;

  std::optional<std::string> fault;
};

/// In-order window of in-flight instructions; sequence numbers are dense.
class Rob {
 public:
  explicit Rob(std::uint32_t capacity) : capacity_(capacity) {}

  bool full() const { return entries_.size() >= capacity_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  std::uint32_t capacity() const { return capacity_; }

  RobEntry& push(RobEntry e);
  RobEntry& head() { return entries_.front(); }
  const RobEntry& head() const { return entries_.front(); }
  void pop() { entries_.pop_front(); }

  /// nullptr once the entry has committed (or was never dispatched).
  RobEntry* find(std::uint64_t seq);
  const RobEntry* find(std::uint64_t seq) const;

  std::deque<RobEntry>& entries() { return entries_; }
  const std::deque<RobEntry>& entries() const { return entries_; }

 private:
  std::uint32_t capacity_;
  std::deque<RobEntry> entries_;
};

/// Outstanding line misses; a second miss to a pending line waits on it.
class Mshr {
 public:
  explicit Mshr(std::uint32_t capacity) : capacity_(capacity) {}

  bool full() const { return outstanding_.size() >= capacity_; }
  bool pending(Addr line) const { return outstanding_.count(line) != 0; }
  std::size_t size() const { return outstanding_.size(); }
  std::uint32_t capacity() const { return capacity_; }

  void allocate(Addr line, std::uint64_t seq);
  void coalesce(Addr line, std::uint64_t seq);
  /// Retires the line and returns the entries waiting on it.
  std::vector<std::uint64_t> complete(Addr line);

 private:
  std::uint32_t capacity_;
  std::map<Addr, std::vector<std::uint64_t>> outstanding_;
};

struct MailboxEntry {
  ir::SliceId slice = 0;
  std::uint64_t job = 0;
  std::vector<ir::Value> values;
  std::vector<Addr> lines_newest_first;
  std::string error;
};

/// In-core async loading engine: tickets for in-flight slices and the
/// bounded mailbox their completions land in.
class AsyncEngine {
 public:
  struct Ticket {
    ir::SliceId slice = 0;
    std::optional<std::uint64_t> await_seq;
    Cycles submit_cycle = 0;
  };

  explicit AsyncEngine(std::uint32_t depth) : depth_(depth) {}

  void open(std::uint64_t job, ir::SliceId slice, Cycles submit_cycle);
  void bind_await(std::uint64_t job, std::uint64_t await_seq);
  const Ticket* ticket(std::uint64_t job) const;
  void retire(std::uint64_t job);
  std::size_t in_flight() const { return tickets_.size(); }

  /// False when the mailbox is full; the caller retries next cycle.
  bool offer(MailboxEntry e);
  std::deque<MailboxEntry>& mailbox() { return mailbox_; }
  std::uint32_t depth() const { return depth_; }

 private:
  std::uint32_t depth_;
  std::map<std::uint64_t, Ticket> tickets_;
  std::deque<MailboxEntry> mailbox_;
};

/**
 * Delivers a completed slice to its parked await entry. Only that entry and
 * the L1 change: its state flips AwaitingMailbox -> Ready with done_at = now,
 * and the returned lines are filled newest first. A line is dropped once its
 * set is already full of lines from this same completion.
 */
void mailbox_resume(AsyncEngine& engine, Rob& rob, L1Cache& l1, const MailboxEntry& done, Cycles now);

}  // namespace cxlmu::host
