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

#include "cxlmu/host/structures.hpp"

#include <map>

namespace cxlmu::host {

std::string CoreConfig::check() const {
  if (rob_capacity == 0) return "rob_capacity must be > 0";
  if (mshr_capacity == 0) return "mshr_capacity must be > 0";
  if (l1_assoc == 0) return "l1_assoc must be > 0";
  if (l1_size == 0 || l1_size % (ir::kLineBytes * l1_assoc) != 0)
    return "l1_size must be a positive multiple of 64 * l1_assoc";
  if (mailbox_depth == 0) return "mailbox_depth must be > 0";
  if (issue_width != 1) return "issue_width must be 1";
  return {};
}

std::string_view state_name(EntryState s) {
  switch (s) {
    case EntryState::Waiting: return "Waiting";
    case EntryState::Ready: return "Ready";
    case EntryState::AwaitingMailbox: return "AwaitingMailbox";
    case EntryState::Done: return "Done";
  }
  return "?";
}

RobEntry& Rob::push(RobEntry e) {
  if (full()) throw SimError("ROB overflow");
  if (!entries_.empty() && e.seq != entries_.back().seq + 1) throw SimError("ROB sequence gap");
  entries_.push_back(std::move(e));
  return entries_.back();
}

RobEntry* Rob::find(std::uint64_t seq) {
  if (entries_.empty() || seq < entries_.front().seq) return nullptr;
  const auto idx = seq - entries_.front().seq;
  return idx < entries_.size() ? &entries_[idx] : nullptr;
}

const RobEntry* Rob::find(std::uint64_t seq) const { return const_cast<Rob*>(this)->find(seq); }

void Mshr::allocate(Addr line, std::uint64_t seq) {
  if (full()) throw SimError("MSHR overflow");
  if (pending(line)) throw SimError("duplicate MSHR allocation");
  outstanding_[line].push_back(seq);
}

void Mshr::coalesce(Addr line, std::uint64_t seq) { outstanding_.at(line).push_back(seq); }

std::vector<std::uint64_t> Mshr::complete(Addr line) {
  auto it = outstanding_.find(line);
  if (it == outstanding_.end()) return {};
  auto waiters = std::move(it->second);
  outstanding_.erase(it);
  return waiters;
}

void AsyncEngine::open(std::uint64_t job, ir::SliceId slice, Cycles submit_cycle) {
  if (!tickets_.emplace(job, Ticket{slice, std::nullopt, submit_cycle}).second)
    throw SimError("duplicate ticket for job " + std::to_string(job));
}

void AsyncEngine::bind_await(std::uint64_t job, std::uint64_t await_seq) {
  auto it = tickets_.find(job);
  if (it == tickets_.end()) throw SimError("await without ticket for job " + std::to_string(job));
  it->second.await_seq = await_seq;
}

const AsyncEngine::Ticket* AsyncEngine::ticket(std::uint64_t job) const {
  auto it = tickets_.find(job);
  return it == tickets_.end() ? nullptr : &it->second;
}

void AsyncEngine::retire(std::uint64_t job) { tickets_.erase(job); }

bool AsyncEngine::offer(MailboxEntry e) {
  if (mailbox_.size() >= depth_) return false;
  mailbox_.push_back(std::move(e));
  return true;
}

void mailbox_resume(AsyncEngine& engine, Rob& rob, L1Cache& l1, const MailboxEntry& done, Cycles now) {
  const auto* t = engine.ticket(done.job);
  if (!t) throw SimError("SliceDone for slice " + std::to_string(done.slice) + " has no ticket");
  if (!t->await_seq) throw SimError("slice " + std::to_string(done.slice) + " resumed before its await");
  RobEntry* e = rob.find(*t->await_seq);
  if (!e || e->state != EntryState::AwaitingMailbox)
    throw SimError("await entry for slice " + std::to_string(done.slice) + " is not parked");

  e->mailbox_values = done.values;
  if (!done.error.empty()) e->fault = done.error;
  e->state = EntryState::Ready;
  e->done_at = now;

  std::map<std::size_t, std::uint32_t> filled;
  for (Addr line : done.lines_newest_first) {
    auto& n = filled[l1.set_of(line)];
    if (n >= l1.associativity()) continue;
    l1.fill(line);
    ++n;
  }
  engine.retire(done.job);
}

}  // namespace cxlmu::host
