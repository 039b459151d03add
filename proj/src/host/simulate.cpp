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

#include "cxlmu/host/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <sstream>

#include "cxlmu/fabric/fabric.hpp"
#include "cxlmu/fabric/near_core.hpp"
#include "cxlmu/ir/interpret.hpp"

namespace cxlmu::host {

namespace {

using ir::Opcode;
using ir::Reg;
using ir::Value;

constexpr std::uint64_t kNone = ~std::uint64_t{0};

Cycles at_least_one(double v) { return std::max<Cycles>(1, static_cast<Cycles>(std::llround(v))); }

struct SliceInfo {
  const ir::SliceCode* code = nullptr;
  analysis::Site site;
  std::uint32_t anchor = 0;
  double est = 0;
};

struct Frame {
  const ir::Function* fn = nullptr;
  const std::map<std::string, std::size_t>* labels = nullptr;
  std::size_t pc = 0;
  std::vector<Value> regs;
  std::vector<bool> assigned;
  std::vector<std::uint64_t> producer;  // seq + 1, 0 when the value is architectural
  std::optional<Reg> ret_dest;
};

struct JobInfo {
  std::vector<Value> outs;
  std::vector<ir::LoadRecord> loads;
  std::size_t record = 0;
};

struct Window {
  std::size_t record = 0;
  std::uint64_t submit_seq = 0;
  std::uint64_t await_seq = kNone;
};

enum class Stall { None, L1Miss, MshrFull, RobFull, Awaiting };

class Core {
 public:
  Core(const ir::Program& prog, std::map<ir::SliceId, SliceInfo> slices, const ir::MemoryImage& mem,
       const fabric::Topology& topo, const analysis::CostModel& cm, const CoreConfig& cc,
       const SimOptions& opts)
      : prog_(prog),
        slices_(std::move(slices)),
        mem_(mem),
        topo_(topo),
        opts_(opts),
        l1_hit_(at_least_one(cm.l1_hit)),
        local_mem_(at_least_one(cm.local_mem)),
        alu_(at_least_one(cm.host_cpi)),
        submit_overhead_(static_cast<Cycles>(std::llround(cm.submit_overhead))),
        fabric_(topo, &mem_, fabric::FabricConfig{cm.near_cpi, at_least_one(cm.local_mem), true}),
        rob_(cc.rob_capacity),
        mshr_(cc.mshr_capacity),
        l1_(cc.l1_size, cc.l1_assoc),
        engine_(cc.mailbox_depth) {
    for (const auto& f : prog_.functions) label_maps_[&f] = f.labels();
    const ir::Function* main = prog_.find("main");
    if (!main) {
      fe_done_ = true;
    } else {
      stack_.push_back(make_frame(*main));
      for (auto [r, v] : opts_.inputs) {
        auto& fr = stack_.back();
        if (r >= fr.regs.size()) grow(fr, r);
        fr.regs[r] = v;
        fr.assigned[r] = true;
      }
    }
    for (auto line : opts_.warm_lines) l1_.fill(ir::line_of(line));
  }

  SimReport run();

 private:
  Frame make_frame(const ir::Function& f) {
    Frame fr;
    fr.fn = &f;
    fr.labels = &label_maps_.at(&f);
    const std::size_t width = f.max_reg() + 1;
    fr.regs.assign(width, 0);
    fr.assigned.assign(width, false);
    fr.producer.assign(width, 0);
    return fr;
  }
  static void grow(Frame& fr, Reg r) {
    fr.regs.resize(r + 1, 0);
    fr.assigned.resize(r + 1, false);
    fr.producer.resize(r + 1, 0);
  }

  bool producer_done(std::uint64_t seq, Cycles now) const {
    const RobEntry* e = rob_.find(seq);
    if (!e) return true;
    return e->state == EntryState::Done || (e->state == EntryState::Ready && e->done_at <= now);
  }

  void do_return(std::optional<Value> rv, std::uint64_t seq);
  bool dispatch(Cycles now);
  bool deliver(Cycles now);
  void fill(Addr line, Cycles now);
  bool mailbox(Cycles now);
  bool commit(Cycles now);
  bool execute(Cycles now);
  void start(RobEntry& e, Cycles now);
  Stall stall_cause() const;
  std::optional<Cycles> next_event(Cycles now) const;
  std::string snapshot() const;
  void charge(Stall s, std::uint64_t cycles);
  void check_bounds();
  void trace(Cycles now, const std::string& what) {
    if (opts_.cycle_trace) rep_.cycle_trace.push_back(std::to_string(now) + " " + what);
  }

  const ir::Program& prog_;
  std::map<ir::SliceId, SliceInfo> slices_;
  ir::MemoryImage mem_;
  const fabric::Topology& topo_;
  SimOptions opts_;
  Cycles l1_hit_, local_mem_, alu_, submit_overhead_;

  fabric::Fabric fabric_;
  Rob rob_;
  Mshr mshr_;
  L1Cache l1_;
  AsyncEngine engine_;

  std::map<const ir::Function*, std::map<std::string, std::size_t>> label_maps_;
  std::vector<Frame> stack_;
  bool fe_done_ = false;
  bool fe_halted_ = false;
  bool trapped_ = false;
  std::uint64_t next_seq_ = 0;
  std::uint64_t dispatched_ = 0;
  std::map<ir::SliceId, std::deque<std::uint64_t>> open_jobs_;
  std::map<std::uint64_t, JobInfo> jobs_;
  std::vector<Window> windows_;

  std::priority_queue<std::pair<Cycles, Addr>, std::vector<std::pair<Cycles, Addr>>, std::greater<>> local_fills_;
  std::deque<MailboxEntry> pending_done_;
  std::map<std::uint32_t, LabelRecord> labels_;
  SimReport rep_;
};

void Core::do_return(std::optional<Value> rv, std::uint64_t seq) {
  const std::optional<Reg> dest = stack_.back().ret_dest;
  if (stack_.size() == 1) {
    const Frame& fr = stack_.back();
    for (Reg r = 0; r < fr.regs.size(); ++r)
      if (fr.assigned[r]) rep_.final_registers[r] = fr.regs[r];
    rep_.return_value = rv;
    stack_.pop_back();
    fe_done_ = true;
    return;
  }
  stack_.pop_back();
  if (dest) {
    Frame& caller = stack_.back();
    caller.regs[*dest] = rv.value_or(0);
    caller.assigned[*dest] = true;
    caller.producer[*dest] = seq == kNone ? 0 : seq + 1;
  }
}

bool Core::dispatch(Cycles now) {
  if (fe_done_ || fe_halted_ || rob_.full()) return false;
  if (stack_.back().pc >= stack_.back().fn->body.size()) {
    do_return(std::nullopt, kNone);
    return true;
  }
  if (++dispatched_ > opts_.step_budget) {
    rep_.status = "budget";
    rep_.message = "step budget exceeded";
    fe_halted_ = true;
    trapped_ = true;
    return true;
  }

  Frame& fr = stack_.back();
  const ir::Instruction& inst = fr.fn->body[fr.pc];
  RobEntry e;
  e.seq = next_seq_++;
  e.inst = &inst;
  for (Reg r : inst.uses())
    if (r < fr.producer.size() && fr.producer[r]) e.producers.push_back(fr.producer[r] - 1);

  auto val = [&](const ir::Operand& o) -> Value {
    return o.is_reg() ? fr.regs[o.as_reg()] : static_cast<Value>(o.value);
  };
  auto set = [&](Frame& f, Reg r, Value v) {
    f.regs[r] = v;
    f.assigned[r] = true;
    f.producer[r] = e.seq + 1;
  };
  auto locate = [&](Addr a) {
    e.addr = a;
    if (const auto* reg = prog_.region_of(a); reg && reg->space.is_remote()) {
      e.remote = true;
      e.owner = reg->space.endpoint;
    }
  };
  auto fault = [&](std::string msg) {
    e.fault = std::move(msg);
    fe_halted_ = true;
  };

  std::size_t next_pc = fr.pc + 1;
  bool moved = false;  // frame stack changed; fr is no longer valid
  switch (inst.op) {
    case Opcode::Const:
    case Opcode::Add:
    case Opcode::Mul:
    case Opcode::Cmp:
      set(fr, *inst.dest, ir::evaluate(inst, val(inst.args[0]), inst.args.size() > 1 ? val(inst.args[1]) : 0));
      break;
    case Opcode::Load: {
      const Addr a = val(inst.args[0]);
      locate(a);
      try {
        e.value = mem_.read(a, inst.size);
        set(fr, *inst.dest, e.value);
      } catch (const ir::MemoryError& err) {
        fault(err.what());
      }
      break;
    }
    case Opcode::Store: {
      const Addr a = val(inst.args[0]);
      locate(a);
      try {
        mem_.write(a, inst.size, val(inst.args[1]));
      } catch (const ir::MemoryError& err) {
        fault(err.what());
      }
      break;
    }
    case Opcode::Branch:
      if (val(inst.args[0]) != 0) next_pc = fr.labels->at(inst.target);
      break;
    case Opcode::Jump:
      next_pc = fr.labels->at(inst.target);
      break;
    case Opcode::Label:
    case Opcode::ProfileLabel:
      break;
    case Opcode::Call: {
      const ir::Function* callee = prog_.find(inst.target);
      if (!callee) {
        fault("call to undefined function " + inst.target);
        break;
      }
      if (stack_.size() >= 10000) {
        fault("call depth exceeded");
        break;
      }
      Frame nf = make_frame(*callee);
      for (std::size_t i = 0; i < callee->params.size() && i < inst.args.size(); ++i) {
        nf.regs[callee->params[i]] = val(inst.args[i]);
        nf.assigned[callee->params[i]] = true;
        nf.producer[callee->params[i]] = e.seq + 1;
      }
      nf.ret_dest = inst.dest;
      fr.pc = next_pc;
      stack_.push_back(std::move(nf));
      moved = true;
      break;
    }
    case Opcode::Ret: {
      std::optional<Value> rv;
      if (!inst.args.empty()) rv = val(inst.args[0]);
      do_return(rv, e.seq);
      moved = true;
      break;
    }
    case Opcode::SubmitSlice: {
      auto it = slices_.find(inst.number);
      if (it == slices_.end() || !it->second.code)
        throw SimError("submit_slice " + std::to_string(inst.number) + " has no slice code");
      const SliceInfo& info = it->second;
      if (info.site.kind == analysis::Site::Kind::Host)
        throw SimError("slice " + std::to_string(inst.number) + " is sited at the host");
      std::vector<Value> ins;
      for (const auto& a : inst.args) ins.push_back(val(a));
      const auto res = fabric::near_execute(*info.code, ins, mem_, fabric_.near_core(info.site.node), topo_,
                                            opts_.step_budget);
      fabric::SliceJob job{res.live_outs, res.lines_newest_first, res.cycles, res.error};
      const auto id = fabric_.register_job(std::move(job));
      e.job = id;
      e.mailbox_values = ins;
      open_jobs_[inst.number].push_back(id);
      SliceRecord rec;
      rec.slice = inst.number;
      rec.site = analysis::to_string(info.site);
      rec.anchor_label = info.anchor;
      rec.est_window = info.est;
      rec.near_cycles = res.cycles;
      rep_.slices.push_back(rec);
      jobs_[id] = {res.live_outs, res.loads, rep_.slices.size() - 1};
      windows_.push_back({rep_.slices.size() - 1, e.seq, kNone});
      engine_.open(id, inst.number, now);
      break;
    }
    case Opcode::AwaitMailbox: {
      auto& q = open_jobs_[inst.number];
      if (q.empty()) throw SimError("await_mailbox " + std::to_string(inst.number) + " without submit");
      const auto id = q.front();
      q.pop_front();
      e.job = id;
      e.state = EntryState::AwaitingMailbox;
      engine_.bind_await(id, e.seq);
      const auto& outs = jobs_.at(id).outs;
      for (std::size_t i = 0; i < inst.outs.size() && i < outs.size(); ++i) {
        if (inst.outs[i] >= fr.regs.size()) grow(fr, inst.outs[i]);
        set(fr, inst.outs[i], outs[i]);
      }
      for (auto& w : windows_)
        if (rep_.slices[w.record].slice == inst.number && w.await_seq == kNone && w.submit_seq < e.seq) {
          w.await_seq = e.seq;
          break;
        }
      break;
    }
  }
  if (!moved && !fe_halted_) fr.pc = next_pc;
  trace(now, "dispatch " + std::to_string(e.seq) + " #" + std::to_string(inst.id) + " " +
                 std::string(ir::opcode_name(inst.op)));
  rob_.push(std::move(e));
  return true;
}

void Core::fill(Addr line, Cycles now) {
  l1_.fill(line);
  for (auto seq : mshr_.complete(line)) {
    RobEntry* e = rob_.find(seq);
    if (!e) throw SimError("fill for a committed load");
    e->waiting_fill = false;
    e->state = EntryState::Ready;
    e->done_at = now;
  }
}

bool Core::deliver(Cycles now) {
  bool any = false;
  for (auto& m : fabric_.step(now)) {
    any = true;
    switch (m.kind) {
      case fabric::MsgKind::ReadResp:
        fill(m.line, now);
        break;
      case fabric::MsgKind::SliceDone:
        pending_done_.push_back({m.slice, m.job, std::move(m.values), std::move(m.lines), std::move(m.error)});
        break;
      default:
        break;
    }
  }
  while (!local_fills_.empty() && local_fills_.top().first <= now) {
    fill(local_fills_.top().second, now);
    local_fills_.pop();
    any = true;
  }
  return any;
}

bool Core::mailbox(Cycles now) {
  bool any = false;
  while (!pending_done_.empty()) {
    const auto job = pending_done_.front().job;
    if (!engine_.offer(pending_done_.front())) break;
    rep_.slices[jobs_.at(job).record].complete_cycle = now;
    pending_done_.pop_front();
    any = true;
  }
  auto& box = engine_.mailbox();
  for (auto it = box.begin(); it != box.end();) {
    const auto* t = engine_.ticket(it->job);
    if (!t) throw SimError("SliceDone for slice " + std::to_string(it->slice) + " has no ticket");
    if (!t->await_seq) {
      ++it;
      continue;
    }
    const auto job = it->job;
    if (it->error.empty() && it->values != jobs_.at(job).outs)
      throw SimError("slice " + std::to_string(it->slice) + " completion disagrees with its functional result");
    mailbox_resume(engine_, rob_, l1_, *it, now);
    auto& rec = rep_.slices[jobs_.at(job).record];
    rec.consume_cycle = now;
    rec.consumed = true;
    trace(now, "resume slice " + std::to_string(it->slice));
    it = box.erase(it);
    any = true;
  }
  return any;
}

bool Core::commit(Cycles now) {
  if (rob_.empty()) return false;
  RobEntry& h = rob_.head();
  if (h.waiting_fill || !(h.state == EntryState::Done || (h.state == EntryState::Ready && h.done_at <= now)))
    return false;
  const ir::Instruction& inst = *h.inst;
  if (h.fault) {
    rep_.status = "trap";
    rep_.message = "#" + std::to_string(inst.id) + ": " + *h.fault;
    trapped_ = true;
    return true;
  }
  switch (inst.op) {
    case Opcode::Load:
      rep_.load_trace.push_back({inst.id, h.value});
      break;
    case Opcode::Store:
      if (h.remote) {
        fabric::FabricMessage m;
        m.kind = fabric::MsgKind::WriteReq;
        m.src = topo_.host();
        m.dst = h.owner;
        m.issue_time = now;
        m.line = ir::line_of(h.addr);
        const auto data = mem_.line(m.line);
        m.payload.assign(data.begin(), data.end());
        fabric_.send(std::move(m));
      }
      break;
    case Opcode::SubmitSlice: {
      const auto& loads = jobs_.at(*h.job).loads;
      rep_.load_trace.insert(rep_.load_trace.end(), loads.begin(), loads.end());
      break;
    }
    case Opcode::ProfileLabel: {
      auto [it, fresh] = labels_.try_emplace(inst.number, LabelRecord{inst.number, 0, now});
      ++it->second.hits;
      break;
    }
    default:
      break;
  }
  for (auto it = windows_.begin(); it != windows_.end();) {
    if (it->await_seq == h.seq) {
      it = windows_.erase(it);
      continue;
    }
    const auto& rec = rep_.slices[it->record];
    if (h.seq > it->submit_seq && (it->await_seq == kNone || h.seq < it->await_seq) &&
        (!rec.consumed || now <= rec.consume_cycle))
      ++rep_.slices[it->record].retired_in_window;
    ++it;
  }
  ++rep_.instructions_retired;
  trace(now, "commit " + std::to_string(h.seq) + " #" + std::to_string(inst.id));
  rob_.pop();
  return true;
}

void Core::start(RobEntry& e, Cycles now) {
  const ir::Instruction& inst = *e.inst;
  e.state = EntryState::Ready;
  switch (inst.op) {
    case Opcode::Load: {
      if (e.fault) {
        e.done_at = now + 1;
        break;
      }
      const Addr line = ir::line_of(e.addr);
      if (l1_.lookup(line)) {
        ++rep_.l1_hits;
        e.mshr_blocked = false;
        e.done_at = now + l1_hit_;
        break;
      }
      if (mshr_.pending(line)) {
        mshr_.coalesce(line, e.seq);
      } else if (mshr_.full()) {
        e.mshr_blocked = true;
        e.state = EntryState::Waiting;
        break;
      } else {
        mshr_.allocate(line, e.seq);
        if (e.remote) {
          fabric::FabricMessage m;
          m.kind = fabric::MsgKind::ReadReq;
          m.src = topo_.host();
          m.dst = e.owner;
          m.issue_time = now + l1_hit_;
          m.line = line;
          fabric_.send(std::move(m));
        } else {
          local_fills_.push({now + l1_hit_ + local_mem_, line});
        }
      }
      ++rep_.l1_misses;
      e.mshr_blocked = false;
      e.waiting_fill = true;
      e.state = EntryState::Waiting;
      break;
    }
    case Opcode::Store:
      e.done_at = now + l1_hit_;
      break;
    case Opcode::Const:
    case Opcode::Add:
    case Opcode::Mul:
    case Opcode::Cmp:
      e.done_at = now + alu_;
      break;
    case Opcode::SubmitSlice: {
      const SliceInfo& info = slices_.at(inst.number);
      fabric::FabricMessage m;
      m.kind = fabric::MsgKind::SliceSubmit;
      m.src = topo_.host();
      m.dst = info.site.node;
      m.issue_time = now + submit_overhead_;
      m.slice = inst.number;
      m.job = *e.job;
      m.values = e.mailbox_values;
      fabric_.send(std::move(m));
      rep_.slices[jobs_.at(*e.job).record].submit_cycle = now;
      e.done_at = now + 1;
      break;
    }
    default:
      e.done_at = now + 1;
      break;
  }
}

bool Core::execute(Cycles now) {
  bool any = false;
  for (auto& e : rob_.entries()) {
    if (e.state != EntryState::Waiting || e.waiting_fill) continue;
    if (!std::all_of(e.producers.begin(), e.producers.end(),
                     [&](std::uint64_t p) { return producer_done(p, now); }))
      continue;
    const bool was_blocked = e.mshr_blocked;
    start(e, now);
    if (!(was_blocked && e.mshr_blocked)) any = true;
  }
  return any;
}

Stall Core::stall_cause() const {
  if (rob_.empty()) return Stall::None;
  const RobEntry& h = rob_.head();
  const bool blocked = std::any_of(rob_.entries().begin(), rob_.entries().end(),
                                   [](const RobEntry& e) { return e.mshr_blocked; });
  if (h.state == EntryState::AwaitingMailbox) return rob_.full() ? Stall::RobFull : Stall::Awaiting;
  if (h.waiting_fill) return blocked ? Stall::MshrFull : Stall::L1Miss;
  if (h.mshr_blocked) return Stall::MshrFull;
  if (rob_.full()) return Stall::RobFull;
  return Stall::None;
}

void Core::charge(Stall s, std::uint64_t cycles) {
  switch (s) {
    case Stall::L1Miss: rep_.stalls.l1_miss += cycles; break;
    case Stall::MshrFull: rep_.stalls.mshr_full += cycles; break;
    case Stall::RobFull: rep_.stalls.rob_full += cycles; break;
    case Stall::Awaiting: rep_.stalls.awaiting_mailbox += cycles; break;
    case Stall::None: break;
  }
}

std::optional<Cycles> Core::next_event(Cycles now) const {
  std::optional<Cycles> best;
  auto consider = [&](Cycles t) {
    if (t > now && (!best || t < *best)) best = t;
  };
  if (auto t = fabric_.next_delivery()) consider(std::max(*t, now + 1));
  if (!local_fills_.empty()) consider(std::max(local_fills_.top().first, now + 1));
  if (!pending_done_.empty()) consider(now + 1);
  for (const auto& e : rob_.entries())
    if (e.state == EntryState::Ready) consider(std::max(e.done_at, now + 1));
  return best;
}

std::string Core::snapshot() const {
  std::ostringstream os;
  os << "deadlock: no pending events; ROB (" << rob_.size() << "/" << rob_.capacity() << "):";
  std::size_t shown = 0;
  for (const auto& e : rob_.entries()) {
    if (shown++ == 16) {
      os << " ...";
      break;
    }
    os << " [" << e.seq << " #" << e.inst->id << " " << ir::opcode_name(e.inst->op) << " "
       << state_name(e.state) << (e.waiting_fill ? " fill" : "") << (e.mshr_blocked ? " mshr" : "") << "]";
  }
  return os.str();
}

void Core::check_bounds() {
  if (rob_.size() > rob_.capacity()) throw SimError("ROB occupancy exceeds capacity");
  if (mshr_.size() > mshr_.capacity()) throw SimError("MSHR occupancy exceeds capacity");
  rep_.max_rob_occupancy = std::max<std::uint64_t>(rep_.max_rob_occupancy, rob_.size());
  rep_.max_mshr_occupancy = std::max<std::uint64_t>(rep_.max_mshr_occupancy, mshr_.size());
}

SimReport Core::run() {
  Cycles now = 0;
  if (fe_done_) {
    rep_.total_cycles = 0;
  } else {
    while (true) {
      bool progress = deliver(now);
      progress |= mailbox(now);
      const bool committed = commit(now);
      progress |= committed;
      if (trapped_) {
        rep_.total_cycles = now + 1;
        break;
      }
      const Stall cause = committed ? Stall::None : stall_cause();
      progress |= execute(now);
      progress |= dispatch(now);
      check_bounds();
      if (trapped_ && rob_.empty()) {
        rep_.total_cycles = now + 1;
        break;
      }
      if (fe_done_ && rob_.empty()) {
        rep_.total_cycles = now + 1;
        break;
      }
      charge(cause, 1);
      if (progress) {
        ++now;
        continue;
      }
      const auto next = next_event(now);
      if (!next) throw SimError(snapshot());
      charge(cause, *next - now - 1);
      now = *next;
    }
  }

  while (auto t = fabric_.next_delivery()) fabric_.step(*t);

  for (const auto& m : fabric_.log()) {
    if (m.data_bearing()) {
      ++rep_.data_messages;
      if (m.payload.size() != ir::kLineBytes) ++rep_.payload_violations;
    }
    ++rep_.message_pairs[std::string(fabric::msg_kind_name(m.kind)) + " " + std::to_string(m.src) + "->" +
                         std::to_string(m.dst)];
    if (opts_.message_log) rep_.message_log.push_back(fabric::format_log_line(m));
  }
  for (const auto& [k, n] : fabric_.delivered_counts())
    rep_.fabric_messages[std::string(fabric::msg_kind_name(k))] = n;
  for (const auto& [id, l] : labels_) rep_.labels.push_back(l);
  rep_.mode = opts_.mode;
  rep_.workload_digest = opts_.workload_digest;
  rep_.seed = opts_.seed;
  return std::move(rep_);
}

void check_setup(const ir::Program& p, const fabric::Topology& topo, const analysis::CostModel& cm,
                 const CoreConfig& cc) {
  if (auto err = cc.check(); !err.empty()) throw SimError("core config: " + err);
  if (auto err = cm.check(); !err.empty()) throw SimError("cost model: " + err);
  for (const auto& r : p.regions) {
    if (!r.space.is_remote()) continue;
    const auto first = topo.owner_of(r.base);
    const auto last = topo.owner_of(r.base + r.length - 1);
    if (!first || !last || *first != r.space.endpoint || *last != r.space.endpoint)
      throw SimError("remote region " + r.name + " is not owned by endpoint " + std::to_string(r.space.endpoint));
  }
}

void verify_against(const SimReport& rep, const ir::Program& original, const ir::MemoryImage& mem,
                    const SimOptions& opts, const std::vector<ir::SliceCode>* codes) {
  ir::InterpretOptions io;
  io.step_budget = opts.step_budget;
  io.slices = codes;
  const auto oracle = ir::interpret(original, mem, opts.inputs, io);
  const auto got = ir::loads_by_instruction(rep.load_trace);
  const auto want = ir::loads_by_instruction(oracle.load_trace);
  if (got != want) {
    std::set<ir::InstId> ids;
    for (const auto& [id, _] : got) ids.insert(id);
    for (const auto& [id, _] : want) ids.insert(id);
    for (auto id : ids) {
      const auto g = got.count(id) ? got.at(id) : std::vector<Value>{};
      const auto w = want.count(id) ? want.at(id) : std::vector<Value>{};
      if (g == w) continue;
      std::size_t k = 0;
      while (k < g.size() && k < w.size() && g[k] == w[k]) ++k;
      std::ostringstream os;
      os << "oracle mismatch at load #" << id << " occurrence " << k << ": simulated "
         << (k < g.size() ? std::to_string(g[k]) : "<none>") << ", oracle "
         << (k < w.size() ? std::to_string(w[k]) : "<none>");
      throw OracleMismatch(os.str());
    }
  }
  const bool sim_ok = rep.status == "ok";
  if (sim_ok != oracle.ok())
    throw OracleMismatch("oracle mismatch in outcome: simulated " + rep.status + ", oracle " +
                         (oracle.ok() ? "ok" : oracle.message));
  if (sim_ok && (rep.return_value != oracle.return_value || rep.final_registers != oracle.final_registers))
    throw OracleMismatch("oracle mismatch in final registers or return value");
}

}  // namespace

SimReport simulate(const ir::Program& p, const ir::MemoryImage& mem, const fabric::Topology& topo,
                   const analysis::CostModel& cm, const CoreConfig& cc, const SimOptions& opts) {
  check_setup(p, topo, cm, cc);
  Core core(p, {}, mem, topo, cm, cc, opts);
  SimReport rep = core.run();
  if (opts.verify) {
    verify_against(rep, p, mem, opts, nullptr);
    rep.oracle_checked = true;
  }
  return rep;
}

SimReport simulate(const analysis::OffloadedProgram& op, const ir::MemoryImage& mem,
                   const fabric::Topology& topo, const analysis::CostModel& cm, const CoreConfig& cc,
                   const SimOptions& opts) {
  check_setup(op.program, topo, cm, cc);
  const auto codes = op.codes();
  std::map<ir::SliceId, SliceInfo> info;
  for (std::size_t i = 0; i < op.slices.size(); ++i) {
    const auto& s = op.slices[i];
    info[s.id] = {&codes[i], s.site, s.anchor_label, s.est_window};
  }
  Core core(op.program, std::move(info), mem, topo, cm, cc, opts);
  SimReport rep = core.run();
  if (opts.verify) {
    verify_against(rep, op.source, mem, opts, nullptr);
    rep.oracle_checked = true;
  }
  return rep;
}

}  // namespace cxlmu::host
