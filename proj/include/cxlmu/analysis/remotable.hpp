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
#include <set>
#include <string>
#include <vector>

#include "cxlmu/ir/types.hpp"

namespace cxlmu::analysis {

using ir::Addr;
using ir::AddressSpace;
using ir::NodeId;
using ir::Reg;

/// Disjoint address ranges with their owning space, taken from the program.
class RegionMap {
 public:
  struct Entry {
    Addr base = 0;
    std::uint64_t length = 0;
    AddressSpace space;
  };

  static RegionMap from(const ir::Program& p);
  void add(Addr base, std::uint64_t length, AddressSpace space);

  std::optional<AddressSpace> lookup(Addr a) const;
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  std::vector<Entry> entries_;
};

/**
 * Abstract value of a register for pointer-provenance tracking.
 *
 *   Bottom < Const(c) < {Scalar, Ptr(space)} < Top
 *
 * Constants resolve through the RegionMap when used as addresses. Values
 * loaded from a space are treated as pointers into that same space. Adding a
 * region base constant to a non-pointer yields a pointer into that region.
 * `may_remote` is a separate may-fact: some path lets a remote pointer flow
 * into this value.
 */
struct AbsVal {
  enum class Kind : std::uint8_t { Bottom, Const, Scalar, Ptr, Top };
  Kind kind = Kind::Bottom;
  std::int64_t c = 0;
  AddressSpace space;
  bool may_remote = false;

  static AbsVal bottom() { return {}; }
  static AbsVal top() { AbsVal v; v.kind = Kind::Top; return v; }
  static AbsVal scalar() { AbsVal v; v.kind = Kind::Scalar; return v; }
  static AbsVal constant(std::int64_t v) { AbsVal a; a.kind = Kind::Const; a.c = v; return a; }
  static AbsVal ptr(AddressSpace s) { AbsVal a; a.kind = Kind::Ptr; a.space = s; a.may_remote = s.is_remote(); return a; }
  friend bool operator==(const AbsVal&, const AbsVal&) = default;
};

AbsVal join(const AbsVal& a, const AbsVal& b, const RegionMap& rm);

/// Forward analysis: annotates every load/store Local, Remote(e) or Unknown.
/// Intraprocedural; parameters of every function start as Top.
ir::Program mark_remotable(const ir::Program& p, const RegionMap& rm);

struct RemotePropagation {
  ir::Program program;               // re-annotated with call-site facts
  std::set<std::string> functions;   // functions that may receive a remote pointer
};

/**
 * Interprocedural fixpoint: parameters take the join of their call-site
 * arguments, and a function joins the result set when any call site may pass
 * it a remote pointer. Recursion converges through the same iteration.
 */
RemotePropagation propagate_remote_pointers(const ir::Program& p, const RegionMap& rm);

}  // namespace cxlmu::analysis
