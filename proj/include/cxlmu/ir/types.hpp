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

/**
 * @file types.hpp
 * @brief Core data model of the mini-IR.
 *
 * A Program is a set of functions plus a list of memory regions. Each region
 * is either host-local or owned by a CXL endpoint. Values are 64-bit
 * integers; memory is addressed in bytes and moved in 64-byte lines.
 */

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cxlmu::ir {

using Reg = std::uint32_t;
using InstId = std::uint32_t;
using NodeId = std::uint32_t;
using SliceId = std::uint32_t;
using Addr = std::uint64_t;
using Value = std::uint64_t;

inline constexpr std::uint64_t kLineBytes = 64;

constexpr Addr line_of(Addr a) { return a & ~(kLineBytes - 1); }

/// Where a region lives: host memory or a numbered CXL endpoint.
struct AddressSpace {
  enum class Kind : std::uint8_t { Local, Remote };
  Kind kind = Kind::Local;
  NodeId endpoint = 0;

  static AddressSpace local() { return {}; }
  static AddressSpace remote(NodeId e) { return {Kind::Remote, e}; }
  bool is_remote() const { return kind == Kind::Remote; }
  friend bool operator==(const AddressSpace&, const AddressSpace&) = default;
};

/// Per-access annotation written by the remotability analysis.
struct SpaceAnnotation {
  enum class Kind : std::uint8_t { Unanalyzed, Local, Remote, Unknown };
  Kind kind = Kind::Unanalyzed;
  NodeId endpoint = 0;

  static SpaceAnnotation unanalyzed() { return {}; }
  static SpaceAnnotation local() { return {Kind::Local, 0}; }
  static SpaceAnnotation remote(NodeId e) { return {Kind::Remote, e}; }
  static SpaceAnnotation unknown() { return {Kind::Unknown, 0}; }
  bool is_remote() const { return kind == Kind::Remote; }
  friend bool operator==(const SpaceAnnotation&, const SpaceAnnotation&) = default;
};

enum class Opcode : std::uint8_t {
  Const,
  Add,
  Mul,
  Cmp,
  Load,
  Store,
  Branch,
  Jump,
  Call,
  Ret,
  Label,
  ProfileLabel,
  SubmitSlice,
  AwaitMailbox,
};

enum class CmpPred : std::uint8_t { Eq, Ne, Lt, Le, Gt, Ge };

std::string_view opcode_name(Opcode op);
std::string_view pred_name(CmpPred p);

struct Operand {
  enum class Kind : std::uint8_t { Reg, Imm };
  Kind kind = Kind::Imm;
  std::int64_t value = 0;

  static Operand reg(Reg r) { return {Kind::Reg, static_cast<std::int64_t>(r)}; }
  static Operand imm(std::int64_t v) { return {Kind::Imm, v}; }
  bool is_reg() const { return kind == Kind::Reg; }
  Reg as_reg() const { return static_cast<Reg>(value); }
  friend bool operator==(const Operand&, const Operand&) = default;
};

/**
 * One IR instruction. Field use by opcode:
 *
 *   const          dest, args = [imm]
 *   add/mul        dest, args = [a, b]
 *   cmp            dest, pred, args = [a, b]
 *   load           dest, size, args = [addr], space
 *   store          size, args = [addr, value], space
 *   branch         args = [cond], target (taken when cond != 0)
 *   jump           target
 *   call           dest (optional), target = callee, args
 *   ret            args = [] or [value]
 *   label          target = label name
 *   profile_label  number = label id
 *   submit_slice   number = slice id, args = live-in registers
 *   await_mailbox  number = slice id, outs = live-out registers
 *
 * `id` is unique within a Program and survives code motion, so traces and
 * slices can refer to an instruction after it has been moved or copied.
 */
struct Instruction {
  InstId id = 0;
  Opcode op = Opcode::Const;
  std::optional<Reg> dest;
  std::vector<Operand> args;
  std::vector<Reg> outs;
  CmpPred pred = CmpPred::Eq;
  std::string target;
  std::uint32_t size = 0;
  std::uint32_t number = 0;
  SpaceAnnotation space;
  int line = 0;  // source line, 0 when synthesized

  bool is_memory() const { return op == Opcode::Load || op == Opcode::Store; }
  bool is_control() const {
    return op == Opcode::Branch || op == Opcode::Jump || op == Opcode::Ret;
  }

  /// Registers read by this instruction, in operand order.
  std::vector<Reg> uses() const;
  /// Registers written by this instruction.
  std::vector<Reg> defs() const;
};

struct Function {
  std::string name;
  std::vector<Reg> params;
  std::vector<Instruction> body;

  /// label name -> index of its `label` instruction
  std::map<std::string, std::size_t> labels() const;
  Reg max_reg() const;
};

struct RegionDecl {
  std::string name;
  Addr base = 0;
  std::uint64_t length = 0;
  AddressSpace space;

  bool contains(Addr a, std::uint64_t n = 1) const {
    return a >= base && n <= length && a - base <= length - n;
  }
  friend bool operator==(const RegionDecl&, const RegionDecl&) = default;
};

struct Program {
  std::vector<Function> functions;
  std::vector<RegionDecl> regions;

  const Function* find(std::string_view name) const;
  Function* find(std::string_view name);
  const RegionDecl* region_of(Addr a, std::uint64_t n = 1) const;
  /// Largest instruction id in use; new instructions take ids above it.
  InstId max_id() const;
};

struct Diagnostic {
  int line = 0;
  std::string message;
};

/// Opcode, operands and annotations equal; ids and source lines ignored.
bool structurally_equal(const Instruction& a, const Instruction& b);
bool structurally_equal(const Program& a, const Program& b);

bool is_valid_access_size(std::uint32_t size);

}  // namespace cxlmu::ir
