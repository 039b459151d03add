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

#include "cxlmu/ir/parser.hpp"

#include <cctype>
#include <charconv>
#include <optional>
#include <set>

#include "cxlmu/ir/validate.hpp"

namespace cxlmu::ir {
namespace {

enum class Tok { Ident, Number, Punct, Newline, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int line = 0;
};

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1;
  std::size_t i = 0;
  while (i < src.size()) {
    const char c = src[i];
    if (c == '\n') {
      out.push_back({Tok::Newline, "\n", line});
      ++line;
      ++i;
    } else if (c == '#') {
      while (i < src.size() && src[i] != '\n') ++i;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == ';') {
      out.push_back({Tok::Newline, ";", line});
      ++i;
    } else if (c == '-' && i + 1 < src.size() && src[i + 1] == '>') {
      out.push_back({Tok::Punct, "->", line});
      i += 2;
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '-' && i + 1 < src.size() &&
                std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t j = i + 1;
      while (j < src.size() && std::isalnum(static_cast<unsigned char>(src[j]))) ++j;
      out.push_back({Tok::Number, std::string(src.substr(i, j - i)), line});
      i = j;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '.') {
      std::size_t j = i + 1;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) ||
                                src[j] == '_' || src[j] == '.'))
        ++j;
      out.push_back({Tok::Ident, std::string(src.substr(i, j - i)), line});
      i = j;
    } else {
      out.push_back({Tok::Punct, std::string(1, c), line});
      ++i;
    }
  }
  out.push_back({Tok::End, "", line});
  return out;
}

std::optional<std::int64_t> parse_int(const std::string& s) {
  std::string_view v = s;
  bool neg = false;
  if (!v.empty() && v[0] == '-') {
    neg = true;
    v.remove_prefix(1);
  }
  int base = 10;
  if (v.size() > 2 && v[0] == '0' && (v[1] == 'x' || v[1] == 'X')) {
    base = 16;
    v.remove_prefix(2);
  }
  std::uint64_t u = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), u, base);
  if (ec != std::errc{} || ptr != v.data() + v.size()) return std::nullopt;
  return neg ? -static_cast<std::int64_t>(u) : static_cast<std::int64_t>(u);
}

std::optional<Reg> parse_reg(const std::string& s) {
  if (s.size() < 2 || s[0] != 'r') return std::nullopt;
  Reg r = 0;
  auto [ptr, ec] = std::from_chars(s.data() + 1, s.data() + s.size(), r);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return r;
}

struct ParseError {
  int line;
  std::string message;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  ParseResult run() {
    ParseResult res;
    while (peek().kind != Tok::End) {
      if (peek().kind == Tok::Newline) {
        ++pos_;
        continue;
      }
      try {
        const Token& t = peek();
        if (t.kind == Tok::Ident && t.text == "region") {
          res.program.regions.push_back(parse_region());
        } else if (t.kind == Tok::Ident && t.text == "fn") {
          res.program.functions.push_back(parse_function(res.diagnostics));
        } else {
          // Report a stray statement's own error (e.g. an unknown opcode) first.
          const int line = t.line;
          parse_statement();
          throw ParseError{line, "statement outside a function"};
        }
      } catch (const ParseError& e) {
        res.diagnostics.push_back({e.line, e.message});
        skip_line();
      }
    }
    return res;
  }

 private:
  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  const Token& next() {
    const Token& t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  bool at_stmt_end() const {
    const auto& t = peek();
    return t.kind == Tok::Newline || t.kind == Tok::End ||
           (t.kind == Tok::Punct && (t.text == "}" || t.text == "{"));
  }
  void skip_line() {
    while (peek().kind != Tok::Newline && peek().kind != Tok::End) ++pos_;
  }
  void skip_stmt() {
    while (!at_stmt_end()) ++pos_;
  }

  void expect_punct(const char* p) {
    const Token& t = next();
    if (t.kind != Tok::Punct || t.text != p)
      throw ParseError{t.line, std::string("expected '") + p + "', found '" + t.text + "'"};
  }
  bool accept_punct(const char* p) {
    if (peek().kind == Tok::Punct && peek().text == p) {
      ++pos_;
      return true;
    }
    return false;
  }
  std::string expect_ident(const char* what) {
    const Token& t = next();
    if (t.kind != Tok::Ident)
      throw ParseError{t.line, std::string("expected ") + what + ", found '" + t.text + "'"};
    return t.text;
  }
  std::int64_t expect_int(const char* what) {
    const Token& t = next();
    auto v = t.kind == Tok::Number ? parse_int(t.text) : std::nullopt;
    if (!v) throw ParseError{t.line, std::string("malformed operand: expected ") + what};
    return *v;
  }
  Reg expect_reg() {
    const Token& t = next();
    auto r = t.kind == Tok::Ident ? parse_reg(t.text) : std::nullopt;
    if (!r) throw ParseError{t.line, "malformed operand: expected register, found '" + t.text + "'"};
    return *r;
  }
  Operand expect_operand() {
    const Token& t = next();
    if (t.kind == Tok::Ident) {
      if (auto r = parse_reg(t.text)) return Operand::reg(*r);
    } else if (t.kind == Tok::Number) {
      if (auto v = parse_int(t.text)) return Operand::imm(*v);
    }
    throw ParseError{t.line, "malformed operand '" + t.text + "'"};
  }
  std::vector<Reg> reg_list() {
    std::vector<Reg> out;
    expect_punct("(");
    if (!accept_punct(")")) {
      do out.push_back(expect_reg());
      while (accept_punct(","));
      expect_punct(")");
    }
    return out;
  }

  AddressSpace parse_space() {
    const int line = peek().line;
    std::string kw = expect_ident("address space");
    if (kw == "local") return AddressSpace::local();
    if (kw == "remote") {
      bool paren = accept_punct("(");
      auto e = expect_int("endpoint id");
      if (paren) expect_punct(")");
      if (e < 0) throw ParseError{line, "negative endpoint id"};
      return AddressSpace::remote(static_cast<NodeId>(e));
    }
    throw ParseError{line, "unknown address space '" + kw + "'"};
  }

  RegionDecl parse_region() {
    const int line = next().line;
    RegionDecl r;
    r.name = expect_ident("region name");
    r.base = static_cast<Addr>(expect_int("region base"));
    r.length = static_cast<std::uint64_t>(expect_int("region length"));
    r.space = parse_space();
    if (!at_stmt_end()) throw ParseError{line, "trailing tokens after region"};
    if (r.base % kLineBytes != 0 || r.length % kLineBytes != 0)
      throw ParseError{line, "unaligned region '" + r.name + "': base and length must be 64-byte aligned"};
    return r;
  }

  SpaceAnnotation parse_annotation() {
    if (!accept_punct("@")) return SpaceAnnotation::unanalyzed();
    const int line = peek().line;
    std::string kw = expect_ident("annotation");
    if (kw == "local") return SpaceAnnotation::local();
    if (kw == "unknown") return SpaceAnnotation::unknown();
    if (kw == "remote") {
      expect_punct("(");
      auto e = expect_int("endpoint id");
      expect_punct(")");
      return SpaceAnnotation::remote(static_cast<NodeId>(e));
    }
    throw ParseError{line, "unknown annotation '@" + kw + "'"};
  }

  std::uint32_t parse_size() {
    if (peek().kind != Tok::Number) return 8;
    const int line = peek().line;
    auto s = expect_int("access size");
    if (s <= 0 || !is_valid_access_size(static_cast<std::uint32_t>(s)))
      throw ParseError{line, "access size must be a power of two no larger than 64"};
    return static_cast<std::uint32_t>(s);
  }

  Operand parse_address() {
    expect_punct("[");
    Operand a = expect_operand();
    expect_punct("]");
    return a;
  }

  Function parse_function(std::vector<Diagnostic>& diags) {
    next();  // fn
    Function f;
    f.name = expect_ident("function name");
    f.params = reg_list();
    while (peek().kind == Tok::Newline) ++pos_;
    expect_punct("{");
    std::set<std::string> seen_labels;
    for (;;) {
      const Token& t = peek();
      if (t.kind == Tok::End) throw ParseError{t.line, "unterminated function '" + f.name + "'"};
      if (t.kind == Tok::Newline) {
        ++pos_;
        continue;
      }
      if (accept_punct("}")) break;
      try {
        Instruction inst = parse_statement();
        if (inst.op == Opcode::Label && !seen_labels.insert(inst.target).second)
          throw ParseError{inst.line, "duplicate label " + inst.target};
        inst.id = ++next_id_;
        f.body.push_back(std::move(inst));
        if (!at_stmt_end())
          throw ParseError{peek().line, "unexpected '" + peek().text + "'"};
      } catch (const ParseError& e) {
        diags.push_back({e.line, e.message});
        skip_stmt();
      }
    }
    return f;
  }

  Instruction parse_statement() {
    Instruction inst;
    inst.line = peek().line;

    // label
    if (peek().kind == Tok::Ident && peek(1).kind == Tok::Punct && peek(1).text == ":") {
      inst.op = Opcode::Label;
      inst.target = next().text;
      if (parse_reg(inst.target))
        throw ParseError{inst.line, "label name '" + inst.target + "' looks like a register"};
      next();
      return inst;
    }

    // dest =
    if (peek().kind == Tok::Ident && peek(1).kind == Tok::Punct && peek(1).text == "=") {
      inst.dest = expect_reg();
      next();
    }

    const Token& optok = next();
    if (optok.kind != Tok::Ident) throw ParseError{optok.line, "unknown opcode '" + optok.text + "'"};
    const std::string& op = optok.text;
    auto need_dest = [&](bool want) {
      if (want && !inst.dest) throw ParseError{inst.line, op + " needs a destination register"};
      if (!want && inst.dest) throw ParseError{inst.line, op + " does not produce a value"};
    };

    if (op == "const") {
      inst.op = Opcode::Const;
      need_dest(true);
      inst.args.push_back(Operand::imm(expect_int("immediate")));
    } else if (op == "add" || op == "mul") {
      inst.op = op == "add" ? Opcode::Add : Opcode::Mul;
      need_dest(true);
      inst.args.push_back(expect_operand());
      expect_punct(",");
      inst.args.push_back(expect_operand());
    } else if (op == "cmp") {
      inst.op = Opcode::Cmp;
      need_dest(true);
      const std::string p = expect_ident("predicate");
      static const std::pair<const char*, CmpPred> preds[] = {
          {"eq", CmpPred::Eq}, {"ne", CmpPred::Ne}, {"lt", CmpPred::Lt},
          {"le", CmpPred::Le}, {"gt", CmpPred::Gt}, {"ge", CmpPred::Ge}};
      bool found = false;
      for (auto [n, v] : preds)
        if (p == n) {
          inst.pred = v;
          found = true;
        }
      if (!found) throw ParseError{inst.line, "unknown predicate '" + p + "'"};
      inst.args.push_back(expect_operand());
      expect_punct(",");
      inst.args.push_back(expect_operand());
    } else if (op == "load") {
      inst.op = Opcode::Load;
      need_dest(true);
      inst.size = parse_size();
      inst.args.push_back(parse_address());
      inst.space = parse_annotation();
    } else if (op == "store") {
      inst.op = Opcode::Store;
      need_dest(false);
      inst.size = parse_size();
      inst.args.push_back(parse_address());
      expect_punct(",");
      inst.args.push_back(expect_operand());
      inst.space = parse_annotation();
    } else if (op == "branch") {
      inst.op = Opcode::Branch;
      need_dest(false);
      inst.args.push_back(Operand::reg(expect_reg()));
      expect_punct(",");
      inst.target = expect_ident("label");
    } else if (op == "jump") {
      inst.op = Opcode::Jump;
      need_dest(false);
      inst.target = expect_ident("label");
    } else if (op == "call") {
      inst.op = Opcode::Call;
      inst.target = expect_ident("function name");
      expect_punct("(");
      if (!accept_punct(")")) {
        do inst.args.push_back(expect_operand());
        while (accept_punct(","));
        expect_punct(")");
      }
    } else if (op == "ret") {
      inst.op = Opcode::Ret;
      need_dest(false);
      if (!at_stmt_end()) inst.args.push_back(expect_operand());
    } else if (op == "profile_label") {
      inst.op = Opcode::ProfileLabel;
      need_dest(false);
      inst.number = static_cast<std::uint32_t>(expect_int("label id"));
    } else if (op == "submit_slice") {
      inst.op = Opcode::SubmitSlice;
      need_dest(false);
      inst.number = static_cast<std::uint32_t>(expect_int("slice id"));
      for (Reg r : reg_list()) inst.args.push_back(Operand::reg(r));
    } else if (op == "await_mailbox") {
      inst.op = Opcode::AwaitMailbox;
      need_dest(false);
      inst.number = static_cast<std::uint32_t>(expect_int("slice id"));
      if (accept_punct("->")) inst.outs = reg_list();
    } else {
      throw ParseError{optok.line, "unknown opcode '" + op + "'"};
    }
    return inst;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  InstId next_id_ = 0;
};

}  // namespace

ParseResult parse_program(std::string_view text) {
  ParseResult res = Parser(lex(text)).run();
  if (res.ok()) res.diagnostics = validate(res.program);
  return res;
}

}  // namespace cxlmu::ir
