/*
 * Copyright 2026 the fidelsim authors
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

//
// Two-pass MR32 assembler and the matching disassembler.
//
// Syntax: one statement per line, `;` comments, labels as `name:`.
// Directives: .org ADDR  .word v,...  .byte v,...  .ascii "s"  .asciiz "s"
//             .align N  .global name
// Literals are decimal or 0x hex; immediates may also be labels, or
// hi(label)/lo(label) for the two halves of an address.
// Operands: `OP rd, ra, rb`, `OP rd, ra, imm`, loads/stores `OP rd,
// offset(ra)`, branches `OP ra, rb, target`, `JAL rd, target`,
// `JALR rd, ra`, `MSRW ra`, `MSRR rd`.
//
// Pass 1 fixes every label address, pass 2 encodes; forward references are
// free. The entry point is the `_start` label when defined, otherwise the
// base of the first segment.
//

#ifndef FIDELSIM_ASM_HPP
#define FIDELSIM_ASM_HPP

#include <cctype>
#include <map>
#include <string>
#include <vector>

#include "fidelsim/cpu.hpp"
#include "fidelsim/image.hpp"

namespace fidelsim {

class Assembler {
 public:
  Image assemble(const std::string& source) {
    parse_lines(source);
    pass1();
    pass2();
    finish();
    return std::move(img_);
  }

 private:
  struct Stmt {
    unsigned line = 0;
    std::string label;
    std::string op;  // mnemonic or directive (lower-case), may be empty
    std::vector<std::string> args;
    std::string raw_string;  // for .ascii/.asciiz
  };

  // ----- line parsing --------------------------------------------------------

  void parse_lines(const std::string& source) {
    unsigned lineno = 0;
    size_t pos = 0;
    while (pos <= source.size()) {
      size_t eol = source.find('\n', pos);
      if (eol == std::string::npos) eol = source.size();
      std::string line = source.substr(pos, eol - pos);
      pos = eol + 1;
      ++lineno;
      parse_line(line, lineno);
      if (eol == source.size()) break;
    }
  }

  void parse_line(std::string line, unsigned lineno) {
    // strip comment, respecting string literals
    bool in_str = false;
    for (size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_str = !in_str;
      if (line[i] == ';' && !in_str) {
        line.resize(i);
        break;
      }
    }
    size_t cur = line.find_first_not_of(" \t\r");
    if (cur == std::string::npos) return;

    Stmt st;
    st.line = lineno;

    // optional label
    size_t colon = line.find(':');
    if (colon != std::string::npos) {
      std::string candidate = trim(line.substr(cur, colon - cur));
      if (is_identifier(candidate)) {
        st.label = candidate;
        cur = colon + 1;
        cur = line.find_first_not_of(" \t\r", cur);
      }
    }

    if (cur != std::string::npos && cur < line.size()) {
      size_t op_end = line.find_first_of(" \t", cur);
      st.op = lower(line.substr(cur, op_end == std::string::npos ? std::string::npos
                                                                 : op_end - cur));
      if (op_end != std::string::npos) {
        std::string rest = trim(line.substr(op_end));
        if (st.op == ".ascii" || st.op == ".asciiz") {
          st.raw_string = parse_string_literal(rest, lineno);
        } else {
          split_args(rest, st.args);
        }
      }
    }
    if (!st.label.empty() || !st.op.empty()) stmts_.push_back(std::move(st));
  }

  static std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  }

  static std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  }

  static bool is_identifier(const std::string& s) {
    if (s.empty() || (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_'))
      return false;
    for (char c : s)
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    return true;
  }

  static void split_args(const std::string& rest, std::vector<std::string>& out) {
    size_t pos = 0;
    while (pos < rest.size()) {
      size_t comma = rest.find(',', pos);
      if (comma == std::string::npos) comma = rest.size();
      std::string arg = trim(rest.substr(pos, comma - pos));
      if (!arg.empty()) out.push_back(arg);
      pos = comma + 1;
    }
  }

  std::string parse_string_literal(const std::string& text, unsigned lineno) {
    std::string t = trim(text);
    if (t.size() < 2 || t.front() != '"' || t.back() != '"')
      throw AsmError(lineno, "expected quoted string");
    std::string out;
    for (size_t i = 1; i + 1 < t.size(); ++i) {
      char c = t[i];
      if (c == '\\' && i + 2 < t.size() + 1) {
        char e = t[++i];
        switch (e) {
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          case 'r': out.push_back('\r'); break;
          case '0': out.push_back('\0'); break;
          case '\\': out.push_back('\\'); break;
          case '"': out.push_back('"'); break;
          default: throw AsmError(lineno, std::string("unknown escape \\") + e);
        }
      } else {
        out.push_back(c);
      }
    }
    return out;
  }

  // ----- pass 1: layout and labels -------------------------------------------

  struct Placed {
    const Stmt* stmt;
    uint32_t addr;
    uint32_t pad;  // .align fill
  };

  void pass1() {
    uint32_t loc = 0;
    for (const Stmt& st : stmts_) {
      if (st.op == ".org") {
        if (st.args.size() != 1) throw AsmError(st.line, ".org needs one address");
        uint32_t addr = static_cast<uint32_t>(parse_number(st.args[0], st.line));
        if (addr & 3u) throw AsmError(st.line, ".org address not word-aligned");
        loc = addr;
      } else if (st.op == ".align") {
        if (st.args.size() != 1) throw AsmError(st.line, ".align needs one operand");
        uint32_t n = static_cast<uint32_t>(parse_number(st.args[0], st.line));
        if (n == 0 || (n & (n - 1))) throw AsmError(st.line, ".align requires a power of two");
        uint32_t aligned = (loc + n - 1) & ~(n - 1);
        placed_.push_back(Placed{&st, loc, aligned - loc});
        loc = aligned;
        record_label(st, loc);
        continue;
      }
      record_label(st, loc);
      if (st.op.empty() || st.op == ".org") continue;
      placed_.push_back(Placed{&st, loc, 0});
      loc += size_of(st);
    }
  }

  void record_label(const Stmt& st, uint32_t loc) {
    if (st.label.empty()) return;
    if (labels_.count(st.label)) throw AsmError(st.line, "duplicate label " + st.label);
    labels_[st.label] = loc;
  }

  uint32_t size_of(const Stmt& st) {
    if (st.op == ".word") return static_cast<uint32_t>(4 * st.args.size());
    if (st.op == ".byte") return static_cast<uint32_t>(st.args.size());
    if (st.op == ".ascii") return static_cast<uint32_t>(st.raw_string.size());
    if (st.op == ".asciiz") return static_cast<uint32_t>(st.raw_string.size() + 1);
    if (st.op == ".global") return 0;
    return 4;  // every instruction is one word
  }

  // ----- pass 2: emission ----------------------------------------------------

  void pass2() {
    cur_segment_ = nullptr;
    for (const Placed& p : placed_) {
      const Stmt& st = *p.stmt;
      if (st.op == ".align") {
        uint32_t addr = p.addr;
        for (uint32_t i = 0; i < p.pad; ++i) emit_byte(addr++, 0);
        continue;
      }
      if (st.op == ".global") {
        if (st.args.size() != 1 || !is_identifier(st.args[0]))
          throw AsmError(st.line, ".global needs a label name");
        exported_.push_back({st.args[0], st.line});
        continue;
      }
      emit_at(p.addr, st);
    }
  }

  void emit_at(uint32_t addr, const Stmt& st) {
    if (st.op == ".word") {
      for (const auto& a : st.args) {
        int64_t v = parse_number_or_label(a, st.line);
        emit_byte(addr++, static_cast<uint8_t>((v >> 24) & 0xFF));
        emit_byte(addr++, static_cast<uint8_t>((v >> 16) & 0xFF));
        emit_byte(addr++, static_cast<uint8_t>((v >> 8) & 0xFF));
        emit_byte(addr++, static_cast<uint8_t>(v & 0xFF));
      }
      return;
    }
    if (st.op == ".byte") {
      for (const auto& a : st.args) {
        int64_t v = parse_number_or_label(a, st.line);
        if (v < -128 || v > 255) throw AsmError(st.line, "byte value out of range");
        emit_byte(addr++, static_cast<uint8_t>(v & 0xFF));
      }
      return;
    }
    if (st.op == ".ascii" || st.op == ".asciiz") {
      for (char c : st.raw_string) emit_byte(addr++, static_cast<uint8_t>(c));
      if (st.op == ".asciiz") emit_byte(addr++, 0);
      return;
    }
    emit_word(addr, encode_instruction(st, addr));
  }

  void emit_word(uint32_t addr, uint32_t word) {
    emit_byte(addr, static_cast<uint8_t>(word >> 24));
    emit_byte(addr + 1, static_cast<uint8_t>(word >> 16));
    emit_byte(addr + 2, static_cast<uint8_t>(word >> 8));
    emit_byte(addr + 3, static_cast<uint8_t>(word));
  }

  void emit_byte(uint32_t addr, uint8_t b) {
    if (cur_segment_ && cur_segment_->base + cur_segment_->bytes.size() == addr) {
      cur_segment_->bytes.push_back(b);
      return;
    }
    img_.segments.push_back(Segment{addr, {b}});
    cur_segment_ = &img_.segments.back();
  }

  // ----- operand handling ----------------------------------------------------

  int64_t parse_number(const std::string& text, unsigned line) {
    std::string t = trim(text);
    bool neg = false;
    size_t i = 0;
    if (!t.empty() && (t[0] == '-' || t[0] == '+')) {
      neg = t[0] == '-';
      i = 1;
    }
    if (i >= t.size()) throw AsmError(line, "bad number '" + text + "'");
    int64_t v = 0;
    if (t.size() > i + 1 && t[i] == '0' && (t[i + 1] == 'x' || t[i + 1] == 'X')) {
      for (size_t k = i + 2; k < t.size(); ++k) {
        char c = static_cast<char>(std::tolower(static_cast<unsigned char>(t[k])));
        int d;
        if (c >= '0' && c <= '9') d = c - '0';
        else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
        else throw AsmError(line, "bad hex literal '" + text + "'");
        v = v * 16 + d;
        if (v > 0xFFFFFFFFll) throw AsmError(line, "literal too large");
      }
      if (t.size() == i + 2) throw AsmError(line, "bad hex literal '" + text + "'");
    } else {
      for (size_t k = i; k < t.size(); ++k) {
        if (!std::isdigit(static_cast<unsigned char>(t[k])))
          throw AsmError(line, "bad number '" + text + "'");
        v = v * 10 + (t[k] - '0');
        if (v > 0xFFFFFFFFll) throw AsmError(line, "literal too large");
      }
    }
    return neg ? -v : v;
  }

  int64_t parse_number_or_label(const std::string& text, unsigned line) {
    std::string t = trim(text);
    if (t.rfind("hi(", 0) == 0 && t.back() == ')')
      return (resolve_label(t.substr(3, t.size() - 4), line) >> 16) & 0xFFFF;
    if (t.rfind("lo(", 0) == 0 && t.back() == ')')
      return resolve_label(t.substr(3, t.size() - 4), line) & 0xFFFF;
    if (is_identifier(t)) return resolve_label(t, line);
    return parse_number(t, line);
  }

  uint32_t resolve_label(const std::string& name, unsigned line) {
    auto it = labels_.find(trim(name));
    if (it == labels_.end()) throw AsmError(line, "unknown label '" + name + "'");
    return it->second;
  }

  uint8_t parse_reg(const std::string& text, unsigned line) {
    std::string t = lower(trim(text));
    if (t.size() < 2 || t[0] != 'r') throw AsmError(line, "expected register, got '" + text + "'");
    for (size_t i = 1; i < t.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(t[i])))
        throw AsmError(line, "expected register, got '" + text + "'");
    int n = std::stoi(t.substr(1));
    if (n < 0 || n > 31) throw AsmError(line, "register out of range: " + text);
    return static_cast<uint8_t>(n);
  }

  uint16_t signed_imm(int64_t v, unsigned line) {
    if (v < -32768 || v > 32767)
      throw AsmError(line, "immediate " + std::to_string(v) + " out of signed 16-bit range");
    return static_cast<uint16_t>(v & 0xFFFF);
  }

  uint16_t unsigned_imm(int64_t v, unsigned line) {
    if (v < 0 || v > 0xFFFF)
      throw AsmError(line, "immediate " + std::to_string(v) + " out of unsigned 16-bit range");
    return static_cast<uint16_t>(v);
  }

  /// offset(ra) memory operand
  void parse_mem_operand(const std::string& text, unsigned line, uint16_t& imm, uint8_t& ra) {
    std::string t = trim(text);
    size_t open = t.find('(');
    if (open == std::string::npos || t.back() != ')')
      throw AsmError(line, "expected offset(reg), got '" + text + "'");
    std::string off = trim(t.substr(0, open));
    if (off.empty()) off = "0";
    imm = signed_imm(parse_number_or_label(off, line), line);
    ra = parse_reg(t.substr(open + 1, t.size() - open - 2), line);
  }

  uint16_t branch_offset(const std::string& target, uint32_t source, unsigned line) {
    int64_t dest = parse_number_or_label(target, line);
    int64_t diff = dest - static_cast<int64_t>(source);
    if (diff & 3) throw AsmError(line, "branch target not word-aligned");
    int64_t words = diff >> 2;
    if (words < -32768 || words > 32767)
      throw AsmError(line, "branch target out of range");
    return static_cast<uint16_t>(words & 0xFFFF);
  }

  uint32_t encode_instruction(const Stmt& st, uint32_t addr) {
    const std::string& m = st.op;
    unsigned line = st.line;
    auto need = [&](size_t n) {
      if (st.args.size() != n)
        throw AsmError(line, m + " expects " + std::to_string(n) + " operands");
    };
    Instruction in;

    struct FormA { const char* name; Opcode op; };
    static const FormA form_a[] = {
        {"add", Opcode::ADD}, {"sub", Opcode::SUB}, {"and", Opcode::AND_},
        {"or", Opcode::OR_},  {"xor", Opcode::XOR_}, {"sll", Opcode::SLL},
        {"srl", Opcode::SRL}, {"sra", Opcode::SRA}, {"slt", Opcode::SLT},
    };
    for (const auto& f : form_a) {
      if (m == f.name) {
        need(3);
        in.opcode = f.op;
        in.form = InstrForm::A;
        in.rd = parse_reg(st.args[0], line);
        in.ra = parse_reg(st.args[1], line);
        in.rb = parse_reg(st.args[2], line);
        return encode(in);
      }
    }

    if (m == "addi" || m == "andi" || m == "ori" || m == "xori") {
      need(3);
      in.form = InstrForm::B;
      in.rd = parse_reg(st.args[0], line);
      in.ra = parse_reg(st.args[1], line);
      int64_t v = parse_number_or_label(st.args[2], line);
      if (m == "addi") {
        in.opcode = Opcode::ADDI;
        in.imm16 = signed_imm(v, line);
      } else {
        in.opcode = m == "andi" ? Opcode::ANDI : m == "ori" ? Opcode::ORI : Opcode::XORI;
        in.imm16 = unsigned_imm(v, line);
      }
      return encode(in);
    }
    if (m == "lui") {
      need(2);
      in.opcode = Opcode::LUI;
      in.rd = parse_reg(st.args[0], line);
      in.imm16 = unsigned_imm(parse_number_or_label(st.args[1], line), line);
      return encode(in);
    }

    if (m == "lw" || m == "lbu" || m == "sw" || m == "sb") {
      need(2);
      in.opcode = m == "lw" ? Opcode::LW : m == "lbu" ? Opcode::LBU
                 : m == "sw" ? Opcode::SW : Opcode::SB;
      in.rd = parse_reg(st.args[0], line);
      parse_mem_operand(st.args[1], line, in.imm16, in.ra);
      return encode(in);
    }

    if (m == "beq" || m == "bne" || m == "blt" || m == "bge") {
      need(3);
      in.opcode = m == "beq" ? Opcode::BEQ : m == "bne" ? Opcode::BNE
                 : m == "blt" ? Opcode::BLT : Opcode::BGE;
      in.ra = parse_reg(st.args[0], line);
      in.rd = parse_reg(st.args[1], line);
      in.imm16 = branch_offset(st.args[2], addr, line);
      return encode(in);
    }

    if (m == "jal") {
      need(2);
      in.opcode = Opcode::JAL;
      in.rd = parse_reg(st.args[0], line);
      in.imm16 = branch_offset(st.args[1], addr, line);
      return encode(in);
    }
    if (m == "jalr") {
      need(2);
      in.opcode = Opcode::JALR;
      in.rd = parse_reg(st.args[0], line);
      in.ra = parse_reg(st.args[1], line);
      return encode(in);
    }

    if (m == "iret") { need(0); in.opcode = Opcode::IRET; return encode(in); }
    if (m == "msrw") {
      need(1);
      in.opcode = Opcode::MSRW;
      in.ra = parse_reg(st.args[0], line);
      return encode(in);
    }
    if (m == "msrr") {
      need(1);
      in.opcode = Opcode::MSRR;
      in.rd = parse_reg(st.args[0], line);
      return encode(in);
    }
    if (m == "halt") { need(0); return 0xFC000000u; }

    throw AsmError(line, "unknown mnemonic '" + m + "'");
  }

  void finish() {
    if (img_.segments.empty()) throw AsmError(1, "no code or data emitted");
    for (const auto& [name, line] : exported_) {
      auto it = labels_.find(name);
      if (it == labels_.end()) throw AsmError(line, ".global of unknown label " + name);
      img_.symbols[name] = it->second;
    }
    auto start = labels_.find("_start");
    img_.entry = start != labels_.end() ? start->second : img_.segments.front().base;
    img_.validate();
  }

  std::vector<Stmt> stmts_;
  std::vector<Placed> placed_;
  std::map<std::string, uint32_t> labels_;
  std::vector<std::pair<std::string, unsigned>> exported_;
  Image img_;
  Segment* cur_segment_ = nullptr;
};

inline Image assemble(const std::string& source) { return Assembler().assemble(source); }

// ---------------------------------------------------------------------------
// Disassembler
// ---------------------------------------------------------------------------

/// Canonical text for one instruction word; re-assembling the text at the
/// same address yields the identical word.
inline std::string disassemble(uint32_t word, uint32_t addr = 0) {
  Instruction in = decode(word);
  auto reg = [](uint8_t r) { return "r" + std::to_string(r); };
  auto simm = [](uint16_t v) { return std::to_string(static_cast<int16_t>(v)); };
  auto uimm = [](uint16_t v) { return std::to_string(v); };
  auto target = [&](uint16_t v) {
    return std::to_string(static_cast<int64_t>(addr) +
                          (static_cast<int64_t>(static_cast<int16_t>(v)) << 2));
  };
  switch (in.opcode) {
    case Opcode::ADD: return "add " + reg(in.rd) + ", " + reg(in.ra) + ", " + reg(in.rb);
    case Opcode::SUB: return "sub " + reg(in.rd) + ", " + reg(in.ra) + ", " + reg(in.rb);
    case Opcode::AND_: return "and " + reg(in.rd) + ", " + reg(in.ra) + ", " + reg(in.rb);
    case Opcode::OR_: return "or " + reg(in.rd) + ", " + reg(in.ra) + ", " + reg(in.rb);
    case Opcode::XOR_: return "xor " + reg(in.rd) + ", " + reg(in.ra) + ", " + reg(in.rb);
    case Opcode::SLL: return "sll " + reg(in.rd) + ", " + reg(in.ra) + ", " + reg(in.rb);
    case Opcode::SRL: return "srl " + reg(in.rd) + ", " + reg(in.ra) + ", " + reg(in.rb);
    case Opcode::SRA: return "sra " + reg(in.rd) + ", " + reg(in.ra) + ", " + reg(in.rb);
    case Opcode::SLT: return "slt " + reg(in.rd) + ", " + reg(in.ra) + ", " + reg(in.rb);
    case Opcode::ADDI: return "addi " + reg(in.rd) + ", " + reg(in.ra) + ", " + simm(in.imm16);
    case Opcode::ANDI: return "andi " + reg(in.rd) + ", " + reg(in.ra) + ", " + uimm(in.imm16);
    case Opcode::ORI: return "ori " + reg(in.rd) + ", " + reg(in.ra) + ", " + uimm(in.imm16);
    case Opcode::XORI: return "xori " + reg(in.rd) + ", " + reg(in.ra) + ", " + uimm(in.imm16);
    case Opcode::LUI: return "lui " + reg(in.rd) + ", " + uimm(in.imm16);
    case Opcode::LW: return "lw " + reg(in.rd) + ", " + simm(in.imm16) + "(" + reg(in.ra) + ")";
    case Opcode::LBU: return "lbu " + reg(in.rd) + ", " + simm(in.imm16) + "(" + reg(in.ra) + ")";
    case Opcode::SW: return "sw " + reg(in.rd) + ", " + simm(in.imm16) + "(" + reg(in.ra) + ")";
    case Opcode::SB: return "sb " + reg(in.rd) + ", " + simm(in.imm16) + "(" + reg(in.ra) + ")";
    case Opcode::BEQ: return "beq " + reg(in.ra) + ", " + reg(in.rd) + ", " + target(in.imm16);
    case Opcode::BNE: return "bne " + reg(in.ra) + ", " + reg(in.rd) + ", " + target(in.imm16);
    case Opcode::BLT: return "blt " + reg(in.ra) + ", " + reg(in.rd) + ", " + target(in.imm16);
    case Opcode::BGE: return "bge " + reg(in.ra) + ", " + reg(in.rd) + ", " + target(in.imm16);
    case Opcode::JAL: return "jal " + reg(in.rd) + ", " + target(in.imm16);
    case Opcode::JALR: return "jalr " + reg(in.rd) + ", " + reg(in.ra);
    case Opcode::IRET: return "iret";
    case Opcode::MSRW: return "msrw " + reg(in.ra);
    case Opcode::MSRR: return "msrr " + reg(in.rd);
    case Opcode::HALT: return "halt";
  }
  return "?";
}

}  // namespace fidelsim

#endif  // FIDELSIM_ASM_HPP
