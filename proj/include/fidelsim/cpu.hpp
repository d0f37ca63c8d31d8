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
// MR32: a 32-bit big-endian mini-RISC.
//
// Encoding: opcode = word[31:26], rd = word[25:21], ra = word[20:16];
// form A adds rb = word[15:11], form B an imm16 = word[15:0].
//
//   0x00-0x08  ADD SUB AND OR XOR SLL SRL SRA SLT   rd = ra op rb (form A)
//   0x10 ADDI  rd = ra + sext(imm)
//   0x12-0x14  ANDI ORI XORI (zero-extended imm)
//   0x15 LUI   rd = imm << 16
//   0x18 LW    rd = mem32[ra + sext(imm)]       0x19 LBU  byte, zero-extended
//   0x1A SW    mem32[ra + sext(imm)] = rd       0x1B SB   byte store
//   0x20-0x23  BEQ BNE BLT BGE: compare r[ra] with r[rd]; taken adds
//              sext(imm) << 2 to the branch's own address
//   0x28 JAL   r[rd] = pc + 4; pc += sext(imm) << 2
//   0x29 JALR  r[rd] = pc + 4; pc = r[ra]
//   0x2C IRET  pc = r14, IE = 1    0x2D MSRW msr = r[ra]    0x2E MSRR rd = msr
//   0x3F HALT  (all other fields zero)
//
// r0 is hardwired to zero. msr bit0 is the interrupt-enable flag. The
// interrupt entry point is 0x10 with the return address latched in r14.
// Loads/stores of words must be aligned; byte ops may not be split across
// a word boundary they don't occupy.
//
// Timing: instruction fetch costs 3 + wait_states bus cycles (1 with the
// instruction dispatcher), execute costs one cycle, and loads/stores add a
// data access (3 + wait_states over the bus, 1 via the data dispatcher).
//

#ifndef FIDELSIM_CPU_HPP
#define FIDELSIM_CPU_HPP

#include <array>
#include <functional>
#include <optional>
#include <string>

#include "fidelsim/bus.hpp"
#include "fidelsim/fidelity.hpp"

namespace fidelsim {

inline constexpr uint32_t kIrqVector = 0x00000010;
inline constexpr unsigned kIrqLinkReg = 14;
inline constexpr unsigned kAbiArg0 = 5, kAbiArg1 = 6, kAbiArg2 = 7;
inline constexpr unsigned kAbiResult = 3, kAbiLinkReg = 15;

enum class Opcode : uint8_t {
  ADD = 0x00, SUB = 0x01, AND_ = 0x02, OR_ = 0x03, XOR_ = 0x04,
  SLL = 0x05, SRL = 0x06, SRA = 0x07, SLT = 0x08,
  ADDI = 0x10, ANDI = 0x12, ORI = 0x13, XORI = 0x14, LUI = 0x15,
  LW = 0x18, LBU = 0x19, SW = 0x1A, SB = 0x1B,
  BEQ = 0x20, BNE = 0x21, BLT = 0x22, BGE = 0x23,
  JAL = 0x28, JALR = 0x29,
  IRET = 0x2C, MSRW = 0x2D, MSRR = 0x2E,
  HALT = 0x3F,
};

enum class InstrForm : uint8_t { A, B };

struct Instruction {
  Opcode opcode = Opcode::HALT;
  uint8_t rd = 0, ra = 0, rb = 0;
  uint16_t imm16 = 0;
  InstrForm form = InstrForm::B;
  bool operator==(const Instruction&) const = default;
};

inline bool opcode_valid(uint8_t op) {
  switch (static_cast<Opcode>(op)) {
    case Opcode::ADD: case Opcode::SUB: case Opcode::AND_: case Opcode::OR_:
    case Opcode::XOR_: case Opcode::SLL: case Opcode::SRL: case Opcode::SRA:
    case Opcode::SLT: case Opcode::ADDI: case Opcode::ANDI: case Opcode::ORI:
    case Opcode::XORI: case Opcode::LUI: case Opcode::LW: case Opcode::LBU:
    case Opcode::SW: case Opcode::SB: case Opcode::BEQ: case Opcode::BNE:
    case Opcode::BLT: case Opcode::BGE: case Opcode::JAL: case Opcode::JALR:
    case Opcode::IRET: case Opcode::MSRW: case Opcode::MSRR: case Opcode::HALT:
      return true;
    default:
      return false;
  }
}

inline Instruction decode(uint32_t word) {
  uint8_t op = static_cast<uint8_t>(word >> 26);
  if (!opcode_valid(op))
    throw SimFault(FaultKind::IllegalInstruction,
                   "opcode 0x" + std::to_string(op) + " in word " + std::to_string(word));
  if (op == 0x3F && word != 0xFC000000u)
    throw SimFault(FaultKind::IllegalInstruction, "nonzero fields in halt encoding");
  Instruction in;
  in.opcode = static_cast<Opcode>(op);
  in.rd = (word >> 21) & 31u;
  in.ra = (word >> 16) & 31u;
  if (op <= 0x08) {
    in.form = InstrForm::A;
    in.rb = (word >> 11) & 31u;
  } else {
    in.form = InstrForm::B;
    in.imm16 = static_cast<uint16_t>(word & 0xFFFFu);
  }
  return in;
}

inline uint32_t encode(const Instruction& in) {
  uint32_t word = (static_cast<uint32_t>(in.opcode) << 26) |
                  (static_cast<uint32_t>(in.rd & 31u) << 21) |
                  (static_cast<uint32_t>(in.ra & 31u) << 16);
  if (in.form == InstrForm::A)
    word |= static_cast<uint32_t>(in.rb & 31u) << 11;
  else
    word |= in.imm16;
  return word;
}

inline int32_t sext16(uint16_t v) { return static_cast<int16_t>(v); }

// ---------------------------------------------------------------------------
// Architectural state and statistics
// ---------------------------------------------------------------------------

struct RegionCounter {
  std::string name;
  uint32_t lo = 0;
  uint32_t hi = 0;  ///< exclusive
  uint64_t count = 0;
};

struct InstrStats {
  uint64_t instructions_retired = 0;
  uint64_t cycles = 0;
  std::array<uint64_t, 64> per_opcode{};
  uint64_t intercepted_calls = 0;
  uint64_t interrupts_taken = 0;
  std::vector<RegionCounter> regions;

  double cpi() const {
    return instructions_retired ? static_cast<double>(cycles) /
                                      static_cast<double>(instructions_retired)
                                : 0.0;
  }
};

struct CpuFaultInfo {
  FaultKind kind;
  std::string message;
  uint32_t pc = 0;
};

struct CpuState {
  std::array<uint32_t, 32> r{};
  uint32_t pc = 0;
  bool msr_ie = false;
  bool halted = false;
  std::optional<CpuFaultInfo> fault;
  InstrStats stats;

  uint32_t reg(unsigned i) const { return i == 0 ? 0 : r[i]; }
  void set_reg(unsigned i, uint32_t v) {
    if (i != 0) r[i] = v;
  }
  uint32_t msr() const { return msr_ie ? 1u : 0u; }
  void set_msr(uint32_t v) { msr_ie = v & 1u; }
};

/// One retired instruction, as seen by the differential test oracle.
struct RetireEvent {
  uint32_t pc = 0;
  uint32_t word = 0;
  bool irq_taken_before = false;
  bool has_rd = false;
  uint8_t rd = 0;
  uint32_t rd_value = 0;
  bool is_load = false;
  uint32_t load_addr = 0;
  uint32_t load_value = 0;
  bool is_store = false;
  uint32_t store_addr = 0;
  uint8_t store_be = 0;
  uint32_t store_word = 0;
};

using RetireHook = std::function<void(const RetireEvent&)>;

// ---------------------------------------------------------------------------
// The bus-coupled core
// ---------------------------------------------------------------------------

class Cpu {
 public:
  struct Wiring {
    const BusSignals* bus = nullptr;
    SignalId irq_out = 0;
    SignalId reset_n = 0;
  };

  Cpu(const FidelityConfig& cfg, Dispatcher& dispatcher, const InterceptRegistry& intercepts,
      Wiring wiring)
      : cfg_(cfg), disp_(dispatcher), intercepts_(intercepts), w_(wiring) {}

  CpuState state;
  RetireHook retire_hook;

  /// The core is one Multicycle kernel process.
  SimTask<void> body(ProcessContext& ctx) {
    while (!ctx.read_bit(w_.reset_n)) co_await ctx.wait();

    while (!state.halted) {
      uint64_t start_cycle = ctx.time().cycle;
      bool irq_before = false;

      // instruction boundary: interrupt entry, then interception
      if (state.msr_ie && ctx.read_bit(w_.irq_out)) {
        state.set_reg(kIrqLinkReg, state.pc);
        state.msr_ie = false;
        state.pc = kIrqVector;
        ++state.stats.interrupts_taken;
        irq_before = true;
      }
      if (cfg_.interception) {
        if (const Builtin* b = intercepts_.lookup(state.pc)) {
          auto fault = exec_builtin(
              *b, disp_.mem, [this](unsigned i) { return state.reg(i); },
              [this](unsigned i, uint32_t v) { state.set_reg(i, v); }, state.pc,
              state.stats.intercepted_calls);
          if (fault) {
            set_fault(fault->kind, fault->message);
            break;
          }
          if (state.pc & 3u) {
            set_fault(FaultKind::UnalignedAccess, "intercept return to unaligned pc");
            break;
          }
          continue;  // zero simulated cycles
        }
      }

      // fetch
      uint32_t pc = state.pc;
      uint32_t word;
      if (cfg_.ifetch_dispatch && disp_.mem.covers_fetch(pc)) {
        word = disp_.mem.read_word(pc);
        co_await ctx.wait();  // one fetch cycle, no bus request
      } else {
        TransactResult fr = co_await run_bus_transaction(
            ctx, *w_.bus, BusRequest{BusMaster::InstrSide, pc, true, 0xF, 0});
        if (fr.bus_error) {
          set_fault(FaultKind::BusError, "instruction fetch from unmapped address");
          break;
        }
        word = fr.rdata;
        co_await ctx.wait();  // enter the execute cycle
      }

      Instruction in;
      try {
        in = decode(word);
      } catch (const SimFault& f) {
        set_fault(FaultKind::IllegalInstruction, f.what());
        break;
      }

      // execute
      RetireEvent ev;
      ev.pc = pc;
      ev.word = word;
      ev.irq_taken_before = irq_before;
      ExecOut out;
      if (!execute(in, ev, out)) break;  // architectural fault

      // optional data access
      if (out.mem != ExecOut::Mem::None) {
        co_await ctx.wait();  // enter the (first) data cycle
        bool rnw = out.mem == ExecOut::Mem::LoadWord || out.mem == ExecOut::Mem::LoadByte;
        uint32_t data_word;
        if (cfg_.data_dispatch && disp_.mem.in_ram(out.addr & ~3u, 4)) {
          if (rnw) {
            data_word = disp_.mem.read_word(out.addr & ~3u);
          } else {
            disp_.mem.write_word(out.addr & ~3u, out.be, out.wdata);
            data_word = 0;
          }
        } else {
          TransactResult dr = co_await run_bus_transaction(
              ctx, *w_.bus,
              BusRequest{BusMaster::DataSide, out.addr & ~3u, rnw, out.be, out.wdata});
          if (dr.bus_error) {
            set_fault(FaultKind::BusError,
                      std::string(rnw ? "load" : "store") + " to unmapped or read-only address");
            break;
          }
          data_word = dr.rdata;
        }
        if (rnw) {
          uint32_t value = data_word;
          if (out.mem == ExecOut::Mem::LoadByte)
            value = (data_word >> (24 - 8 * (out.addr & 3u))) & 0xFFu;
          state.set_reg(out.rd, value);
          ev.has_rd = true;
          ev.rd = out.rd;
          ev.rd_value = state.reg(out.rd);
          ev.is_load = true;
          ev.load_addr = out.addr;
          ev.load_value = value;
        } else {
          ev.is_store = true;
          ev.store_addr = out.addr;
          ev.store_be = out.be;
          ev.store_word = out.wdata;
        }
      }

      co_await ctx.wait();  // close the final cycle of the instruction

      // retire
      state.stats.cycles += ctx.time().cycle - start_cycle;
      ++state.stats.instructions_retired;
      ++state.stats.per_opcode[static_cast<uint8_t>(in.opcode)];
      for (auto& region : state.stats.regions)
        if (pc >= region.lo && pc < region.hi) ++region.count;
      if (retire_hook) retire_hook(ev);
      if (out.halt) state.halted = true;
    }
    co_return;
  }

 private:
  struct ExecOut {
    enum class Mem : uint8_t { None, LoadWord, LoadByte, StoreWord, StoreByte };
    Mem mem = Mem::None;
    uint32_t addr = 0;
    uint32_t wdata = 0;
    uint8_t be = 0xF;
    uint8_t rd = 0;
    bool halt = false;  // committed at retire so the halt instruction counts
  };

  void set_fault(FaultKind kind, const std::string& msg) {
    state.fault = CpuFaultInfo{kind, msg + " (pc=0x" + to_hex(state.pc) + ")", state.pc};
    state.halted = true;
  }

  static std::string to_hex(uint32_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(8, '0');
    for (int i = 7; i >= 0; --i, v >>= 4) s[static_cast<size_t>(i)] = digits[v & 0xF];
    return s;
  }

  /// Apply architectural effects. Register results other than load data are
  /// written here; pc always advances or redirects. Returns false on fault.
  bool execute(const Instruction& in, RetireEvent& ev, ExecOut& out) {
    uint32_t pc = state.pc;
    uint32_t next_pc = pc + 4;
    auto wr = [&](unsigned rd, uint32_t v) {
      state.set_reg(rd, v);
      ev.has_rd = true;
      ev.rd = static_cast<uint8_t>(rd);
      ev.rd_value = state.reg(rd);
    };
    uint32_t a = state.reg(in.ra);
    uint32_t b = state.reg(in.rb);
    int32_t simm = sext16(in.imm16);

    switch (in.opcode) {
      case Opcode::ADD: wr(in.rd, a + b); break;
      case Opcode::SUB: wr(in.rd, a - b); break;
      case Opcode::AND_: wr(in.rd, a & b); break;
      case Opcode::OR_: wr(in.rd, a | b); break;
      case Opcode::XOR_: wr(in.rd, a ^ b); break;
      case Opcode::SLL: wr(in.rd, a << (b & 31u)); break;
      case Opcode::SRL: wr(in.rd, a >> (b & 31u)); break;
      case Opcode::SRA: wr(in.rd, static_cast<uint32_t>(static_cast<int32_t>(a) >> (b & 31u)));
        break;
      case Opcode::SLT:
        wr(in.rd, static_cast<int32_t>(a) < static_cast<int32_t>(b) ? 1u : 0u);
        break;
      case Opcode::ADDI: wr(in.rd, a + static_cast<uint32_t>(simm)); break;
      case Opcode::ANDI: wr(in.rd, a & in.imm16); break;
      case Opcode::ORI: wr(in.rd, a | in.imm16); break;
      case Opcode::XORI: wr(in.rd, a ^ in.imm16); break;
      case Opcode::LUI: wr(in.rd, static_cast<uint32_t>(in.imm16) << 16); break;

      case Opcode::LW:
      case Opcode::SW: {
        uint32_t addr = a + static_cast<uint32_t>(simm);
        if (addr & 3u) {
          set_fault(FaultKind::UnalignedAccess, "word access at 0x" + to_hex(addr));
          return false;
        }
        if (in.opcode == Opcode::LW) {
          out.mem = ExecOut::Mem::LoadWord;
          out.rd = in.rd;
        } else {
          out.mem = ExecOut::Mem::StoreWord;
          out.wdata = state.reg(in.rd);
        }
        out.addr = addr;
        out.be = 0xF;
        break;
      }
      case Opcode::LBU: {
        out.mem = ExecOut::Mem::LoadByte;
        out.addr = a + static_cast<uint32_t>(simm);
        out.rd = in.rd;
        out.be = 0xF;
        break;
      }
      case Opcode::SB: {
        uint32_t addr = a + static_cast<uint32_t>(simm);
        unsigned lane = addr & 3u;
        out.mem = ExecOut::Mem::StoreByte;
        out.addr = addr;
        out.be = static_cast<uint8_t>(1u << lane);
        out.wdata = (state.reg(in.rd) & 0xFFu) << (24 - 8 * lane);
        break;
      }

      case Opcode::BEQ:
        if (a == state.reg(in.rd)) next_pc = pc + (static_cast<uint32_t>(simm) << 2);
        break;
      case Opcode::BNE:
        if (a != state.reg(in.rd)) next_pc = pc + (static_cast<uint32_t>(simm) << 2);
        break;
      case Opcode::BLT:
        if (static_cast<int32_t>(a) < static_cast<int32_t>(state.reg(in.rd)))
          next_pc = pc + (static_cast<uint32_t>(simm) << 2);
        break;
      case Opcode::BGE:
        if (static_cast<int32_t>(a) >= static_cast<int32_t>(state.reg(in.rd)))
          next_pc = pc + (static_cast<uint32_t>(simm) << 2);
        break;

      case Opcode::JAL:
        wr(in.rd, pc + 4);
        next_pc = pc + (static_cast<uint32_t>(simm) << 2);
        break;
      case Opcode::JALR:
        wr(in.rd, pc + 4);
        next_pc = a;
        if (next_pc & 3u) {
          set_fault(FaultKind::UnalignedAccess, "jump to 0x" + to_hex(next_pc));
          return false;
        }
        break;

      case Opcode::IRET:
        next_pc = state.reg(kIrqLinkReg);
        state.msr_ie = true;
        if (next_pc & 3u) {
          set_fault(FaultKind::UnalignedAccess, "interrupt return to 0x" + to_hex(next_pc));
          return false;
        }
        break;
      case Opcode::MSRW:
        state.set_msr(a);
        break;
      case Opcode::MSRR:
        wr(in.rd, state.msr());
        break;

      case Opcode::HALT:
        out.halt = true;
        break;
    }
    state.pc = next_pc;
    return true;
  }

  const FidelityConfig& cfg_;
  Dispatcher& disp_;
  const InterceptRegistry& intercepts_;
  Wiring w_;
};

}  // namespace fidelsim

#endif  // FIDELSIM_CPU_HPP
