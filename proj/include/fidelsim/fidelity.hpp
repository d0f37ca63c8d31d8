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
// Speed machinery that trades cycle accuracy for wall time: the memory
// dispatcher (direct 1-cycle access to the RAM/FLASH backing stores,
// bypassing arbitration) and host-native interception of the two hot
// library routines.
//

#ifndef FIDELSIM_FIDELITY_HPP
#define FIDELSIM_FIDELITY_HPP

#include <cstring>
#include <map>
#include <optional>
#include <string>

#include "fidelsim/config.hpp"
#include "fidelsim/peripherals.hpp"

namespace fidelsim {

enum class Builtin : uint8_t { Memset, Memcpy };

inline const char* builtin_name(Builtin b) {
  return b == Builtin::Memset ? "memset" : "memcpy";
}

/// Entry addresses of intercepted routines, usually populated from the
/// exported memset/memcpy symbols of a loaded image.
class InterceptRegistry {
 public:
  void add(uint32_t addr, Builtin b) {
    if (addr & 3u)
      throw ConfigError("intercept address 0x" + std::to_string(addr) + " not word-aligned");
    auto [it, inserted] = entries_.emplace(addr, b);
    (void)it;
    if (!inserted) throw ConfigError("duplicate intercept address");
  }

  const Builtin* lookup(uint32_t pc) const {
    auto it = entries_.find(pc);
    return it == entries_.end() ? nullptr : &it->second;
  }

  void clear() { entries_.clear(); }
  size_t size() const { return entries_.size(); }
  const std::map<uint32_t, Builtin>& entries() const { return entries_; }

 private:
  std::map<uint32_t, Builtin> entries_;
};

/// Direct handle to the memory backing stores, shared by the dispatcher
/// paths and the interception executor.
class DirectMemory {
 public:
  DirectMemory(Ram& ram, uint32_t ram_base, Flash& flash, uint32_t flash_base)
      : ram_(ram), ram_base_(ram_base), flash_(flash), flash_base_(flash_base) {}

  bool in_ram(uint32_t addr, uint32_t len) const {
    return addr >= ram_base_ && addr - ram_base_ <= ram_.store().size() &&
           ram_.store().size() - (addr - ram_base_) >= len;
  }
  bool in_flash(uint32_t addr, uint32_t len) const {
    return addr >= flash_base_ && addr - flash_base_ <= flash_.store().size() &&
           flash_.store().size() - (addr - flash_base_) >= len;
  }

  /// Instruction fetches may come from RAM or FLASH.
  bool covers_fetch(uint32_t addr) const { return in_ram(addr, 4) || in_flash(addr, 4); }

  uint32_t read_word(uint32_t addr) const {
    if (in_ram(addr, 4)) return ram_.store().read_word(addr - ram_base_);
    return flash_.store().read_word(addr - flash_base_);
  }

  void write_word(uint32_t addr, uint8_t be, uint32_t wdata) {
    ram_.store().write_word(addr - ram_base_, be, wdata);
  }

  uint8_t* ram_span(uint32_t addr, uint32_t len) {
    if (!in_ram(addr, len)) return nullptr;
    return ram_.store().data() + (addr - ram_base_);
  }

  const uint8_t* read_span(uint32_t addr, uint32_t len) const {
    if (in_ram(addr, len)) return ram_.store().data() + (addr - ram_base_);
    if (in_flash(addr, len)) return flash_.store().data() + (addr - flash_base_);
    return nullptr;
  }

 private:
  Ram& ram_;
  uint32_t ram_base_;
  Flash& flash_;
  uint32_t flash_base_;
};

/// Dispatcher state: when data dispatch is on, RAM is detached from the
/// bus and its slave process is never scheduled.
struct Dispatcher {
  explicit Dispatcher(DirectMemory memory) : mem(memory) {}
  DirectMemory mem;
  bool attached = true;
};

struct InterceptFault {
  FaultKind kind;
  std::string message;
};

/// Execute an intercepted builtin natively in zero simulated time.
/// ABI: arguments r5, r6, r7; result r3; return address r15.
///   memset(dst=r5, byte=r6, n=r7)  fills RAM
///   memcpy(dst=r5, src=r6, n=r7)   byte copy, regions must not overlap
/// Beyond the result register, the scratch registers are patched to what
/// the canonical assembly routines leave behind, so a run with
/// interception ends in the same architectural state as one without:
///   memset (n>0): r8 = dst+n, r9 = 0
///   memcpy (n>0): r8 = dst+n, r9 = src+n, r10 = 0, r11 = last byte copied
/// Returns the fault if the call is ill-formed; the caller halts on it.
template <typename RegRead, typename RegWrite>
inline std::optional<InterceptFault> exec_builtin(Builtin b, DirectMemory& mem, RegRead reg,
                                                  RegWrite set_reg, uint32_t& pc,
                                                  uint64_t& intercepted_calls) {
  uint32_t dst = reg(5);
  uint32_t n = reg(7);
  if (n > 0) {
    if (b == Builtin::Memset) {
      uint8_t* d = mem.ram_span(dst, n);
      if (!d)
        return InterceptFault{FaultKind::BadIntercept, "memset target outside writable memory"};
      std::memset(d, static_cast<int>(reg(6) & 0xFF), n);
      set_reg(8, dst + n);
      set_reg(9, 0);
    } else {
      uint32_t src = reg(6);
      if (dst < src + n && src < dst + n)
        return InterceptFault{FaultKind::BadIntercept, "memcpy regions overlap"};
      uint8_t* d = mem.ram_span(dst, n);
      const uint8_t* s = mem.read_span(src, n);
      if (!d || !s)
        return InterceptFault{FaultKind::BadIntercept, "memcpy region outside memory"};
      std::memcpy(d, s, n);
      set_reg(8, dst + n);
      set_reg(9, src + n);
      set_reg(10, 0);
      set_reg(11, d[n - 1]);
    }
  }
  set_reg(3, dst);
  pc = reg(15);
  ++intercepted_calls;
  return std::nullopt;
}

}  // namespace fidelsim

#endif  // FIDELSIM_FIDELITY_HPP
