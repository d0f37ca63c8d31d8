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
// Platform peripherals. All registers are word-granular, big-endian on the
// backing stores; reserved offsets read as zero and ignore writes. Register
// layouts here are fixed contracts the bundled workloads rely on.
//

#ifndef FIDELSIM_PERIPHERALS_HPP
#define FIDELSIM_PERIPHERALS_HPP

#include <array>
#include <cstdint>
#include <deque>
#include <vector>

#include "fidelsim/bus.hpp"

namespace fidelsim {

// ---------------------------------------------------------------------------
// Memory
// ---------------------------------------------------------------------------

/// Byte-addressable backing store, big-endian word view. Uninitialized
/// bytes read as 0x00.
class MemoryStore {
 public:
  explicit MemoryStore(uint32_t size) : mem_(size, 0) {}

  uint32_t size() const { return static_cast<uint32_t>(mem_.size()); }

  uint32_t read_word(uint32_t offset) const {
    return (uint32_t{mem_[offset]} << 24) | (uint32_t{mem_[offset + 1]} << 16) |
           (uint32_t{mem_[offset + 2]} << 8) | uint32_t{mem_[offset + 3]};
  }

  /// Byte-enable bit i selects the byte at offset word_base + i.
  void write_word(uint32_t offset, uint8_t be, uint32_t wdata) {
    for (unsigned lane = 0; lane < 4; ++lane)
      if (be & (1u << lane))
        mem_[offset + lane] = static_cast<uint8_t>(wdata >> (24 - 8 * lane));
  }

  uint8_t read_byte(uint32_t offset) const { return mem_[offset]; }
  void write_byte(uint32_t offset, uint8_t v) { mem_[offset] = v; }

  uint8_t* data() { return mem_.data(); }
  const uint8_t* data() const { return mem_.data(); }
  const std::vector<uint8_t>& bytes() const { return mem_; }

 private:
  std::vector<uint8_t> mem_;
};

/// Main memory. Extra wait states are paid by the bus slave protocol, not
/// here; dispatcher accesses bypass them entirely.
class Ram : public BusPeripheral {
 public:
  explicit Ram(uint32_t size) : store_(size) {}

  AccessResult bus_access(uint32_t offset, bool rnw, uint8_t be, uint32_t wdata) override {
    uint32_t word_off = offset & ~3u;
    if (rnw) return AccessResult{store_.read_word(word_off), false};
    store_.write_word(word_off, be, wdata);
    return AccessResult{};
  }

  MemoryStore& store() { return store_; }
  const MemoryStore& store() const { return store_; }

 private:
  MemoryStore store_;
};

/// Read-only over the bus; the loader pokes it directly.
class Flash : public BusPeripheral {
 public:
  explicit Flash(uint32_t size) : store_(size) {}

  AccessResult bus_access(uint32_t offset, bool rnw, uint8_t be, uint32_t wdata) override {
    (void)be;
    (void)wdata;
    if (!rnw) return AccessResult{0, true};  // write to read-only window
    return AccessResult{store_.read_word(offset & ~3u), false};
  }

  MemoryStore& store() { return store_; }
  const MemoryStore& store() const { return store_; }

 private:
  MemoryStore store_;
};

// ---------------------------------------------------------------------------
// UART
// ---------------------------------------------------------------------------

/// Byte FIFO UART. No modeled baud rate: the TX drain process moves one
/// byte per dispatch to the external stream.
///
/// Registers (word offsets):
///   0x0 RX_DATA  read pops the RX FIFO (0 when empty)
///   0x4 TX_DATA  write pushes the TX FIFO; pushes to a full FIFO are
///                dropped and counted
///   0x8 STATUS   bit0 RX_VALID, bit1 RX_FULL, bit2 TX_EMPTY, bit3 TX_FULL
///   0xC CONTROL  write: bit0 clears RX, bit1 clears TX, bit4 irq enable;
///                read returns bit4
class Uart : public BusPeripheral {
 public:
  static constexpr uint32_t kRxData = 0x0;
  static constexpr uint32_t kTxData = 0x4;
  static constexpr uint32_t kStatus = 0x8;
  static constexpr uint32_t kControl = 0xC;

  static constexpr uint32_t kStatusRxValid = 1u << 0;
  static constexpr uint32_t kStatusRxFull = 1u << 1;
  static constexpr uint32_t kStatusTxEmpty = 1u << 2;
  static constexpr uint32_t kStatusTxFull = 1u << 3;

  static constexpr size_t kFifoDepth = 16;

  AccessResult bus_access(uint32_t offset, bool rnw, uint8_t be, uint32_t wdata) override {
    (void)be;
    switch (offset & ~3u) {
      case kRxData:
        if (!rnw) return {};  // writes ignored
        if (rx_fifo_.empty()) return AccessResult{0, false};
        {
          uint8_t b = rx_fifo_.front();
          rx_fifo_.pop_front();
          return AccessResult{b, false};
        }
      case kTxData:
        if (rnw) return AccessResult{0, false};
        if (tx_fifo_.size() >= kFifoDepth) {
          ++tx_dropped_;
        } else {
          tx_fifo_.push_back(static_cast<uint8_t>(wdata & 0xFF));
        }
        return {};
      case kStatus:
        if (!rnw) return {};
        return AccessResult{status(), false};
      case kControl:
        if (rnw) return AccessResult{irq_enable_ ? (1u << 4) : 0u, false};
        if (wdata & 1u) rx_fifo_.clear();
        if (wdata & 2u) tx_fifo_.clear();
        irq_enable_ = (wdata >> 4) & 1u;
        return {};
      default:
        return rnw ? AccessResult{0, false} : AccessResult{};
    }
  }

  uint32_t status() const {
    uint32_t s = 0;
    if (!rx_fifo_.empty()) s |= kStatusRxValid;
    if (rx_fifo_.size() >= kFifoDepth) s |= kStatusRxFull;
    if (tx_fifo_.empty()) s |= kStatusTxEmpty;
    if (tx_fifo_.size() >= kFifoDepth) s |= kStatusTxFull;
    return s;
  }

  bool rx_full() const { return rx_fifo_.size() >= kFifoDepth; }
  void rx_push(uint8_t b) { rx_fifo_.push_back(b); }

  bool tx_pop(uint8_t& b) {
    if (tx_fifo_.empty()) return false;
    b = tx_fifo_.front();
    tx_fifo_.pop_front();
    return true;
  }

  bool irq_enabled() const { return irq_enable_; }
  bool rx_irq_line() const { return irq_enable_ && !rx_fifo_.empty(); }
  bool tx_irq_line() const { return irq_enable_ && tx_fifo_.empty(); }
  uint64_t tx_dropped() const { return tx_dropped_; }
  size_t tx_level() const { return tx_fifo_.size(); }
  size_t rx_level() const { return rx_fifo_.size(); }

 private:
  std::deque<uint8_t> rx_fifo_;
  std::deque<uint8_t> tx_fifo_;
  bool irq_enable_ = false;
  uint64_t tx_dropped_ = 0;
};

// ---------------------------------------------------------------------------
// Timer
// ---------------------------------------------------------------------------

/// Down-counter. Registers:
///   0x0 LOAD     reload value
///   0x4 COUNTER  current count (read-only)
///   0x8 CONTROL  bit0 enable (0->1 loads the counter), bit1 auto reload,
///                bit2 irq enable, bit3 pending (read; write 1 to clear)
class Timer0 : public BusPeripheral {
 public:
  static constexpr uint32_t kLoad = 0x0;
  static constexpr uint32_t kCounter = 0x4;
  static constexpr uint32_t kControl = 0x8;

  AccessResult bus_access(uint32_t offset, bool rnw, uint8_t be, uint32_t wdata) override {
    (void)be;
    switch (offset & ~3u) {
      case kLoad:
        if (rnw) return AccessResult{load_, false};
        load_ = wdata;
        return {};
      case kCounter:
        return rnw ? AccessResult{counter_, false} : AccessResult{};
      case kControl:
        if (rnw) {
          uint32_t v = (enable_ ? 1u : 0u) | (auto_reload_ ? 2u : 0u) |
                       (irq_enable_ ? 4u : 0u) | (pending_ ? 8u : 0u);
          return AccessResult{v, false};
        }
        if ((wdata & 1u) && !enable_) counter_ = load_;
        enable_ = wdata & 1u;
        auto_reload_ = wdata & 2u;
        irq_enable_ = wdata & 4u;
        if (wdata & 8u) pending_ = false;
        return {};
      default:
        return rnw ? AccessResult{0, false} : AccessResult{};
    }
  }

  /// One enabled decrement per cycle; pending latches when the counter hits
  /// zero. With auto reload the counter restarts on the following tick.
  void tick() {
    if (!enable_) return;
    if (counter_ == 0) {
      if (auto_reload_) counter_ = load_;
      return;
    }
    if (--counter_ == 0) pending_ = true;
  }

  bool irq_line() const { return pending_ && irq_enable_; }
  uint32_t counter() const { return counter_; }
  bool pending() const { return pending_; }

 private:
  uint32_t load_ = 0;
  uint32_t counter_ = 0;
  bool enable_ = false;
  bool auto_reload_ = false;
  bool irq_enable_ = false;
  bool pending_ = false;
};

// ---------------------------------------------------------------------------
// Interrupt controller
// ---------------------------------------------------------------------------

/// Registers: 0x0 ISR (read), 0x4 IER (read/write), 0x8 IAR (write 1 to
/// clear ISR bits). Line assignment: 0 timer, 1 uart-rx, 2 uart-tx,
/// 3 gpio, 4 emac.
class Intc : public BusPeripheral {
 public:
  static constexpr uint32_t kIsr = 0x0;
  static constexpr uint32_t kIer = 0x4;
  static constexpr uint32_t kIar = 0x8;

  AccessResult bus_access(uint32_t offset, bool rnw, uint8_t be, uint32_t wdata) override {
    (void)be;
    switch (offset & ~3u) {
      case kIsr:
        return rnw ? AccessResult{isr_, false} : AccessResult{};
      case kIer:
        if (rnw) return AccessResult{ier_, false};
        ier_ = wdata;
        return {};
      case kIar:
        if (rnw) return AccessResult{0, false};
        isr_ &= ~wdata;
        return {};
      default:
        return rnw ? AccessResult{0, false} : AccessResult{};
    }
  }

  void aggregate(uint32_t lines) { isr_ |= lines; }
  bool irq_out() const { return (isr_ & ier_) != 0; }
  uint32_t isr() const { return isr_; }
  uint32_t ier() const { return ier_; }

 private:
  uint32_t isr_ = 0;
  uint32_t ier_ = 0;
};

// ---------------------------------------------------------------------------
// GPIO
// ---------------------------------------------------------------------------

/// Registers: 0x0 OUT (rw), 0x4 IN (read), 0x8 DIR (rw), 0xC CTRL bit0
/// irq enable. The irq line pulses when the input word changes.
class Gpio : public BusPeripheral {
 public:
  AccessResult bus_access(uint32_t offset, bool rnw, uint8_t be, uint32_t wdata) override {
    (void)be;
    switch (offset & ~3u) {
      case 0x0:
        if (rnw) return AccessResult{out_, false};
        out_ = wdata;
        return {};
      case 0x4:
        return rnw ? AccessResult{in_, false} : AccessResult{};
      case 0x8:
        if (rnw) return AccessResult{dir_, false};
        dir_ = wdata;
        return {};
      case 0xC:
        if (rnw) return AccessResult{irq_enable_ ? 1u : 0u, false};
        irq_enable_ = wdata & 1u;
        return {};
      default:
        return rnw ? AccessResult{0, false} : AccessResult{};
    }
  }

  void set_inputs(uint32_t v) { in_ = v; }

  void sync() {
    irq_line_ = irq_enable_ && in_ != prev_in_;
    prev_in_ = in_;
  }

  bool irq_line() const { return irq_line_; }
  uint32_t out() const { return out_; }

 private:
  uint32_t out_ = 0;
  uint32_t in_ = 0;
  uint32_t dir_ = 0;
  uint32_t prev_in_ = 0;
  bool irq_enable_ = false;
  bool irq_line_ = false;
};

// ---------------------------------------------------------------------------
// Ethernet MAC register proxy
// ---------------------------------------------------------------------------

/// Plain storage behind the bus interface: 32 words of control registers,
/// no frame traffic.
class EmacProxy : public BusPeripheral {
 public:
  static constexpr uint32_t kRegCount = 32;

  AccessResult bus_access(uint32_t offset, bool rnw, uint8_t be, uint32_t wdata) override {
    (void)be;
    uint32_t index = (offset & ~3u) >> 2;
    if (index >= kRegCount) return rnw ? AccessResult{0, false} : AccessResult{};
    if (rnw) return AccessResult{regs_[index], false};
    regs_[index] = wdata;
    return {};
  }

  uint32_t reg(uint32_t index) const { return regs_[index]; }

 private:
  std::array<uint32_t, kRegCount> regs_{};
};

}  // namespace fidelsim

#endif  // FIDELSIM_PERIPHERALS_HPP
