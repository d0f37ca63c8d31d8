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
// Shared peripheral bus: two masters (CPU data side and instruction side),
// fixed-priority arbitration, and a three-phase transaction protocol.
//
//   cycle T    master asserts req/addr; the controller grants and muxes the
//              request onto the shared lines in the same cycle's deltas
//   cycle T+1  the addressed slave performs the access (plus any wait
//              states) and asserts ack with read data
//   cycle T+2  the master samples ack/rdata and releases req
//
// Every transaction therefore occupies exactly 3 + wait_states cycles.
// Slaves drive the shared ack/rdata/err lines only while responding and
// release them afterwards; in resolved-signal mode a second simultaneous
// driver shows up as X on the line.
//

#ifndef FIDELSIM_BUS_HPP
#define FIDELSIM_BUS_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fidelsim/kernel.hpp"

namespace fidelsim {

enum class BusMaster : uint8_t { DataSide = 0, InstrSide = 1 };

struct BusRequest {
  BusMaster master = BusMaster::DataSide;
  uint32_t addr = 0;
  bool rnw = true;          ///< read-not-write
  uint8_t byte_enables = 0xF;
  uint32_t wdata = 0;
};

/// Result of a register/memory access inside a peripheral.
struct AccessResult {
  uint32_t rdata = 0;
  bool error = false;
};

/// Anything that can sit behind the bus decode: exposes word-granular
/// register access with byte enables (bit i selects the byte at address
/// word_base + i, i.e. bit 0 is the most significant lane).
class BusPeripheral {
 public:
  virtual ~BusPeripheral() = default;
  virtual AccessResult bus_access(uint32_t offset, bool rnw, uint8_t be, uint32_t wdata) = 0;
};

/// Fixed priority: the data side always beats the instruction side.
inline std::optional<BusMaster> arbitrate(bool data_req, bool instr_req) {
  if (data_req) return BusMaster::DataSide;
  if (instr_req) return BusMaster::InstrSide;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Address decode
// ---------------------------------------------------------------------------

struct PeripheralMap {
  struct Entry {
    uint32_t base = 0;
    uint32_t size = 0;
    uint32_t peripheral = 0;
  };

  void add(uint32_t base, uint32_t size, uint32_t peripheral) {
    if (size == 0 || (size & (size - 1)) != 0)
      throw ConfigError("peripheral window size must be a power of two");
    for (const auto& e : entries)
      if (base < e.base + e.size && e.base < base + size)
        throw ConfigError("overlapping peripheral windows");
    entries.push_back(Entry{base, size, peripheral});
  }

  std::optional<uint32_t> decode(uint32_t addr) const {
    for (const auto& e : entries)
      if (addr >= e.base && addr - e.base < e.size) return e.peripheral;
    return std::nullopt;
  }

  const Entry* entry_for(uint32_t peripheral) const {
    for (const auto& e : entries)
      if (e.peripheral == peripheral) return &e;
    return nullptr;
  }

  std::vector<Entry> entries;
};

// ---------------------------------------------------------------------------
// Bus signals
// ---------------------------------------------------------------------------

struct BusSignals {
  // per-master request lines
  SignalId req_d, addr_d, rnw_d, be_d, wdata_d;
  SignalId req_i, addr_i;
  // grant lines
  SignalId gnt_d, gnt_i;
  // shared request lines muxed from the granted master
  SignalId m_addr, m_rnw, m_be, m_wdata;
  // shared response lines driven by the addressed slave
  SignalId s_ack, s_rdata, s_err;

  static BusSignals create(Simulator& sim, SignalMode mode) {
    BusSignals b{};
    b.req_d = sim.add_signal("bus_req_d", 1, mode);
    b.addr_d = sim.add_signal("bus_addr_d", 32, mode);
    b.rnw_d = sim.add_signal("bus_rnw_d", 1, mode);
    b.be_d = sim.add_signal("bus_be_d", 4, mode);
    b.wdata_d = sim.add_signal("bus_wdata_d", 32, mode);
    b.req_i = sim.add_signal("bus_req_i", 1, mode);
    b.addr_i = sim.add_signal("bus_addr_i", 32, mode);
    b.gnt_d = sim.add_signal("bus_gnt_d", 1, mode);
    b.gnt_i = sim.add_signal("bus_gnt_i", 1, mode);
    b.m_addr = sim.add_signal("bus_m_addr", 32, mode);
    b.m_rnw = sim.add_signal("bus_m_rnw", 1, mode);
    b.m_be = sim.add_signal("bus_m_be", 4, mode);
    b.m_wdata = sim.add_signal("bus_m_wdata", 32, mode);
    b.s_ack = sim.add_signal("bus_s_ack", 1, mode);
    b.s_rdata = sim.add_signal("bus_s_rdata", 32, mode);
    b.s_err = sim.add_signal("bus_s_err", 1, mode);
    return b;
  }
};

// ---------------------------------------------------------------------------
// Master-side transaction
// ---------------------------------------------------------------------------

struct TransactResult {
  uint32_t rdata = 0;
  bool bus_error = false;
  uint64_t cycles = 0;  ///< occupied cycles, request to data consumption
  uint64_t grant_to_ack_cycles = 0;  ///< protocol cycles once granted (3 + wait states)
};

/// Drive one transaction from a Multicycle master process. Suspends per
/// cycle until the grant-matched ack is sampled; releases req afterwards.
/// The caller must leave the bus idle for at least one cycle before its
/// next request (the CPU's execute cycle naturally does).
inline SimTask<TransactResult> run_bus_transaction(ProcessContext& ctx, const BusSignals& bus,
                                                   BusRequest req) {
  if (!req.rnw && req.byte_enables == 0)
    throw ConfigError("bus write with empty byte enables");
  if (req.byte_enables == 0xF && (req.addr & 3u))
    throw SimFault(FaultKind::UnalignedAccess,
                   "full-word transfer at 0x" + std::to_string(req.addr));
  uint64_t start = ctx.time().cycle;
  SignalId req_line;
  SignalId gnt_line;
  if (req.master == BusMaster::DataSide) {
    ctx.write(bus.req_d, 1);
    ctx.write(bus.addr_d, req.addr);
    ctx.write(bus.rnw_d, req.rnw ? 1 : 0);
    ctx.write(bus.be_d, req.byte_enables);
    ctx.write(bus.wdata_d, req.wdata);
    req_line = bus.req_d;
    gnt_line = bus.gnt_d;
  } else {
    ctx.write(bus.req_i, 1);
    ctx.write(bus.addr_i, req.addr);
    req_line = bus.req_i;
    gnt_line = bus.gnt_i;
  }
  TransactResult res;
  uint64_t grant_observed = 0;
  while (true) {
    co_await ctx.wait();
    bool granted = ctx.read_bit(gnt_line);
    if (granted && grant_observed == 0) grant_observed = ctx.time().cycle;
    if (granted && ctx.read_bit(bus.s_ack)) break;
  }
  res.bus_error = ctx.read_bit(bus.s_err);
  if (req.rnw && !res.bus_error) res.rdata = static_cast<uint32_t>(ctx.read(bus.s_rdata));
  ctx.write(req_line, 0);
  res.cycles = ctx.time().cycle - start + 1;
  // the grant went high in the cycle before it became observable
  res.grant_to_ack_cycles = ctx.time().cycle - grant_observed + 2;
  co_return res;
}

// ---------------------------------------------------------------------------
// Slave engine
// ---------------------------------------------------------------------------

/// Clock-edge protocol engine shared by every bus slave: latch a granted
/// in-range request, hold for the configured wait states, perform the
/// access, ack for one cycle, release.
class SlaveEngine {
 public:
  SlaveEngine(const BusSignals& bus, BusPeripheral& periph, uint32_t base, uint32_t size,
              uint32_t wait_states, bool read_caching)
      : bus_(bus),
        periph_(periph),
        base_(base),
        size_(size),
        wait_states_(wait_states),
        cached_(read_caching) {}

  void on_dispatch(ProcessContext& ctx) {
    if (!ctx.info().clock_edge) return;
    switch (state_) {
      case State::AckOut:
        ctx.write_release(bus_.s_ack, 0);
        ctx.write_release(bus_.s_err, 0);
        if (drove_rdata_) ctx.write_release(bus_.s_rdata, 0);
        drove_rdata_ = false;
        state_ = State::Idle;
        return;  // no re-latch on the release edge; the grant drops first
      case State::Waiting:
        if (--wait_left_ == 0) respond(ctx);
        return;
      case State::Idle:
        try_latch(ctx);
        return;
    }
  }

  uint32_t wait_states() const { return wait_states_; }

 private:
  enum class State : uint8_t { Idle, Waiting, AckOut };

  void try_latch(ProcessContext& ctx) {
    if (cached_) {
      bool granted = ctx.read_bit(bus_.gnt_d) || ctx.read_bit(bus_.gnt_i);
      if (!granted) return;
      uint32_t addr = static_cast<uint32_t>(ctx.read(bus_.m_addr));
      if (addr < base_ || addr - base_ >= size_) return;
      lat_offset_ = addr - base_;
      lat_rnw_ = ctx.read_bit(bus_.m_rnw);
      lat_be_ = static_cast<uint8_t>(ctx.read(bus_.m_be));
      lat_wdata_ = static_cast<uint32_t>(ctx.read(bus_.m_wdata));
    } else {
      // one port read per use, hardware-description style
      if (!ctx.read_bit(bus_.gnt_d) && !ctx.read_bit(bus_.gnt_i)) return;
      if (static_cast<uint32_t>(ctx.read(bus_.m_addr)) < base_) return;
      if (static_cast<uint32_t>(ctx.read(bus_.m_addr)) - base_ >= size_) return;
      lat_offset_ = static_cast<uint32_t>(ctx.read(bus_.m_addr)) - base_;
      lat_rnw_ = ctx.read_bit(bus_.m_rnw);
      lat_be_ = static_cast<uint8_t>(ctx.read(bus_.m_be));
      lat_wdata_ = static_cast<uint32_t>(ctx.read(bus_.m_wdata));
    }
    if (wait_states_ == 0) {
      respond(ctx);
    } else {
      wait_left_ = wait_states_;
      state_ = State::Waiting;
    }
  }

  void respond(ProcessContext& ctx) {
    AccessResult res = periph_.bus_access(lat_offset_, lat_rnw_, lat_be_, lat_wdata_);
    ctx.write(bus_.s_ack, 1);
    ctx.write(bus_.s_err, res.error ? 1 : 0);
    if (lat_rnw_ && !res.error) {
      ctx.write(bus_.s_rdata, res.rdata);
      drove_rdata_ = true;
    }
    state_ = State::AckOut;
  }

  const BusSignals& bus_;
  BusPeripheral& periph_;
  uint32_t base_, size_, wait_states_;
  bool cached_;

  State state_ = State::Idle;
  uint32_t wait_left_ = 0;
  uint32_t lat_offset_ = 0;
  bool lat_rnw_ = true;
  uint8_t lat_be_ = 0xF;
  uint32_t lat_wdata_ = 0;
  bool drove_rdata_ = false;
};

// ---------------------------------------------------------------------------
// Bus controller (arbiter + mux + direct/error responder)
// ---------------------------------------------------------------------------

enum class RouteKind : uint8_t { Slave, Direct, Error };

/// How a granted address is served: by the addressed slave process, by the
/// controller touching the peripheral directly (gated decode), or by the
/// controller's error responder (unmapped or detached target).
struct BusRoute {
  RouteKind kind = RouteKind::Slave;
  BusPeripheral* periph = nullptr;
  uint32_t base = 0;
  uint32_t wait_states = 0;
};

class BusController {
 public:
  using Router = std::function<BusRoute(uint32_t addr)>;

  BusController(const BusSignals& bus, Router router, bool read_caching)
      : bus_(bus), router_(std::move(router)), cached_(read_caching) {}

  void on_dispatch(ProcessContext& ctx) {
    if (ctx.info().clock_edge && granted_) run_direct_fsm(ctx);

    if (granted_) {
      SignalId req_line = *granted_ == BusMaster::DataSide ? bus_.req_d : bus_.req_i;
      if (!ctx.read_bit(req_line)) drop_grant(ctx);
    }
    if (!granted_) consider_grant(ctx);
  }

  bool idle() const { return !granted_; }
  uint64_t transactions() const { return transactions_; }

 private:
  void run_direct_fsm(ProcessContext& ctx) {
    // Mirrors the SlaveEngine timing exactly: respond on the first edge
    // after the grant (plus wait states), release on the edge after that.
    if (route_.kind == RouteKind::Slave || direct_phase_ == Phase::Done) return;
    switch (direct_phase_) {
      case Phase::Latch:
        if (wait_left_ == 0) {
          respond_direct(ctx);
        } else {
          direct_phase_ = Phase::Waiting;
        }
        return;
      case Phase::Waiting:
        if (--wait_left_ == 0) respond_direct(ctx);
        return;
      case Phase::Release:
        ctx.write_release(bus_.s_ack, 0);
        ctx.write_release(bus_.s_err, 0);
        if (drove_rdata_) ctx.write_release(bus_.s_rdata, 0);
        drove_rdata_ = false;
        direct_phase_ = Phase::Done;
        return;
      case Phase::Done:
        return;
    }
  }

  void respond_direct(ProcessContext& ctx) {
    if (route_.kind == RouteKind::Error) {
      ctx.write(bus_.s_ack, 1);
      ctx.write(bus_.s_err, 1);
    } else {
      AccessResult res =
          route_.periph->bus_access(lat_addr_ - route_.base, lat_rnw_, lat_be_, lat_wdata_);
      ctx.write(bus_.s_ack, 1);
      ctx.write(bus_.s_err, res.error ? 1 : 0);
      if (lat_rnw_ && !res.error) {
        ctx.write(bus_.s_rdata, res.rdata);
        drove_rdata_ = true;
      }
    }
    direct_phase_ = Phase::Release;
  }

  void drop_grant(ProcessContext& ctx) {
    ctx.write(*granted_ == BusMaster::DataSide ? bus_.gnt_d : bus_.gnt_i, 0);
    ctx.write(bus_.m_addr, 0);
    ctx.write(bus_.m_rnw, 0);
    ctx.write(bus_.m_be, 0);
    ctx.write(bus_.m_wdata, 0);
    granted_.reset();
  }

  void consider_grant(ProcessContext& ctx) {
    uint32_t addr;
    bool rnw;
    uint8_t be;
    uint32_t wdata;
    std::optional<BusMaster> g;
    if (cached_) {
      bool d = ctx.read_bit(bus_.req_d);
      bool i = ctx.read_bit(bus_.req_i);
      g = arbitrate(d, i);
      if (!g) return;
      if (*g == BusMaster::DataSide) {
        addr = static_cast<uint32_t>(ctx.read(bus_.addr_d));
        rnw = ctx.read_bit(bus_.rnw_d);
        be = static_cast<uint8_t>(ctx.read(bus_.be_d));
        wdata = static_cast<uint32_t>(ctx.read(bus_.wdata_d));
      } else {
        addr = static_cast<uint32_t>(ctx.read(bus_.addr_i));
        rnw = true;
        be = 0xF;
        wdata = 0;
      }
    } else {
      g = arbitrate(ctx.read_bit(bus_.req_d), ctx.read_bit(bus_.req_i));
      if (!g) return;
      if (*g == BusMaster::DataSide) {
        addr = static_cast<uint32_t>(ctx.read(bus_.addr_d));
        rnw = ctx.read_bit(bus_.rnw_d);
        be = static_cast<uint8_t>(ctx.read(bus_.be_d));
        wdata = static_cast<uint32_t>(ctx.read(bus_.wdata_d));
      } else {
        addr = static_cast<uint32_t>(ctx.read(bus_.addr_i));
        rnw = true;
        be = 0xF;
        wdata = 0;
      }
    }

    granted_ = g;
    ++transactions_;
    ctx.write(*g == BusMaster::DataSide ? bus_.gnt_d : bus_.gnt_i, 1);
    ctx.write(bus_.m_addr, addr);
    ctx.write(bus_.m_rnw, rnw ? 1 : 0);
    ctx.write(bus_.m_be, be);
    ctx.write(bus_.m_wdata, wdata);

    lat_addr_ = addr;
    lat_rnw_ = rnw;
    lat_be_ = be;
    lat_wdata_ = wdata;
    route_ = router_(addr);
    wait_left_ = route_.kind == RouteKind::Slave ? 0 : route_.wait_states;
    direct_phase_ = Phase::Latch;
  }

  enum class Phase : uint8_t { Latch, Waiting, Release, Done };

  const BusSignals& bus_;
  Router router_;
  bool cached_;

  std::optional<BusMaster> granted_;
  BusRoute route_;
  Phase direct_phase_ = Phase::Done;
  uint32_t wait_left_ = 0;
  uint32_t lat_addr_ = 0;
  bool lat_rnw_ = true;
  uint8_t lat_be_ = 0xF;
  uint32_t lat_wdata_ = 0;
  bool drove_rdata_ = false;
  uint64_t transactions_ = 0;
};

}  // namespace fidelsim

#endif  // FIDELSIM_BUS_HPP
