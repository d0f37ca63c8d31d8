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
// The platform: one MR32 core on a dual-master shared bus with RAM, FLASH,
// UART, timer, interrupt controller, GPIO and an Ethernet-MAC register
// proxy.
//
// Memory map (4 KiB windows unless noted):
//   0x0000_0000  RAM (4 MiB default)
//   0x2000_0000  FLASH (1 MiB, read-only on the bus)
//   0x8000_0000  UART
//   0x8000_1000  TIMER
//   0x8000_2000  INTC
//   0x8000_3000  GPIO
//   0x8000_4000  EMAC proxy
//
// Process roster, in registration (= dispatch) order. Processes that share
// plain C++ state (the UART FIFOs, timer registers, intc masks, gpio
// registers) must keep their relative order identical across every
// configuration axis, which this ordering guarantees: the fusion group is
// contiguous and sits after every decode process.
//
//    0 reset_gen       2-cycle power-on reset, then completes
//    1 cpu_exec        the ISS (always Multicycle)
//    2 bus_ctrl        arbiter + request mux + error/gated responder
//    3 ram_slave
//    4 flash_slave
//    5 uart_decode
//    6 uart_tx_drain   multicycle sleep between dispatches
//    7 uart_rx_pump    drains the terminal handoff queue at cycle starts
//    8 timer_decode
//    9 intc_decode
//   10 gpio_decode
//   11 emac_decode
//   12 uart_irq_sync
//   13 timer_tick      \
//   14 intc_aggregate   > fused into one process when fusion is on
//   15 gpio_sync       /
//   16 bus_monitor     samples shared lines; detects conflicts (resolved mode)
//

#ifndef FIDELSIM_SOC_HPP
#define FIDELSIM_SOC_HPP

#include <algorithm>
#include <memory>
#include <string>
#include <vector>

#include "fidelsim/bus.hpp"
#include "fidelsim/config.hpp"
#include "fidelsim/cpu.hpp"
#include "fidelsim/fidelity.hpp"
#include "fidelsim/peripherals.hpp"
#include "fidelsim/terminal.hpp"

namespace fidelsim {

enum PeriphId : uint32_t { kPidRam = 0, kPidFlash, kPidUart, kPidTimer, kPidIntc, kPidGpio, kPidEmac };

inline constexpr uint32_t kRamBase = 0x00000000;
inline constexpr uint32_t kFlashBase = 0x20000000;
inline constexpr uint32_t kFlashSize = 1u << 20;
inline constexpr uint32_t kUartBase = 0x80000000;
inline constexpr uint32_t kTimerBase = 0x80001000;
inline constexpr uint32_t kIntcBase = 0x80002000;
inline constexpr uint32_t kGpioBase = 0x80003000;
inline constexpr uint32_t kEmacBase = 0x80004000;
inline constexpr uint32_t kPeriphWindow = 0x1000;

/// INTC line assignment.
enum IrqLine : uint32_t {
  kIrqTimer = 0,
  kIrqUartRx = 1,
  kIrqUartTx = 2,
  kIrqGpio = 3,
  kIrqEmac = 4,
  kIrqLineCount = 5,
};

struct PlatformOptions {
  FidelityConfig fidelity;
  uint32_t ram_size = 4u << 20;
  uint32_t flash_size = kFlashSize;
  uint32_t ram_wait_states = 0;  ///< 0..7 extra cycles per RAM bus access
  std::vector<uint32_t> gated = {kPidFlash, kPidGpio, kPidEmac};
  uint32_t delta_limit = 1000;
  ByteEndpoint* terminal = nullptr;  ///< defaults to an internal CaptureEndpoint
};

class Platform {
 public:
  explicit Platform(PlatformOptions opt)
      : opt_(std::move(opt)),
        sim_(Simulator::Options{opt_.delta_limit}),
        ram_(opt_.ram_size),
        flash_(opt_.flash_size),
        dispatcher_(DirectMemory(ram_, kRamBase, flash_, kFlashBase)) {
    opt_.fidelity.normalize();
    if (opt_.ram_wait_states > 7) throw ConfigError("ram_wait_states must be 0..7");
    if (opt_.fidelity.uart_tx_sleep < 1) throw ConfigError("uart_tx_sleep must be >= 1");
    cfg_ = opt_.fidelity;
    endpoint_ = opt_.terminal ? opt_.terminal : &default_endpoint_;

    build_map();
    build_signals();
    build_processes();
    apply_mode_effects();
    sim_.add_cycle_hook([this] { on_cycle_start(); });
  }

  Platform(const Platform&) = delete;
  Platform& operator=(const Platform&) = delete;

  // -- run control -------------------------------------------------------------

  struct RunResult {
    uint64_t cycles = 0;
    bool halted = false;
    std::optional<CpuFaultInfo> fault;
  };

  /// Run until the core halts or the budget is exhausted.
  RunResult run(uint64_t max_cycles) {
    uint64_t start = sim_.now().cycle;
    while (!cpu_->state.halted && sim_.now().cycle - start < max_cycles) sim_.advance_cycle();
    return RunResult{sim_.now().cycle - start, cpu_->state.halted, cpu_->state.fault};
  }

  /// After a halt, keep cycling until the UART TX FIFO is flushed to the
  /// endpoint (the drain process wakes every uart_tx_sleep cycles).
  void drain_uart(uint64_t max_cycles = 0) {
    if (max_cycles == 0) max_cycles = cfg_.uart_tx_sleep * (Uart::kFifoDepth + 4);
    for (uint64_t i = 0; i < max_cycles && uart_.tx_level() > 0; ++i) sim_.advance_cycle();
  }

  // -- fidelity ----------------------------------------------------------------

  const FidelityConfig& fidelity() const { return cfg_; }

  /// Request a runtime mode change. Applied at the next cycle boundary on
  /// which the bus is idle; a transaction in flight completes under the old
  /// mode. Returns the configuration that will be in effect.
  FidelityConfig set_fidelity(const FidelityDelta& delta) {
    queue_toggle(ToggleEvent{sim_.now().cycle, delta});
    return project_config(delta);
  }

  void queue_toggle(const ToggleEvent& ev) {
    validate_delta(ev.delta);
    toggles_.push_back(ev);
    std::stable_sort(toggles_.begin(), toggles_.end(),
                     [](const ToggleEvent& a, const ToggleEvent& b) { return a.cycle < b.cycle; });
  }

  /// Gated direct-access classification (meaningful while gating is on).
  std::optional<uint32_t> gated_access_check(uint32_t addr) const {
    if (!cfg_.peripheral_gating) return std::nullopt;
    auto id = map_.decode(addr);
    if (id && is_gated(*id)) return id;
    return std::nullopt;
  }

  // -- component access --------------------------------------------------------

  Simulator& sim() { return sim_; }
  const Simulator& sim() const { return sim_; }
  Cpu& cpu() { return *cpu_; }
  const Cpu& cpu() const { return *cpu_; }
  Ram& ram() { return ram_; }
  Flash& flash() { return flash_; }
  Uart& uart() { return uart_; }
  Timer0& timer() { return timer_; }
  Intc& intc() { return intc_; }
  Gpio& gpio() { return gpio_; }
  EmacProxy& emac() { return emac_; }
  Dispatcher& dispatcher() { return dispatcher_; }
  InterceptRegistry& intercepts() { return intercepts_; }
  const PeripheralMap& map() const { return map_; }
  const BusSignals& bus() const { return bus_; }
  BusController& bus_controller() { return *controller_; }
  CaptureEndpoint& capture() { return default_endpoint_; }
  ByteEndpoint& endpoint() { return *endpoint_; }
  SignalId irq_line_signal(uint32_t line) const { return irq_lines_[line]; }
  SignalId irq_out_signal() const { return sig_irq_out_; }

  /// Default traced pin set: bus request/grant/mux/response lines plus the
  /// five interrupt lines and the aggregated irq output.
  std::vector<SignalId> traced_pins() const {
    return {bus_.req_d, bus_.req_i,  bus_.gnt_d,   bus_.gnt_i,  bus_.m_addr,   bus_.m_rnw,
            bus_.m_be,  bus_.m_wdata, bus_.s_ack,  bus_.s_rdata, bus_.s_err,   irq_lines_[0],
            irq_lines_[1], irq_lines_[2], irq_lines_[3], irq_lines_[4], sig_irq_out_};
  }

  std::optional<uint32_t> decode_address(uint32_t addr) const { return map_.decode(addr); }

 private:
  void build_map() {
    map_.add(kRamBase, opt_.ram_size, kPidRam);
    map_.add(kFlashBase, opt_.flash_size, kPidFlash);
    map_.add(kUartBase, kPeriphWindow, kPidUart);
    map_.add(kTimerBase, kPeriphWindow, kPidTimer);
    map_.add(kIntcBase, kPeriphWindow, kPidIntc);
    map_.add(kGpioBase, kPeriphWindow, kPidGpio);
    map_.add(kEmacBase, kPeriphWindow, kPidEmac);
  }

  void build_signals() {
    SignalMode mode = cfg_.signal_mode;
    sig_reset_n_ = sim_.add_signal("reset_n", 1, mode);
    bus_ = BusSignals::create(sim_, mode);
    static const char* names[kIrqLineCount] = {"irq_timer", "irq_uart_rx", "irq_uart_tx",
                                               "irq_gpio", "irq_emac"};
    for (uint32_t i = 0; i < kIrqLineCount; ++i)
      irq_lines_[i] = sim_.add_signal(names[i], 1, mode);
    sig_irq_out_ = sim_.add_signal("irq_out", 1, mode);
  }

  BusPeripheral* periph(uint32_t id) {
    switch (id) {
      case kPidRam: return &ram_;
      case kPidFlash: return &flash_;
      case kPidUart: return &uart_;
      case kPidTimer: return &timer_;
      case kPidIntc: return &intc_;
      case kPidGpio: return &gpio_;
      case kPidEmac: return &emac_;
    }
    return nullptr;
  }

  bool is_gated(uint32_t id) const {
    return std::find(opt_.gated.begin(), opt_.gated.end(), id) != opt_.gated.end();
  }

  void build_processes() {
    bool caching = cfg_.port_read_caching;

    // 0: power-on reset
    sim_.register_process("reset_gen", ProcessKind::Multicycle, Sensitivity::clocked(),
                          MulticycleBody([this](ProcessContext& ctx) -> SimTask<void> {
                            ctx.write(sig_reset_n_, 0);
                            co_await ctx.wait(2);
                            ctx.write(sig_reset_n_, 1);
                            co_return;
                          }));

    // 1: the core
    cpu_ = std::make_unique<Cpu>(cfg_, dispatcher_, intercepts_,
                                 Cpu::Wiring{&bus_, sig_irq_out_, sig_reset_n_});
    sim_.register_process("cpu_exec", ProcessKind::Multicycle, Sensitivity::clocked(),
                          MulticycleBody([this](ProcessContext& ctx) { return cpu_->body(ctx); }));

    // 2: bus controller
    controller_ = std::make_unique<BusController>(
        bus_, [this](uint32_t addr) { return route(addr); }, caching);
    register_flexible("bus_ctrl", Sensitivity::clocked_and({bus_.req_d, bus_.req_i}),
                      [this](ProcessContext& ctx) { controller_->on_dispatch(ctx); });

    // 3..11: bus slaves (decode units, scheduled every cycle)
    auto add_slave = [&](const std::string& name, uint32_t id, uint32_t ws) {
      auto engine = std::make_unique<SlaveEngine>(bus_, *periph(id),
                                                  map_.entry_for(id)->base,
                                                  map_.entry_for(id)->size, ws, caching);
      SlaveEngine* eng = engine.get();
      slave_engines_.push_back(std::move(engine));
      ProcessId pid = sim_.register_process(
          name, ProcessKind::Multicycle, Sensitivity::clocked(),
          MulticycleBody([eng](ProcessContext& ctx) -> SimTask<void> {
            while (true) {
              eng->on_dispatch(ctx);
              co_await ctx.wait();
            }
          }));
      slave_pids_[id] = pid;
    };
    add_slave("ram_slave", kPidRam, opt_.ram_wait_states);
    add_slave("flash_slave", kPidFlash, 0);
    add_slave("uart_decode", kPidUart, 0);

    // 6: TX drain, one byte per dispatch, multicycle sleep between bursts
    sim_.register_process("uart_tx_drain", ProcessKind::Multicycle, Sensitivity::clocked(),
                          MulticycleBody([this](ProcessContext& ctx) -> SimTask<void> {
                            while (true) {
                              uint8_t b;
                              if (uart_.tx_pop(b)) endpoint_->on_tx(b);
                              co_await ctx.wait(cfg_.uart_tx_sleep);
                            }
                          }));

    // 7: RX pump, cycle-boundary handoff into the FIFO
    register_flexible("uart_rx_pump", Sensitivity::clocked(), [this](ProcessContext& ctx) {
      while (!uart_.rx_full()) {
        auto b = endpoint_->next_rx(ctx.time().cycle);
        if (!b) break;
        uart_.rx_push(*b);
      }
    });

    add_slave("timer_decode", kPidTimer, 0);
    add_slave("intc_decode", kPidIntc, 0);
    add_slave("gpio_decode", kPidGpio, 0);
    add_slave("emac_decode", kPidEmac, 0);

    // 12: UART interrupt lines
    register_flexible("uart_irq_sync", Sensitivity::clocked(), [this](ProcessContext& ctx) {
      ctx.write(irq_lines_[kIrqUartRx], uart_.rx_irq_line() ? 1 : 0);
      ctx.write(irq_lines_[kIrqUartTx], uart_.tx_irq_line() ? 1 : 0);
    });

    // 13..15: the synchronous single-cycle group (fusion candidates)
    SingleShotBody timer_tick = [this](ProcessContext& ctx) {
      timer_.tick();
      ctx.write(irq_lines_[kIrqTimer], timer_.irq_line() ? 1 : 0);
    };
    SingleShotBody intc_aggregate = [this](ProcessContext& ctx) {
      uint32_t lines = 0;
      for (uint32_t i = 0; i < kIrqLineCount; ++i)
        if (ctx.read_bit(irq_lines_[i])) lines |= 1u << i;
      intc_.aggregate(lines);
      ctx.write(sig_irq_out_, intc_.irq_out() ? 1 : 0);
    };
    SingleShotBody gpio_sync = [this](ProcessContext& ctx) {
      gpio_.sync();
      ctx.write(irq_lines_[kIrqGpio], gpio_.irq_line() ? 1 : 0);
    };
    if (cfg_.process_fusion) {
      sim_.register_fused("tick_group", flexible_kind(), Sensitivity::clocked(),
                          {timer_tick, intc_aggregate, gpio_sync});
    } else {
      register_flexible("timer_tick", Sensitivity::clocked(), timer_tick);
      register_flexible("intc_aggregate", Sensitivity::clocked(), intc_aggregate);
      register_flexible("gpio_sync", Sensitivity::clocked(), gpio_sync);
    }

    // 16: shared-line monitor
    register_flexible("bus_monitor", Sensitivity::clocked(), [this](ProcessContext& ctx) {
      const SignalId watched[7] = {bus_.s_ack,  bus_.s_err, bus_.s_rdata, bus_.m_addr,
                                   bus_.m_rnw,  bus_.m_be,  bus_.m_wdata};
      if (cfg_.signal_mode == SignalMode::Resolved4) {
        for (SignalId sig : watched) {
          LogicVec v = ctx.read_logic(sig);
          if (v.has_x())
            throw SimFault(FaultKind::BusConflict, "X on shared line '" +
                                                       sim_.signal_name(sig) + "' at cycle " +
                                                       std::to_string(ctx.time().cycle));
        }
      } else {
        for (SignalId sig : watched) (void)ctx.read(sig);
      }
    });
  }

  ProcessKind flexible_kind() const {
    return cfg_.process_style == ProcessStyle::MethodsWherePossible ? ProcessKind::SingleShot
                                                                    : ProcessKind::Multicycle;
  }

  /// Register a single-cycle run-to-completion body as a method or as a
  /// wrapped thread, depending on the process-style axis.
  ProcessId register_flexible(const std::string& name, Sensitivity sens, SingleShotBody body) {
    if (cfg_.process_style == ProcessStyle::MethodsWherePossible)
      return sim_.register_process(name, ProcessKind::SingleShot, std::move(sens),
                                   std::move(body));
    return sim_.register_process(
        name, ProcessKind::Multicycle, std::move(sens),
        MulticycleBody([body = std::move(body)](ProcessContext& ctx) -> SimTask<void> {
          while (true) {
            body(ctx);
            co_await ctx.wait();
          }
        }));
  }

  BusRoute route(uint32_t addr) {
    auto id = map_.decode(addr);
    if (!id) return BusRoute{RouteKind::Error};
    if (*id == kPidRam && !dispatcher_.attached) return BusRoute{RouteKind::Error};
    if (cfg_.peripheral_gating && is_gated(*id)) {
      const auto* e = map_.entry_for(*id);
      return BusRoute{RouteKind::Direct, periph(*id), e->base, slave_wait_states(*id)};
    }
    return BusRoute{RouteKind::Slave};
  }

  uint32_t slave_wait_states(uint32_t id) const {
    return id == kPidRam ? opt_.ram_wait_states : 0;
  }

  // -- runtime toggles ----------------------------------------------------------

  void validate_delta(const FidelityDelta& delta) const {
    if (delta.ifetch_dispatch && !*delta.ifetch_dispatch && delta.data_dispatch &&
        *delta.data_dispatch)
      throw ConfigError("cannot disable ifetch_dispatch while enabling data_dispatch");
  }

  FidelityConfig project_config(const FidelityDelta& delta) const {
    FidelityConfig next = cfg_;
    apply_delta_fields(next, delta);
    return next;
  }

  static void apply_delta_fields(FidelityConfig& cfg, const FidelityDelta& delta) {
    if (delta.ifetch_dispatch) cfg.ifetch_dispatch = *delta.ifetch_dispatch;
    if (delta.data_dispatch) cfg.data_dispatch = *delta.data_dispatch;
    if (delta.peripheral_gating) cfg.peripheral_gating = *delta.peripheral_gating;
    if (delta.interception) cfg.interception = *delta.interception;
    // turning the instruction dispatcher off takes the data dispatcher with it
    if (delta.ifetch_dispatch && !*delta.ifetch_dispatch &&
        !(delta.data_dispatch && *delta.data_dispatch))
      cfg.data_dispatch = false;
    cfg.normalize();
  }

  bool bus_idle() const {
    return controller_->idle() && sim_.signal_peek(bus_.req_d) == 0 &&
           sim_.signal_peek(bus_.req_i) == 0;
  }

  void on_cycle_start() {
    if (toggles_.empty()) return;
    uint64_t now = sim_.now().cycle;
    while (!toggles_.empty() && toggles_.front().cycle <= now) {
      if (!bus_idle()) return;  // retry at the next boundary
      apply_delta_fields(cfg_, toggles_.front().delta);
      toggles_.erase(toggles_.begin());
      apply_mode_effects();
    }
  }

  void apply_mode_effects() {
    dispatcher_.attached = !cfg_.data_dispatch;
    sim_.set_process_enabled(slave_pids_[kPidRam], dispatcher_.attached);
    for (uint32_t id : {kPidFlash, kPidUart, kPidTimer, kPidIntc, kPidGpio, kPidEmac}) {
      bool gate = cfg_.peripheral_gating && is_gated(id);
      sim_.set_process_enabled(slave_pids_[id], !gate);
    }
  }

  PlatformOptions opt_;
  Simulator sim_;
  FidelityConfig cfg_;

  Ram ram_;
  Flash flash_;
  Uart uart_;
  Timer0 timer_;
  Intc intc_;
  Gpio gpio_;
  EmacProxy emac_;
  PeripheralMap map_;

  Dispatcher dispatcher_;
  InterceptRegistry intercepts_;

  CaptureEndpoint default_endpoint_;
  ByteEndpoint* endpoint_ = nullptr;

  SignalId sig_reset_n_ = 0;
  BusSignals bus_{};
  SignalId irq_lines_[kIrqLineCount] = {};
  SignalId sig_irq_out_ = 0;

  std::unique_ptr<Cpu> cpu_;
  std::unique_ptr<BusController> controller_;
  std::vector<std::unique_ptr<SlaveEngine>> slave_engines_;
  ProcessId slave_pids_[7] = {};

  std::vector<ToggleEvent> toggles_;
};

}  // namespace fidelsim

#endif  // FIDELSIM_SOC_HPP
