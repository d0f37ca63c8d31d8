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
// Deterministic discrete-event kernel with evaluate/update signal semantics.
//
// A simulation is a set of processes communicating through signals. Within
// one clock cycle the kernel runs an evaluate phase (dispatching every
// triggered process), then applies all pending signal writes in one update
// phase. Updates that change a signal's value trigger sensitive processes
// in a new delta: evaluate/update pairs repeat in zero simulated time until
// the cycle settles. Reads always observe the value from the last completed
// update phase, never a same-phase write.
//
// Two process kinds exist. A SingleShot process is a plain callback that
// runs to completion on every dispatch. A Multicycle process is a C++20
// coroutine that may suspend at wait points, including multi-cycle sleeps.
// Both are dispatched in ascending process-id order inside a phase, and
// pending writes are applied in ascending signal-id order, so runs with a
// fixed configuration are bit-reproducible.
//

#ifndef FIDELSIM_KERNEL_HPP
#define FIDELSIM_KERNEL_HPP

#include <algorithm>
#include <coroutine>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fidelsim/fault.hpp"
#include "fidelsim/logic.hpp"

namespace fidelsim {

using SignalId = uint32_t;
using ProcessId = uint32_t;

/// Writer id used for pokes coming from outside any process (test benches,
/// loaders, terminal glue).
inline constexpr uint32_t kExternalWriter = 0xFFFFFFFFu;

struct SimTime {
  uint64_t cycle = 0;
  uint32_t delta = 0;
  auto operator<=>(const SimTime&) const = default;
};

enum class SignalMode : uint8_t { Resolved4, Native };
enum class ProcessKind : uint8_t { Multicycle, SingleShot };

/// What a process is dispatched on: the kernel clock, a set of signals,
/// or both. The clock is a kernel primitive, not a signal.
struct Sensitivity {
  bool clock = false;
  std::vector<SignalId> signals;

  static Sensitivity clocked() { return Sensitivity{true, {}}; }
  static Sensitivity on_signals(std::vector<SignalId> sigs) {
    return Sensitivity{false, std::move(sigs)};
  }
  static Sensitivity clocked_and(std::vector<SignalId> sigs) {
    return Sensitivity{true, std::move(sigs)};
  }
};

struct KernelStats {
  uint64_t processes_dispatched = 0;
  uint64_t delta_cycles_run = 0;
  uint64_t signal_updates = 0;
  uint64_t cycles_simulated = 0;
};

/// Mode-independent view of a signal value as recorded in traces.
/// `bits` holds driven-high levels; `x`/`z` flag unknown and released bits
/// (always zero for native-mode signals and for resolved runs that never
/// produce a conflict).
struct TraceValue {
  uint64_t bits = 0;
  uint64_t x = 0;
  uint64_t z = 0;
  bool operator==(const TraceValue&) const = default;
};

/// Receives value-change records from the kernel, ordered by (cycle, delta)
/// and by signal id within one update phase.
class TraceSink {
 public:
  virtual ~TraceSink() = default;
  virtual void on_change(SimTime t, SignalId sig, const TraceValue& v) = 0;
};

// ---------------------------------------------------------------------------
// Coroutine task type for Multicycle process bodies.
// ---------------------------------------------------------------------------

template <typename T>
class SimTask;

namespace detail {

struct PromiseBase {
  std::coroutine_handle<> continuation;
  std::exception_ptr error;
};

struct FinalAwaiter {
  bool await_ready() noexcept { return false; }
  template <typename P>
  std::coroutine_handle<> await_suspend(std::coroutine_handle<P> h) noexcept {
    auto cont = h.promise().continuation;
    return cont ? cont : std::coroutine_handle<>(std::noop_coroutine());
  }
  void await_resume() noexcept {}
};

template <typename T>
struct SimPromise : PromiseBase {
  T value{};
  SimTask<T> get_return_object();
  std::suspend_always initial_suspend() noexcept { return {}; }
  FinalAwaiter final_suspend() noexcept { return {}; }
  void return_value(T v) { value = std::move(v); }
  void unhandled_exception() { error = std::current_exception(); }
};

template <>
struct SimPromise<void> : PromiseBase {
  SimTask<void> get_return_object();
  std::suspend_always initial_suspend() noexcept { return {}; }
  FinalAwaiter final_suspend() noexcept { return {}; }
  void return_void() {}
  void unhandled_exception() { error = std::current_exception(); }
};

}  // namespace detail

/// Lazily started coroutine task. Awaiting a task transfers control into it;
/// when the task completes, control returns to the awaiter. Used both for
/// top-level Multicycle process bodies and for multi-cycle helper routines
/// (e.g. a bus transaction) nested inside them.
template <typename T = void>
class SimTask {
 public:
  using promise_type = detail::SimPromise<T>;
  using handle_type = std::coroutine_handle<promise_type>;

  SimTask() = default;
  explicit SimTask(handle_type h) : h_(h) {}
  SimTask(SimTask&& other) noexcept : h_(std::exchange(other.h_, {})) {}
  SimTask& operator=(SimTask&& other) noexcept {
    if (this != &other) {
      if (h_) h_.destroy();
      h_ = std::exchange(other.h_, {});
    }
    return *this;
  }
  SimTask(const SimTask&) = delete;
  SimTask& operator=(const SimTask&) = delete;
  ~SimTask() {
    if (h_) h_.destroy();
  }

  handle_type handle() const { return h_; }
  bool valid() const { return static_cast<bool>(h_); }
  bool done() const { return h_.done(); }

  void rethrow_if_error() const {
    if (h_ && h_.promise().error) std::rethrow_exception(h_.promise().error);
  }

  struct Awaiter {
    handle_type child;
    bool await_ready() const noexcept { return !child || child.done(); }
    std::coroutine_handle<> await_suspend(std::coroutine_handle<> parent) noexcept {
      child.promise().continuation = parent;
      return child;
    }
    T await_resume() {
      if (child.promise().error) std::rethrow_exception(child.promise().error);
      if constexpr (!std::is_void_v<T>) return std::move(child.promise().value);
    }
  };

  Awaiter operator co_await() const& { return Awaiter{h_}; }

 private:
  handle_type h_;
};

namespace detail {
template <typename T>
SimTask<T> SimPromise<T>::get_return_object() {
  return SimTask<T>(std::coroutine_handle<SimPromise<T>>::from_promise(*this));
}
inline SimTask<void> SimPromise<void>::get_return_object() {
  return SimTask<void>(std::coroutine_handle<SimPromise<void>>::from_promise(*this));
}
}  // namespace detail

class Simulator;
class ProcessContext;

/// Why a process body is currently running.
struct DispatchInfo {
  SimTime time;
  bool clock_edge = false;  ///< true for cycle-boundary dispatches (clock, wake, init)
};

namespace detail {
/// Awaitable returned by ProcessContext::wait(): parks the suspending
/// coroutine handle in the kernel until the process is dispatched again.
struct WaitAwaiter {
  Simulator* sim;
  ProcessId pid;
  uint64_t cycles;    // 0 = next delta, 1+ = sleep; ignored in trigger mode
  bool trigger_mode;  // wait for the process sensitivity instead of a count
  bool await_ready() const noexcept { return false; }
  void await_suspend(std::coroutine_handle<> h) const;
  void await_resume() const noexcept {}
};
}  // namespace detail

/// Per-process facade handed to every body: signal access attributed to the
/// owning process, wait/sleep primitives and the current dispatch info.
class ProcessContext {
 public:
  ProcessContext(Simulator& sim, ProcessId self) : sim_(sim), self_(self) {}

  ProcessId self() const { return self_; }
  const DispatchInfo& info() const { return info_; }
  SimTime time() const { return info_.time; }

  uint64_t read(SignalId sig) const;
  bool read_bit(SignalId sig) const;
  LogicVec read_logic(SignalId sig) const;

  void write(SignalId sig, uint64_t value) const;
  void write_logic(SignalId sig, const LogicVec& value) const;
  /// Drive `final_value` for this delta, then stop driving the signal.
  /// The signal keeps the final resolved value until someone drives it again.
  void write_release(SignalId sig, uint64_t final_value) const;

  /// Suppress dispatch of this process for n cycles (next_trigger-style,
  /// usable from SingleShot bodies). n == 0 requests a next-delta retrigger.
  void sleep(uint64_t n) const;

  /// Suspend until the next dispatch selected by this process' sensitivity.
  detail::WaitAwaiter wait() const { return {&sim_, self_, 0, true}; }
  /// Suspend for n cycles (n == 0: resume in the next delta).
  detail::WaitAwaiter wait(uint64_t n) const { return {&sim_, self_, n, false}; }

  Simulator& sim() const { return sim_; }

 private:
  friend class Simulator;
  Simulator& sim_;
  ProcessId self_;
  DispatchInfo info_{};
};

using SingleShotBody = std::function<void(ProcessContext&)>;
using MulticycleBody = std::function<SimTask<void>(ProcessContext&)>;

// ---------------------------------------------------------------------------
// Simulator
// ---------------------------------------------------------------------------

class Simulator {
 public:
  struct Options {
    uint32_t delta_limit = 1000;  ///< max evaluate phases per cycle
  };

  Simulator() : Simulator(Options{}) {}
  explicit Simulator(Options opt) : opt_(opt) {}

  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  // -- construction surface --------------------------------------------------

  SignalId add_signal(const std::string& name, unsigned width, SignalMode mode) {
    if (width < 1 || width > 64)
      throw ConfigError("signal '" + name + "': width must be 1..64");
    if (signal_names_.count(name))
      throw ConfigError("duplicate signal name '" + name + "'");
    SignalId id = static_cast<SignalId>(signals_.size());
    signals_.push_back(std::make_unique<SignalCell>(name, width, mode));
    signal_names_.emplace(name, id);
    return id;
  }

  ProcessId register_process(const std::string& name, ProcessKind kind, Sensitivity sens,
                             SingleShotBody body) {
    if (kind != ProcessKind::SingleShot)
      throw ConfigError("process '" + name + "': plain callable bodies are SingleShot");
    ProcessId pid = register_common(name, kind, std::move(sens));
    procs_[pid]->single_body = std::move(body);
    return pid;
  }

  ProcessId register_process(const std::string& name, ProcessKind kind, Sensitivity sens,
                             MulticycleBody body) {
    if (kind != ProcessKind::Multicycle)
      throw ConfigError("process '" + name + "': coroutine bodies are Multicycle");
    ProcessId pid = register_common(name, kind, std::move(sens));
    Process& p = *procs_[pid];
    // The closure must outlive the coroutine frame it creates, so park the
    // callable in the process record before starting the body.
    p.multi_body = std::move(body);
    p.task = p.multi_body(*p.ctx);
    if (!p.task.valid())
      throw ConfigError("process '" + name + "': body produced no coroutine");
    p.parked = p.task.handle();
    return pid;
  }

  /// Combine several run-to-completion bodies into one process dispatched by
  /// a shared sensitivity; children run in list order. Cuts per-cycle
  /// scheduling work when neighbouring processes share a trigger.
  ProcessId register_fused(const std::string& name, ProcessKind kind, Sensitivity sens,
                           std::vector<SingleShotBody> children) {
    if (children.empty()) throw ConfigError("fused process '" + name + "' has no children");
    ProcessId pid = register_common(name, kind, std::move(sens));
    Process& p = *procs_[pid];
    p.fused_children = std::move(children);
    if (kind == ProcessKind::Multicycle) {
      p.multi_body = [&p](ProcessContext& ctx) -> SimTask<void> {
        while (true) {
          for (auto& child : p.fused_children) child(ctx);
          co_await ctx.wait();
        }
      };
      p.task = p.multi_body(*p.ctx);
      p.parked = p.task.handle();
    }
    return pid;
  }

  void set_process_enabled(ProcessId pid, bool enabled) {
    check_pid(pid);
    procs_[pid]->enabled = enabled;
  }
  bool process_enabled(ProcessId pid) const {
    check_pid(pid);
    return procs_[pid]->enabled;
  }

  /// Hooks run at the start of every cycle, before the first evaluate phase.
  void add_cycle_hook(std::function<void()> hook) { cycle_hooks_.push_back(std::move(hook)); }

  void set_trace(TraceSink* sink, const std::vector<SignalId>& traced) {
    sink_ = sink;
    for (auto& cell : signals_) cell->traced = false;
    for (SignalId id : traced) {
      check_sid(id);
      signals_[id]->traced = true;
    }
  }

  // -- signal access ----------------------------------------------------------

  uint64_t signal_read(SignalId sig, bool count = true) {
    SignalCell& c = cell(sig);
    if (count) ++c.reads;
    if (c.mode == SignalMode::Native) return c.cur_word;
    try {
      return c.cur_vec.to_word();
    } catch (const SimFault&) {
      throw SimFault(FaultKind::UnknownValue,
                     "unknown value crossed datapath on signal '" + c.name + "' (" +
                         c.cur_vec.to_string() + ")");
    }
  }

  bool signal_read_bit(SignalId sig) { return signal_read(sig) != 0; }

  LogicVec signal_read_logic(SignalId sig, bool count = true) {
    SignalCell& c = cell(sig);
    if (count) ++c.reads;
    if (c.mode == SignalMode::Native) return LogicVec::from_word(c.width, c.cur_word);
    return c.cur_vec;
  }

  void signal_write(SignalId sig, uint64_t value, uint32_t writer) {
    SignalCell& c = cell(sig);
    if (c.mode == SignalMode::Native) {
      c.pend_word = value & c.mask;
      queue_update(sig, c);
      return;
    }
    driver_slot(c, writer).assign(LogicVec::from_word(c.width, value), false);
    queue_update(sig, c);
  }

  void signal_write_logic(SignalId sig, const LogicVec& value, uint32_t writer) {
    SignalCell& c = cell(sig);
    if (value.width() != c.width)
      throw ConfigError("width mismatch writing signal '" + c.name + "'");
    if (c.mode == SignalMode::Native) {
      c.pend_word = value.to_word() & c.mask;  // faults on X/Z by design
      queue_update(sig, c);
      return;
    }
    driver_slot(c, writer).assign(value, false);
    queue_update(sig, c);
  }

  /// Drive a final value for one update, then drop the writer's driver slot.
  /// The resolved value persists (bus-keeper behaviour) until re-driven.
  void signal_write_release(SignalId sig, uint64_t final_value, uint32_t writer) {
    SignalCell& c = cell(sig);
    if (c.mode == SignalMode::Native) {
      c.pend_word = final_value & c.mask;
      queue_update(sig, c);
      return;
    }
    driver_slot(c, writer).assign(LogicVec::from_word(c.width, final_value), true);
    queue_update(sig, c);
  }

  /// Uncounted, never-faulting view of the current value (Z/X project to 0).
  /// For infrastructure probes, not for model datapaths.
  uint64_t signal_peek(SignalId sig) const {
    check_sid(sig);
    const SignalCell& c = *signals_[sig];
    if (c.mode == SignalMode::Native) return c.cur_word;
    return c.cur_vec.project_to_word();
  }

  uint64_t signal_reads(SignalId sig) const {
    check_sid(sig);
    return signals_[sig]->reads;
  }
  unsigned signal_width(SignalId sig) const {
    check_sid(sig);
    return signals_[sig]->width;
  }
  const std::string& signal_name(SignalId sig) const {
    check_sid(sig);
    return signals_[sig]->name;
  }
  SignalId signal_by_name(const std::string& name) const {
    auto it = signal_names_.find(name);
    if (it == signal_names_.end())
      throw SimFault(FaultKind::UnknownSignal, "no signal named '" + name + "'");
    return it->second;
  }
  TraceValue signal_trace_value(SignalId sig) const {
    check_sid(sig);
    return make_trace_value(*signals_[sig]);
  }

  // -- process control --------------------------------------------------------

  void sleep_for(ProcessId pid, uint64_t n) {
    check_pid(pid);
    Process& p = *procs_[pid];
    if (n == 0) {
      retrigger_.push_back(pid);
      return;
    }
    p.sleep_until = time_.cycle + n;
  }

  uint64_t process_dispatches(ProcessId pid) const {
    check_pid(pid);
    return procs_[pid]->dispatches;
  }
  const std::string& process_name(ProcessId pid) const {
    check_pid(pid);
    return procs_[pid]->name;
  }
  ProcessId process_by_name(const std::string& name) const {
    auto it = process_names_.find(name);
    if (it == process_names_.end()) throw ConfigError("no process named '" + name + "'");
    return it->second;
  }
  size_t process_count() const { return procs_.size(); }

  // -- simulation loop ---------------------------------------------------------

  SimTime now() const { return time_; }
  const KernelStats& stats() const { return stats_; }
  uint32_t deltas_last_cycle() const { return deltas_last_cycle_; }

  /// Run one full clock cycle: evaluate, then alternate update/evaluate
  /// deltas until the cycle settles. Returns the new time.
  SimTime advance_cycle() {
    if (running_) throw ConfigError("advance_cycle is not reentrant");
    running_ = true;
    struct Guard {
      bool& flag;
      ~Guard() { flag = false; }
    } guard{running_};

    for (auto& hook : cycle_hooks_) hook();

    time_.delta = 0;
    build_cycle_start_triggers();

    uint32_t deltas = 0;
    while (true) {
      ++deltas;
      if (deltas > opt_.delta_limit)
        throw SimFault(FaultKind::DeltaOverflow,
                       "cycle " + std::to_string(time_.cycle) + " exceeded " +
                           std::to_string(opt_.delta_limit) +
                           " deltas; combinational loop suspected");
      ++stats_.delta_cycles_run;
      dispatch_triggered();

      next_trig_.assign(words_for(procs_.size()), 0);
      bool any_next = apply_updates();
      for (ProcessId pid : retrigger_) {
        if (dispatchable(pid)) {
          set_bit(next_trig_, pid);
          any_next = true;
        }
      }
      retrigger_.clear();
      if (!any_next) break;
      trig_.swap(next_trig_);
      ++time_.delta;
    }

    deltas_last_cycle_ = deltas;
    ++time_.cycle;
    time_.delta = 0;
    ++stats_.cycles_simulated;
    return time_;
  }

  KernelStats run(uint64_t cycles) {
    for (uint64_t i = 0; i < cycles; ++i) advance_cycle();
    return stats_;
  }

  KernelStats run_until(const std::function<bool()>& halt, uint64_t max_cycles) {
    for (uint64_t i = 0; i < max_cycles && !halt(); ++i) advance_cycle();
    return stats_;
  }

  bool running() const { return running_; }

 private:
  friend struct detail::WaitAwaiter;
  friend class ProcessContext;

  struct DriverSlot {
    uint32_t writer = 0;
    LogicVec value{1};
    bool releasing = false;
    void assign(const LogicVec& v, bool rel) {
      value = v;
      releasing = rel;
    }
  };

  struct SignalCell {
    SignalCell(std::string n, unsigned w, SignalMode m)
        : name(std::move(n)),
          width(w),
          mode(m),
          mask(w == 64 ? ~uint64_t{0} : ((uint64_t{1} << w) - 1)),
          cur_vec(w) {}

    std::string name;
    unsigned width;
    SignalMode mode;
    uint64_t mask;

    uint64_t cur_word = 0;
    uint64_t pend_word = 0;
    LogicVec cur_vec;
    std::vector<DriverSlot> drivers;

    bool pending = false;
    bool traced = false;
    uint64_t reads = 0;
    std::vector<ProcessId> sensitive;
  };

  struct Process {
    std::string name;
    ProcessKind kind;
    Sensitivity sens;
    SingleShotBody single_body;
    MulticycleBody multi_body;
    std::vector<SingleShotBody> fused_children;
    SimTask<void> task;
    std::coroutine_handle<> parked;
    std::unique_ptr<ProcessContext> ctx;
    bool started = false;
    bool finished = false;
    bool enabled = true;
    uint64_t sleep_until = kNoSleep;
    uint64_t dispatches = 0;

    static constexpr uint64_t kNoSleep = ~uint64_t{0};
  };

  ProcessId register_common(const std::string& name, ProcessKind kind, Sensitivity sens) {
    if (running_) throw ConfigError("process registration only between cycles");
    if (process_names_.count(name))
      throw ConfigError("duplicate registration of process body '" + name + "'");
    ProcessId pid = static_cast<ProcessId>(procs_.size());
    auto p = std::make_unique<Process>();
    p->name = name;
    p->kind = kind;
    p->sens = std::move(sens);
    p->ctx = std::make_unique<ProcessContext>(*this, pid);
    // de-duplicate the sensitivity list; order does not matter for triggering
    auto& sigs = p->sens.signals;
    std::sort(sigs.begin(), sigs.end());
    sigs.erase(std::unique(sigs.begin(), sigs.end()), sigs.end());
    for (SignalId sig : sigs) {
      check_sid(sig);
      signals_[sig]->sensitive.push_back(pid);
    }
    process_names_.emplace(name, pid);
    procs_.push_back(std::move(p));
    return pid;
  }

  SignalCell& cell(SignalId sig) {
    check_sid(sig);
    return *signals_[sig];
  }

  void check_sid(SignalId sig) const {
    if (sig >= signals_.size())
      throw SimFault(FaultKind::UnknownSignal, "signal id " + std::to_string(sig));
  }
  void check_pid(ProcessId pid) const {
    if (pid >= procs_.size()) throw ConfigError("process id " + std::to_string(pid));
  }

  DriverSlot& driver_slot(SignalCell& c, uint32_t writer) {
    for (auto& d : c.drivers)
      if (d.writer == writer) return d;
    c.drivers.push_back(DriverSlot{writer, LogicVec(c.width), false});
    return c.drivers.back();
  }

  void queue_update(SignalId sig, SignalCell& c) {
    if (!c.pending) {
      c.pending = true;
      pending_.push_back(sig);
    }
  }

  static void set_bit(std::vector<uint64_t>& bits, ProcessId pid) {
    bits[pid >> 6] |= uint64_t{1} << (pid & 63);
  }

  bool dispatchable(ProcessId pid) const {
    const Process& p = *procs_[pid];
    return p.enabled && !p.finished;
  }

  void build_cycle_start_triggers() {
    trig_.assign(words_for(procs_.size()), 0);
    for (ProcessId pid = 0; pid < procs_.size(); ++pid) {
      Process& p = *procs_[pid];
      if (!p.enabled || p.finished) continue;
      if (p.sleep_until != Process::kNoSleep) {
        if (time_.cycle >= p.sleep_until) {
          p.sleep_until = Process::kNoSleep;
          set_bit(trig_, pid);
        }
        continue;
      }
      if (p.sens.clock || !p.started) set_bit(trig_, pid);
    }
  }

  static size_t words_for(size_t n) { return (n + 63) / 64; }

  void dispatch_triggered() {
    if (trig_.size() < words_for(procs_.size())) trig_.resize(words_for(procs_.size()), 0);
    for (size_t w = 0; w < trig_.size(); ++w) {
      uint64_t word = trig_[w];
      while (word) {
        unsigned bit = static_cast<unsigned>(__builtin_ctzll(word));
        word &= word - 1;
        dispatch(static_cast<ProcessId>((w << 6) + bit));
      }
    }
  }

  void dispatch(ProcessId pid) {
    Process& p = *procs_[pid];
    if (!p.enabled || p.finished) return;
    if (p.sleep_until != Process::kNoSleep && time_.cycle < p.sleep_until) return;
    p.started = true;
    ++p.dispatches;
    ++stats_.processes_dispatched;
    p.ctx->info_ = DispatchInfo{time_, time_.delta == 0};
    if (p.kind == ProcessKind::SingleShot) {
      if (p.fused_children.empty()) {
        p.single_body(*p.ctx);
      } else {
        for (auto& child : p.fused_children) child(*p.ctx);
      }
      return;
    }
    auto h = p.parked;
    p.parked = nullptr;
    h.resume();
    if (p.task.done()) {
      p.finished = true;
      p.task.rethrow_if_error();
    } else if (!p.parked) {
      throw ConfigError("process '" + p.name + "' returned control without waiting");
    }
  }

  TraceValue make_trace_value(const SignalCell& c) const {
    if (c.mode == SignalMode::Native) return TraceValue{c.cur_word, 0, 0};
    return TraceValue{c.cur_vec.project_to_word(), c.cur_vec.x_mask(), c.cur_vec.z_mask()};
  }

  /// Apply all queued writes; returns whether any sensitive process was
  /// triggered for the next delta.
  bool apply_updates() {
    if (pending_.empty()) return false;
    std::sort(pending_.begin(), pending_.end());
    bool any = false;
    for (SignalId sig : pending_) {
      SignalCell& c = *signals_[sig];
      c.pending = false;
      ++stats_.signal_updates;
      bool changed = false;
      if (c.mode == SignalMode::Native) {
        changed = c.cur_word != c.pend_word;
        c.cur_word = c.pend_word;
      } else {
        LogicVec resolved(c.width, Logic4::Z);
        if (!c.drivers.empty()) {
          resolved = c.drivers[0].value;
          for (size_t i = 1; i < c.drivers.size(); ++i)
            resolved = resolved.resolved_with(c.drivers[i].value);
        }
        changed = !(resolved == c.cur_vec);
        c.cur_vec = resolved;
        c.drivers.erase(
            std::remove_if(c.drivers.begin(), c.drivers.end(),
                           [](const DriverSlot& d) { return d.releasing; }),
            c.drivers.end());
      }
      if (!changed) continue;
      if (c.traced && sink_) sink_->on_change(time_, sig, make_trace_value(c));
      for (ProcessId pid : c.sensitive) {
        if (!dispatchable(pid)) continue;
        const Process& p = *procs_[pid];
        if (p.sleep_until != Process::kNoSleep) continue;  // sleeping: suppressed
        set_bit(next_trig_, pid);
        any = true;
      }
    }
    pending_.clear();
    return any;
  }

  void park(ProcessId pid, std::coroutine_handle<> h, uint64_t cycles, bool trigger_mode) {
    Process& p = *procs_[pid];
    p.parked = h;
    if (trigger_mode) return;  // next dispatch comes from the sensitivity
    if (cycles == 0) {
      retrigger_.push_back(pid);
      return;
    }
    p.sleep_until = time_.cycle + cycles;
  }

  Options opt_;
  std::vector<std::unique_ptr<SignalCell>> signals_;
  std::vector<std::unique_ptr<Process>> procs_;
  std::unordered_map<std::string, SignalId> signal_names_;
  std::unordered_map<std::string, ProcessId> process_names_;
  std::vector<std::function<void()>> cycle_hooks_;

  SimTime time_{};
  KernelStats stats_{};
  bool running_ = false;
  uint32_t deltas_last_cycle_ = 0;

  std::vector<uint64_t> trig_;
  std::vector<uint64_t> next_trig_;
  std::vector<SignalId> pending_;
  std::vector<ProcessId> retrigger_;
  TraceSink* sink_ = nullptr;
};

// ---------------------------------------------------------------------------
// Inline definitions that need the full Simulator type.
// ---------------------------------------------------------------------------

inline uint64_t ProcessContext::read(SignalId sig) const { return sim_.signal_read(sig); }
inline bool ProcessContext::read_bit(SignalId sig) const { return sim_.signal_read_bit(sig); }
inline LogicVec ProcessContext::read_logic(SignalId sig) const {
  return sim_.signal_read_logic(sig);
}
inline void ProcessContext::write(SignalId sig, uint64_t value) const {
  sim_.signal_write(sig, value, self_);
}
inline void ProcessContext::write_logic(SignalId sig, const LogicVec& value) const {
  sim_.signal_write_logic(sig, value, self_);
}
inline void ProcessContext::write_release(SignalId sig, uint64_t final_value) const {
  sim_.signal_write_release(sig, final_value, self_);
}
inline void ProcessContext::sleep(uint64_t n) const { sim_.sleep_for(self_, n); }

namespace detail {
inline void WaitAwaiter::await_suspend(std::coroutine_handle<> h) const {
  sim->park(pid, h, cycles, trigger_mode);
}
}  // namespace detail

}  // namespace fidelsim

#endif  // FIDELSIM_KERNEL_HPP
