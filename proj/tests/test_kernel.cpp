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

#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

#include "fidelsim/kernel.hpp"
#include "fidelsim/trace.hpp"

using namespace fidelsim;

TEST_CASE("clock-sensitive SingleShot runs once per cycle") {
  Simulator sim;
  uint64_t counter = 0;
  sim.register_process("inc", ProcessKind::SingleShot, Sensitivity::clocked(),
                       SingleShotBody([&](ProcessContext&) { ++counter; }));
  sim.run(5);
  CHECK(counter == 5);
}

TEST_CASE("Multicycle body waiting 3 cycles writes at cycles 0,3,6") {
  Simulator sim;
  SignalId out = sim.add_signal("out", 32, SignalMode::Native);
  sim.register_process("writer", ProcessKind::Multicycle, Sensitivity::clocked(),
                       MulticycleBody([out](ProcessContext& ctx) -> SimTask<void> {
                         uint64_t v = 0;
                         while (true) {
                           ctx.write(out, ++v);
                           co_await ctx.wait(3);
                         }
                       }));
  PinTrace trace;
  trace.attach(sim, {out});
  sim.run(8);
  std::vector<uint64_t> change_cycles;
  for (const auto& r : trace.records()) change_cycles.push_back(r.t.cycle);
  CHECK(change_cycles == std::vector<uint64_t>{0, 3, 6});
}

TEST_CASE("17 idle clocked processes dispatch exactly 17 per cycle") {
  Simulator sim;
  for (int i = 0; i < 17; ++i)
    sim.register_process("p" + std::to_string(i), ProcessKind::SingleShot,
                         Sensitivity::clocked(), SingleShotBody([](ProcessContext&) {}));
  KernelStats st = sim.run(10);
  CHECK(st.processes_dispatched == 17 * 10);
  CHECK(st.cycles_simulated == 10);
}

TEST_CASE("a write is not visible in the same evaluate phase") {
  Simulator sim;
  SignalId s = sim.add_signal("s", 32, SignalMode::Native);
  std::vector<uint64_t> seen_same_phase;
  std::vector<uint64_t> seen_next_cycle;
  sim.register_process("rw", ProcessKind::SingleShot, Sensitivity::clocked(),
                       SingleShotBody([&](ProcessContext& ctx) {
                         seen_next_cycle.push_back(ctx.read(s));
                         ctx.write(s, 5);
                         seen_same_phase.push_back(ctx.read(s));
                       }));
  sim.run(2);
  CHECK(seen_same_phase == std::vector<uint64_t>{0, 5});  // old value on cycle 0
  CHECK(seen_next_cycle == std::vector<uint64_t>{0, 5});  // updated by cycle 1
}

TEST_CASE("Resolved4 drive conflict yields X; read faults, logic view shows it") {
  Simulator sim;
  SignalId s = sim.add_signal("bus", 1, SignalMode::Resolved4);
  sim.register_process("a", ProcessKind::SingleShot, Sensitivity::clocked(),
                       SingleShotBody([&](ProcessContext& ctx) { ctx.write(s, 0); }));
  sim.register_process("b", ProcessKind::SingleShot, Sensitivity::clocked(),
                       SingleShotBody([&](ProcessContext& ctx) { ctx.write(s, 1); }));
  sim.run(1);
  CHECK(sim.signal_read_logic(s).bit(0) == Logic4::X);
  CHECK_THROWS_AS(sim.signal_read(s), SimFault);
}

TEST_CASE("Native mode: last write in dispatch order wins") {
  Simulator sim;
  SignalId s = sim.add_signal("s", 32, SignalMode::Native);
  sim.register_process("a", ProcessKind::SingleShot, Sensitivity::clocked(),
                       SingleShotBody([&](ProcessContext& ctx) { ctx.write(s, 7); }));
  sim.register_process("b", ProcessKind::SingleShot, Sensitivity::clocked(),
                       SingleShotBody([&](ProcessContext& ctx) { ctx.write(s, 9); }));
  sim.run(1);
  CHECK(sim.signal_read(s) == 9);
}

TEST_CASE("reduced port reading: cached body reads half as often, same outputs") {
  auto build = [](bool cached, PinTrace& trace, Simulator& sim, SignalId& x_out) {
    SignalId x = sim.add_signal("input_x", 32, SignalMode::Native);
    SignalId y = sim.add_signal("input_y", 32, SignalMode::Native);
    SignalId z = sim.add_signal("z", 32, SignalMode::Native);
    sim.register_process("driver", ProcessKind::SingleShot, Sensitivity::clocked(),
                         SingleShotBody([x, y](ProcessContext& ctx) {
                           ctx.write(x, ctx.time().cycle * 4 + 1);  // never 2
                           ctx.write(y, 100);
                         }));
    if (cached) {
      sim.register_process("reader", ProcessKind::SingleShot, Sensitivity::clocked(),
                           SingleShotBody([x, y, z](ProcessContext& ctx) {
                             uint64_t local_x = ctx.read(x);
                             if (local_x != 2) ctx.write(z, local_x + ctx.read(y));
                           }));
    } else {
      sim.register_process("reader", ProcessKind::SingleShot, Sensitivity::clocked(),
                           SingleShotBody([x, y, z](ProcessContext& ctx) {
                             if (ctx.read(x) != 2) ctx.write(z, ctx.read(x) + ctx.read(y));
                           }));
    }
    trace.attach(sim, {z});
    x_out = x;
  };

  Simulator plain_sim, cached_sim;
  PinTrace plain_trace, cached_trace;
  SignalId plain_x, cached_x;
  build(false, plain_trace, plain_sim, plain_x);
  build(true, cached_trace, cached_sim, cached_x);
  plain_sim.run(1000);
  cached_sim.run(1000);

  CHECK(plain_sim.signal_reads(plain_x) >= 2000);
  CHECK(cached_sim.signal_reads(cached_x) == 1000);
  CHECK(trace_compare(plain_trace, cached_trace) == std::nullopt);
}

TEST_CASE("sleep_for gates dispatch: 100 dispatches over 6400 cycles at n=64") {
  Simulator sim;
  ProcessId pid = sim.register_process(
      "tx", ProcessKind::Multicycle, Sensitivity::clocked(),
      MulticycleBody([](ProcessContext& ctx) -> SimTask<void> {
        while (true) co_await ctx.wait(64);
      }));
  sim.run(6400);
  CHECK(sim.process_dispatches(pid) == 100);
}

TEST_CASE("sleep of 1 cycle equals plain per-cycle sensitivity") {
  Simulator a, b;
  ProcessId pa = a.register_process("p", ProcessKind::Multicycle, Sensitivity::clocked(),
                                    MulticycleBody([](ProcessContext& ctx) -> SimTask<void> {
                                      while (true) co_await ctx.wait(1);
                                    }));
  ProcessId pb = b.register_process("p", ProcessKind::Multicycle, Sensitivity::clocked(),
                                    MulticycleBody([](ProcessContext& ctx) -> SimTask<void> {
                                      while (true) co_await ctx.wait();
                                    }));
  a.run(500);
  b.run(500);
  CHECK(a.process_dispatches(pa) == b.process_dispatches(pb));
}

TEST_CASE("sleeping dispatch count is ceil(C/n) for random n and C") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<uint64_t> pick_n(1, 97);
  std::uniform_int_distribution<uint64_t> pick_c(1, 3000);
  for (int round = 0; round < 20; ++round) {
    uint64_t n = pick_n(rng), c = pick_c(rng);
    Simulator sim;
    ProcessId pid = sim.register_process(
        "sleeper", ProcessKind::Multicycle, Sensitivity::clocked(),
        MulticycleBody([n](ProcessContext& ctx) -> SimTask<void> {
          while (true) co_await ctx.wait(n);
        }));
    sim.run(c);
    CHECK(sim.process_dispatches(pid) == (c + n - 1) / n);
  }
}

TEST_CASE("SingleShot processes can sleep via next_trigger-style sleep()") {
  Simulator sim;
  ProcessId pid = sim.register_process("m", ProcessKind::SingleShot, Sensitivity::clocked(),
                                       SingleShotBody([](ProcessContext& ctx) { ctx.sleep(8); }));
  sim.run(64);
  CHECK(sim.process_dispatches(pid) == 8);
}

TEST_CASE("two processes chained through one signal settle in 2 deltas") {
  Simulator sim;
  SignalId s1 = sim.add_signal("s1", 32, SignalMode::Native);
  SignalId s2 = sim.add_signal("s2", 32, SignalMode::Native);
  sim.register_process("src", ProcessKind::SingleShot, Sensitivity::clocked(),
                       SingleShotBody([&](ProcessContext& ctx) {
                         ctx.write(s1, ctx.time().cycle + 1);
                       }));
  sim.register_process("next", ProcessKind::SingleShot, Sensitivity::on_signals({s1}),
                       SingleShotBody([&](ProcessContext& ctx) {
                         ctx.write(s2, ctx.read(s1) + 1);
                       }));
  sim.advance_cycle();
  CHECK(sim.deltas_last_cycle() == 2);
  sim.advance_cycle();
  CHECK(sim.deltas_last_cycle() == 2);
  CHECK(sim.signal_read(s2) == 3);
}

TEST_CASE("a cycle with no writes runs exactly one evaluate phase") {
  Simulator sim;
  sim.register_process("idle", ProcessKind::SingleShot, Sensitivity::clocked(),
                       SingleShotBody([](ProcessContext&) {}));
  sim.advance_cycle();
  CHECK(sim.deltas_last_cycle() == 1);
  CHECK(sim.stats().delta_cycles_run == 1);
}

TEST_CASE("mutually inverting processes overflow the delta limit") {
  Simulator sim(Simulator::Options{.delta_limit = 50});
  SignalId s1 = sim.add_signal("s1", 1, SignalMode::Native);
  SignalId s2 = sim.add_signal("s2", 1, SignalMode::Native);
  sim.register_process("p", ProcessKind::SingleShot, Sensitivity::on_signals({s2}),
                       SingleShotBody([&](ProcessContext& ctx) {
                         ctx.write(s1, 1 - ctx.read(s2));
                       }));
  sim.register_process("q", ProcessKind::SingleShot, Sensitivity::on_signals({s1}),
                       SingleShotBody([&](ProcessContext& ctx) {
                         ctx.write(s2, 1 - ctx.read(s1));
                       }));
  try {
    sim.advance_cycle();
    FAIL("expected delta overflow");
  } catch (const SimFault& f) {
    CHECK(f.kind() == FaultKind::DeltaOverflow);
  }
}

TEST_CASE("default delta limit is 1000") {
  CHECK(Simulator::Options{}.delta_limit == 1000);
}

TEST_CASE("run(0) leaves all statistics at zero") {
  Simulator sim;
  sim.register_process("idle", ProcessKind::SingleShot, Sensitivity::clocked(),
                       SingleShotBody([](ProcessContext&) {}));
  KernelStats st = sim.run(0);
  CHECK(st.processes_dispatched == 0);
  CHECK(st.delta_cycles_run == 0);
  CHECK(st.signal_updates == 0);
  CHECK(st.cycles_simulated == 0);
}

namespace {

// A small mixed design used for determinism and style-equivalence checks.
struct MixedDesign {
  Simulator sim;
  PinTrace trace;
  SignalId a, b, c;

  explicit MixedDesign(bool multicycle_style, SignalMode mode = SignalMode::Native) {
    a = sim.add_signal("a", 16, mode);
    b = sim.add_signal("b", 16, mode);
    c = sim.add_signal("c", 16, mode);
    sim.register_process("drv", ProcessKind::Multicycle, Sensitivity::clocked(),
                         MulticycleBody([this](ProcessContext& ctx) -> SimTask<void> {
                           uint64_t x = 1;
                           while (true) {
                             ctx.write(a, x = (x * 5 + 3) & 0xFFFF);
                             co_await ctx.wait();
                           }
                         }));
    auto comb = [this](ProcessContext& ctx) { ctx.write(b, (ctx.read(a) ^ 0x00FF) + 1); };
    if (multicycle_style) {
      sim.register_process("comb", ProcessKind::Multicycle, Sensitivity::on_signals({a}),
                           MulticycleBody([comb](ProcessContext& ctx) -> SimTask<void> {
                             while (true) {
                               comb(ctx);
                               co_await ctx.wait();
                             }
                           }));
    } else {
      sim.register_process("comb", ProcessKind::SingleShot, Sensitivity::on_signals({a}),
                           SingleShotBody(comb));
    }
    sim.register_process("acc", ProcessKind::SingleShot, Sensitivity::clocked(),
                         SingleShotBody([this](ProcessContext& ctx) {
                           ctx.write(c, (ctx.read(b) + ctx.read(c)) & 0xFFFF);
                         }));
    trace.attach(sim, {a, b, c});
  }
};

}  // namespace

TEST_CASE("identical configurations produce bit-identical traces and stats") {
  MixedDesign r1(true), r2(true);
  r1.sim.run(300);
  r2.sim.run(300);
  CHECK(trace_compare(r1.trace, r2.trace) == std::nullopt);
  CHECK(r1.sim.stats().processes_dispatched == r2.sim.stats().processes_dispatched);
  CHECK(r1.sim.stats().signal_updates == r2.sim.stats().signal_updates);
  CHECK(r1.sim.stats().delta_cycles_run == r2.sim.stats().delta_cycles_run);
}

TEST_CASE("a combinational body behaves the same as SingleShot and as Multicycle") {
  MixedDesign methods(false), threads(true);
  methods.sim.run(300);
  threads.sim.run(300);
  CHECK(trace_compare(methods.trace, threads.trace) == std::nullopt);
}

TEST_CASE("duplicate process body registration is a configuration error") {
  Simulator sim;
  sim.register_process("body", ProcessKind::SingleShot, Sensitivity::clocked(),
                       SingleShotBody([](ProcessContext&) {}));
  CHECK_THROWS_AS(sim.register_process("body", ProcessKind::SingleShot, Sensitivity::clocked(),
                                       SingleShotBody([](ProcessContext&) {})),
                  ConfigError);
}

TEST_CASE("unknown signal id faults") {
  Simulator sim;
  CHECK_THROWS_AS(sim.signal_read(42), SimFault);
  CHECK_THROWS_AS(sim.signal_write(42, 1, kExternalWriter), SimFault);
}

TEST_CASE("registration from inside a running process is rejected") {
  Simulator sim;
  sim.register_process("meta", ProcessKind::SingleShot, Sensitivity::clocked(),
                       SingleShotBody([&](ProcessContext&) {
                         sim.register_process("late", ProcessKind::SingleShot,
                                              Sensitivity::clocked(),
                                              SingleShotBody([](ProcessContext&) {}));
                       }));
  CHECK_THROWS_AS(sim.run(1), ConfigError);
}

TEST_CASE("wait(0) retriggers in the next delta of the same cycle") {
  Simulator sim;
  std::vector<SimTime> dispatches;
  sim.register_process("p", ProcessKind::Multicycle, Sensitivity::clocked(),
                       MulticycleBody([&](ProcessContext& ctx) -> SimTask<void> {
                         dispatches.push_back(ctx.time());
                         co_await ctx.wait(0);
                         dispatches.push_back(ctx.time());
                         co_await ctx.wait();
                         dispatches.push_back(ctx.time());
                         while (true) co_await ctx.wait();
                       }));
  sim.run(2);
  REQUIRE(dispatches.size() == 3);
  CHECK(dispatches[0] == SimTime{0, 0});
  CHECK(dispatches[1] == SimTime{0, 1});
  CHECK(dispatches[2] == SimTime{1, 0});
}

TEST_CASE("released drivers stop driving but the line keeps its last value") {
  Simulator sim;
  SignalId s = sim.add_signal("shared", 8, SignalMode::Resolved4);
  sim.signal_write(s, 0xAA, 1);
  sim.advance_cycle();
  CHECK(sim.signal_read(s) == 0xAA);

  sim.signal_write_release(s, 0x00, 1);
  sim.advance_cycle();
  CHECK(sim.signal_read(s) == 0x00);

  // a different writer can now drive without conflicting with writer 1
  sim.signal_write(s, 0x55, 2);
  sim.advance_cycle();
  CHECK(sim.signal_read(s) == 0x55);

  // but two live drivers with different values do conflict
  sim.signal_write(s, 0xFF, 3);
  sim.advance_cycle();
  CHECK(sim.signal_read_logic(s).has_x());
}

TEST_CASE("external writes land at the next update, not immediately") {
  Simulator sim;
  SignalId s = sim.add_signal("ext", 8, SignalMode::Native);
  uint64_t seen_at_delta0 = 99;
  sim.register_process("probe", ProcessKind::SingleShot, Sensitivity::clocked(),
                       SingleShotBody([&](ProcessContext& ctx) {
                         if (ctx.time().cycle == 0) seen_at_delta0 = ctx.read(s);
                       }));
  sim.signal_write(s, 7, kExternalWriter);
  sim.advance_cycle();
  CHECK(seen_at_delta0 == 0);   // the pending external write was not yet visible
  CHECK(sim.signal_read(s) == 7);
}

TEST_CASE("random acyclic netlists settle within depth+1 deltas") {
  std::mt19937 rng(2024);
  for (int round = 0; round < 15; ++round) {
    Simulator sim;
    std::uniform_int_distribution<int> layers_dist(1, 6);
    std::uniform_int_distribution<int> width_dist(1, 4);
    int layers = layers_dist(rng);

    std::vector<std::vector<SignalId>> layer_sigs(static_cast<size_t>(layers + 1));
    layer_sigs[0].push_back(sim.add_signal("root", 32, SignalMode::Native));
    sim.register_process("root_drv", ProcessKind::SingleShot, Sensitivity::clocked(),
                         SingleShotBody([s = layer_sigs[0][0]](ProcessContext& ctx) {
                           ctx.write(s, ctx.time().cycle * 2654435761u + 1);
                         }));

    for (int layer = 1; layer <= layers; ++layer) {
      int width = width_dist(rng);
      for (int node = 0; node < width; ++node) {
        SignalId out = sim.add_signal("n" + std::to_string(layer) + "_" + std::to_string(node),
                                      32, SignalMode::Native);
        layer_sigs[static_cast<size_t>(layer)].push_back(out);
        // inputs from any earlier layer, at least one from the previous layer
        std::vector<SignalId> inputs{layer_sigs[static_cast<size_t>(layer - 1)]
                                         [rng() % layer_sigs[static_cast<size_t>(layer - 1)].size()]};
        std::uniform_int_distribution<int> extra_dist(0, 2);
        int extra = extra_dist(rng);
        for (int e = 0; e < extra; ++e) {
          int src_layer = static_cast<int>(rng() % static_cast<unsigned>(layer));
          auto& pool = layer_sigs[static_cast<size_t>(src_layer)];
          inputs.push_back(pool[rng() % pool.size()]);
        }
        sim.register_process(
            "p" + std::to_string(layer) + "_" + std::to_string(node),
            ProcessKind::SingleShot, Sensitivity::on_signals(inputs),
            SingleShotBody([inputs, out](ProcessContext& ctx) {
              uint64_t acc = 0x9E3779B9;
              for (SignalId in : inputs) acc = (acc ^ ctx.read(in)) * 1099511628211ull;
              ctx.write(out, acc & 0xFFFFFFFF);
            }));
      }
    }
    for (int cycle = 0; cycle < 50; ++cycle) {
      sim.advance_cycle();
      CHECK(sim.deltas_last_cycle() <= static_cast<uint32_t>(layers) + 1);
    }
  }
}
