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

// fidelsim command line: assemble MR32 programs, run them on the platform
// with a chosen fidelity configuration, benchmark configurations, and diff
// recorded pin traces.
//
// Exit codes: 0 success, 1 usage/config/assembly errors, 2 trace
// divergence (diff), 3 simulation fault.

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "fidelsim/fidelsim.hpp"

namespace {

using namespace fidelsim;

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int cmd_asm(const std::string& src, const std::string& out, std::string sym) {
  Image img = assemble(slurp(src));
  img.save(out);
  if (sym.empty()) sym = out + ".sym";
  save_symbols(img, sym);
  std::cerr << "assembled " << src << ": " << img.segments.size() << " segment(s), entry 0x"
            << std::hex << img.entry << std::dec << ", " << img.symbols.size()
            << " exported symbol(s)\n";
  return 0;
}

struct RunArgs {
  std::string image;
  std::vector<std::string> fidelity;
  std::vector<std::string> toggles;
  std::string term = "stdio";
  std::string vcd_path;
  std::string trace_path;
  std::string uart_out;
  std::string symbols;
  uint64_t max_cycles = 10'000'000;
  uint32_t ram_wait_states = 0;
  bool stats = false;
};

int cmd_run(const RunArgs& a) {
  FidelityConfig cfg;
  for (const auto& kv : a.fidelity) apply_config_kv(cfg, kv);

  PlatformOptions opt;
  opt.fidelity = cfg;
  opt.ram_wait_states = a.ram_wait_states;

  std::unique_ptr<ByteEndpoint> endpoint;
  std::unique_ptr<CaptureEndpoint> capture;
  std::unique_ptr<TeeEndpoint> tee;
  if (a.term == "stdio") {
    endpoint = std::make_unique<StdioEndpoint>();
    opt.terminal = endpoint.get();
  } else if (a.term.rfind("tcp:", 0) == 0) {
    endpoint = std::make_unique<TcpEndpoint>(
        static_cast<uint16_t>(std::stoul(a.term.substr(4))));
    opt.terminal = endpoint.get();
  } else if (a.term.rfind("script:", 0) == 0) {
    capture = std::make_unique<CaptureEndpoint>();
    load_script(*capture, a.term.substr(7));
    tee = std::make_unique<TeeEndpoint>(*capture, stdout);
    opt.terminal = tee.get();
  } else {
    throw ConfigError("--term must be stdio, tcp:PORT or script:FILE");
  }

  Platform p(opt);
  Image img = Image::load(a.image);
  load_image(img, p);
  if (!a.symbols.empty()) {
    p.intercepts().clear();
    for (const auto& [name, addr] : load_symbols(a.symbols)) {
      if (name == "memset") p.intercepts().add(addr, Builtin::Memset);
      if (name == "memcpy") p.intercepts().add(addr, Builtin::Memcpy);
    }
  }
  for (const auto& t : a.toggles) p.queue_toggle(parse_toggle(t));

  std::vector<TraceSink*> sinks;
  std::unique_ptr<std::ofstream> vcd_file;
  std::unique_ptr<VcdWriter> vcd;
  std::unique_ptr<FileTraceSink> trace_file;
  std::vector<SignalId> pins = p.traced_pins();
  if (!a.vcd_path.empty()) {
    vcd_file = std::make_unique<std::ofstream>(a.vcd_path);
    if (!*vcd_file) throw ConfigError("cannot write " + a.vcd_path);
    std::vector<TraceDecl> decls;
    for (SignalId sig : pins)
      decls.push_back(TraceDecl{sig, p.sim().signal_name(sig), p.sim().signal_width(sig),
                                p.sim().signal_trace_value(sig)});
    vcd = std::make_unique<VcdWriter>(*vcd_file, decls);
    sinks.push_back(vcd.get());
  }
  if (!a.trace_path.empty()) {
    trace_file = std::make_unique<FileTraceSink>(a.trace_path, p.sim(), pins);
    sinks.push_back(trace_file.get());
  }
  TeeSink tee_sink{sinks};
  if (!sinks.empty()) p.sim().set_trace(&tee_sink, pins);

  Platform::RunResult r = p.run(a.max_cycles);
  p.drain_uart();
  if (vcd) vcd->finish();
  if (trace_file) trace_file->finish();

  if (!a.uart_out.empty()) {
    if (!capture)
      throw ConfigError("--uart-out needs --term script:FILE (captured output)");
    std::ofstream uo(a.uart_out, std::ios::binary);
    const auto& bytes = capture->tx_bytes();
    uo.write(reinterpret_cast<const char*>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
  }

  std::cerr << "cycles " << r.cycles << "\n";
  std::cerr << "halted " << (r.halted ? 1 : 0) << "\n";
  const InstrStats& st = p.cpu().state.stats;
  std::cerr << "instructions " << st.instructions_retired << "\n";
  std::cerr << "cpi " << st.cpi() << "\n";
  if (a.stats) {
    const KernelStats& ks = p.sim().stats();
    std::cerr << "kernel.processes_dispatched " << ks.processes_dispatched << "\n";
    std::cerr << "kernel.delta_cycles_run " << ks.delta_cycles_run << "\n";
    std::cerr << "kernel.signal_updates " << ks.signal_updates << "\n";
    std::cerr << "cpu.intercepted_calls " << st.intercepted_calls << "\n";
    std::cerr << "cpu.interrupts_taken " << st.interrupts_taken << "\n";
    std::cerr << "uart.tx_dropped " << p.uart().tx_dropped() << "\n";
  }
  if (r.fault) {
    std::cerr << "fault " << r.fault->message << "\n";
    return 3;
  }
  return 0;
}

int cmd_bench(const std::string& image_path, const std::string& grid, unsigned phases,
              unsigned reps, const std::string& out, uint64_t max_cycles,
              const std::string& script) {
  Image img = Image::load(image_path);
  std::vector<LadderRung> rungs;
  if (grid == "ladder") {
    rungs = speed_ladder();
  } else {
    size_t pos = 0;
    while (pos < grid.size()) {
      size_t semi = grid.find(';', pos);
      if (semi == std::string::npos) semi = grid.size();
      std::string item = grid.substr(pos, semi - pos);
      if (!item.empty()) rungs.push_back({item, parse_config(item)});
      pos = semi + 1;
    }
    if (rungs.empty()) throw ConfigError("--grid is empty");
  }

  BenchOptions bopt;
  bopt.phases = phases;
  bopt.reps = reps;
  bopt.max_cycles = max_cycles;
  if (!script.empty())
    bopt.setup = [&script](Platform& p) { load_script(p.capture(), script); };

  std::vector<Report> reports;
  for (const auto& rung : rungs) {
    BenchOptions o = bopt;
    if (!reports.empty() && !reports.front().failed)
      o.reference_cycles = reports.front().cycles;
    std::cerr << "benchmarking " << rung.label << "...\n";
    reports.push_back(run_benchmark(img, rung.label, rung.config, o));
  }
  print_reports(std::cout, reports);
  if (!out.empty()) {
    std::ofstream of(out);
    of << reports_to_json(reports, image_path).dump(2) << "\n";
  }
  for (const auto& r : reports)
    if (r.failed) return 3;
  return 0;
}

int cmd_diff(const std::string& a_path, const std::string& b_path) {
  PinTrace a = PinTrace::load(a_path);
  PinTrace b = PinTrace::load(b_path);
  auto div = trace_compare(a, b);
  if (!div) {
    std::cout << "equal\n";
    return 0;
  }
  std::cout << "divergence at cycle " << div->t.cycle << " delta " << div->t.delta
            << " signal " << div->signal;
  auto show = [](const std::optional<TraceValue>& v) -> std::string {
    if (!v) return "(ended)";
    std::ostringstream os;
    os << "0x" << std::hex << v->bits;
    if (v->x) os << " x=0x" << v->x;
    if (v->z) os << " z=0x" << v->z;
    return os.str();
  };
  std::cout << ": a=" << show(div->a) << " b=" << show(div->b) << "\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fidelsim - switchable-fidelity MR32 SoC simulator"};
  app.require_subcommand(1);

  auto* asm_cmd = app.add_subcommand("asm", "assemble an MR32 source file");
  std::string asm_src, asm_out, asm_sym;
  asm_cmd->add_option("src", asm_src, "assembly source")->required();
  asm_cmd->add_option("-o,--output", asm_out, "output image")->required();
  asm_cmd->add_option("--sym", asm_sym, "symbol file (default: <output>.sym)");

  auto* run_cmd = app.add_subcommand("run", "run an image");
  RunArgs ra;
  run_cmd->add_option("image", ra.image, "MR32IMG1 image")->required();
  run_cmd->add_option("--fidelity", ra.fidelity, "KEY=VAL fidelity settings (repeatable)");
  run_cmd->add_option("--toggle", ra.toggles, "CYCLE:KEY=VAL runtime toggles (repeatable)");
  run_cmd->add_option("--term", ra.term, "stdio | tcp:PORT | script:FILE (default stdio)");
  run_cmd->add_option("--vcd", ra.vcd_path, "write a VCD waveform of the traced pins");
  run_cmd->add_option("--trace", ra.trace_path, "write a binary pin trace");
  run_cmd->add_option("--uart-out", ra.uart_out,
                      "write captured UART output bytes (script mode)");
  run_cmd->add_option("--symbols", ra.symbols, "interception symbol file overriding the image");
  run_cmd->add_option("--max-cycles", ra.max_cycles, "cycle budget (default 10M)");
  run_cmd->add_option("--ram-wait-states", ra.ram_wait_states, "extra RAM wait states (0..7)");
  run_cmd->add_flag("--stats", ra.stats, "print kernel/CPU statistics");

  auto* bench_cmd = app.add_subcommand("bench", "benchmark fidelity configurations");
  std::string bench_img, bench_grid, bench_out, bench_script;
  unsigned bench_phases = 10, bench_reps = 5;
  uint64_t bench_max = 50'000'000;
  bench_cmd->add_option("image", bench_img, "MR32IMG1 image")->required();
  bench_cmd->add_option("--grid", bench_grid,
                        "'ladder' or semicolon-separated KEY=VAL,... configs")
      ->required();
  bench_cmd->add_option("--phases", bench_phases, "cycle windows per execution (default 10)");
  bench_cmd->add_option("--reps", bench_reps, "executions per configuration (default 5)");
  bench_cmd->add_option("--out", bench_out, "write the JSON report here");
  bench_cmd->add_option("--max-cycles", bench_max, "cycle budget per execution");
  bench_cmd->add_option("--script", bench_script, "scripted terminal input file");

  auto* diff_cmd = app.add_subcommand("diff", "compare two recorded pin traces");
  std::string diff_a, diff_b;
  diff_cmd->add_option("a", diff_a, "first trace")->required();
  diff_cmd->add_option("b", diff_b, "second trace")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (asm_cmd->parsed()) return cmd_asm(asm_src, asm_out, asm_sym);
    if (run_cmd->parsed()) return cmd_run(ra);
    if (bench_cmd->parsed())
      return cmd_bench(bench_img, bench_grid, bench_phases, bench_reps, bench_out, bench_max,
                       bench_script);
    if (diff_cmd->parsed()) return cmd_diff(diff_a, diff_b);
  } catch (const AsmError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const SimFault& e) {
    std::cerr << "fault: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
