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

#ifndef FIDELSIM_TESTS_COMMON_HPP
#define FIDELSIM_TESTS_COMMON_HPP

#include <array>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "fidelsim/fidelsim.hpp"

namespace testsupport {

inline std::string slurp(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline std::string workload_path(const std::string& name) {
  return std::string(FIDELSIM_WORKLOADS_DIR) + "/" + name;
}

/// Assemble a bundled workload once per process.
inline const fidelsim::Image& workload(const std::string& name) {
  static std::map<std::string, fidelsim::Image> cache;
  auto it = cache.find(name);
  if (it == cache.end())
    it = cache.emplace(name, fidelsim::assemble(slurp(workload_path(name)))).first;
  return it->second;
}

/// Attach memset/memcpy region counters from the image's exported symbols.
inline void add_regions(fidelsim::Platform& p, const fidelsim::Image& img) {
  auto& regions = p.cpu().state.stats.regions;
  auto add = [&](const char* lo, const char* hi) {
    if (img.symbols.count(lo) && img.symbols.count(hi))
      regions.push_back({lo, img.symbols.at(lo), img.symbols.at(hi), 0});
  };
  add("memset", "memset_end");
  add("memcpy", "memcpy_end");
}

/// Architectural state at the end of a run: what the mode-equivalence
/// checks compare.
struct FinalState {
  std::array<uint32_t, 32> regs{};
  uint32_t pc = 0;
  std::vector<uint8_t> ram;
  std::string uart;
  bool halted = false;

  bool operator==(const FinalState&) const = default;
};

inline FinalState snapshot(fidelsim::Platform& p, bool halted) {
  FinalState f;
  f.regs = p.cpu().state.r;
  f.pc = p.cpu().state.pc;
  f.ram = p.ram().store().bytes();
  f.uart = p.capture().tx_string();
  f.halted = halted;
  return f;
}

struct RunOutcome {
  FinalState final_state;
  uint64_t cycles = 0;
  uint64_t retired = 0;
  uint64_t intercepted = 0;
  double cpi = 0;
  std::optional<fidelsim::CpuFaultInfo> fault;
};

/// Build a platform, load the image, run to halt (or budget), flush the
/// UART, snapshot.
inline RunOutcome run_workload(const fidelsim::Image& img, const fidelsim::FidelityConfig& cfg,
                               uint64_t max_cycles,
                               const std::vector<fidelsim::ToggleEvent>& toggles = {},
                               const std::string& script = "") {
  fidelsim::PlatformOptions opt;
  opt.fidelity = cfg;
  fidelsim::Platform p(opt);
  fidelsim::load_image(img, p);
  if (!script.empty()) fidelsim::load_script(p.capture(), script);
  for (const auto& t : toggles) p.queue_toggle(t);
  auto r = p.run(max_cycles);
  p.drain_uart();
  RunOutcome out;
  out.final_state = snapshot(p, r.halted);
  out.cycles = r.cycles;
  out.retired = p.cpu().state.stats.instructions_retired;
  out.intercepted = p.cpu().state.stats.intercepted_calls;
  out.cpi = p.cpu().state.stats.cpi();
  out.fault = r.fault;
  return out;
}

/// Describe the first difference between two final states ("" if equal).
inline std::string diff_final(const FinalState& a, const FinalState& b) {
  for (int i = 0; i < 32; ++i)
    if (a.regs[static_cast<size_t>(i)] != b.regs[static_cast<size_t>(i)])
      return "r" + std::to_string(i) + " differs";
  if (a.ram != b.ram) {
    for (size_t i = 0; i < a.ram.size(); ++i)
      if (a.ram[i] != b.ram[i]) return "ram byte 0x" + std::to_string(i) + " differs";
  }
  if (a.uart != b.uart) return "uart stream differs";
  if (a.halted != b.halted) return "halt state differs";
  return "";
}

}  // namespace testsupport

#endif  // FIDELSIM_TESTS_COMMON_HPP
