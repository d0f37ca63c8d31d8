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
// Phase-averaged benchmark runner. A measurement is `reps` full executions
// of a workload, each split into `phases` equal cycle windows; every window
// contributes one cycles-per-wall-second sample (the familiar 10x5 = 50
// point grid). Simulated behaviour is deterministic across reps; only wall
// time varies.
//
// Speed is reported two ways: `mean_cps` is simulated cycles per wall
// second of this run, and `mean_effective_cps` normalizes by the
// fully-accurate run's cycle count, so configurations that shorten the
// workload (dispatchers, interception) are credited for finishing the same
// work sooner.
//

#ifndef FIDELSIM_BENCH_HPP
#define FIDELSIM_BENCH_HPP

#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fidelsim/image.hpp"
#include "fidelsim/soc.hpp"

namespace fidelsim {

/// Reference speed figures from the hardware-platform study these
/// optimization modes originate from, printed alongside measurements for
/// context (RTL HDL baseline and the resolved/native/best cycle-accurate
/// models, plus the peak effective speed with all modes on).
struct ReferenceConstants {
  double hdl_rtl_hz = 167.0;
  double resolved_model_khz = 61.0;
  double native_model_khz = 141.7;
  double cycle_accurate_best_khz = 152.5;
  double effective_peak_khz = 578.0;
};

struct Report {
  std::string label;
  FidelityConfig config;
  unsigned phases = 10;
  unsigned reps = 5;
  std::vector<std::vector<double>> per_phase_cps;  ///< [rep][phase]
  double mean_cps = 0;
  double stddev_cps = 0;
  double cpi = 0;
  double wall_seconds = 0;  ///< total measured wall time across reps
  uint64_t cycles = 0;      ///< simulated cycles per execution
  uint64_t instructions = 0;
  uint64_t reference_cycles = 0;  ///< accurate-run cycles (== cycles when accurate)
  double mean_effective_cps = 0;
  bool failed = false;
  std::string failure;
};

struct BenchOptions {
  unsigned phases = 10;
  unsigned reps = 5;
  uint64_t max_cycles = 50'000'000;  ///< budget for non-halting workloads
  uint64_t reference_cycles = 0;     ///< 0: use this run's own cycle count
  uint32_t ram_wait_states = 0;
  /// Called on each fresh platform before the run (scripted input etc.).
  std::function<void(Platform&)> setup;
};

inline Report run_benchmark(const Image& img, const std::string& label,
                            const FidelityConfig& cfg, const BenchOptions& opt) {
  Report rep;
  rep.label = label;
  rep.config = cfg;
  rep.phases = opt.phases;
  rep.reps = opt.reps;
  if (opt.phases == 0 || opt.reps == 0) throw ConfigError("phases and reps must be >= 1");

  auto make_platform = [&]() {
    PlatformOptions popt;
    popt.fidelity = cfg;
    popt.ram_wait_states = opt.ram_wait_states;
    auto p = std::make_unique<Platform>(popt);
    load_image(img, *p);
    if (opt.setup) opt.setup(*p);
    return p;
  };

  // discovery execution: total cycle count, instruction count, faults
  uint64_t total_cycles;
  {
    auto p = make_platform();
    Platform::RunResult r = p->run(opt.max_cycles);
    if (r.fault) {
      rep.failed = true;
      rep.failure = r.fault->message;
      return rep;
    }
    total_cycles = r.cycles;
    rep.cycles = total_cycles;
    rep.instructions = p->cpu().state.stats.instructions_retired;
    rep.cpi = p->cpu().state.stats.cpi();
  }
  if (total_cycles == 0) {
    rep.failed = true;
    rep.failure = "workload ran zero cycles";
    return rep;
  }
  rep.reference_cycles = opt.reference_cycles ? opt.reference_cycles : total_cycles;

  uint64_t window = (total_cycles + opt.phases - 1) / opt.phases;
  using clock = std::chrono::steady_clock;

  for (unsigned r = 0; r < opt.reps; ++r) {
    auto p = make_platform();
    std::vector<double> row;
    uint64_t done = 0;
    for (unsigned ph = 0; ph < opt.phases; ++ph) {
      uint64_t want = std::min(window, total_cycles - done);
      auto t0 = clock::now();
      Platform::RunResult rr = p->run(want);
      auto t1 = clock::now();
      done += rr.cycles;
      double secs = std::chrono::duration<double>(t1 - t0).count();
      if (secs <= 0) secs = 1e-9;
      row.push_back(static_cast<double>(rr.cycles) / secs);
      rep.wall_seconds += secs;
    }
    if (done != total_cycles) {
      rep.failed = true;
      rep.failure = "nondeterministic cycle count across repetitions";
      return rep;
    }
    rep.per_phase_cps.push_back(std::move(row));
  }

  double sum = 0;
  size_t n = 0;
  for (const auto& row : rep.per_phase_cps)
    for (double v : row) {
      sum += v;
      ++n;
    }
  rep.mean_cps = sum / static_cast<double>(n);
  double var = 0;
  for (const auto& row : rep.per_phase_cps)
    for (double v : row) var += (v - rep.mean_cps) * (v - rep.mean_cps);
  rep.stddev_cps = std::sqrt(var / static_cast<double>(n));
  // effective speed: the accurate run's work divided by this run's wall time
  double secs_per_rep = rep.wall_seconds / rep.reps;
  rep.mean_effective_cps = static_cast<double>(rep.reference_cycles) / secs_per_rep;
  return rep;
}

// ---------------------------------------------------------------------------
// The optimization ladder
// ---------------------------------------------------------------------------

struct LadderRung {
  std::string label;
  FidelityConfig config;
};

/// Canonical benchmark grid, slowest to fastest: the resolved-signal
/// model, native signals, the best cycle-accurate style (methods, cached
/// reads, fusion), then the non-cycle-accurate modes stacked one by one.
inline std::vector<LadderRung> speed_ladder() {
  std::vector<LadderRung> rungs;
  FidelityConfig c;
  c.signal_mode = SignalMode::Resolved4;
  c.process_style = ProcessStyle::ThreadsOnly;
  c.port_read_caching = false;
  c.process_fusion = false;
  rungs.push_back({"resolved4", c});
  c.signal_mode = SignalMode::Native;
  rungs.push_back({"native", c});
  c.process_style = ProcessStyle::MethodsWherePossible;
  c.port_read_caching = true;
  c.process_fusion = true;
  rungs.push_back({"cycle_accurate_best", c});
  c.ifetch_dispatch = true;
  rungs.push_back({"ifetch_dispatch", c});
  c.data_dispatch = true;
  rungs.push_back({"data_dispatch", c});
  c.peripheral_gating = true;
  rungs.push_back({"peripheral_gating", c});
  c.interception = true;
  rungs.push_back({"interception", c});
  return rungs;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline nlohmann::json config_to_json(const FidelityConfig& c) {
  return nlohmann::json{
      {"signal_mode", c.signal_mode == SignalMode::Resolved4 ? "resolved4" : "native"},
      {"process_style",
       c.process_style == ProcessStyle::ThreadsOnly ? "threads" : "methods"},
      {"port_read_caching", c.port_read_caching},
      {"process_fusion", c.process_fusion},
      {"uart_tx_sleep", c.uart_tx_sleep},
      {"ifetch_dispatch", c.ifetch_dispatch},
      {"data_dispatch", c.data_dispatch},
      {"peripheral_gating", c.peripheral_gating},
      {"interception", c.interception}};
}

inline nlohmann::json report_to_json(const Report& r) {
  return nlohmann::json{{"label", r.label},
                        {"config", config_to_json(r.config)},
                        {"phases", r.phases},
                        {"reps", r.reps},
                        {"per_phase_cps", r.per_phase_cps},
                        {"mean_cps", r.mean_cps},
                        {"stddev_cps", r.stddev_cps},
                        {"cpi", r.cpi},
                        {"wall_seconds", r.wall_seconds},
                        {"cycles", r.cycles},
                        {"instructions", r.instructions},
                        {"reference_cycles", r.reference_cycles},
                        {"mean_effective_cps", r.mean_effective_cps},
                        {"failed", r.failed},
                        {"failure", r.failure}};
}

inline nlohmann::json constants_to_json(const ReferenceConstants& c) {
  return nlohmann::json{{"hdl_rtl_hz", c.hdl_rtl_hz},
                        {"resolved_model_khz", c.resolved_model_khz},
                        {"native_model_khz", c.native_model_khz},
                        {"cycle_accurate_best_khz", c.cycle_accurate_best_khz},
                        {"effective_peak_khz", c.effective_peak_khz}};
}

inline nlohmann::json reports_to_json(const std::vector<Report>& reports,
                                      const std::string& workload) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : reports) arr.push_back(report_to_json(r));
  return nlohmann::json{{"workload", workload},
                        {"reports", arr},
                        {"reference_constants", constants_to_json(ReferenceConstants{})}};
}

/// Line-delimited text form: one metric per line, `<label>.<metric> <value>`.
inline void print_reports(std::ostream& os, const std::vector<Report>& reports) {
  ReferenceConstants ref;
  os << "reference.hdl_rtl_hz " << ref.hdl_rtl_hz << "\n";
  os << "reference.resolved_model_khz " << ref.resolved_model_khz << "\n";
  os << "reference.native_model_khz " << ref.native_model_khz << "\n";
  os << "reference.cycle_accurate_best_khz " << ref.cycle_accurate_best_khz << "\n";
  os << "reference.effective_peak_khz " << ref.effective_peak_khz << "\n";
  for (const Report& r : reports) {
    if (r.failed) {
      os << r.label << ".failed " << r.failure << "\n";
      continue;
    }
    os << r.label << ".cycles " << r.cycles << "\n";
    os << r.label << ".instructions " << r.instructions << "\n";
    os << r.label << ".cpi " << r.cpi << "\n";
    os << r.label << ".mean_cps " << r.mean_cps << "\n";
    os << r.label << ".stddev_cps " << r.stddev_cps << "\n";
    os << r.label << ".mean_effective_cps " << r.mean_effective_cps << "\n";
    os << r.label << ".wall_seconds " << r.wall_seconds << "\n";
  }
}

}  // namespace fidelsim

#endif  // FIDELSIM_BENCH_HPP
