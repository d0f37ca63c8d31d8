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

#ifndef FIDELSIM_VCD_HPP
#define FIDELSIM_VCD_HPP

#include <map>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "fidelsim/trace.hpp"

namespace fidelsim {

/// Value Change Dump writer. One clock cycle maps to 10 ns of VCD time;
/// delta activity inside a cycle collapses to the final value at that
/// timestamp, which is what waveform viewers expect.
class VcdWriter : public TraceSink {
 public:
  static constexpr unsigned kNsPerCycle = 10;

  VcdWriter(std::ostream& os, const std::vector<TraceDecl>& decls,
            const std::string& top = "soc")
      : os_(os) {
    os_ << "$timescale 1ns $end\n";
    os_ << "$scope module " << top << " $end\n";
    for (const auto& d : decls) {
      std::string id = alloc_id();
      ids_.emplace(d.sig, VarState{id, d.width, d.initial});
      os_ << "$var wire " << d.width << " " << id << " " << d.name << " $end\n";
    }
    os_ << "$upscope $end\n";
    os_ << "$enddefinitions $end\n";
    os_ << "$dumpvars\n";
    for (const auto& d : decls) emit_value(ids_.at(d.sig), d.initial);
    os_ << "$end\n";
  }

  void on_change(SimTime t, SignalId sig, const TraceValue& v) override {
    auto it = ids_.find(sig);
    if (it == ids_.end())
      throw ConfigError("VCD writer: change on undeclared signal id " + std::to_string(sig));
    if (t.cycle != pending_cycle_ && have_pending_) flush();
    pending_cycle_ = t.cycle;
    have_pending_ = true;
    pending_[sig] = v;  // later deltas of the same cycle overwrite
  }

  /// Write any buffered cycle. Call once after the run.
  void finish() {
    if (have_pending_) flush();
  }

 private:
  struct VarState {
    std::string id;
    unsigned width;
    TraceValue last;
  };

  std::string alloc_id() {
    // printable identifier alphabet '!'..'~', little-endian digits
    std::string id;
    unsigned n = next_id_++;
    do {
      id.push_back(static_cast<char>('!' + n % 94));
      n /= 94;
    } while (n != 0);
    return id;
  }

  static char bit_char(const TraceValue& v, unsigned i) {
    if ((v.x >> i) & 1) return 'x';
    if ((v.z >> i) & 1) return 'z';
    return ((v.bits >> i) & 1) ? '1' : '0';
  }

  void emit_value(VarState& var, const TraceValue& v) {
    if (var.width == 1) {
      os_ << bit_char(v, 0) << var.id << "\n";
    } else {
      os_ << "b";
      for (unsigned i = var.width; i-- > 0;) os_ << bit_char(v, i);
      os_ << " " << var.id << "\n";
    }
    var.last = v;
  }

  void flush() {
    os_ << "#" << pending_cycle_ * kNsPerCycle << "\n";
    for (auto& [sig, v] : pending_) {
      VarState& var = ids_.at(sig);
      if (!(var.last == v)) emit_value(var, v);
    }
    pending_.clear();
    have_pending_ = false;
  }

  std::ostream& os_;
  std::unordered_map<SignalId, VarState> ids_;
  unsigned next_id_ = 0;
  std::map<SignalId, TraceValue> pending_;
  uint64_t pending_cycle_ = 0;
  bool have_pending_ = false;
};

/// Render a recorded trace as a VCD document.
inline void write_vcd(std::ostream& os, const PinTrace& trace, const std::string& top = "soc") {
  VcdWriter w(os, trace.decls(), top);
  for (const auto& r : trace.records()) w.on_change(r.t, r.sig, r.v);
  w.finish();
}

}  // namespace fidelsim

#endif  // FIDELSIM_VCD_HPP
