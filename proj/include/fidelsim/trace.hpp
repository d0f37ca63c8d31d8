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
// Pin traces: recorded value-change streams over a fixed pin set, with a
// comparator that reports the earliest divergence, an in-flight comparing
// sink for long runs, and a binary container for the diff tool.
//

#ifndef FIDELSIM_TRACE_HPP
#define FIDELSIM_TRACE_HPP

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "fidelsim/bytes.hpp"
#include "fidelsim/kernel.hpp"

namespace fidelsim {

struct TraceDecl {
  SignalId sig = 0;
  std::string name;
  unsigned width = 1;
  TraceValue initial;
  bool operator==(const TraceDecl&) const = default;
};

struct TraceRecord {
  SimTime t;
  SignalId sig = 0;
  TraceValue v;
  bool operator==(const TraceRecord&) const = default;
};

/// In-memory recording of a traced run: pin declarations with their initial
/// values plus every change, strictly ordered by (cycle, delta, signal).
class PinTrace : public TraceSink {
 public:
  PinTrace() = default;

  /// Snapshot declarations and initial values for the given pins and start
  /// recording changes on them. Call before the first cycle.
  void attach(Simulator& sim, const std::vector<SignalId>& pins) {
    decls_.clear();
    records_.clear();
    for (SignalId sig : pins)
      decls_.push_back(TraceDecl{sig, sim.signal_name(sig), sim.signal_width(sig),
                                 sim.signal_trace_value(sig)});
    sim.set_trace(this, pins);
  }

  void on_change(SimTime t, SignalId sig, const TraceValue& v) override {
    records_.push_back(TraceRecord{t, sig, v});
  }

  const std::vector<TraceDecl>& decls() const { return decls_; }
  const std::vector<TraceRecord>& records() const { return records_; }
  std::vector<TraceRecord>& mutable_records() { return records_; }

  void set_decls(std::vector<TraceDecl> d) { decls_ = std::move(d); }

  void save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw LoadError("cannot write trace file " + path);
    os.write(kMagic, 8);
    detail::put_u32(os, static_cast<uint32_t>(decls_.size()));
    for (const auto& d : decls_) {
      detail::put_u32(os, d.sig);
      detail::put_string(os, d.name);
      detail::put_u32(os, d.width);
      put_value(os, d.initial);
    }
    detail::put_u64(os, records_.size());
    for (const auto& r : records_) {
      detail::put_u64(os, r.t.cycle);
      detail::put_u32(os, r.t.delta);
      detail::put_u32(os, r.sig);
      put_value(os, r.v);
    }
    if (!os) throw LoadError("short write on trace file " + path);
  }

  static PinTrace load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw LoadError("cannot open trace file " + path);
    char magic[8];
    is.read(magic, 8);
    if (is.gcount() != 8 || std::string(magic, 8) != kMagic)
      throw LoadError("not a trace file: " + path);
    PinTrace t;
    uint32_t ndecl = detail::get_u32(is);
    for (uint32_t i = 0; i < ndecl; ++i) {
      TraceDecl d;
      d.sig = detail::get_u32(is);
      d.name = detail::get_string(is);
      d.width = detail::get_u32(is);
      d.initial = get_value(is);
      t.decls_.push_back(std::move(d));
    }
    uint64_t nrec = detail::get_u64(is);
    t.records_.reserve(nrec);
    for (uint64_t i = 0; i < nrec; ++i) {
      TraceRecord r;
      r.t.cycle = detail::get_u64(is);
      r.t.delta = detail::get_u32(is);
      r.sig = detail::get_u32(is);
      r.v = get_value(is);
      t.records_.push_back(r);
    }
    return t;
  }

 private:
  static constexpr const char kMagic[9] = "MR32TRC1";

  static void put_value(std::ostream& os, const TraceValue& v) {
    detail::put_u64(os, v.bits);
    detail::put_u64(os, v.x);
    detail::put_u64(os, v.z);
  }
  static TraceValue get_value(std::istream& is) {
    TraceValue v;
    v.bits = detail::get_u64(is);
    v.x = detail::get_u64(is);
    v.z = detail::get_u64(is);
    return v;
  }

  std::vector<TraceDecl> decls_;
  std::vector<TraceRecord> records_;
};

/// First point where two traces disagree.
struct TraceDivergence {
  SimTime t;
  std::string signal;
  // What each side holds at the divergence; an absent side means that trace
  // ended (or never changed this pin) while the other kept going.
  std::optional<TraceValue> a;
  std::optional<TraceValue> b;
};

inline std::string pin_name(const PinTrace& t, SignalId sig) {
  for (const auto& d : t.decls())
    if (d.sig == sig) return d.name;
  return "signal#" + std::to_string(sig);
}

/// Compare two traces over the same pin set. Returns the earliest divergence
/// or nullopt when the traces are identical. Pin sets must match by name and
/// width (signal ids may differ between runs).
inline std::optional<TraceDivergence> trace_compare(const PinTrace& a, const PinTrace& b) {
  if (a.decls().size() != b.decls().size())
    throw ConfigError("trace comparison: pin sets differ in size");
  for (size_t i = 0; i < a.decls().size(); ++i) {
    const TraceDecl& da = a.decls()[i];
    const TraceDecl& db = b.decls()[i];
    if (da.name != db.name || da.width != db.width)
      throw ConfigError("trace comparison: pin sets differ at '" + da.name + "' vs '" +
                        db.name + "'");
    if (!(da.initial == db.initial))
      return TraceDivergence{SimTime{0, 0}, da.name, da.initial, db.initial};
  }
  size_t n = std::min(a.records().size(), b.records().size());
  for (size_t i = 0; i < n; ++i) {
    const TraceRecord& ra = a.records()[i];
    const TraceRecord& rb = b.records()[i];
    if (!(ra == rb)) {
      // report at the earlier of the two timestamps
      const TraceRecord& first = (ra.t <= rb.t) ? ra : rb;
      return TraceDivergence{first.t, a.decls().empty() ? "" : pin_name(a, first.sig),
                             ra.v, rb.v};
    }
  }
  if (a.records().size() != b.records().size()) {
    const auto& longer = a.records().size() > b.records().size() ? a : b;
    const TraceRecord& r = longer.records()[n];
    std::optional<TraceValue> va, vb;
    if (a.records().size() > n) va = r.v;
    if (b.records().size() > n) vb = r.v;
    return TraceDivergence{r.t, pin_name(longer, r.sig), va, vb};
  }
  return std::nullopt;

}

/// Streams change records straight to a trace file; memory stays O(pins)
/// no matter how long the run is. finish() patches the record count.
class FileTraceSink : public TraceSink {
 public:
  FileTraceSink(const std::string& path, Simulator& sim, const std::vector<SignalId>& pins)
      : os_(path, std::ios::binary) {
    if (!os_) throw LoadError("cannot write trace file " + path);
    os_.write("MR32TRC1", 8);
    detail::put_u32(os_, static_cast<uint32_t>(pins.size()));
    for (SignalId sig : pins) {
      detail::put_u32(os_, sig);
      detail::put_string(os_, sim.signal_name(sig));
      detail::put_u32(os_, sim.signal_width(sig));
      const TraceValue v = sim.signal_trace_value(sig);
      detail::put_u64(os_, v.bits);
      detail::put_u64(os_, v.x);
      detail::put_u64(os_, v.z);
    }
    count_pos_ = os_.tellp();
    detail::put_u64(os_, 0);
  }

  void on_change(SimTime t, SignalId sig, const TraceValue& v) override {
    detail::put_u64(os_, t.cycle);
    detail::put_u32(os_, t.delta);
    detail::put_u32(os_, sig);
    detail::put_u64(os_, v.bits);
    detail::put_u64(os_, v.x);
    detail::put_u64(os_, v.z);
    ++count_;
  }

  void finish() {
    os_.seekp(count_pos_);
    detail::put_u64(os_, count_);
    os_.flush();
    if (!os_) throw LoadError("short write on trace file");
  }

 private:
  std::ofstream os_;
  std::streampos count_pos_;
  uint64_t count_ = 0;
};

/// Fan-out to several sinks.
class TeeSink : public TraceSink {
 public:
  explicit TeeSink(std::vector<TraceSink*> sinks) : sinks_(std::move(sinks)) {}
  void on_change(SimTime t, SignalId sig, const TraceValue& v) override {
    for (TraceSink* s : sinks_) s->on_change(t, sig, v);
  }

 private:
  std::vector<TraceSink*> sinks_;
};

/// Comparing sink: checks a live run against a reference trace without
/// storing a second copy. Divergence is latched, not thrown, so the run can
/// finish; call divergence() afterwards.
class CompareSink : public TraceSink {
 public:
  explicit CompareSink(const PinTrace& reference) : ref_(reference) {}

  void on_change(SimTime t, SignalId sig, const TraceValue& v) override {
    if (div_) return;
    if (index_ >= ref_.records().size()) {
      div_ = TraceDivergence{t, resolve_name(sig), v, std::nullopt};
      return;
    }
    const TraceRecord& r = ref_.records()[index_];
    // the reference was recorded with the same construction order, so ids match
    if (r.t != t || r.sig != sig || !(r.v == v)) {
      div_ = TraceDivergence{t, resolve_name(sig), v, r.v};
      return;
    }
    ++index_;
  }

  /// Declare the run finished; an unconsumed reference tail is a divergence.
  void finish() {
    if (div_ || index_ >= ref_.records().size()) return;
    const TraceRecord& r = ref_.records()[index_];
    div_ = TraceDivergence{r.t, resolve_name(r.sig), std::nullopt, r.v};
  }

  const std::optional<TraceDivergence>& divergence() const { return div_; }
  size_t matched() const { return index_; }

 private:
  std::string resolve_name(SignalId sig) const {
    for (const auto& d : ref_.decls())
      if (d.sig == sig) return d.name;
    return "signal#" + std::to_string(sig);
  }

  const PinTrace& ref_;
  size_t index_ = 0;
  std::optional<TraceDivergence> div_;
};

}  // namespace fidelsim

#endif  // FIDELSIM_TRACE_HPP
