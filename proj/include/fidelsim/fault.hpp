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

#ifndef FIDELSIM_FAULT_HPP
#define FIDELSIM_FAULT_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fidelsim {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid static configuration: duplicate process names, construction-time
/// axes changed at run time, bad CLI values and the like.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// Assembly source error; carries the 1-based source line.
class AsmError : public Error {
 public:
  AsmError(unsigned line, const std::string& msg)
      : Error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  unsigned line() const { return line_; }

 private:
  unsigned line_;
};

/// Image container violations (overlapping segments, bad magic, segments
/// outside loadable memory).
class LoadError : public Error {
 public:
  explicit LoadError(const std::string& msg) : Error(msg) {}
};

/// Kinds of runtime simulation faults.
enum class FaultKind : uint8_t {
  DeltaOverflow,     ///< combinational loop: delta count exceeded the limit
  UnknownSignal,     ///< read or write of an unregistered signal id
  UnknownValue,      ///< X or Z crossed a word datapath
  BusConflict,       ///< X observed on a shared bus line
  BusError,          ///< transaction to an unmapped or read-only target
  IllegalInstruction,
  UnalignedAccess,
  BadIntercept,      ///< overlapping memcpy regions or target outside memory
};

inline const char* fault_kind_name(FaultKind k) {
  switch (k) {
    case FaultKind::DeltaOverflow: return "delta overflow";
    case FaultKind::UnknownSignal: return "unknown signal";
    case FaultKind::UnknownValue: return "unknown value";
    case FaultKind::BusConflict: return "bus conflict";
    case FaultKind::BusError: return "bus error";
    case FaultKind::IllegalInstruction: return "illegal instruction";
    case FaultKind::UnalignedAccess: return "unaligned access";
    case FaultKind::BadIntercept: return "bad intercept";
  }
  return "unknown fault";
}

/// Hard simulation fault. Thrown from inside the kernel or a process body;
/// the kernel stops the run and propagates it to the caller of run().
class SimFault : public Error {
 public:
  SimFault(FaultKind kind, const std::string& msg)
      : Error(std::string(fault_kind_name(kind)) + ": " + msg), kind_(kind) {}
  FaultKind kind() const { return kind_; }

 private:
  FaultKind kind_;
};

}  // namespace fidelsim

#endif  // FIDELSIM_FAULT_HPP
