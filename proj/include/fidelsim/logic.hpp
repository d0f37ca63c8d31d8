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

#ifndef FIDELSIM_LOGIC_HPP
#define FIDELSIM_LOGIC_HPP

#include <array>
#include <cstdint>
#include <span>
#include <string>

#include "fidelsim/fault.hpp"

namespace fidelsim {

/// Four-state logic value. L0/L1 are driven levels, Z is released (high
/// impedance), X is a drive conflict or otherwise unknown level.
enum class Logic4 : uint8_t { L0 = 0, L1 = 1, X = 2, Z = 3 };

inline char logic_char(Logic4 v) {
  switch (v) {
    case Logic4::L0: return '0';
    case Logic4::L1: return '1';
    case Logic4::X: return 'x';
    case Logic4::Z: return 'z';
  }
  return '?';
}

inline Logic4 logic_from_char(char c) {
  switch (c) {
    case '0': return Logic4::L0;
    case '1': return Logic4::L1;
    case 'x': case 'X': return Logic4::X;
    case 'z': case 'Z': return Logic4::Z;
  }
  throw ConfigError(std::string("not a logic character: ") + c);
}

namespace detail {
// Pairwise resolution. Z is the identity, X is absorbing, and two opposite
// driven levels conflict to X. Indexing follows the Logic4 enum order.
inline constexpr Logic4 kResolveTable[4][4] = {
    //            L0          L1          X          Z
    /* L0 */ {Logic4::L0, Logic4::X, Logic4::X, Logic4::L0},
    /* L1 */ {Logic4::X, Logic4::L1, Logic4::X, Logic4::L1},
    /* X  */ {Logic4::X, Logic4::X, Logic4::X, Logic4::X},
    /* Z  */ {Logic4::L0, Logic4::L1, Logic4::X, Logic4::Z},
};
}  // namespace detail

/// Resolve two simultaneous drivers of one wire.
inline constexpr Logic4 resolve(Logic4 a, Logic4 b) {
  return detail::kResolveTable[static_cast<int>(a)][static_cast<int>(b)];
}

/// Fold of resolve() over a non-empty driver list. Order-independent.
inline Logic4 resolve_many(std::span<const Logic4> drivers) {
  if (drivers.empty())
    throw SimFault(FaultKind::UnknownValue, "resolve_many on empty driver list");
  Logic4 acc = drivers[0];
  for (size_t i = 1; i < drivers.size() && acc != Logic4::X; ++i)
    acc = resolve(acc, drivers[i]);
  return acc;
}

/// Fixed-width vector of Logic4, 1..64 bits. Bit i of the corresponding
/// machine word is bits()[i]; bit 0 is the least significant bit.
///
/// Stored one byte per bit on purpose: this is a faithful stand-in for
/// resolved-vector signal types, which pay per-bit storage and per-bit
/// resolution cost. The native signal mode bypasses this class entirely.
class LogicVec {
 public:
  static constexpr unsigned kMaxWidth = 64;

  explicit LogicVec(unsigned width, Logic4 fill = Logic4::L0) : width_(width) {
    if (width_ < 1 || width_ > kMaxWidth)
      throw ConfigError("LogicVec width must be 1..64, got " + std::to_string(width));
    bits_.fill(fill);
  }

  static LogicVec from_word(unsigned width, uint64_t word) {
    LogicVec v(width);
    for (unsigned i = 0; i < width; ++i)
      v.bits_[i] = (word >> i) & 1u ? Logic4::L1 : Logic4::L0;
    return v;
  }

  static LogicVec filled(unsigned width, Logic4 fill) { return LogicVec(width, fill); }

  unsigned width() const { return width_; }

  Logic4 bit(unsigned i) const { return bits_[i]; }
  void set_bit(unsigned i, Logic4 v) { bits_[i] = v; }

  bool is_fully_driven() const {
    for (unsigned i = 0; i < width_; ++i)
      if (bits_[i] != Logic4::L0 && bits_[i] != Logic4::L1) return false;
    return true;
  }

  bool has_x() const {
    for (unsigned i = 0; i < width_; ++i)
      if (bits_[i] == Logic4::X) return true;
    return false;
  }

  /// Word value; only defined when every bit is a driven level.
  uint64_t to_word() const {
    uint64_t w = 0;
    for (unsigned i = 0; i < width_; ++i) {
      if (bits_[i] == Logic4::X || bits_[i] == Logic4::Z)
        throw SimFault(FaultKind::UnknownValue,
                       "unknown value crossed datapath (bit " + std::to_string(i) + " is " +
                           logic_char(bits_[i]) + ")");
      w |= static_cast<uint64_t>(bits_[i] == Logic4::L1 ? 1 : 0) << i;
    }
    return w;
  }

  /// Per-bit resolution of two equal-width vectors.
  LogicVec resolved_with(const LogicVec& other) const {
    LogicVec out(width_);
    for (unsigned i = 0; i < width_; ++i) out.bits_[i] = resolve(bits_[i], other.bits_[i]);
    return out;
  }

  /// Collapse to driven levels: L1 stays 1, everything else becomes 0.
  /// Used when comparing resolved traces against native-mode traces.
  uint64_t project_to_word() const {
    uint64_t w = 0;
    for (unsigned i = 0; i < width_; ++i)
      w |= static_cast<uint64_t>(bits_[i] == Logic4::L1 ? 1 : 0) << i;
    return w;
  }

  uint64_t x_mask() const {
    uint64_t m = 0;
    for (unsigned i = 0; i < width_; ++i)
      m |= static_cast<uint64_t>(bits_[i] == Logic4::X ? 1 : 0) << i;
    return m;
  }

  uint64_t z_mask() const {
    uint64_t m = 0;
    for (unsigned i = 0; i < width_; ++i)
      m |= static_cast<uint64_t>(bits_[i] == Logic4::Z ? 1 : 0) << i;
    return m;
  }

  bool operator==(const LogicVec& other) const {
    if (width_ != other.width_) return false;
    for (unsigned i = 0; i < width_; ++i)
      if (bits_[i] != other.bits_[i]) return false;
    return true;
  }

  std::string to_string() const {  // msb first, like waveform viewers print it
    std::string s;
    s.reserve(width_);
    for (unsigned i = width_; i-- > 0;) s.push_back(logic_char(bits_[i]));
    return s;
  }

 private:
  unsigned width_;
  std::array<Logic4, kMaxWidth> bits_;
};

/// Word view of a fully driven vector; faults on X or Z.
inline uint64_t vec_to_word(const LogicVec& v) { return v.to_word(); }

inline LogicVec word_to_vec(unsigned width, uint64_t word) {
  return LogicVec::from_word(width, word);
}

}  // namespace fidelsim

#endif  // FIDELSIM_LOGIC_HPP
