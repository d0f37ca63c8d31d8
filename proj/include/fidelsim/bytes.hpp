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

#ifndef FIDELSIM_BYTES_HPP
#define FIDELSIM_BYTES_HPP

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "fidelsim/fault.hpp"

// Big-endian stream helpers shared by the image and trace containers.

namespace fidelsim::detail {

inline void put_u8(std::ostream& os, uint8_t v) { os.put(static_cast<char>(v)); }

inline void put_u32(std::ostream& os, uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8)
    os.put(static_cast<char>((v >> shift) & 0xFF));
}

inline void put_u64(std::ostream& os, uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8)
    os.put(static_cast<char>((v >> shift) & 0xFF));
}

inline uint8_t get_u8(std::istream& is) {
  int c = is.get();
  if (c == EOF) throw LoadError("unexpected end of file");
  return static_cast<uint8_t>(c);
}

inline uint32_t get_u32(std::istream& is) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = (v << 8) | get_u8(is);
  return v;
}

inline uint64_t get_u64(std::istream& is) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | get_u8(is);
  return v;
}

inline void put_string(std::ostream& os, const std::string& s) {
  if (s.size() > 255) throw LoadError("string field too long: " + s);
  put_u8(os, static_cast<uint8_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_string(std::istream& is) {
  size_t n = get_u8(is);
  std::string s(n, '\0');
  is.read(s.data(), static_cast<std::streamsize>(n));
  if (static_cast<size_t>(is.gcount()) != n) throw LoadError("unexpected end of file");
  return s;
}

}  // namespace fidelsim::detail

#endif  // FIDELSIM_BYTES_HPP
