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
// Program image container: magic "MR32IMG1", a segment table, raw segment
// bytes, the entry point and a table of exported symbols. All fields are
// big-endian. The side-car symbol file is plain text, one
// "<hex-address> <name>" per line.
//

#ifndef FIDELSIM_IMAGE_HPP
#define FIDELSIM_IMAGE_HPP

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "fidelsim/bytes.hpp"
#include "fidelsim/soc.hpp"

namespace fidelsim {

struct Segment {
  uint32_t base = 0;
  std::vector<uint8_t> bytes;
};

struct Image {
  std::vector<Segment> segments;
  uint32_t entry = 0;
  std::map<std::string, uint32_t> symbols;  ///< exported labels

  void validate() const {
    for (size_t i = 0; i < segments.size(); ++i) {
      if (segments[i].bytes.empty()) throw LoadError("empty segment");
      for (size_t j = i + 1; j < segments.size(); ++j) {
        uint64_t a0 = segments[i].base, a1 = a0 + segments[i].bytes.size();
        uint64_t b0 = segments[j].base, b1 = b0 + segments[j].bytes.size();
        if (a0 < b1 && b0 < a1) throw LoadError("overlapping segments");
      }
    }
    bool entry_ok = false;
    for (const auto& s : segments)
      if (entry >= s.base && entry < s.base + s.bytes.size()) entry_ok = true;
    if (!entry_ok) throw LoadError("entry point outside all segments");
  }

  void save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw LoadError("cannot write image " + path);
    os.write("MR32IMG1", 8);
    detail::put_u32(os, static_cast<uint32_t>(segments.size()));
    for (const auto& s : segments) {
      detail::put_u32(os, s.base);
      detail::put_u32(os, static_cast<uint32_t>(s.bytes.size()));
    }
    for (const auto& s : segments)
      os.write(reinterpret_cast<const char*>(s.bytes.data()),
               static_cast<std::streamsize>(s.bytes.size()));
    detail::put_u32(os, entry);
    detail::put_u32(os, static_cast<uint32_t>(symbols.size()));
    for (const auto& [name, addr] : symbols) {
      detail::put_string(os, name);
      detail::put_u32(os, addr);
    }
    if (!os) throw LoadError("short write on image " + path);
  }

  static Image load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw LoadError("cannot open image " + path);
    char magic[8];
    is.read(magic, 8);
    if (is.gcount() != 8 || std::string(magic, 8) != "MR32IMG1")
      throw LoadError("not an MR32IMG1 image: " + path);
    Image img;
    uint32_t nseg = detail::get_u32(is);
    std::vector<uint32_t> lengths;
    for (uint32_t i = 0; i < nseg; ++i) {
      Segment s;
      s.base = detail::get_u32(is);
      lengths.push_back(detail::get_u32(is));
      img.segments.push_back(std::move(s));
    }
    for (uint32_t i = 0; i < nseg; ++i) {
      img.segments[i].bytes.resize(lengths[i]);
      is.read(reinterpret_cast<char*>(img.segments[i].bytes.data()), lengths[i]);
      if (static_cast<uint32_t>(is.gcount()) != lengths[i])
        throw LoadError("truncated segment data");
    }
    img.entry = detail::get_u32(is);
    uint32_t nsym = detail::get_u32(is);
    for (uint32_t i = 0; i < nsym; ++i) {
      std::string name = detail::get_string(is);
      img.symbols[name] = detail::get_u32(is);
    }
    img.validate();
    return img;
  }
};

inline void save_symbols(const Image& img, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw LoadError("cannot write symbol file " + path);
  static const char* digits = "0123456789abcdef";
  for (const auto& [name, addr] : img.symbols) {
    std::string hex(8, '0');
    uint32_t v = addr;
    for (int i = 7; i >= 0; --i, v >>= 4) hex[static_cast<size_t>(i)] = digits[v & 0xF];
    os << hex << " " << name << "\n";
  }
}

inline std::map<std::string, uint32_t> load_symbols(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw LoadError("cannot open symbol file " + path);
  std::map<std::string, uint32_t> out;
  std::string hex, name;
  while (is >> hex >> name) out[name] = static_cast<uint32_t>(std::stoul(hex, nullptr, 16));
  return out;
}

/// Copy an image into the platform backing stores, point the core at the
/// entry, and populate the interception registry from exported
/// memset/memcpy symbols.
inline void load_image(const Image& img, Platform& platform) {
  img.validate();
  for (const auto& s : img.segments) {
    uint64_t end = uint64_t{s.base} + s.bytes.size();
    if (s.base >= kRamBase && end <= uint64_t{kRamBase} + platform.ram().store().size()) {
      for (size_t i = 0; i < s.bytes.size(); ++i)
        platform.ram().store().write_byte(s.base - kRamBase + static_cast<uint32_t>(i),
                                          s.bytes[i]);
    } else if (s.base >= kFlashBase &&
               end <= uint64_t{kFlashBase} + platform.flash().store().size()) {
      for (size_t i = 0; i < s.bytes.size(); ++i)
        platform.flash().store().write_byte(s.base - kFlashBase + static_cast<uint32_t>(i),
                                            s.bytes[i]);
    } else {
      throw LoadError("segment at 0x" + std::to_string(s.base) + " outside RAM and FLASH");
    }
  }
  platform.cpu().state.pc = img.entry;
  platform.intercepts().clear();
  for (const auto& [name, addr] : img.symbols) {
    if (name == "memset") platform.intercepts().add(addr, Builtin::Memset);
    if (name == "memcpy") platform.intercepts().add(addr, Builtin::Memcpy);
  }
}

}  // namespace fidelsim

#endif  // FIDELSIM_IMAGE_HPP
