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

#ifndef FIDELSIM_CONFIG_HPP
#define FIDELSIM_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fidelsim/fault.hpp"
#include "fidelsim/kernel.hpp"

namespace fidelsim {

enum class ProcessStyle : uint8_t { ThreadsOnly, MethodsWherePossible };

/// The optimization ladder. The first five axes select how the platform is
/// constructed and are frozen afterwards; the last four may be toggled at
/// run time between cycles.
struct FidelityConfig {
  // construction-time axes
  SignalMode signal_mode = SignalMode::Native;
  ProcessStyle process_style = ProcessStyle::MethodsWherePossible;
  bool port_read_caching = true;
  bool process_fusion = true;
  uint64_t uart_tx_sleep = 64;  ///< cycles between UART TX drain dispatches, >= 1

  // runtime-mutable axes
  bool ifetch_dispatch = false;
  bool data_dispatch = false;
  bool peripheral_gating = false;
  bool interception = false;

  /// data_dispatch implies ifetch_dispatch.
  void normalize() {
    if (data_dispatch) ifetch_dispatch = true;
  }

  bool operator==(const FidelityConfig&) const = default;
};

/// Partial update of the runtime-mutable axes.
struct FidelityDelta {
  std::optional<bool> ifetch_dispatch;
  std::optional<bool> data_dispatch;
  std::optional<bool> peripheral_gating;
  std::optional<bool> interception;

  bool empty() const {
    return !ifetch_dispatch && !data_dispatch && !peripheral_gating && !interception;
  }
};

/// A runtime toggle request: apply `delta` at the first suitable cycle
/// boundary at or after `cycle`.
struct ToggleEvent {
  uint64_t cycle = 0;
  FidelityDelta delta;
};

namespace detail {

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw ConfigError("bad boolean for " + key + ": '" + v + "'");
}

inline void split_kv(const std::string& item, std::string& key, std::string& value) {
  auto eq = item.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("expected KEY=VAL, got '" + item + "'");
  key = item.substr(0, eq);
  value = item.substr(eq + 1);
}

}  // namespace detail

/// Keys accepted only while constructing a platform.
inline bool is_construction_key(const std::string& key) {
  return key == "signal_mode" || key == "process_style" || key == "port_read_caching" ||
         key == "process_fusion" || key == "uart_tx_sleep";
}

inline bool is_runtime_key(const std::string& key) {
  return key == "ifetch_dispatch" || key == "data_dispatch" || key == "peripheral_gating" ||
         key == "interception";
}

/// Apply one KEY=VAL item to a full configuration (construction surface).
inline void apply_config_kv(FidelityConfig& cfg, const std::string& item) {
  std::string key, value;
  detail::split_kv(item, key, value);
  if (key == "signal_mode") {
    if (value == "resolved4")
      cfg.signal_mode = SignalMode::Resolved4;
    else if (value == "native")
      cfg.signal_mode = SignalMode::Native;
    else
      throw ConfigError("signal_mode must be resolved4 or native, got '" + value + "'");
  } else if (key == "process_style") {
    if (value == "threads")
      cfg.process_style = ProcessStyle::ThreadsOnly;
    else if (value == "methods")
      cfg.process_style = ProcessStyle::MethodsWherePossible;
    else
      throw ConfigError("process_style must be threads or methods, got '" + value + "'");
  } else if (key == "port_read_caching") {
    cfg.port_read_caching = detail::parse_bool(key, value);
  } else if (key == "process_fusion") {
    cfg.process_fusion = detail::parse_bool(key, value);
  } else if (key == "uart_tx_sleep") {
    uint64_t n = std::stoull(value);
    if (n < 1) throw ConfigError("uart_tx_sleep must be >= 1");
    cfg.uart_tx_sleep = n;
  } else if (key == "ifetch_dispatch") {
    cfg.ifetch_dispatch = detail::parse_bool(key, value);
  } else if (key == "data_dispatch") {
    cfg.data_dispatch = detail::parse_bool(key, value);
  } else if (key == "peripheral_gating") {
    cfg.peripheral_gating = detail::parse_bool(key, value);
  } else if (key == "interception") {
    cfg.interception = detail::parse_bool(key, value);
  } else {
    throw ConfigError("unknown fidelity key '" + key + "'");
  }
  cfg.normalize();
}

/// Apply one KEY=VAL item to a runtime delta. Construction-time keys are a
/// configuration error here.
inline void apply_delta_kv(FidelityDelta& delta, const std::string& item) {
  std::string key, value;
  detail::split_kv(item, key, value);
  if (is_construction_key(key))
    throw ConfigError("axis '" + key + "' is fixed at construction and cannot be toggled");
  if (key == "ifetch_dispatch")
    delta.ifetch_dispatch = detail::parse_bool(key, value);
  else if (key == "data_dispatch")
    delta.data_dispatch = detail::parse_bool(key, value);
  else if (key == "peripheral_gating")
    delta.peripheral_gating = detail::parse_bool(key, value);
  else if (key == "interception")
    delta.interception = detail::parse_bool(key, value);
  else
    throw ConfigError("unknown fidelity key '" + key + "'");
}

/// Parse a comma-separated KEY=VAL list into a full configuration.
inline FidelityConfig parse_config(const std::string& list, FidelityConfig base = {}) {
  size_t pos = 0;
  while (pos < list.size()) {
    size_t comma = list.find(',', pos);
    if (comma == std::string::npos) comma = list.size();
    std::string item = list.substr(pos, comma - pos);
    if (!item.empty()) apply_config_kv(base, item);
    pos = comma + 1;
  }
  return base;
}

/// Parse the CLI toggle grammar `CYCLE:KEY=VAL`.
inline ToggleEvent parse_toggle(const std::string& text) {
  auto colon = text.find(':');
  if (colon == std::string::npos || colon == 0)
    throw ConfigError("expected CYCLE:KEY=VAL, got '" + text + "'");
  ToggleEvent ev;
  ev.cycle = std::stoull(text.substr(0, colon));
  apply_delta_kv(ev.delta, text.substr(colon + 1));
  return ev;
}

inline std::string config_to_string(const FidelityConfig& c) {
  auto b = [](bool v) { return v ? "on" : "off"; };
  std::string s;
  s += "signal_mode=";
  s += (c.signal_mode == SignalMode::Resolved4 ? "resolved4" : "native");
  s += ",process_style=";
  s += (c.process_style == ProcessStyle::ThreadsOnly ? "threads" : "methods");
  s += ",port_read_caching=";
  s += b(c.port_read_caching);
  s += ",process_fusion=";
  s += b(c.process_fusion);
  s += ",uart_tx_sleep=" + std::to_string(c.uart_tx_sleep);
  s += ",ifetch_dispatch=";
  s += b(c.ifetch_dispatch);
  s += ",data_dispatch=";
  s += b(c.data_dispatch);
  s += ",peripheral_gating=";
  s += b(c.peripheral_gating);
  s += ",interception=";
  s += b(c.interception);
  return s;
}

}  // namespace fidelsim

#endif  // FIDELSIM_CONFIG_HPP
