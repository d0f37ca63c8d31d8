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

#ifndef FIDELSIM_FIDELSIM_HPP
#define FIDELSIM_FIDELSIM_HPP

#include "fidelsim/asm.hpp"
#include "fidelsim/bench.hpp"
#include "fidelsim/bus.hpp"
#include "fidelsim/config.hpp"
#include "fidelsim/cpu.hpp"
#include "fidelsim/fault.hpp"
#include "fidelsim/fidelity.hpp"
#include "fidelsim/image.hpp"
#include "fidelsim/kernel.hpp"
#include "fidelsim/logic.hpp"
#include "fidelsim/peripherals.hpp"
#include "fidelsim/soc.hpp"
#include "fidelsim/terminal.hpp"
#include "fidelsim/trace.hpp"
#include "fidelsim/vcd.hpp"

#endif  // FIDELSIM_FIDELSIM_HPP
