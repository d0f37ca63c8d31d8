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

#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

#include "fidelsim/logic.hpp"

using namespace fidelsim;

namespace {

constexpr Logic4 kAll[4] = {Logic4::L0, Logic4::L1, Logic4::X, Logic4::Z};

// Independent oracle: the resolution a shared wire must implement, stated
// from the axioms rather than from a table. Z is released (identity), X is
// a conflict (absorbing), equal levels agree, opposite levels conflict.
Logic4 oracle_resolve(Logic4 a, Logic4 b) {
  if (a == Logic4::X || b == Logic4::X) return Logic4::X;
  if (a == Logic4::Z) return b;
  if (b == Logic4::Z) return a;
  return a == b ? a : Logic4::X;
}

}  // namespace

TEST_CASE("resolve matches the axiom oracle on all 16 pairs") {
  for (Logic4 a : kAll)
    for (Logic4 b : kAll) CHECK(resolve(a, b) == oracle_resolve(a, b));
}

TEST_CASE("resolve is a commutative idempotent monoid with identity Z and absorbing X") {
  for (Logic4 a : kAll) {
    CHECK(resolve(a, a) == a);                      // idempotent (4 cases)
    CHECK(resolve(a, Logic4::Z) == a);              // identity
    CHECK(resolve(Logic4::Z, a) == a);
    CHECK(resolve(a, Logic4::X) == Logic4::X);      // absorbing
    CHECK(resolve(Logic4::X, a) == Logic4::X);
  }
  for (Logic4 a : kAll)
    for (Logic4 b : kAll) CHECK(resolve(a, b) == resolve(b, a));  // 16 cases
  for (Logic4 a : kAll)
    for (Logic4 b : kAll)
      for (Logic4 c : kAll)                          // 64 cases
        CHECK(resolve(resolve(a, b), c) == resolve(a, resolve(b, c)));
}

TEST_CASE("resolve: opposite levels conflict") {
  CHECK(resolve(Logic4::L0, Logic4::L1) == Logic4::X);
  CHECK(resolve(Logic4::Z, Logic4::Z) == Logic4::Z);
  CHECK(resolve(Logic4::L1, Logic4::Z) == Logic4::L1);
}

TEST_CASE("resolve_many folds the pair table") {
  CHECK(resolve_many(std::vector<Logic4>{Logic4::L1}) == Logic4::L1);

  std::vector<Logic4> v{Logic4::L0, Logic4::Z, Logic4::L0};
  Logic4 expect = v[0];
  for (size_t i = 1; i < v.size(); ++i) expect = oracle_resolve(expect, v[i]);
  CHECK(expect == Logic4::L0);
  CHECK(resolve_many(v) == expect);

  CHECK(resolve_many(std::vector<Logic4>{Logic4::L1, Logic4::X, Logic4::Z}) == Logic4::X);
  CHECK_THROWS_AS(resolve_many(std::vector<Logic4>{}), SimFault);
}

TEST_CASE("resolve_many is permutation-invariant") {
  std::mt19937 rng(1234);
  std::uniform_int_distribution<int> pick(0, 3);
  std::uniform_int_distribution<int> len(1, 8);
  for (int round = 0; round < 200; ++round) {
    std::vector<Logic4> v(static_cast<size_t>(len(rng)));
    for (auto& x : v) x = kAll[pick(rng)];
    Logic4 base = resolve_many(v);
    for (int p = 0; p < 10; ++p) {
      std::shuffle(v.begin(), v.end(), rng);
      CHECK(resolve_many(v) == base);
    }
  }
}

TEST_CASE("vec_to_word positional encoding") {
  // 8-bit vector 00101010 (msb..lsb) is 0x2A
  LogicVec v = LogicVec::from_word(8, 0x2A);
  CHECK(v.to_string() == "00101010");
  CHECK(vec_to_word(v) == 0x2A);
  for (unsigned i = 0; i < 8; ++i)
    CHECK(v.bit(i) == (((0x2A >> i) & 1) ? Logic4::L1 : Logic4::L0));
}

TEST_CASE("vec_to_word faults on undriven bits") {
  LogicVec z = LogicVec::filled(32, Logic4::Z);
  CHECK_THROWS_AS(vec_to_word(z), SimFault);
  LogicVec x = LogicVec::from_word(8, 0xFF);
  x.set_bit(3, Logic4::X);
  CHECK_THROWS_AS(vec_to_word(x), SimFault);
}

TEST_CASE("word->vec->word round-trips all 8-bit values") {
  for (unsigned w = 0; w < 256; ++w) {
    LogicVec v = word_to_vec(8, w);
    CHECK(vec_to_word(v) == w);
  }
}

TEST_CASE("LogicVec width is 1..64") {
  CHECK_THROWS_AS(LogicVec(0), ConfigError);
  CHECK_THROWS_AS(LogicVec(65), ConfigError);
  CHECK(LogicVec(64).width() == 64);
  CHECK(vec_to_word(LogicVec::from_word(64, ~uint64_t{0})) == ~uint64_t{0});
}

TEST_CASE("projection collapses to driven levels") {
  LogicVec v(4, Logic4::Z);
  v.set_bit(1, Logic4::L1);
  v.set_bit(2, Logic4::X);
  CHECK(v.project_to_word() == 0b0010);
  CHECK(v.x_mask() == 0b0100);
  CHECK(v.z_mask() == 0b1001);
}
