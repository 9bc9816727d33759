// Copyright 2026 The Multiverse Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include <json.hpp>

namespace multiverse {

inline constexpr std::uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

/// 64-bit FNV-1a. Test vectors: "" -> cbf29ce484222325,
/// "a" -> af63dc4c8601ec8c, "foobar" -> 85944171f73967e8.
constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                std::uint64_t state = kFnvOffsetBasis) {
  for (unsigned char c : bytes) {
    state ^= c;
    state *= kFnvPrime;
  }
  return state;
}

/// FNV-1a over the little-endian bytes of a ‖ b.
std::uint64_t stable_hash_pair(std::uint64_t a, std::uint64_t b);

/// Decimal rendering with 17 significant digits (round-trips any double).
std::string format_double(double value);

/// Canonical JSON: object keys sorted bytewise, no insignificant
/// whitespace, non-integral numbers with 17 significant digits.
std::string canonical_json(const nlohmann::json& value);

/// 16 lowercase hex digits.
std::string to_hex(std::uint64_t value);
std::uint64_t from_hex(std::string_view text);

}  // namespace multiverse
