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

#include "multiverse/hash.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace multiverse {

namespace {

void append_le(std::array<char, 16>& out, std::size_t offset, std::uint64_t v) {
  for (std::size_t i = 0; i < 8; ++i) {
    out[offset + i] = static_cast<char>((v >> (8 * i)) & 0xffU);
  }
}

void write_canonical(const nlohmann::json& value, std::string& out) {
  using value_t = nlohmann::json::value_t;
  switch (value.type()) {
    case value_t::object: {
      // nlohmann's default object is a std::map, already sorted bytewise.
      out.push_back('{');
      bool first = true;
      for (const auto& [key, child] : value.items()) {
        if (!first) out.push_back(',');
        first = false;
        out += nlohmann::json(key).dump();
        out.push_back(':');
        write_canonical(child, out);
      }
      out.push_back('}');
      break;
    }
    case value_t::array: {
      out.push_back('[');
      bool first = true;
      for (const auto& child : value) {
        if (!first) out.push_back(',');
        first = false;
        write_canonical(child, out);
      }
      out.push_back(']');
      break;
    }
    case value_t::number_float:
      out += format_double(value.get<double>());
      break;
    default:
      out += value.dump();
      break;
  }
}

}  // namespace

std::uint64_t stable_hash_pair(std::uint64_t a, std::uint64_t b) {
  std::array<char, 16> bytes{};
  append_le(bytes, 0, a);
  append_le(bytes, 8, b);
  return fnv1a64(std::string_view(bytes.data(), bytes.size()));
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string canonical_json(const nlohmann::json& value) {
  std::string out;
  write_canonical(value, out);
  return out;
}

std::string to_hex(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

std::uint64_t from_hex(std::string_view text) {
  std::uint64_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value, 16);
  if (ec != std::errc{} || ptr != end) {
    throw std::invalid_argument("not a hex identifier: " + std::string(text));
  }
  return value;
}

}  // namespace multiverse
