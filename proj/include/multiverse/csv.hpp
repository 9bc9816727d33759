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

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace multiverse::csv {

using Row = std::vector<std::string>;

/// RFC-4180 reader: quoted fields may contain commas, quotes ("") and
/// newlines. CRLF and LF line endings are both accepted.
std::vector<Row> read(std::istream& in);
std::vector<Row> read_file(const std::string& path);

std::string quote(std::string_view field);
void write_row(std::ostream& out, const Row& row);

}  // namespace multiverse::csv
