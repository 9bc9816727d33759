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

#include <stdexcept>
#include <string>
#include <string_view>

namespace multiverse {

enum class Errc {
  schema_violation,
  duplicate_id,
  unparseable_cell,
  stratum_too_small,
  missing_provenance,
  invalid_spec,
  non_monotone_targets,
  unknown_feature,
  rate_out_of_range,
  no_admissible_path,
  unknown_reference,
  all_rows_dropped,
  empty_minority,
  empty_result,
  degenerate_design,
  single_class,
  schema_mismatch,
  no_positives,
  all_paths_failed,
  empty_rashomon_set,
  baseline_not_admissible,
  unknown_subject,
  config_invalid,
  io,
};

std::string_view to_string(Errc code);

// Every recoverable failure in the library is reported through this type;
// the code lets callers (and tests) branch on the failure kind without
// parsing messages.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::schema_violation: return "schema-violation";
    case Errc::duplicate_id: return "duplicate-id";
    case Errc::unparseable_cell: return "unparseable-cell";
    case Errc::stratum_too_small: return "stratum-too-small";
    case Errc::missing_provenance: return "missing-provenance";
    case Errc::invalid_spec: return "invalid-spec";
    case Errc::non_monotone_targets: return "non-monotone-targets";
    case Errc::unknown_feature: return "unknown-feature";
    case Errc::rate_out_of_range: return "rate-out-of-range";
    case Errc::no_admissible_path: return "no-admissible-path";
    case Errc::unknown_reference: return "unknown-reference";
    case Errc::all_rows_dropped: return "all-rows-dropped";
    case Errc::empty_minority: return "empty-minority";
    case Errc::empty_result: return "empty-result";
    case Errc::degenerate_design: return "degenerate-design";
    case Errc::single_class: return "single-class";
    case Errc::schema_mismatch: return "schema-mismatch";
    case Errc::no_positives: return "no-positives";
    case Errc::all_paths_failed: return "all-paths-failed";
    case Errc::empty_rashomon_set: return "empty-rashomon-set";
    case Errc::baseline_not_admissible: return "baseline-not-admissible";
    case Errc::unknown_subject: return "unknown-subject";
    case Errc::config_invalid: return "config-invalid";
    case Errc::io: return "io";
  }
  return "unknown";
}

}  // namespace multiverse
