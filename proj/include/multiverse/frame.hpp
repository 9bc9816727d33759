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
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "multiverse/data.hpp"

namespace multiverse {

/// One feature column before encoding. Missing cells are nullopt.
struct Column {
  std::string name;
  FeatureKind kind = FeatureKind::numeric;
  std::vector<std::string> levels;              // categorical only
  std::vector<std::optional<double>> numeric;   // numeric only
  std::vector<std::optional<int>> codes;        // categorical only; index into levels

  std::size_t size() const {
    return kind == FeatureKind::numeric ? numeric.size() : codes.size();
  }
  bool missing(std::size_t row) const {
    return kind == FeatureKind::numeric ? !numeric[row].has_value()
                                        : !codes[row].has_value();
  }
};

/// Labeled rows with raw (possibly missing) features.
struct LabeledFrame {
  std::vector<std::string> rows;    // subject ids
  std::vector<std::string> groups;  // protected-attribute label per row
  std::vector<Column> columns;
  Eigen::VectorXd y;

  std::size_t size() const { return rows.size(); }
  double base_rate() const { return y.size() ? y.mean() : 0.0; }
  bool has_missing() const;
  /// Copy keeping the listed rows, in the given order (may repeat).
  LabeledFrame take(const std::vector<std::size_t>& rows) const;
};

/// How one raw column maps to design-matrix columns.
struct ColumnEncoding {
  std::string name;
  FeatureKind kind = FeatureKind::numeric;
  std::vector<std::string> levels;
  /// Per level: design column, or -1 for the dropped reference level.
  std::vector<int> level_column;
  int reference_level = -1;
  int numeric_column = -1;
};

struct Encoding {
  std::vector<ColumnEncoding> columns;
  std::vector<std::string> column_names;
};

/// Fully numeric design with labels. Rows never contain missing values.
struct LabeledMatrix {
  std::vector<std::string> rows;
  std::vector<std::string> groups;
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<std::string> column_names;

  std::size_t size() const { return rows.size(); }
  double base_rate() const { return y.size() ? y.mean() : 0.0; }
  LabeledMatrix take_rows(const std::vector<std::size_t>& idx) const;
  LabeledMatrix take_columns(const std::vector<int>& cols) const;
};

}  // namespace multiverse
