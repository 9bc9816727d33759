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

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "multiverse/csv.hpp"
#include "multiverse/error.hpp"
#include "multiverse/hash.hpp"
#include "multiverse/report.hpp"

namespace multiverse {

namespace {

constexpr double kWidth = 900.0;
constexpr double kHeight = 600.0;
constexpr double kLeft = 190.0;
constexpr double kRight = 20.0;
constexpr double kTopY0 = 50.0;
constexpr double kTopY1 = 290.0;
constexpr double kBottomY0 = 320.0;
constexpr double kBottomY1 = 580.0;

// Low to high risk.
constexpr const char* kBandColors[] = {"#e8f3e8", "#f5f5dc", "#fdebd0", "#f9d5c5", "#f2c0c0",
                                       "#eaa9a9", "#e09090"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

double score_y(double s) { return kTopY1 - s * (kTopY1 - kTopY0); }

}  // namespace

CurveData curve_data(const RunView& view, std::string_view subject_id) {
  const auto& m = view.matrix;
  const std::size_t i = m.subject_index(subject_id);
  CurveData c;
  c.subject_id = std::string(subject_id);
  for (const auto& d : view.config.universe.dimensions) {
    c.dimensions.emplace_back(d.name());
    std::vector<std::string> opts;
    for (const auto& o : d.options) opts.push_back(o.name);
    c.options.push_back(std::move(opts));
  }
  for (std::size_t j = 0; j < m.path_count(); ++j) {
    c.points.push_back({m.paths[j], view.choices[j],
                        m.S(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)),
                        static_cast<bool>(m.admissible[j]), view.auc[j]});
  }
  if (const auto b = m.path_index(view.baseline_path)) {
    c.baseline_score = m.S(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(*b));
  }
  if (!view.config.binning.empty()) c.bands = view.config.binning.front();
  return c;
}

std::vector<std::size_t> curve_order(const CurveData& c, CurveSort sort) {
  std::vector<std::size_t> idx(c.points.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (sort == CurveSort::score_asc) {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return c.points[a].score < c.points[b].score;
    });
  }
  return idx;
}

void write_curve_csv(std::ostream& out, const CurveData& c, CurveSort sort) {
  csv::Row header{"path_id"};
  for (const auto& d : c.dimensions) header.push_back(d);
  for (const char* h : {"score", "admissible", "auc"}) header.emplace_back(h);
  csv::write_row(out, header);
  for (auto k : curve_order(c, sort)) {
    const auto& p = c.points[k];
    csv::Row row{to_hex(p.path_id)};
    for (const auto& ch : p.choices) row.push_back(ch);
    row.push_back(format_double(p.score));
    row.emplace_back(p.admissible ? "true" : "false");
    row.push_back(format_double(p.auc));
    csv::write_row(out, row);
  }
}

std::string render_curve_svg(const CurveData& c, CurveSort sort) {
  const auto order = curve_order(c, sort);
  const double plot_w = kWidth - kLeft - kRight;
  const double step = order.empty() ? plot_w : plot_w / static_cast<double>(order.size());
  const auto x_of = [&](std::size_t k) { return kLeft + (static_cast<double>(k) + 0.5) * step; };
  const double r = std::clamp(step * 0.35, 0.8, 4.0);

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"900\" height=\"600\" viewBox=\"0 0 900 600\">\n";
  o << "<!-- generator: multiverse " << kToolVersion << " -->\n";
  o << "<rect x=\"0\" y=\"0\" width=\"900\" height=\"600\" fill=\"#ffffff\"/>\n";
  o << "<text x=\"" << num(kLeft) << "\" y=\"28\" font-family=\"sans-serif\" font-size=\"15\">"
    << "Subject " << escape(c.subject_id) << ": scores across " << c.points.size()
    << " paths</text>\n";

  // Top panel: risk bands, axis, baseline, scores.
  std::vector<double> edges{0.0};
  edges.insert(edges.end(), c.bands.cuts.begin(), c.bands.cuts.end());
  edges.push_back(1.0);
  o << "<g id=\"bands\">\n";
  for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
    const char* color = kBandColors[std::min<std::size_t>(
        b * (std::size(kBandColors) - 1) / std::max<std::size_t>(1, edges.size() - 2),
        std::size(kBandColors) - 1)];
    o << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(score_y(edges[b + 1])) << "\" width=\""
      << num(plot_w) << "\" height=\"" << num(score_y(edges[b]) - score_y(edges[b + 1]))
      << "\" fill=\"" << color << "\"/>\n";
    if (b < c.bands.labels.size()) {
      o << "<text x=\"" << num(kWidth - kRight - 4) << "\" y=\""
        << num(score_y(edges[b + 1]) + 12) << "\" font-family=\"sans-serif\" font-size=\"10\" "
        << "text-anchor=\"end\" fill=\"#555555\">" << escape(c.bands.labels[b]) << "</text>\n";
    }
  }
  o << "</g>\n";
  o << "<g id=\"axis\" font-family=\"sans-serif\" font-size=\"10\">\n";
  o << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTopY0) << "\" x2=\"" << num(kLeft)
    << "\" y2=\"" << num(kTopY1) << "\" stroke=\"#333333\"/>\n";
  for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    o << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(score_y(t) + 3)
      << "\" text-anchor=\"end\">" << num(t) << "</text>\n";
  }
  o << "<text x=\"20\" y=\"" << num((kTopY0 + kTopY1) / 2) << "\" font-size=\"12\">score</text>\n";
  o << "</g>\n";
  if (c.baseline_score) {
    o << "<line class=\"baseline\" x1=\"" << num(kLeft) << "\" y1=\"" << num(score_y(*c.baseline_score))
      << "\" x2=\"" << num(kWidth - kRight) << "\" y2=\"" << num(score_y(*c.baseline_score))
      << "\" stroke=\"#b03030\" stroke-dasharray=\"6 4\"/>\n";
  }
  o << "<g id=\"scores\">\n";
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& p = c.points[order[k]];
    o << "<circle class=\"score\" cx=\"" << num(x_of(k)) << "\" cy=\"" << num(score_y(p.score)) << "\" r=\""
      << num(r) << "\" " << (p.admissible ? "fill=\"#1f3b73\"" : "fill=\"none\" stroke=\"#888888\"")
      << "/>\n";
  }
  o << "</g>\n";

  // Bottom panel: one row per (dimension, option).
  std::size_t rows = 0;
  for (const auto& opts : c.options) rows += opts.size();
  const double row_h = rows ? std::min(14.0, (kBottomY1 - kBottomY0) / static_cast<double>(rows)) : 14.0;
  const double font = std::clamp(row_h - 3.0, 5.0, 10.0);
  o << "<g id=\"choices\" font-family=\"sans-serif\" font-size=\"" << num(font) << "\">\n";
  std::size_t row = 0;
  for (std::size_t d = 0; d < c.options.size(); ++d) {
    for (std::size_t opt = 0; opt < c.options[d].size(); ++opt, ++row) {
      const double y = kBottomY0 + (static_cast<double>(row) + 0.5) * row_h;
      o << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(y + font / 3) << "\" text-anchor=\"end\">"
        << escape(c.dimensions[d]) << ": " << escape(c.options[d][opt]) << "</text>\n";
      for (std::size_t k = 0; k < order.size(); ++k) {
        if (c.points[order[k]].choices[d] != c.options[d][opt]) continue;
        o << "<circle class=\"dot\" cx=\"" << num(x_of(k)) << "\" cy=\"" << num(y) << "\" r=\""
          << num(std::min(r, row_h * 0.4)) << "\" fill=\"#333333\"/>\n";
      }
    }
  }
  o << "</g>\n";
  o << "</svg>\n";
  return o.str();
}

std::vector<std::string> default_curve_subjects(const std::vector<InconsistencyProfile>& p) {
  if (p.empty()) return {};
  std::size_t widest = 0, narrowest = 0;
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (p[i].range > p[widest].range) widest = i;
    if (p[i].range < p[narrowest].range) narrowest = i;
  }
  std::vector<std::string> out{p[widest].subject_id};
  if (narrowest != widest) out.push_back(p[narrowest].subject_id);
  return out;
}

}  // namespace multiverse
