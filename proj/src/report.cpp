// Copyright 2026 The FloodLense Authors
// SPDX-License-Identifier: Apache-2.0

#include "floodlense/report.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <json.hpp>

#include "floodlense/error.hpp"

namespace floodlense {

namespace {

std::string cell(const MetricValue& v) { return v ? fmt::format("{:.5f}", *v) : "undefined"; }

std::string join_line(const std::vector<std::string>& cells, const std::vector<std::size_t>& widths) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) line += " | ";
    line += cells[i];
    if (i + 1 < cells.size()) line.append(widths[i] - cells[i].size(), ' ');
  }
  return line;
}

std::vector<MetricValue> report_column(const MetricsReport& r) {
  return {r.iou, r.dice, r.precision, r.recall, r.f1, r.accuracy};
}

}  // namespace

std::string render_table(const Table& t) {
  if (t.values.size() != t.rows.size()) {
    throw Error(ErrorCode::ShapeMismatch,
                fmt::format("{} value rows for {} row labels", t.values.size(), t.rows.size()));
  }
  for (const auto& row : t.values) {
    if (row.size() != t.columns.size()) {
      throw Error(ErrorCode::ShapeMismatch,
                  fmt::format("row has {} values for {} columns", row.size(), t.columns.size()));
    }
  }

  std::vector<std::vector<std::string>> lines;
  std::vector<std::string> header{t.corner};
  header.insert(header.end(), t.columns.begin(), t.columns.end());
  lines.push_back(std::move(header));
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    std::vector<std::string> line{t.rows[r]};
    for (const auto& v : t.values[r]) line.push_back(cell(v));
    lines.push_back(std::move(line));
  }

  std::vector<std::size_t> widths(t.columns.size() + 1, 0);
  for (const auto& line : lines) {
    for (std::size_t i = 0; i < line.size(); ++i) widths[i] = std::max(widths[i], line[i].size());
  }

  std::string rule;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (i > 0) rule += "-+-";
    rule.append(widths[i], '-');
  }

  std::string out = t.title + "\n";
  out += join_line(lines[0], widths) + "\n";
  out += rule + "\n";
  for (std::size_t i = 1; i < lines.size(); ++i) out += join_line(lines[i], widths) + "\n";
  return out;
}

std::string render_table(std::string title, std::vector<std::string> columns, std::vector<std::string> rows,
                         std::vector<std::vector<MetricValue>> values, std::string corner) {
  return render_table(Table{std::move(title), std::move(corner), std::move(columns), std::move(rows),
                            std::move(values)});
}

std::string table_to_json(const Table& t) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    nlohmann::ordered_json row = nlohmann::ordered_json::object();
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      const auto& v = t.values.at(r).at(c);
      row[t.columns[c]] = v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
    }
    j[t.rows[r]] = std::move(row);
  }
  return j.dump(2) + "\n";
}

Table table_from_json(std::string_view json_text, std::string title, std::string corner) {
  Table t;
  t.title = std::move(title);
  t.corner = std::move(corner);
  try {
    const auto j = nlohmann::ordered_json::parse(json_text);
    for (const auto& [row_name, row] : j.items()) {
      t.rows.push_back(row_name);
      if (t.columns.empty()) {
        for (const auto& [col, _] : row.items()) t.columns.push_back(col);
      }
      std::vector<MetricValue> values;
      for (const auto& col : t.columns) {
        const auto& v = row.at(col);
        values.push_back(v.is_null() ? MetricValue{} : MetricValue{v.get<double>()});
      }
      if (row.size() != t.columns.size()) {
        throw Error(ErrorCode::ShapeMismatch, fmt::format("row '{}' has a different column set", row_name));
      }
      t.values.push_back(std::move(values));
    }
  } catch (const nlohmann::ordered_json::exception& e) {
    throw Error(ErrorCode::FormatError, fmt::format("bad report JSON: {}", e.what()));
  }
  return t;
}

const std::vector<std::string>& metric_row_names() {
  static const std::vector<std::string> names = {"IoU", "Dice", "Precision", "Recall", "F1 Score", "Accuracy"};
  return names;
}

Table metrics_table(std::string title, const std::vector<std::pair<std::string, MetricsReport>>& models) {
  Table t;
  t.title = std::move(title);
  t.rows = metric_row_names();
  t.values.assign(t.rows.size(), {});
  for (const auto& [name, report] : models) {
    t.columns.push_back(name);
    const auto column = report_column(report);
    for (std::size_t r = 0; r < column.size(); ++r) t.values[r].push_back(column[r]);
  }
  return t;
}

Table sweep_table(std::string title, const SweepReport& sweep) {
  Table t;
  t.title = std::move(title);
  t.rows = metric_row_names();
  t.values.assign(t.rows.size(), {});
  for (std::size_t i = 0; i < sweep.points.size(); ++i) {
    const auto& p = sweep.points[i];
    t.columns.push_back(i == 0 ? fmt::format("Threshold {:g}", p.threshold) : fmt::format("{:g}", p.threshold));
    const auto column = report_column(p.report);
    for (std::size_t r = 0; r < column.size(); ++r) t.values[r].push_back(column[r]);
  }
  return t;
}

Table timing_table(std::string title, const std::vector<std::pair<std::string, TimingReport>>& models) {
  Table t;
  t.title = std::move(title);
  t.corner = "Model";
  t.rows = {"Inference Time (ms)"};
  t.values.assign(1, {});
  for (const auto& [name, timing] : models) {
    t.columns.push_back(name);
    t.values[0].push_back(timing.mean_ms);
  }
  return t;
}

Table ablation_table(std::string title, const std::vector<AblationRow>& rows) {
  Table t;
  t.title = std::move(title);
  t.corner = "Ablated Part";
  t.columns = {"Precision", "Recall", "F1-Score"};
  for (const auto& row : rows) {
    t.rows.push_back(row.layer);
    t.values.push_back({row.report.precision, row.report.recall, row.report.f1});
  }
  return t;
}

Table interface_table(std::string title, const InterfaceReport& report) {
  Table t;
  t.title = std::move(title);
  t.columns = {"Value"};
  t.rows = {"Extraction Accuracy", "Geocoding Success Rate", "Error Rate"};
  t.values = {{report.extraction_accuracy}, {report.geocoding_success_rate}, {report.error_rate}};
  return t;
}

}  // namespace floodlense
