// Copyright 2026 The FloodLense Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "floodlense/evaluation.hpp"
#include "floodlense/location.hpp"

namespace floodlense {

/// Row-major value grid: values[row][column].
struct Table {
  std::string title;
  std::string corner = "Metric";
  std::vector<std::string> columns;
  std::vector<std::string> rows;
  std::vector<std::vector<MetricValue>> values;
};

/// Fixed-width text: title line, header, rule, one line per row. Cells are
/// separated by " | ", values printed with 5 decimals, undefined values as
/// "undefined". No trailing whitespace.
std::string render_table(const Table& table);
std::string render_table(std::string title, std::vector<std::string> columns, std::vector<std::string> rows,
                         std::vector<std::vector<MetricValue>> values, std::string corner = "Metric");

/// {"<row>": {"<column>": value | null}}, keys in table order.
std::string table_to_json(const Table& table);
/// Inverse of table_to_json; row and column order follow the document.
Table table_from_json(std::string_view json_text, std::string title, std::string corner = "Metric");

/// IoU, Dice, Precision, Recall, F1 Score, Accuracy.
const std::vector<std::string>& metric_row_names();

/// One column per model.
Table metrics_table(std::string title, const std::vector<std::pair<std::string, MetricsReport>>& models);
/// Columns "Threshold 0.3", "0.4", ...
Table sweep_table(std::string title, const SweepReport& sweep);
/// Single row "Inference Time (ms)", one column per model.
Table timing_table(std::string title, const std::vector<std::pair<std::string, TimingReport>>& models);
/// Rows are ablated layers; columns Precision, Recall, F1-Score.
Table ablation_table(std::string title, const std::vector<AblationRow>& rows);
Table interface_table(std::string title, const InterfaceReport& report);

}  // namespace floodlense
