#pragma once

#include <string>
#include <vector>

#include "stacklab/graphnet.hpp"

namespace stacklab {

// CSV helpers. All numeric cells are written with fixed precision so reruns
// are byte-identical.

void write_metrics_csv(const std::string& path, const std::vector<MetricRow>& rows);

// Table layout: tower_size, e1_mae_dm, e2_mae_dm, e3_err (3 decimals, dm).
void write_size_table_csv(const std::string& path, const std::string& model_name,
                          const std::vector<SizeError>& table);

struct PlanResultRow {
  std::string task;
  int size = 0;
  int sample = 0;
  std::string predictor;
  bool plan_found = false;
  bool success = false;
  double predicted = 0;
  double achieved = 0;
  double optimum = 0;
  std::string failure;
};

void write_plan_results_csv(const std::string& path, const std::vector<PlanResultRow>& rows);
std::vector<PlanResultRow> read_plan_results_csv(const std::string& path);

// Success-rate bar chart (one group per task, one bar per size).
void write_success_chart_svg(const std::string& path, const std::vector<PlanResultRow>& rows);

// generic CSV parsing used by the round-trip checks
std::vector<std::vector<std::string>> read_csv(const std::string& path);

}  // namespace stacklab
