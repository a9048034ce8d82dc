#pragma once

#include <kinprim/counts.hpp>
#include <kinprim/stats.hpp>

#include <Eigen/Core>

#include <cmath>

#include <string>
#include <vector>

#include <json.hpp>

namespace kinprim {

// Match percentages, targets on rows. A cell with no presented trials is NaN
// (missing) and makes the matrix incomplete.
struct ConfusionMatrix {
  std::vector<std::string> actions;
  Eigen::MatrixXd cells;
  std::vector<std::int64_t> trials_per_cell;
  bool complete = true;

  std::size_t size() const { return actions.size(); }
  bool has(std::size_t i, std::size_t j) const { return !std::isnan(cells(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))); }
  double at(std::size_t i, std::size_t j) const { return cells(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)); }
};

// cell(i,j) = 100 * selected / presented. Complete iff every pairing was
// presented and no trial timed out.
ConfusionMatrix to_percentage(const CountMatrix& counts);

struct Summary {
  double mean = 0.0;
  double sd = 0.0;  // sample SD over actions
  std::size_t n = 0;
};

Summary summarize(const std::vector<double>& values);

struct MetricsReport {
  std::vector<std::string> actions;
  std::vector<double> accuracy;        // diagonal
  std::vector<double> false_hit;       // row mean excluding the diagonal
  std::vector<double> selection_bias;  // column mean excluding the diagonal
  Summary accuracy_summary, false_hit_summary, selection_bias_summary;
  bool complete = true;
};

// Incomplete matrices average over the available cells only.
MetricsReport compute_metrics(const ConfusionMatrix& cm);

// Deviations from the identities that hold on complete matrices:
// accuracy[i] + false_hit[i] = 100 and mean(false_hit) = mean(selection_bias).
struct IdentityCheck {
  double max_row_deviation = 0.0;
  double grand_mean_gap = 0.0;
};
IdentityCheck completeness_identities(const MetricsReport& report);

struct MetricComparison {
  std::string metric;
  TTestResult test;
};

// Independent-sample t-tests on accuracy, false-hit and selection-bias
// across actions (x = first report).
std::vector<MetricComparison> compare_reports(const MetricsReport& x, const MetricsReport& y);

nlohmann::json confusion_to_json(const ConfusionMatrix& cm);
nlohmann::json metrics_to_json(const MetricsReport& report);
nlohmann::json comparison_to_json(const std::vector<MetricComparison>& rows, const std::string& x_name,
                                  const std::string& y_name);

// Targets on rows, matched action on columns, false-hit as the last column and
// selection-bias as the last row.
std::string confusion_to_csv(const ConfusionMatrix& cm, const MetricsReport& report);

std::string metrics_table(const MetricsReport& report);
std::string comparison_table(const std::vector<MetricComparison>& rows, const std::string& x_name,
                             const std::string& y_name);

}  // namespace kinprim
