#include <kinprim/analysis.hpp>

#include <kinprim/error.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace kinprim {

ConfusionMatrix to_percentage(const CountMatrix& counts) {
  const std::size_t n = counts.size();
  if (counts.selected_cells.size() != n * n || counts.presented_cells.size() != n * n)
    throw ParameterError("to_percentage: count matrix shape does not match its action list");
  ConfusionMatrix cm;
  cm.actions = counts.actions;
  cm.cells.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  cm.trials_per_cell = counts.presented_cells;
  cm.complete = counts.timeouts == 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto sel = counts.selected(i, j), pres = counts.presented(i, j);
      if (sel > pres)
        throw ParameterError("to_percentage: " + std::to_string(sel) + " selections exceed " + std::to_string(pres) +
                             " presentations for (" + counts.actions[i] + ", " + counts.actions[j] + ")");
      if (pres == 0) {
        cm.cells(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::numeric_limits<double>::quiet_NaN();
        cm.complete = false;
      } else {
        cm.cells(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            100.0 * static_cast<double>(sel) / static_cast<double>(pres);
      }
    }
  }
  return cm;
}

Summary summarize(const std::vector<double>& values) {
  std::vector<double> finite;
  for (double v : values)
    if (std::isfinite(v)) finite.push_back(v);
  Summary s;
  s.n = finite.size();
  if (finite.empty()) {
    s.mean = s.sd = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  s.mean = mean(finite);
  s.sd = sample_sd(finite);
  return s;
}

MetricsReport compute_metrics(const ConfusionMatrix& cm) {
  const std::size_t n = cm.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  MetricsReport r;
  r.actions = cm.actions;
  r.complete = cm.complete;
  r.accuracy.assign(n, nan);
  r.false_hit.assign(n, nan);
  r.selection_bias.assign(n, nan);
  for (std::size_t i = 0; i < n; ++i) {
    if (cm.has(i, i)) r.accuracy[i] = cm.at(i, i);
    double row = 0.0, col = 0.0;
    std::size_t nr = 0, nc = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      if (cm.has(i, j)) {
        row += cm.at(i, j);
        ++nr;
      }
      if (cm.has(j, i)) {
        col += cm.at(j, i);
        ++nc;
      }
    }
    if (nr) r.false_hit[i] = row / static_cast<double>(nr);
    if (nc) r.selection_bias[i] = col / static_cast<double>(nc);
  }
  r.accuracy_summary = summarize(r.accuracy);
  r.false_hit_summary = summarize(r.false_hit);
  r.selection_bias_summary = summarize(r.selection_bias);
  return r;
}

IdentityCheck completeness_identities(const MetricsReport& report) {
  IdentityCheck c;
  for (std::size_t i = 0; i < report.actions.size(); ++i)
    c.max_row_deviation = std::max(c.max_row_deviation, std::abs(report.accuracy[i] + report.false_hit[i] - 100.0));
  c.grand_mean_gap = std::abs(report.false_hit_summary.mean - report.selection_bias_summary.mean);
  return c;
}

namespace {

std::vector<double> finite_only(const std::vector<double>& v) {
  std::vector<double> out;
  for (double x : v)
    if (std::isfinite(x)) out.push_back(x);
  return out;
}

nlohmann::json nullable(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

nlohmann::json nullable(const std::vector<double>& v) {
  auto out = nlohmann::json::array();
  for (double x : v) out.push_back(nullable(x));
  return out;
}

nlohmann::json summary_json(const Summary& s) { return {{"mean", nullable(s.mean)}, {"sd", nullable(s.sd)}, {"n", s.n}}; }

std::string fixed(double v, int prec = 2) {
  if (!std::isfinite(v)) return std::isnan(v) ? "-" : (v > 0 ? "inf" : "-inf");
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << v;
  return os.str();
}

}  // namespace

std::vector<MetricComparison> compare_reports(const MetricsReport& x, const MetricsReport& y) {
  return {{"accuracy", independent_ttest(finite_only(x.accuracy), finite_only(y.accuracy))},
          {"false_hit", independent_ttest(finite_only(x.false_hit), finite_only(y.false_hit))},
          {"selection_bias", independent_ttest(finite_only(x.selection_bias), finite_only(y.selection_bias))}};
}

nlohmann::json confusion_to_json(const ConfusionMatrix& cm) {
  auto rows = nlohmann::json::array();
  for (std::size_t i = 0; i < cm.size(); ++i) {
    auto row = nlohmann::json::array();
    for (std::size_t j = 0; j < cm.size(); ++j) row.push_back(nullable(cm.at(i, j)));
    rows.push_back(std::move(row));
  }
  return {{"actions", cm.actions}, {"cells", rows}, {"complete", cm.complete}};
}

nlohmann::json metrics_to_json(const MetricsReport& r) {
  return {{"actions", r.actions},
          {"complete", r.complete},
          {"accuracy", nullable(r.accuracy)},
          {"false_hit", nullable(r.false_hit)},
          {"selection_bias", nullable(r.selection_bias)},
          {"summary",
           {{"accuracy", summary_json(r.accuracy_summary)},
            {"false_hit", summary_json(r.false_hit_summary)},
            {"selection_bias", summary_json(r.selection_bias_summary)}}}};
}

nlohmann::json comparison_to_json(const std::vector<MetricComparison>& rows, const std::string& x_name,
                                  const std::string& y_name) {
  auto out = nlohmann::json::array();
  for (const auto& c : rows) {
    out.push_back({{"metric", c.metric},
                   {"x", x_name},
                   {"y", y_name},
                   {"t", nullable(c.test.t)},
                   {"t_sign", c.test.t > 0 ? 1 : (c.test.t < 0 ? -1 : 0)},
                   {"df", c.test.df},
                   {"p", c.test.p},
                   {"mean_x", c.test.mean_x},
                   {"sd_x", c.test.sd_x},
                   {"mean_y", c.test.mean_y},
                   {"sd_y", c.test.sd_y}});
  }
  return out;
}

std::string confusion_to_csv(const ConfusionMatrix& cm, const MetricsReport& report) {
  std::ostringstream os;
  os << std::setprecision(17);
  auto cell = [&](double v) {
    if (std::isfinite(v)) os << v;
  };
  os << "target";
  for (const auto& a : cm.actions) os << ',' << a;
  os << ",false_hit\n";
  for (std::size_t i = 0; i < cm.size(); ++i) {
    os << cm.actions[i];
    for (std::size_t j = 0; j < cm.size(); ++j) {
      os << ',';
      cell(cm.at(i, j));
    }
    os << ',';
    cell(report.false_hit[i]);
    os << '\n';
  }
  os << "selection_bias";
  for (std::size_t j = 0; j < cm.size(); ++j) {
    os << ',';
    cell(report.selection_bias[j]);
  }
  os << ",\n";
  return os.str();
}

std::string metrics_table(const MetricsReport& r) {
  std::size_t w = 6;
  for (const auto& a : r.actions) w = std::max(w, a.size());
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(w)) << "action" << std::right << std::setw(11) << "accuracy%"
     << std::setw(12) << "false_hit%" << std::setw(17) << "selection_bias%" << '\n';
  for (std::size_t i = 0; i < r.actions.size(); ++i)
    os << std::left << std::setw(static_cast<int>(w)) << r.actions[i] << std::right << std::setw(11)
       << fixed(r.accuracy[i]) << std::setw(12) << fixed(r.false_hit[i]) << std::setw(17)
       << fixed(r.selection_bias[i]) << '\n';
  auto line = [&](const char* name, auto field) {
    os << std::left << std::setw(static_cast<int>(w)) << name << std::right << std::setw(11)
       << fixed(field(r.accuracy_summary)) << std::setw(12) << fixed(field(r.false_hit_summary)) << std::setw(17)
       << fixed(field(r.selection_bias_summary)) << '\n';
  };
  line("M", [](const Summary& s) { return s.mean; });
  line("SD", [](const Summary& s) { return s.sd; });
  if (!r.complete) os << "(incomplete matrix: metrics over available cells)\n";
  return os.str();
}

std::string comparison_table(const std::vector<MetricComparison>& rows, const std::string& x_name,
                             const std::string& y_name) {
  std::ostringstream os;
  os << std::left << std::setw(16) << "metric" << std::right << std::setw(12) << ("M " + x_name).substr(0, 11)
     << std::setw(9) << "SD" << std::setw(12) << ("M " + y_name).substr(0, 11) << std::setw(9) << "SD"
     << std::setw(10) << "t" << std::setw(5) << "df" << std::setw(9) << "p" << '\n';
  for (const auto& c : rows)
    os << std::left << std::setw(16) << c.metric << std::right << std::setw(12) << fixed(c.test.mean_x) << std::setw(9)
       << fixed(c.test.sd_x) << std::setw(12) << fixed(c.test.mean_y) << std::setw(9) << fixed(c.test.sd_y)
       << std::setw(10) << fixed(c.test.t) << std::setw(5) << c.test.df << std::setw(9) << fixed(c.test.p, 3) << '\n';
  return os.str();
}

}  // namespace kinprim
