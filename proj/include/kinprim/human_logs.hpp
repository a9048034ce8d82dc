#pragma once

#include <kinprim/analysis.hpp>
#include <kinprim/counts.hpp>

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace kinprim {

enum class Task { AST, AIT };
enum class Orientation { UP, INV };
enum class BlockOrder { UP_INV, INV_UP };

std::string to_string(Task t);
std::string to_string(Orientation o);
std::string to_string(BlockOrder b);

// 4 s for the similarity task, 10 s for identification.
double response_window_ms(Task task);

struct ResponseTrial {
  std::size_t trial_idx = 0;
  Orientation orientation = Orientation::UP;
  std::string target;
  std::vector<std::string> options;  // AST: [A, B]; AIT: five labels
  std::optional<std::string> response;  // empty on timeout
  std::optional<double> rt_ms;

  bool timed_out() const { return !response.has_value(); }
  bool correct() const { return response && *response == target; }
};

struct ResponseLog {
  std::string participant_id;
  Task task = Task::AST;
  BlockOrder block_order = BlockOrder::UP_INV;
  bool aborted = false;
  std::vector<ResponseTrial> trials;
};

// Every schema violation found in `doc`; empty means valid.
std::vector<std::string> validate_response_log(const nlohmann::json& doc);
// Throws SchemaError listing the violations.
ResponseLog response_log_from_json(const nlohmann::json& doc);
nlohmann::json response_log_to_json(const ResponseLog& log);

// Accuracy over responded trials; RT over correct responses only.
struct ConditionStats {
  std::size_t trials = 0;
  std::size_t responded = 0;
  std::size_t correct = 0;
  std::size_t timeouts = 0;
  double accuracy = 0.0;  // percent
  double rt_mean_s = 0.0;
  double rt_sd_s = 0.0;
};

struct ParticipantMetrics {
  std::string participant_id;
  BlockOrder block_order = BlockOrder::UP_INV;
  ConditionStats overall, up, inv;
};

// Across-participant mean/SD of per-participant values.
struct GroupStats {
  std::size_t participants = 0;
  Summary accuracy;
  Summary rt_s;
};

struct LabelStats {
  std::size_t as_target = 0;
  std::size_t correct = 0;
  std::size_t as_distractor = 0;
  std::size_t chosen_as_distractor = 0;
  double accuracy = 0.0;        // percent of responded target presentations
  double selection_bias = 0.0;  // percent of distractor offers that were chosen
};

struct HumanMetrics {
  Task task = Task::AST;
  std::vector<ParticipantMetrics> participants;
  GroupStats overall, up, inv;
  std::map<std::string, GroupStats> by_block_order;  // "UP_INV", "INV_UP"
  std::map<std::string, GroupStats> by_condition;    // "<block order>/<orientation>"

  // AST: human confusion matrix over responded trials (timeouts excluded).
  std::optional<CountMatrix> counts;
  std::optional<ConfusionMatrix> confusion;
  std::optional<MetricsReport> matrix_metrics;

  // AIT: per-label identification accuracy and selection frequencies.
  std::map<std::string, LabelStats> labels;
  Summary label_accuracy;
  Summary label_selection_bias;
};

// All logs must share one task.
HumanMetrics analyze_human_logs(std::span<const ResponseLog> logs);

nlohmann::json human_metrics_to_json(const HumanMetrics& m);
std::string human_metrics_table(const HumanMetrics& m);

}  // namespace kinprim
