#include <kinprim/human_logs.hpp>

#include <kinprim/error.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

namespace kinprim {

std::string to_string(Task t) { return t == Task::AST ? "AST" : "AIT"; }
std::string to_string(Orientation o) { return o == Orientation::UP ? "UP" : "INV"; }
std::string to_string(BlockOrder b) { return b == BlockOrder::UP_INV ? "UP_INV" : "INV_UP"; }

double response_window_ms(Task task) { return task == Task::AST ? 4000.0 : 10000.0; }

std::vector<std::string> validate_response_log(const nlohmann::json& doc) {
  std::vector<std::string> errors;
  if (!doc.is_object()) return {"response log must be a JSON object"};
  auto need_string = [&](const nlohmann::json& obj, const char* key, const std::string& where) -> std::optional<std::string> {
    if (!obj.contains(key) || !obj.at(key).is_string()) {
      errors.push_back(where + ": '" + key + "' must be a string");
      return std::nullopt;
    }
    return obj.at(key).get<std::string>();
  };
  need_string(doc, "participant_id", "log");
  auto task = need_string(doc, "task", "log");
  if (task && *task != "AST" && *task != "AIT") errors.push_back("log: task must be AST or AIT");
  auto order = need_string(doc, "block_order", "log");
  if (order && *order != "UP_INV" && *order != "INV_UP") errors.push_back("log: block_order must be UP_INV or INV_UP");
  if (doc.contains("aborted") && !doc.at("aborted").is_boolean()) errors.push_back("log: 'aborted' must be a boolean");
  if (!doc.contains("trials") || !doc.at("trials").is_array()) {
    errors.push_back("log: 'trials' must be an array");
    return errors;
  }
  const bool ait = task && *task == "AIT";
  const double window = response_window_ms(ait ? Task::AIT : Task::AST);
  const std::size_t n_options = ait ? 5 : 2;
  const auto& trials = doc.at("trials");
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const auto& t = trials[i];
    const std::string where = "trials[" + std::to_string(i) + "]";
    if (!t.is_object()) {
      errors.push_back(where + ": must be an object");
      continue;
    }
    if (!t.contains("trial_idx") || !t.at("trial_idx").is_number_integer() || t.at("trial_idx").get<long long>() < 0)
      errors.push_back(where + ": 'trial_idx' must be a nonnegative integer");
    auto orientation = need_string(t, "orientation", where);
    if (orientation && *orientation != "UP" && *orientation != "INV")
      errors.push_back(where + ": orientation must be UP or INV");
    auto target = need_string(t, "target", where);
    std::vector<std::string> options;
    if (!t.contains("options") || !t.at("options").is_array()) {
      errors.push_back(where + ": 'options' must be an array of labels");
    } else {
      for (const auto& o : t.at("options")) {
        if (!o.is_string()) {
          errors.push_back(where + ": option labels must be strings");
          break;
        }
        options.push_back(o.get<std::string>());
      }
      if (options.size() != n_options)
        errors.push_back(where + ": expected " + std::to_string(n_options) + " options, got " +
                         std::to_string(options.size()));
      if (std::set<std::string>(options.begin(), options.end()).size() != options.size())
        errors.push_back(where + ": duplicate option labels");
      if (target && std::find(options.begin(), options.end(), *target) == options.end())
        errors.push_back(where + ": options do not include the target");
    }
    const bool timeout = t.value("timeout", false);
    if (t.contains("timeout") && !t.at("timeout").is_boolean()) errors.push_back(where + ": 'timeout' must be a boolean");
    const bool has_response = t.contains("response") && !t.at("response").is_null();
    if (timeout == has_response) errors.push_back(where + ": exactly one of a response or a timeout is required");
    if (has_response) {
      if (!t.at("response").is_string()) errors.push_back(where + ": 'response' must be a label or null");
      else if (std::find(options.begin(), options.end(), t.at("response").get<std::string>()) == options.end())
        errors.push_back(where + ": response is not one of the options");
      if (!t.contains("rt_ms") || !t.at("rt_ms").is_number()) {
        errors.push_back(where + ": responded trial needs a numeric 'rt_ms'");
      } else {
        const double rt = t.at("rt_ms").get<double>();
        if (!(rt >= 0.0) || rt > window)
          errors.push_back(where + ": rt_ms " + std::to_string(rt) + " outside [0, " + std::to_string(window) + "]");
      }
    }
  }
  return errors;
}

ResponseLog response_log_from_json(const nlohmann::json& doc) {
  const auto errors = validate_response_log(doc);
  if (!errors.empty()) {
    std::string msg = "response log: " + std::to_string(errors.size()) + " schema error(s): " + errors.front();
    for (std::size_t i = 1; i < std::min<std::size_t>(errors.size(), 5); ++i) msg += "; " + errors[i];
    throw SchemaError(msg);
  }
  ResponseLog log;
  log.participant_id = doc.at("participant_id").get<std::string>();
  log.task = doc.at("task").get<std::string>() == "AST" ? Task::AST : Task::AIT;
  log.block_order = doc.at("block_order").get<std::string>() == "UP_INV" ? BlockOrder::UP_INV : BlockOrder::INV_UP;
  log.aborted = doc.value("aborted", false);
  for (const auto& t : doc.at("trials")) {
    ResponseTrial r;
    r.trial_idx = t.at("trial_idx").get<std::size_t>();
    r.orientation = t.at("orientation").get<std::string>() == "UP" ? Orientation::UP : Orientation::INV;
    r.target = t.at("target").get<std::string>();
    r.options = t.at("options").get<std::vector<std::string>>();
    if (t.contains("response") && !t.at("response").is_null()) {
      r.response = t.at("response").get<std::string>();
      r.rt_ms = t.at("rt_ms").get<double>();
    }
    log.trials.push_back(std::move(r));
  }
  return log;
}

nlohmann::json response_log_to_json(const ResponseLog& log) {
  auto trials = nlohmann::json::array();
  for (const auto& t : log.trials) {
    trials.push_back({{"trial_idx", t.trial_idx},
                      {"orientation", to_string(t.orientation)},
                      {"target", t.target},
                      {"options", t.options},
                      {"response", t.response ? nlohmann::json(*t.response) : nlohmann::json(nullptr)},
                      {"timeout", t.timed_out()},
                      {"rt_ms", t.rt_ms ? nlohmann::json(*t.rt_ms) : nlohmann::json(nullptr)}});
  }
  return {{"participant_id", log.participant_id},
          {"task", to_string(log.task)},
          {"block_order", to_string(log.block_order)},
          {"aborted", log.aborted},
          {"trials", std::move(trials)}};
}

namespace {

template <class Pred>
ConditionStats condition_stats(const ResponseLog& log, Pred&& include) {
  ConditionStats s;
  std::vector<double> rts;
  for (const auto& t : log.trials) {
    if (!include(t)) continue;
    ++s.trials;
    if (t.timed_out()) {
      ++s.timeouts;
      continue;
    }
    ++s.responded;
    if (t.correct()) {
      ++s.correct;
      rts.push_back(*t.rt_ms / 1000.0);
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  s.accuracy = s.responded ? 100.0 * static_cast<double>(s.correct) / static_cast<double>(s.responded) : nan;
  s.rt_mean_s = rts.empty() ? nan : mean(rts);
  s.rt_sd_s = rts.size() < 2 ? (rts.empty() ? nan : 0.0) : sample_sd(rts);
  return s;
}

GroupStats group(const std::vector<const ConditionStats*>& parts) {
  GroupStats g;
  g.participants = parts.size();
  std::vector<double> acc, rt;
  for (const auto* p : parts) {
    acc.push_back(p->accuracy);
    rt.push_back(p->rt_mean_s);
  }
  g.accuracy = summarize(acc);
  g.rt_s = summarize(rt);
  return g;
}

nlohmann::json nullable(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

nlohmann::json to_json(const Summary& s) { return {{"mean", nullable(s.mean)}, {"sd", nullable(s.sd)}, {"n", s.n}}; }

nlohmann::json to_json(const ConditionStats& s) {
  return {{"trials", s.trials},       {"responded", s.responded},       {"correct", s.correct},
          {"timeouts", s.timeouts},   {"accuracy", nullable(s.accuracy)}, {"rt_mean_s", nullable(s.rt_mean_s)},
          {"rt_sd_s", nullable(s.rt_sd_s)}};
}

nlohmann::json to_json(const GroupStats& g) {
  return {{"participants", g.participants}, {"accuracy", to_json(g.accuracy)}, {"rt_s", to_json(g.rt_s)}};
}

}  // namespace

HumanMetrics analyze_human_logs(std::span<const ResponseLog> logs) {
  if (logs.empty()) throw ParameterError("analyze_human_logs: no logs");
  HumanMetrics m;
  m.task = logs.front().task;
  for (const auto& log : logs)
    if (log.task != m.task)
      throw ParameterError("analyze_human_logs: logs mix AST and AIT tasks (participant '" + log.participant_id + "')");

  for (const auto& log : logs) {
    ParticipantMetrics p;
    p.participant_id = log.participant_id;
    p.block_order = log.block_order;
    p.overall = condition_stats(log, [](const ResponseTrial&) { return true; });
    p.up = condition_stats(log, [](const ResponseTrial& t) { return t.orientation == Orientation::UP; });
    p.inv = condition_stats(log, [](const ResponseTrial& t) { return t.orientation == Orientation::INV; });
    m.participants.push_back(std::move(p));
  }

  std::vector<const ConditionStats*> all, up, inv;
  std::map<std::string, std::vector<const ConditionStats*>> by_order, by_cond;
  for (const auto& p : m.participants) {
    all.push_back(&p.overall);
    up.push_back(&p.up);
    inv.push_back(&p.inv);
    const auto order = to_string(p.block_order);
    by_order[order].push_back(&p.overall);
    by_cond[order + "/UP"].push_back(&p.up);
    by_cond[order + "/INV"].push_back(&p.inv);
  }
  m.overall = group(all);
  m.up = group(up);
  m.inv = group(inv);
  for (const auto& [k, v] : by_order) m.by_block_order[k] = group(v);
  for (const auto& [k, v] : by_cond) m.by_condition[k] = group(v);

  std::set<std::string> label_set;
  for (const auto& log : logs)
    for (const auto& t : log.trials) {
      label_set.insert(t.target);
      label_set.insert(t.options.begin(), t.options.end());
    }
  std::vector<std::string> labels(label_set.begin(), label_set.end());

  if (m.task == Task::AST) {
    auto counts = CountMatrix::zeros(labels);
    for (const auto& log : logs) {
      for (const auto& t : log.trials) {
        if (t.timed_out()) {
          ++counts.timeouts;
          continue;
        }
        const std::size_t ti = counts.index_of(t.target);
        const std::string& other = t.options[0] == t.target ? t.options[1] : t.options[0];
        counts.selected(ti, counts.index_of(*t.response)) += 1;
        counts.presented(ti, ti) += 1;
        counts.presented(ti, counts.index_of(other)) += 1;
      }
    }
    m.confusion = to_percentage(counts);
    m.matrix_metrics = compute_metrics(*m.confusion);
    m.counts = std::move(counts);
  } else {
    for (const auto& l : labels) m.labels[l];
    for (const auto& log : logs) {
      for (const auto& t : log.trials) {
        if (t.timed_out()) continue;
        auto& target = m.labels[t.target];
        ++target.as_target;
        if (t.correct()) ++target.correct;
        for (const auto& o : t.options) {
          if (o == t.target) continue;
          auto& d = m.labels[o];
          ++d.as_distractor;
          if (*t.response == o) ++d.chosen_as_distractor;
        }
      }
    }
    std::vector<double> acc, bias;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (auto& [l, s] : m.labels) {
      s.accuracy = s.as_target ? 100.0 * static_cast<double>(s.correct) / static_cast<double>(s.as_target) : nan;
      s.selection_bias = s.as_distractor ? 100.0 * static_cast<double>(s.chosen_as_distractor) /
                                               static_cast<double>(s.as_distractor)
                                         : nan;
      acc.push_back(s.accuracy);
      bias.push_back(s.selection_bias);
    }
    m.label_accuracy = summarize(acc);
    m.label_selection_bias = summarize(bias);
  }
  return m;
}

nlohmann::json human_metrics_to_json(const HumanMetrics& m) {
  nlohmann::json doc;
  doc["task"] = to_string(m.task);
  auto parts = nlohmann::json::array();
  for (const auto& p : m.participants)
    parts.push_back({{"participant_id", p.participant_id},
                     {"block_order", to_string(p.block_order)},
                     {"overall", to_json(p.overall)},
                     {"UP", to_json(p.up)},
                     {"INV", to_json(p.inv)}});
  doc["participants"] = std::move(parts);
  doc["overall"] = to_json(m.overall);
  doc["orientation"] = {{"UP", to_json(m.up)}, {"INV", to_json(m.inv)}};
  for (const auto& [k, g] : m.by_block_order) doc["block_order"][k] = to_json(g);
  for (const auto& [k, g] : m.by_condition) doc["condition"][k] = to_json(g);
  if (m.confusion) {
    doc["counts"] = counts_to_json(*m.counts);
    doc["confusion"] = confusion_to_json(*m.confusion);
    doc["metrics"] = metrics_to_json(*m.matrix_metrics);
  }
  if (m.task == Task::AIT) {
    for (const auto& [l, s] : m.labels)
      doc["labels"][l] = {{"as_target", s.as_target},
                          {"correct", s.correct},
                          {"as_distractor", s.as_distractor},
                          {"chosen_as_distractor", s.chosen_as_distractor},
                          {"accuracy", nullable(s.accuracy)},
                          {"selection_bias", nullable(s.selection_bias)}};
    doc["label_accuracy"] = to_json(m.label_accuracy);
    doc["label_selection_bias"] = to_json(m.label_selection_bias);
  }
  return doc;
}

std::string human_metrics_table(const HumanMetrics& m) {
  std::ostringstream os;
  auto fmt = [](double v, int prec) {
    std::ostringstream s;
    if (std::isfinite(v)) s << std::fixed << std::setprecision(prec) << v;
    else s << "-";
    return s.str();
  };
  os << "task " << to_string(m.task) << ", " << m.participants.size() << " participant(s)\n";
  os << std::left << std::setw(14) << "condition" << std::right << std::setw(6) << "n" << std::setw(11) << "acc% M"
     << std::setw(9) << "SD" << std::setw(10) << "RT(s) M" << std::setw(9) << "SD" << '\n';
  auto row = [&](const std::string& name, const GroupStats& g) {
    os << std::left << std::setw(14) << name << std::right << std::setw(6) << g.participants << std::setw(11)
       << fmt(g.accuracy.mean, 2) << std::setw(9) << fmt(g.accuracy.sd, 2) << std::setw(10) << fmt(g.rt_s.mean, 3)
       << std::setw(9) << fmt(g.rt_s.sd, 3) << '\n';
  };
  row("overall", m.overall);
  row("UP", m.up);
  row("INV", m.inv);
  for (const auto& [k, g] : m.by_condition) row(k, g);
  if (m.matrix_metrics) os << '\n' << metrics_table(*m.matrix_metrics);
  if (m.task == Task::AIT) {
    os << '\n' << std::left << std::setw(14) << "label" << std::right << std::setw(11) << "accuracy%" << std::setw(17)
       << "selection_bias%" << '\n';
    for (const auto& [l, s] : m.labels)
      os << std::left << std::setw(14) << l << std::right << std::setw(11) << fmt(s.accuracy, 2) << std::setw(17)
         << fmt(s.selection_bias, 2) << '\n';
  }
  return os.str();
}

}  // namespace kinprim
