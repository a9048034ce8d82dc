#include <kinprim/cli.hpp>

#include <kinprim/analysis.hpp>
#include <kinprim/error.hpp>
#include <kinprim/human_logs.hpp>
#include <kinprim/seed.hpp>
#include <kinprim/stimulus.hpp>
#include <kinprim/synth.hpp>

#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace kinprim::cli {

int stage_exit_code(Stage s) { return 10 + static_cast<int>(s); }

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const nlohmann::json& doc) { write_text(path, doc.dump(1) + "\n"); }

std::string config_hash(const nlohmann::json& effective_config) {
  return Fingerprint{}.add(std::string_view("config")).add(effective_config.dump()).hex();
}

namespace {

std::string padded(std::size_t i, int width = 3) {
  std::ostringstream os;
  os << std::setw(width) << std::setfill('0') << i;
  return os.str();
}

std::string extension(TrajectoryFormat f) { return f == TrajectoryFormat::csv ? ".csv" : ".json"; }

nlohmann::json representations_to_json(const std::vector<ActionRepresentation>& reps) {
  auto out = nlohmann::json::array();
  for (const auto& r : reps) out.push_back(representation_to_json(r));
  return out;
}

std::vector<ActionRepresentation> representations_from_json(const nlohmann::json& doc) {
  const auto& list = doc.is_object() && doc.contains("representations") ? doc.at("representations") : doc;
  if (!list.is_array()) throw SchemaError("representation file: expected an array of representations");
  std::vector<ActionRepresentation> out;
  for (const auto& r : list) out.push_back(representation_from_json(r));
  return out;
}

fs::path out_dir(const Overrides& o, const nlohmann::json& config, const char* fallback) {
  if (o.out) return *o.out;
  if (config.contains("out_dir")) return config.at("out_dir").get<std::string>();
  return fallback;
}

}  // namespace

// --- gen ----------------------------------------------------------------------

nlohmann::json cmd_gen(const GenOptions& opts) {
  const auto doc = read_json(opts.spec_file);
  nlohmann::json classes;
  nlohmann::json settings = nlohmann::json::object();
  if (doc.is_array()) {
    classes = doc;
  } else if (doc.is_object() && doc.contains("classes")) {
    classes = doc.at("classes");
    settings = doc;
    settings.erase("classes");
  } else {
    throw SchemaError("generator spec: expected an array of class specs or an object with 'classes'");
  }
  std::uint64_t root = opts.overrides.seed.value_or(settings.value("seed", std::uint64_t{0}));
  TrajectoryFormat format = opts.overrides.format.value_or(parse_format(settings.value("format", std::string("json"))));
  const fs::path out = out_dir(opts.overrides, settings, "data");

  std::vector<SynthSpec> specs;
  std::set<std::string> names;
  for (const auto& c : classes) {
    auto spec = synth_spec_from_json(c);
    if (opts.overrides.instances) spec.instances = static_cast<int>(*opts.overrides.instances);
    if (!names.insert(spec.class_name).second) throw ParameterError("generator spec: duplicate class '" + spec.class_name + "'");
    specs.push_back(std::move(spec));
  }
  if (specs.empty()) throw ParameterError("generator spec: no classes");

  nlohmann::json effective = {{"seed", root}, {"format", to_string(format)}, {"classes", nlohmann::json::array()}};
  for (const auto& s : specs) effective["classes"].push_back(synth_spec_to_json(s));
  const auto hash = config_hash(effective);

  fs::create_directories(out);
  nlohmann::json manifest = {{"config_hash", hash},
                             {"root_seed", root},
                             {"format", to_string(format)},
                             {"files", nlohmann::json::array()},
                             {"class_counts", nlohmann::json::object()}};
  for (const auto& base : specs) {
    for (int i = 0; i < base.instances; ++i) {
      SynthSpec s = base;
      s.seed = derive_seed(root, "gen:" + base.class_name + ":" + std::to_string(base.seed), static_cast<std::uint64_t>(i));
      auto traj = generate_action(s);
      traj.recording_id = base.class_name + "_" + padded(static_cast<std::size_t>(i));
      const std::string file = traj.recording_id + extension(format);
      save_trajectory(traj, out / file, format);
      manifest["files"].push_back(
          {{"path", file}, {"action", traj.action_label}, {"recording_id", traj.recording_id}, {"seed", s.seed}});
    }
    manifest["class_counts"][base.class_name] = base.instances;
  }
  write_json(out / "manifest.json", manifest);
  spdlog::info("wrote {} trajectories to {}", manifest["files"].size(), out.string());
  return manifest;
}

std::vector<Trajectory> load_directory(const fs::path& dir, std::optional<TrajectoryFormat> format) {
  if (!fs::is_directory(dir)) throw SchemaError("data directory " + dir.string() + " does not exist");
  std::vector<Trajectory> out;
  const fs::path manifest = dir / "manifest.json";
  if (fs::exists(manifest)) {
    const auto m = read_json(manifest);
    const auto fmt = format.value_or(parse_format(m.value("format", std::string("json"))));
    for (const auto& f : m.at("files")) out.push_back(load_trajectory(dir / f.at("path").get<std::string>(), fmt));
    return out;
  }
  const auto fmt = format.value_or(TrajectoryFormat::json);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == extension(fmt)) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) out.push_back(load_trajectory(f, fmt));
  return out;
}

// --- pipeline -------------------------------------------------------------------

nlohmann::json cmd_pipeline(const PipelineOptions& opts) {
  nlohmann::json config = opts.config ? read_json(*opts.config) : nlohmann::json::object();
  PipelineConfig cfg = pipeline_config_from_json(config);
  if (opts.overrides.seed) cfg.seed = *opts.overrides.seed;
  if (opts.overrides.k) cfg.K = *opts.overrides.k;
  if (opts.overrides.sparsity) cfg.sparsity = *opts.overrides.sparsity;
  fs::path data = opts.data_dir ? *opts.data_dir : fs::path(config.value("data_dir", std::string("data")));
  if (opts.config && data.is_relative() && !opts.data_dir) data = opts.config->parent_path() / data;
  const fs::path out = out_dir(opts.overrides, config, "out");

  std::optional<TrajectoryFormat> format = opts.overrides.format;
  if (!format && config.contains("format")) format = parse_format(config.at("format").get<std::string>());

  nlohmann::json effective = pipeline_config_to_json(cfg);
  effective["data_dir"] = data.string();
  const auto hash = config_hash(effective);
  nlohmann::json report = {{"config_hash", hash}, {"config", effective}, {"root_seed", cfg.seed},
                           {"stage_seeds", {{"dictionary", derive_seed(cfg.seed, "dictionary")}}}};
  std::vector<std::string> written;
  fs::create_directories(out);

  auto fail = [&](const StageError& e) {
    report["status"] = "failed";
    report["failed_stage"] = static_cast<int>(e.stage());
    report["message"] = e.what();
    report["partial_artifacts"] = written;
    write_json(out / "pipeline_report.json", report);
  };

  try {
    std::vector<Trajectory> recordings;
    try {
      recordings = load_directory(data, format);
    } catch (const Error& e) {
      throw StageError(Stage::ingest, e.what());
    }
    if (recordings.empty()) throw StageError(Stage::ingest, "no trajectories found in " + data.string());
    spdlog::info("loaded {} trajectories from {}", recordings.size(), data.string());

    const auto result = run_pipeline(recordings, cfg);

    write_json(out / "submovements.json",
               {{"config_hash", hash}, {"submovements", submovements_to_json(result.submovements)}});
    written.push_back("submovements.json");
    auto dict_json = dictionary_to_json(result.dictionary);
    dict_json["config_hash"] = hash;
    write_json(out / "dictionary.json", dict_json);
    written.push_back("dictionary.json");
    write_json(out / "representations.json",
               {{"config_hash", hash}, {"representations", representations_to_json(result.train)}});
    written.push_back("representations.json");
    write_json(out / "pool.json",
               {{"config_hash", hash}, {"representations", representations_to_json(result.pool_representations())}});
    written.push_back("pool.json");
    auto model_json = model_to_json(result.model);
    model_json["config_hash"] = hash;
    write_json(out / "model.json", model_json);
    written.push_back("model.json");

    std::map<std::string, std::size_t> per_action;
    for (const auto& r : result.train) ++per_action[r.action_label];
    report["status"] = "ok";
    report["recordings"] = recordings.size();
    report["submovements"] = result.submovements.size();
    report["skipped_segments"] = result.skipped_segments;
    report["train_recordings"] = result.train.size();
    report["holdout_recordings"] = result.holdout.size();
    report["train_recordings_per_action"] = per_action;
    report["dictionary_fingerprint"] = result.dictionary.fingerprint;
    report["model_fingerprint"] = Fingerprint{}.add(model_to_json(result.model).dump()).hex();
    report["classifiers"] = result.model.labels.size();
    report["sigma"] = result.sigma;
    report["lambda"] = result.lambda;
    report["artifacts"] = written;
    write_json(out / "pipeline_report.json", report);
    return report;
  } catch (const StageError& e) {
    fail(e);
    throw;
  }
}

// --- ast ----------------------------------------------------------------------

nlohmann::json cmd_ast(const AstOptions& opts) {
  nlohmann::json config = opts.config ? read_json(*opts.config) : nlohmann::json::object();
  const nlohmann::json ast_cfg = config.value("ast", nlohmann::json::object());
  ASTConfig cfg;
  cfg.repetitions = opts.overrides.reps.value_or(ast_cfg.value("repetitions", cfg.repetitions));
  cfg.instances_per_trial = opts.overrides.instances.value_or(ast_cfg.value("instances_per_trial", cfg.instances_per_trial));
  cfg.seed = opts.overrides.seed.value_or(ast_cfg.value("seed", config.value("seed", std::uint64_t{0})));
  cfg.tie_rule = opts.tie_rule.value_or(parse_tie_rule(ast_cfg.value("tie_rule", std::string("coin_flip_seeded"))));
  cfg.threads = opts.threads;
  cfg.validate();
  const fs::path out = out_dir(opts.overrides, config, "out");

  const auto dict = dictionary_from_json(read_json(opts.dictionary));
  const auto model = model_from_json(read_json(opts.model), dict);
  const auto reps = representations_from_json(read_json(opts.pool));
  const auto pool = make_pool(reps);

  nlohmann::json effective = {{"repetitions", cfg.repetitions},
                              {"instances_per_trial", cfg.instances_per_trial},
                              {"seed", cfg.seed},
                              {"tie_rule", to_string(cfg.tie_rule)},
                              {"dictionary_fingerprint", dict.fingerprint}};
  const auto hash = config_hash(effective);

  ModelScorer scorer(model);
  const auto result = run_experiment(scorer, pool, model.labels, cfg);
  const auto cm = to_percentage(result.counts);
  const auto metrics = compute_metrics(cm);
  std::size_t correct = 0;
  for (const auto& t : result.log) correct += t.correct;
  const double accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(result.log.size());

  auto counts = counts_to_json(result.counts);
  counts["config_hash"] = hash;
  counts["seed"] = cfg.seed;
  counts["trials"] = result.log.size();
  counts["log_fingerprint"] = Fingerprint{}.add(trial_log_csv(result.log)).hex();
  write_json(out / "ast_counts.json", counts);
  write_text(out / "ast_log.csv", trial_log_csv(result.log));
  write_text(out / "ast_matrix.csv", confusion_to_csv(cm, metrics));
  auto metrics_json = metrics_to_json(metrics);
  metrics_json["config_hash"] = hash;
  metrics_json["overall_accuracy"] = accuracy;
  write_json(out / "ast_metrics.json", metrics_json);
  std::cout << metrics_table(metrics) << "trials " << result.log.size() << ", overall accuracy "
            << std::fixed << std::setprecision(2) << accuracy << "%\n";
  return {{"config_hash", hash}, {"trials", result.log.size()}, {"overall_accuracy", accuracy}};
}

// --- analyze ------------------------------------------------------------------

nlohmann::json cmd_analyze(const AnalyzeOptions& opts) {
  if (opts.matrices.empty() && opts.logs.empty()) throw ParameterError("analyze: give --matrix and/or --logs inputs");
  std::vector<std::pair<std::string, MetricsReport>> reports;
  std::size_t name_idx = 0;
  auto next_name = [&](const std::string& fallback) {
    return name_idx < opts.names.size() ? opts.names[name_idx++] : (++name_idx, fallback);
  };
  nlohmann::json doc = {{"reports", nlohmann::json::object()}};
  for (const auto& path : opts.matrices) {
    const auto counts = counts_from_json(read_json(path));
    const auto cm = to_percentage(counts);
    auto name = next_name(path.stem().string());
    reports.emplace_back(name, compute_metrics(cm));
    doc["reports"][name] = metrics_to_json(reports.back().second);
    doc["reports"][name]["confusion"] = confusion_to_json(cm);
  }
  if (!opts.logs.empty()) {
    std::vector<ResponseLog> logs;
    for (const auto& path : opts.logs) logs.push_back(response_log_from_json(read_json(path)));
    const auto human = analyze_human_logs(logs);
    doc["human"] = human_metrics_to_json(human);
    std::cout << human_metrics_table(human) << '\n';
    if (human.matrix_metrics) {
      auto name = next_name("human");
      reports.emplace_back(name, *human.matrix_metrics);
      doc["reports"][name] = metrics_to_json(*human.matrix_metrics);
    }
  }
  for (const auto& [name, r] : reports) std::cout << "== " << name << " ==\n" << metrics_table(r) << '\n';
  if (reports.size() == 2) {
    const auto rows = compare_reports(reports[0].second, reports[1].second);
    doc["comparisons"] = comparison_to_json(rows, reports[0].first, reports[1].first);
    std::cout << comparison_table(rows, reports[0].first, reports[1].first);
  } else if (reports.size() > 2) {
    spdlog::warn("analyze: {} reports given; t-tests compare exactly two", reports.size());
  }
  const fs::path out = opts.overrides.out.value_or(".");
  write_json(out / "analysis.json", doc);
  return doc;
}

// --- export-stimuli -------------------------------------------------------------

nlohmann::json cmd_export_stimuli(const ExportOptions& opts) {
  StimulusOptions so;
  so.transforms.clear();
  for (const auto& o : opts.orientations) so.transforms.push_back(parse_stimulus_transform(o));
  if (so.transforms.empty()) throw ParameterError("export-stimuli: no orientations requested");
  const auto recordings = load_directory(opts.data_dir, opts.overrides.format);
  if (recordings.empty()) throw ParameterError("export-stimuli: no trajectories in " + opts.data_dir.string());

  // One package per action: its lowest recording id.
  std::map<std::string, const Trajectory*> chosen;
  for (const auto& t : recordings) {
    auto& slot = chosen[t.action_label];
    if (!slot || t.recording_id < slot->recording_id) slot = &t;
  }
  const fs::path out = opts.overrides.out.value_or("stimuli");
  nlohmann::json index = {{"fps", so.fps}, {"actions", nlohmann::json::array()}, {"files", nlohmann::json::object()}};
  for (const auto& [action, traj] : chosen) {
    const auto pkg = export_stimulus(*traj, so);
    const std::string file = action + ".json";
    write_json(out / file, pkg);
    index["actions"].push_back(action);
    index["files"][action] = file;
  }
  write_json(out / "index.json", index);
  return index;
}

}  // namespace kinprim::cli
