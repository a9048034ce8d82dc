#include <kinprim/pipeline.hpp>

#include <kinprim/error.hpp>
#include <kinprim/seed.hpp>

#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <random>

namespace kinprim {

std::string to_string(Stage s) {
  switch (s) {
    case Stage::ingest: return "stage 1 (ingest)";
    case Stage::segment: return "stage 2 (segment)";
    case Stage::dictionary: return "stage 3 (dictionary)";
    case Stage::encode: return "stage 4 (encode)";
    case Stage::train: return "stage 5 (train)";
  }
  return "stage ?";
}

PipelineConfig pipeline_config_from_json(const nlohmann::json& doc, PipelineConfig c) {
  try {
    c.seed = doc.value("seed", c.seed);
    c.sparsity = doc.value("sparsity", c.sparsity);
    c.holdout_fraction = doc.value("holdout_fraction", c.holdout_fraction);
    if (doc.contains("velocity")) {
      const auto& v = doc.at("velocity");
      const auto marker = v.value("marker", std::string("all_mean"));
      c.marker = marker == "all_mean" ? MarkerSelect::all_mean() : MarkerSelect::named(marker);
      c.smooth_window = v.value("smooth_window", c.smooth_window);
    }
    if (doc.contains("segmentation")) {
      const auto& s = doc.at("segmentation");
      c.segmentation.prominence_frac = s.value("prominence_frac", c.segmentation.prominence_frac);
      c.segmentation.min_duration = s.value("min_duration", c.segmentation.min_duration);
      c.segmentation.length = s.value("length", c.segmentation.length);
    }
    if (doc.contains("dictionary")) {
      const auto& d = doc.at("dictionary");
      c.K = d.value("K", c.K);
      c.max_iters = d.value("max_iters", c.max_iters);
    }
    if (doc.contains("classifier")) {
      const auto& k = doc.at("classifier");
      c.lambda = k.value("lambda", c.lambda);
      if (k.contains("sigma") && !k.at("sigma").is_null()) c.sigma = k.at("sigma").get<double>();
      c.lambda_grid = k.value("lambda_grid", c.lambda_grid);
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("pipeline config: ") + e.what());
  }
  if (!(c.holdout_fraction >= 0.0 && c.holdout_fraction < 1.0))
    throw ParameterError("pipeline config: holdout_fraction must be in [0,1)");
  return c;
}

nlohmann::json pipeline_config_to_json(const PipelineConfig& c) {
  return {{"seed", c.seed},
          {"sparsity", c.sparsity},
          {"holdout_fraction", c.holdout_fraction},
          {"velocity", {{"marker", c.marker.name.value_or("all_mean")}, {"smooth_window", c.smooth_window}}},
          {"segmentation",
           {{"prominence_frac", c.segmentation.prominence_frac},
            {"min_duration", c.segmentation.min_duration},
            {"length", c.segmentation.length}}},
          {"dictionary", {{"K", c.K}, {"max_iters", c.max_iters}}},
          {"classifier",
           {{"lambda", c.lambda},
            {"sigma", c.sigma ? nlohmann::json(*c.sigma) : nlohmann::json(nullptr)},
            {"lambda_grid", c.lambda_grid}}}};
}

std::vector<ActionRepresentation> PipelineResult::pool_representations() const {
  std::vector<ActionRepresentation> out = holdout;
  for (const auto& r : train) {
    const bool covered = std::any_of(holdout.begin(), holdout.end(),
                                     [&](const ActionRepresentation& h) { return h.action_label == r.action_label; });
    if (!covered) out.push_back(r);
  }
  return out;
}

CodePool PipelineResult::pool() const { return make_pool(pool_representations()); }

namespace {

// Splits recording ids of each action into (kept, held out).
std::pair<std::vector<std::string>, std::vector<std::string>> split_ids(
    const std::map<std::string, std::vector<std::string>>& by_action, double fraction, std::uint64_t seed,
    std::string_view tag) {
  std::vector<std::string> kept, held;
  for (const auto& [action, ids_in] : by_action) {
    auto ids = ids_in;
    std::sort(ids.begin(), ids.end());
    std::mt19937_64 rng(derive_seed(seed, std::string(tag) + ":" + action));
    std::shuffle(ids.begin(), ids.end(), rng);
    std::size_t n_held = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(ids.size())));
    if (ids.size() < 2) n_held = 0;
    n_held = std::min(n_held, ids.size() - 1);
    held.insert(held.end(), ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_held));
    kept.insert(kept.end(), ids.begin() + static_cast<std::ptrdiff_t>(n_held), ids.end());
  }
  return {kept, held};
}

TrainingSet group_by_action(const std::vector<ActionRepresentation>& reps) {
  TrainingSet out;
  for (const auto& r : reps) out[r.action_label].push_back(r);
  return out;
}

}  // namespace

PipelineResult run_pipeline(std::span<const Trajectory> recordings, const PipelineConfig& cfg) {
  PipelineResult out;
  if (recordings.empty()) throw StageError(Stage::ingest, "no recordings");

  // Stage 2: velocity + segmentation.
  std::map<std::string, std::vector<SubMovement>> subs_by_recording;
  std::map<std::string, std::vector<std::string>> ids_by_action;
  try {
    for (const auto& traj : recordings) {
      if (subs_by_recording.count(traj.recording_id))
        throw ParameterError("duplicate recording_id '" + traj.recording_id + "'");
      const auto vp = tangential_velocity(traj, cfg.marker, cfg.smooth_window);
      auto seg = segment_profile(vp, cfg.segmentation);
      out.skipped_segments += seg.skipped;
      if (seg.submovements.empty()) {
        spdlog::warn("recording {} produced no sub-movements", traj.recording_id);
        continue;
      }
      ids_by_action[traj.action_label].push_back(traj.recording_id);
      out.submovements.insert(out.submovements.end(), seg.submovements.begin(), seg.submovements.end());
      subs_by_recording[traj.recording_id] = std::move(seg.submovements);
    }
    if (out.submovements.empty()) throw InsufficientDataError("no sub-movements extracted");
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(Stage::segment, e.what());
  }
  spdlog::info("segmented {} recordings into {} sub-movements", subs_by_recording.size(), out.submovements.size());

  const auto [train_ids, holdout_ids] = split_ids(ids_by_action, cfg.holdout_fraction, cfg.seed, "split");
  std::vector<SubMovement> train_subs;
  for (const auto& id : train_ids) {
    const auto& s = subs_by_recording.at(id);
    train_subs.insert(train_subs.end(), s.begin(), s.end());
  }

  // Stage 3: dictionary over the training sub-movements.
  try {
    out.dictionary = learn_dictionary(train_subs, cfg.K, derive_seed(cfg.seed, "dictionary"), cfg.max_iters);
  } catch (const Error& e) {
    throw StageError(Stage::dictionary, e.what());
  }
  spdlog::info("dictionary: K={} L={} fingerprint {}", out.dictionary.K(), out.dictionary.L(),
               out.dictionary.fingerprint);

  // Stage 4: sparse codes.
  try {
    for (const auto& id : train_ids) out.train.push_back(encode_action(subs_by_recording.at(id), out.dictionary, cfg.sparsity));
    for (const auto& id : holdout_ids)
      out.holdout.push_back(encode_action(subs_by_recording.at(id), out.dictionary, cfg.sparsity));
  } catch (const Error& e) {
    throw StageError(Stage::encode, e.what());
  }

  // Stage 5: one-vs-all kernel RLS.
  try {
    const TrainingSet training = group_by_action(out.train);
    double lambda = cfg.lambda;
    if (cfg.lambda_grid) {
      std::map<std::string, std::vector<std::string>> train_by_action;
      for (const auto& r : out.train) train_by_action[r.action_label].push_back(r.recording_id);
      const auto [fit_ids, val_ids] = split_ids(train_by_action, 0.25, cfg.seed, "validation");
      std::vector<ActionRepresentation> fit, val;
      for (const auto& r : out.train)
        (std::find(val_ids.begin(), val_ids.end(), r.recording_id) != val_ids.end() ? val : fit).push_back(r);
      if (!val.empty()) {
        static constexpr std::array<double, 6> grid{1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0};
        lambda = select_lambda(group_by_action(fit), group_by_action(val), grid, cfg.sigma);
        spdlog::info("lambda grid selected {}", lambda);
      }
    }
    out.model = train_one_vs_all(training, {cfg.sigma, lambda}, out.dictionary.fingerprint);
    out.lambda = lambda;
    out.sigma = out.model.classifiers.begin()->second.sigma;
  } catch (const Error& e) {
    throw StageError(Stage::train, e.what());
  }
  spdlog::info("trained {} classifiers on {} codes (sigma {:.4g}, lambda {:.3g})", out.model.labels.size(),
               out.model.classifiers.begin()->second.inputs->rows(), out.sigma, out.lambda);
  return out;
}

}  // namespace kinprim
