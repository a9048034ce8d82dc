#pragma once

#include <kinprim/ast.hpp>
#include <kinprim/classifier.hpp>
#include <kinprim/error.hpp>
#include <kinprim/kinematics.hpp>
#include <kinprim/primitives.hpp>
#include <kinprim/segmentation.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace kinprim {

enum class Stage { ingest = 1, segment = 2, dictionary = 3, encode = 4, train = 5 };

std::string to_string(Stage s);

// Error raised by a pipeline stage; carries the stage for the exit code.
class StageError : public Error {
public:
  StageError(Stage stage, const std::string& what) : Error(to_string(stage) + ": " + what), stage_(stage) {}
  Stage stage() const { return stage_; }

private:
  Stage stage_;
};

struct PipelineConfig {
  MarkerSelect marker = MarkerSelect::all_mean();
  int smooth_window = 5;
  SegmentationParams segmentation;
  std::size_t K = 15;
  std::size_t max_iters = 300;
  std::size_t sparsity = 3;
  double lambda = 1e-3;
  std::optional<double> sigma;  // empty: median pairwise distance
  bool lambda_grid = false;     // pick lambda from {1e-5, ..., 1} on a validation split
  double holdout_fraction = 0.25;  // recordings per action held out as the AST pool
  std::uint64_t seed = 0;
};

PipelineConfig pipeline_config_from_json(const nlohmann::json& doc, PipelineConfig base = {});
nlohmann::json pipeline_config_to_json(const PipelineConfig& cfg);

struct PipelineResult {
  std::vector<SubMovement> submovements;
  std::size_t skipped_segments = 0;
  Dictionary dictionary;
  std::vector<ActionRepresentation> train;
  std::vector<ActionRepresentation> holdout;
  OneVsAllModel model;
  double sigma = 0.0;
  double lambda = 0.0;

  // Held-out representations, plus the training representations of actions
  // that have none held out.
  std::vector<ActionRepresentation> pool_representations() const;
  CodePool pool() const;
};

// segment -> dictionary -> encode -> train over in-memory recordings.
PipelineResult run_pipeline(std::span<const Trajectory> recordings, const PipelineConfig& cfg);

}  // namespace kinprim
