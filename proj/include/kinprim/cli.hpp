#pragma once

#include <kinprim/ast.hpp>
#include <kinprim/kinematics.hpp>
#include <kinprim/pipeline.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace kinprim::cli {

namespace fs = std::filesystem;

// Exit codes: 0 success, 1 error, 2 usage; pipeline stage failures exit with
// 10 + stage number (11 ingest ... 15 train).
constexpr int exit_ok = 0;
constexpr int exit_error = 1;
constexpr int exit_usage = 2;
int stage_exit_code(Stage s);

// Flag overrides shared by the subcommands. Flags win over the config file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<fs::path> out;
  std::optional<std::size_t> k;
  std::optional<std::size_t> sparsity;
  std::optional<std::size_t> reps;
  std::optional<std::size_t> instances;
  std::optional<TrajectoryFormat> format;
};

nlohmann::json read_json(const fs::path& path);
void write_json(const fs::path& path, const nlohmann::json& doc);
void write_text(const fs::path& path, const std::string& text);

// Hash of a canonical JSON dump, stamped into artifacts.
std::string config_hash(const nlohmann::json& effective_config);

struct GenOptions {
  fs::path spec_file;
  Overrides overrides;
};
// Writes one trajectory file per (class, instance) plus manifest.json.
nlohmann::json cmd_gen(const GenOptions& opts);

struct PipelineOptions {
  std::optional<fs::path> config;
  std::optional<fs::path> data_dir;
  Overrides overrides;
};
// Returns the pipeline report; throws StageError on stage failure (after
// writing a report flagged as failed).
nlohmann::json cmd_pipeline(const PipelineOptions& opts);

struct AstOptions {
  std::optional<fs::path> config;
  fs::path model;
  fs::path dictionary;
  fs::path pool;
  Overrides overrides;
  std::optional<TieRule> tie_rule;
  unsigned threads = 0;
};
nlohmann::json cmd_ast(const AstOptions& opts);

struct AnalyzeOptions {
  std::vector<fs::path> matrices;  // count-matrix JSON (e.g. ast_counts.json)
  std::vector<fs::path> logs;      // ResponseLog JSON
  std::vector<std::string> names;  // display names, one per report
  Overrides overrides;
};
nlohmann::json cmd_analyze(const AnalyzeOptions& opts);

struct ExportOptions {
  fs::path data_dir;
  std::vector<std::string> orientations{"UP", "INV"};
  Overrides overrides;
};
nlohmann::json cmd_export_stimuli(const ExportOptions& opts);

// Loads every trajectory under dir (manifest.json order when present, else
// sorted file names of the requested format).
std::vector<Trajectory> load_directory(const fs::path& dir, std::optional<TrajectoryFormat> format);

}  // namespace kinprim::cli
