#include <kinprim/cli.hpp>
#include <kinprim/error.hpp>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>

namespace cli = kinprim::cli;

namespace {

void add_common(CLI::App* app, cli::Overrides& o, std::string& format) {
  app->add_option("--seed", o.seed, "root seed");
  app->add_option("--out", o.out, "output directory");
  app->add_option("--format", format, "trajectory format")->check(CLI::IsMember({"json", "csv"}));
}

void apply_format(cli::Overrides& o, const std::string& format) {
  if (!format.empty()) o.format = kinprim::parse_format(format);
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("KINPRIM_LOG")) spdlog::set_level(spdlog::level::from_str(level));
  spdlog::set_pattern("[%l] %v");

  CLI::App app{"kinprim: kinematic primitives, action classification and the action-selection task"};
  app.require_subcommand(1);

  cli::GenOptions gen;
  std::string gen_format;
  auto* g = app.add_subcommand("gen", "generate synthetic trajectories from a class spec");
  g->add_option("--config,spec", gen.spec_file, "generator spec JSON")->required();
  g->add_option("--instances", gen.overrides.instances, "recordings per class");
  add_common(g, gen.overrides, gen_format);

  cli::PipelineOptions pipe;
  std::string pipe_format;
  auto* p = app.add_subcommand("pipeline", "velocity, segmentation, dictionary, coding and classifier training");
  p->add_option("--config", pipe.config, "pipeline config JSON");
  p->add_option("--data", pipe.data_dir, "trajectory directory");
  p->add_option("--k", pipe.overrides.k, "dictionary size");
  p->add_option("--sparsity", pipe.overrides.sparsity, "atoms per sub-movement");
  add_common(p, pipe.overrides, pipe_format);

  cli::AstOptions ast;
  std::string ast_format, tie;
  std::string model_dir;
  auto* a = app.add_subcommand("ast", "run the action-selection task on a trained model");
  a->add_option("--config", ast.config, "config JSON (reads the 'ast' block)");
  a->add_option("--model-dir", model_dir, "pipeline output dir holding model.json, dictionary.json, pool.json");
  a->add_option("--model", ast.model, "model JSON");
  a->add_option("--dictionary", ast.dictionary, "dictionary JSON");
  a->add_option("--pool", ast.pool, "representations JSON used to draw trial instances");
  a->add_option("--reps", ast.overrides.reps, "repetitions per triad");
  a->add_option("--instances", ast.overrides.instances, "instances averaged per trial");
  a->add_option("--tie-rule", tie, "tie rule")->check(CLI::IsMember({"coin_flip_seeded", "prefer_a"}));
  a->add_option("--threads", ast.threads, "worker threads (0 = hardware)");
  add_common(a, ast.overrides, ast_format);

  cli::AnalyzeOptions an;
  std::string an_format;
  auto* z = app.add_subcommand("analyze", "metrics, identities and comparisons for count matrices and response logs");
  z->add_option("--matrix", an.matrices, "count-matrix JSON (repeatable)");
  z->add_option("--logs", an.logs, "ResponseLog JSON files");
  z->add_option("--name", an.names, "report names, in input order");
  add_common(z, an.overrides, an_format);

  cli::ExportOptions ex;
  std::string ex_format;
  auto* e = app.add_subcommand("export-stimuli", "write point-light stimulus packages");
  e->add_option("--data", ex.data_dir, "trajectory directory")->required();
  e->add_option("--orientations", ex.orientations, "transforms to describe (UP, INV, MIRROR)");
  add_common(e, ex.overrides, ex_format);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err) == 0 ? cli::exit_ok : cli::exit_usage;
  }

  try {
    if (g->parsed()) {
      apply_format(gen.overrides, gen_format);
      cli::cmd_gen(gen);
    } else if (p->parsed()) {
      apply_format(pipe.overrides, pipe_format);
      const auto report = cli::cmd_pipeline(pipe);
      std::cout << "pipeline ok: " << report["submovements"] << " sub-movements, " << report["classifiers"]
                << " classifiers, config " << report["config_hash"].get<std::string>() << '\n';
    } else if (a->parsed()) {
      apply_format(ast.overrides, ast_format);
      if (!tie.empty()) ast.tie_rule = kinprim::parse_tie_rule(tie);
      if (!model_dir.empty()) {
        if (ast.model.empty()) ast.model = cli::fs::path(model_dir) / "model.json";
        if (ast.dictionary.empty()) ast.dictionary = cli::fs::path(model_dir) / "dictionary.json";
        if (ast.pool.empty()) ast.pool = cli::fs::path(model_dir) / "pool.json";
      }
      if (ast.model.empty() || ast.dictionary.empty() || ast.pool.empty()) {
        std::cerr << "ast: need --model-dir or all of --model, --dictionary, --pool\n";
        return cli::exit_usage;
      }
      cli::cmd_ast(ast);
    } else if (z->parsed()) {
      apply_format(an.overrides, an_format);
      cli::cmd_analyze(an);
    } else if (e->parsed()) {
      apply_format(ex.overrides, ex_format);
      const auto index = cli::cmd_export_stimuli(ex);
      std::cout << "exported " << index["actions"].size() << " stimulus packages\n";
    }
  } catch (const kinprim::StageError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return cli::stage_exit_code(err.stage());
  } catch (const kinprim::ParameterError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return cli::exit_usage;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return cli::exit_error;
  }
  return cli::exit_ok;
}
