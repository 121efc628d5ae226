// kpix command-line front end.
//
//   kpix ingest   --config cfg.json INPUT...      transcripts + filings -> chunks/snippets
//   kpix extract  --config cfg.json [--models a,b] [--replay DIR]
//   kpix evaluate --config cfg.json --gold gold.jsonl [--models a,b] [--replay DIR]
//   kpix track    --config cfg.json [--models a,b] [--sweep 0.75,0.85]
//   kpix report   --config cfg.json
//
// Exit codes: 0 success, 1 partial failure (some inputs or chunks failed),
// 2 configuration or usage error.

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kpix/config.hpp"
#include "kpix/pipeline.hpp"

namespace {

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  for (const auto& part : kpix::split_on(csv, ',')) {
    auto trimmed = kpix::trim(part);
    if (!trimmed.empty()) out.push_back(trimmed);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"KPI extraction and longitudinal tracking pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::string models_csv;
  std::string replay_dir;
  std::string gold_path;
  std::string sweep_csv;
  std::string out_dir_override;
  std::vector<std::string> inputs;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "pipeline configuration JSON")
        ->required();
    cmd->add_option("--out", out_dir_override, "override the configured output directory");
  };

  CLI::App* ingest = app.add_subcommand("ingest", "segment transcripts and filings");
  add_common(ingest);
  ingest->add_option("inputs", inputs, "transcript .txt / filing .html files or directories")
      ->required();

  CLI::App* extract = app.add_subcommand("extract", "run model extraction over chunks");
  add_common(extract);
  extract->add_option("--models", models_csv, "comma-separated model ids (default: all)");
  extract->add_option("--replay", replay_dir, "replay directory of recorded responses");

  CLI::App* evaluate = app.add_subcommand("evaluate", "score extractions against gold");
  add_common(evaluate);
  evaluate->add_option("--gold", gold_path, "gold annotation JSONL")->required();
  evaluate->add_option("--models", models_csv, "comma-separated model ids (default: all)");
  evaluate->add_option("--replay", replay_dir, "replay directory for the judge");

  CLI::App* track = app.add_subcommand("track", "aggregate extractions into KPI series");
  add_common(track);
  track->add_option("--models", models_csv, "comma-separated model ids (default: all)");
  track->add_option("--sweep", sweep_csv, "comma-separated thresholds to sweep");

  CLI::App* report = app.add_subcommand("report", "print the evaluation table");
  add_common(report);

  CLI11_PARSE(app, argc, argv);

  try {
    auto config = kpix::config::load_config(config_path);
    if (!out_dir_override.empty()) config.output_dir = out_dir_override;
    auto models = split_list(models_csv);

    if (ingest->parsed()) {
      std::vector<kpix::pipe::fs::path> paths(inputs.begin(), inputs.end());
      return kpix::pipe::cmd_ingest(paths, config).exit_code();
    }
    if (extract->parsed()) {
      return kpix::pipe::cmd_extract(config, models, replay_dir).exit_code();
    }
    if (evaluate->parsed()) {
      auto result = kpix::pipe::cmd_evaluate(config, gold_path, models, replay_dir);
      kpix::pipe::print_eval_table(result.reports, std::cout);
      return result.exit_code();
    }
    if (track->parsed()) {
      std::vector<double> sweep;
      for (const auto& s : split_list(sweep_csv)) sweep.push_back(std::stod(s));
      return kpix::pipe::cmd_track(config, models, sweep).exit_code();
    }
    if (report->parsed()) {
      return kpix::pipe::cmd_report(config);
    }
  } catch (const kpix::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
