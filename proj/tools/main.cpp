#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "riskmap/errors.hpp"
#include "riskmap/pipeline.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
};

riskmap::PipelineConfig load(const CommonOpts& opts) {
  riskmap::PipelineConfig cfg = riskmap::load_pipeline_config(opts.config_path);
  if (opts.seed) riskmap::override_seed(cfg, *opts.seed);
  if (opts.workers) cfg.workers = *opts.workers;
  return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "pipeline config file (JSON)")
      ->required();
  cmd->add_option("--seed", opts.seed, "override the master seed");
  cmd->add_option("--workers", opts.workers, "override the worker count");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"contextual driving-risk pipeline"};
  app.require_subcommand(1);

  CommonOpts synth_opts, model_opts, predict_opts, report_opts;
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  add_common(synth, synth_opts);
  auto* model = app.add_subcommand("model", "run the modeling process");
  add_common(model, model_opts);
  auto* predict = app.add_subcommand("predict", "predict risk for held-out drivers");
  add_common(predict, predict_opts);
  auto* report = app.add_subcommand("report", "cohort statistics from predictions");
  add_common(report, report_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      riskmap::run_synth(load(synth_opts));
      std::cout << "dataset written\n";
    } else if (model->parsed()) {
      const auto art = riskmap::run_model(load(model_opts));
      const auto labeled = art.cohorts.labeled_set();
      std::cout << "labeled " << labeled.size() << " of "
                << art.cohorts.final_labels.size() << " modeling drivers; trained "
                << art.model.trees.size() << "-tree classifier\n";
    } else if (predict->parsed()) {
      const auto predictions = riskmap::run_predict(load(predict_opts));
      std::cout << "predicted " << predictions.size() << " drivers\n";
    } else if (report->parsed()) {
      const auto rep = riskmap::run_report(load(report_opts));
      std::cout << riskmap::render_report_text(rep);
    }
  } catch (const riskmap::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
