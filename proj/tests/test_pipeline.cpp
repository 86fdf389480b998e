#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "riskmap/errors.hpp"
#include "riskmap/pipeline.hpp"
#include "support/invariant_suites.hpp"

using namespace riskmap;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("riskmap-pipe-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

PipelineConfig small_config(const std::filesystem::path& out_dir) {
  PipelineConfig cfg;
  cfg.paths.output_dir = out_dir;
  cfg.groups = {SpecGroup::G1};
  cfg.synth.n_reference = 24;
  cfg.synth.n_modeling = 24;
  cfg.synth.n_heldout = 6;
  cfg.synth.trajectories_per_driver = 20;
  cfg.synth.points_per_trajectory = 120;
  cfg.synth.risky_fraction = 0.5;
  cfg.classifier.num_estimators = 40;
  cfg.min_control_trajectories = 20;
  cfg.seed = 42;
  override_seed(cfg, 42);
  cfg.workers = 4;
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("pipeline: end-to-end smoke on a small population") {
  TempDir tmp;
  auto cfg = small_config(tmp.path / "out");

  run_synth(cfg);
  CHECK(std::filesystem::exists(tmp.path / "out/dataset/reference.csv"));
  CHECK(std::filesystem::exists(tmp.path / "out/dataset/records.csv"));
  CHECK(std::filesystem::exists(tmp.path / "out/dataset/speed_limits.csv"));
  CHECK(std::filesystem::exists(tmp.path / "out/dataset/population.json"));

  const auto art = run_model(cfg);
  CHECK(art.deviations.missing.empty());
  CHECK(std::filesystem::exists(tmp.path / "out/model/model.json"));
  CHECK(std::filesystem::exists(tmp.path / "out/model/deviation_stats.json"));
  CHECK(std::filesystem::exists(tmp.path / "out/model/cohorts.csv"));
  CHECK(std::filesystem::exists(tmp.path / "out/model/missing.json"));
  CHECK(art.cohorts.labeled_set().size() >= 12);  // enough drivers to train on

  const auto predictions = run_predict(cfg);
  CHECK(predictions.size() == 6);
  for (const auto& p : predictions) {
    CHECK(p.score > 0.0);
    CHECK(p.score < 1.0);
    CHECK((p.label == CohortLabel::LowRisk || p.label == CohortLabel::HighRisk));
  }

  const auto report = run_report(cfg);
  CHECK(report.total_drivers == 6);
  CHECK(report.overall_mean_planted.has_value());
  CHECK(std::filesystem::exists(tmp.path / "out/report.csv"));
  CHECK(std::filesystem::exists(tmp.path / "out/chart.csv"));
  CHECK_FALSE(render_report_text(report).empty());
}

TEST_CASE("pipeline: rerun with the same seed is byte-identical") {
  TempDir tmp;
  auto cfg = small_config(tmp.path / "out");
  run_synth(cfg);
  run_model(cfg);
  const auto model_a = slurp(tmp.path / "out/model/model.json");
  const auto stats_a = slurp(tmp.path / "out/model/deviation_stats.json");
  run_model(cfg);
  CHECK(slurp(tmp.path / "out/model/model.json") == model_a);
  CHECK(slurp(tmp.path / "out/model/deviation_stats.json") == stats_a);
}

TEST_CASE("pipeline: predict does not mutate the modeling artifacts") {
  TempDir tmp;
  auto cfg = small_config(tmp.path / "out");
  run_synth(cfg);
  run_model(cfg);
  const auto model_before = slurp(tmp.path / "out/model/model.json");
  const auto stats_before = slurp(tmp.path / "out/model/deviation_stats.json");
  const auto cohorts_before = slurp(tmp.path / "out/model/cohorts.csv");
  run_predict(cfg);
  CHECK(slurp(tmp.path / "out/model/model.json") == model_before);
  CHECK(slurp(tmp.path / "out/model/deviation_stats.json") == stats_before);
  CHECK(slurp(tmp.path / "out/model/cohorts.csv") == cohorts_before);
}

TEST_CASE("pipeline: missing inputs name the path") {
  TempDir tmp;
  auto cfg = small_config(tmp.path / "out");
  try {
    run_model(cfg);
    FAIL("expected ConfigInvalid");
  } catch (const ConfigInvalid& e) {
    CHECK(std::string(e.what()).find("reference.csv") != std::string::npos);
  }
}

TEST_CASE("pipeline: config file parsing") {
  TempDir tmp;
  const auto cfg_path = tmp.path / "cfg.json";
  {
    std::ofstream out(cfg_path);
    out << R"({
      "paths": {"output_dir": "outdir"},
      "maps": {"h_bins": 8},
      "cohorts": {"k": 2, "confidence": 0.75},
      "classifier": {"num_estimators": 12},
      "groups": ["G1", "G5"],
      "seed": 7,
      "workers": 3,
      "synth": {"n_reference": 5, "risky_fraction": 0.25}
    })";
  }
  const auto cfg = load_pipeline_config(cfg_path);
  CHECK(cfg.paths.output_dir == "outdir");
  CHECK(cfg.h_bins == 8);
  CHECK(cfg.cohorts.confidence == 0.75);
  CHECK(cfg.cohorts.seed == 7);
  CHECK(cfg.classifier.num_estimators == 12);
  CHECK(cfg.classifier.seed == 7);
  CHECK(cfg.groups == std::set<SpecGroup>{SpecGroup::G1, SpecGroup::G5});
  CHECK(cfg.workers == 3);
  CHECK(cfg.synth.n_reference == 5);
  CHECK(cfg.synth.risky_fraction == 0.25);

  {
    std::ofstream out(cfg_path);
    out << R"({"groups": []})";
  }
  CHECK_THROWS_AS(load_pipeline_config(cfg_path), ConfigInvalid);
  {
    std::ofstream out(cfg_path);
    out << R"({"split": {"base_fraction": 1.5}})";
  }
  CHECK_THROWS_AS(load_pipeline_config(cfg_path), ConfigInvalid);
  {
    std::ofstream out(cfg_path);
    out << "not json";
  }
  CHECK_THROWS_AS(load_pipeline_config(cfg_path), ConfigInvalid);
  CHECK_THROWS_AS(load_pipeline_config(tmp.path / "absent.json"), ConfigInvalid);
}

TEST_CASE("pipeline: report fixtures") {
  std::vector<Prediction> preds = {{"a1", CohortLabel::LowRisk, 0.2},
                                   {"a2", CohortLabel::LowRisk, 0.3},
                                   {"b1", CohortLabel::HighRisk, 0.9},
                                   {"b2", CohortLabel::HighRisk, 0.8}};
  std::map<std::string, DriverRecord> records;
  records["a1"] = DriverRecord{"a1", 0, 0};
  records["a2"] = DriverRecord{"a2", 1, 0};
  records["b1"] = DriverRecord{"b1", 1, 0};
  records["b2"] = DriverRecord{"b2", 2, 0};

  const auto report = compute_report(preds, records, nullptr);
  REQUIRE(report.rows.size() == 2);
  const auto& low = report.rows[0];
  const auto& high = report.rows[1];
  CHECK(low.label == CohortLabel::LowRisk);
  CHECK(low.mean_risk_score == doctest::Approx(0.5));
  CHECK(low.no_records_pct == doctest::Approx(50.0));
  CHECK(high.mean_risk_score == doctest::Approx(1.5));
  CHECK(high.no_records_pct == doctest::Approx(0.0));
  CHECK(report.overall_mean_risk == doctest::Approx(1.0));

  // degenerate: everyone low-risk still yields an explicit zero high row
  preds = {{"a1", CohortLabel::LowRisk, 0.2}};
  const auto degenerate = compute_report(preds, records, nullptr);
  REQUIRE(degenerate.rows.size() == 2);
  CHECK(degenerate.rows[0].share_pct == doctest::Approx(100.0));
  CHECK(degenerate.rows[1].drivers == 0);
  CHECK(degenerate.rows[1].share_pct == doctest::Approx(0.0));

  // unknown driver
  preds = {{"zz", CohortLabel::LowRisk, 0.2}};
  CHECK_THROWS_AS(compute_report(preds, records, nullptr), DriverSetMismatch);
}

TEST_CASE("pipeline: report invariant suite") {
  const auto failures = riskmap::testing::pipeline_report_invariants(200);
  for (const auto& f : failures) FAIL_CHECK(f);
  CHECK(failures.empty());
}
