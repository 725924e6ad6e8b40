#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "pinnev/harness.hpp"

using namespace pinnev;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const char* tag) {
    path = fs::temp_directory_path() /
           (std::string("harness_") + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kTinyConfig = R"({
  "master_seed": 2718,
  "cells": [
    {
      "name": "tiny transport",
      "problem": {"id": "convdiff", "constants": {"v": 3, "m_interior": 32}},
      "runs": 3,
      "algos": [
        {"algo": "xnes", "label": "es", "overrides": {"max_evaluations": 240, "test_every_gens": 4}},
        {"algo": "adam", "label": "grad", "overrides": {"max_evaluations": 240, "test_every_steps": 120}}
      ]
    }
  ]
})";

}  // namespace

TEST_CASE("per-problem optimizer presets") {
  EsConfig es;
  AdamConfig adam;
  TransferPlan plan;

  apply_optimizer_defaults(ProblemSpec::preset("convdiff"), es, adam, plan);
  CHECK(es.lambda == 20);
  CHECK(es.eta_mu == 1.0);
  CHECK(es.eta_a == 0.05);
  CHECK(es.sigma0 == 0.05);
  CHECK(es.max_evaluations == 200000);
  CHECK(adam.lr0 == 0.05);
  CHECK(plan.eta_alpha == 0.05);
  CHECK(plan.delta_t == 2);
  CHECK(plan.t_max == 500);

  apply_optimizer_defaults(ProblemSpec::preset("burgers"), es, adam, plan);
  CHECK(es.eta_a == 0.01);
  CHECK(adam.lr0 == 0.01);

  apply_optimizer_defaults(ProblemSpec::preset("kdv"), es, adam, plan);
  CHECK(es.lambda == 30);
  CHECK(es.max_evaluations == 300000);
  CHECK(adam.max_steps == 300000);
  CHECK(plan.t_max == 1000);
}

TEST_CASE("run seeds depend on every coordinate") {
  const auto s = run_seed(1, "cell", "label", 0);
  CHECK(run_seed(1, "cell", "label", 0) == s);
  CHECK(run_seed(2, "cell", "label", 0) != s);
  CHECK(run_seed(1, "cell2", "label", 0) != s);
  CHECK(run_seed(1, "cell", "label2", 0) != s);
  CHECK(run_seed(1, "cell", "label", 1) != s);
}

TEST_CASE("record files round-trip bit for bit") {
  TempDir tmp("record");
  ProblemSpec p = ProblemSpec::preset("convdiff");
  p.set_constant("m_interior", 32);
  EsConfig cfg;
  cfg.max_evaluations = 300;
  cfg.test_every_gens = 5;
  const RunRecord rec = xnes_run(p, p.default_network(), cfg, 1234);
  const std::string path = tmp.str() + "/r.json";
  save_record(rec, path);
  const RunRecord back = load_record(path);

  CHECK(back.algorithm == rec.algorithm);
  CHECK(back.problem_id == rec.problem_id);
  CHECK(back.problem_constants == rec.problem_constants);
  CHECK(back.seed == rec.seed);
  CHECK(back.evaluations == rec.evaluations);
  CHECK(back.best_train == rec.best_train);
  CHECK(back.best_test == rec.best_test);
  CHECK(back.best_weights == rec.best_weights);
  CHECK(back.final_mu == rec.final_mu);
  CHECK(back.final_a == rec.final_a);
  CHECK(back.final_log_det_a == rec.final_log_det_a);
  REQUIRE(back.history.size() == rec.history.size());
  for (std::size_t i = 0; i < rec.history.size(); ++i) {
    CHECK(back.history[i].evals == rec.history[i].evals);
    CHECK(back.history[i].best_train == rec.history[i].best_train);
    const bool both_nan = std::isnan(back.history[i].test) &&
                          std::isnan(rec.history[i].test);
    CHECK((both_nan || back.history[i].test == rec.history[i].test));
  }
}

TEST_CASE("experiment configs parse presets plus overrides") {
  TempDir tmp("config");
  const std::string cfg_path = tmp.str() + "/exp.json";
  std::ofstream(cfg_path) << kTinyConfig;
  const ExperimentConfig cfg = load_experiment(cfg_path);
  CHECK(cfg.master_seed == 2718);
  REQUIRE(cfg.cells.size() == 1);
  const ExperimentCell& cell = cfg.cells[0];
  CHECK(cell.problem.cd_v == 3.0);
  CHECK(cell.problem.m_interior == 32);
  CHECK(cell.runs == 3);
  REQUIRE(cell.algos.size() == 2);
  CHECK(cell.algos[0].es.max_evaluations == 240);
  CHECK(cell.algos[0].es.test_every_gens == 4);
  CHECK(cell.algos[0].es.lambda == 20);  // preset survives partial override
  CHECK(cell.algos[1].adam.max_steps == 240);
  CHECK(cell.algos[1].adam.test_every_steps == 120);

  SUBCASE("duplicate labels are rejected") {
    std::string bad(kTinyConfig);
    const auto pos = bad.find("\"grad\"");
    bad.replace(pos, 6, "\"es\"");
    std::ofstream(cfg_path) << bad;
    CHECK_THROWS(load_experiment(cfg_path));
  }
  SUBCASE("unknown override keys are rejected") {
    std::string bad(kTinyConfig);
    const auto pos = bad.find("max_evaluations");
    bad.replace(pos, 15, "max_evaluationz");
    std::ofstream(cfg_path) << bad;
    CHECK_THROWS(load_experiment(cfg_path));
  }
}

TEST_CASE("experiments produce identical outputs for any worker count") {
  TempDir tmp("workers");
  const std::string cfg_path = tmp.str() + "/exp.json";
  std::ofstream(cfg_path) << kTinyConfig;
  const ExperimentConfig cfg = load_experiment(cfg_path);

  const std::string d1 = tmp.str() + "/w1";
  const std::string d3 = tmp.str() + "/w3";
  run_experiment(cfg, d1, 1);
  run_experiment(cfg, d3, 3);

  const char* files[] = {"convergence_tiny_transport.csv",
                         "final_losses_tiny_transport.csv",
                         "mixing_tiny_transport.csv",
                         "tests_tiny_transport.csv",
                         "convergence_tiny_transport.svg",
                         "manifest.json"};
  for (const char* f : files) {
    CAPTURE(f);
    REQUIRE(fs::exists(fs::path(d1) / f));
    CHECK(slurp(fs::path(d1) / f) == slurp(fs::path(d3) / f));
  }

  // record files: identical except the wall-clock field
  for (const auto& entry : fs::directory_iterator(fs::path(d1) / "records")) {
    const auto name = entry.path().filename();
    const RunRecord a = load_record(entry.path().string());
    const RunRecord b = load_record((fs::path(d3) / "records" / name).string());
    CHECK(a.best_train == b.best_train);
    CHECK(a.best_weights == b.best_weights);
    CHECK(a.seed == b.seed);
  }
}

TEST_CASE("summaries re-derive byte-identically from saved records") {
  TempDir tmp("export");
  const std::string cfg_path = tmp.str() + "/exp.json";
  std::ofstream(cfg_path) << kTinyConfig;
  run_experiment(load_experiment(cfg_path), tmp.str() + "/out", 1);

  const fs::path out = tmp.str() + "/out";
  const std::string conv = slurp(out / "convergence_tiny_transport.csv");
  const std::string finals = slurp(out / "final_losses_tiny_transport.csv");
  fs::remove(out / "convergence_tiny_transport.csv");
  fs::remove(out / "final_losses_tiny_transport.csv");

  const std::string out2 = tmp.str() + "/rederived";
  export_outputs(out.string(), out2, true, true);
  CHECK(slurp(fs::path(out2) / "convergence_tiny_transport.csv") == conv);
  CHECK(slurp(fs::path(out2) / "final_losses_tiny_transport.csv") == finals);
  CHECK(fs::exists(fs::path(out2) / "convergence_tiny_transport.svg"));

  // the final-loss table carries one row per (label, run)
  int lines = 0;
  for (char ch : finals)
    if (ch == '\n') ++lines;
  CHECK(lines == 1 + 2 * 3);
}

TEST_CASE("worker environment variable parsing") {
  // only observable default here: absent variable means one worker
  CHECK(env_workers() >= 1);
}
