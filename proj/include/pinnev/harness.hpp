#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pinnev/adam.hpp"
#include "pinnev/priors.hpp"
#include "pinnev/transfer.hpp"

namespace pinnev {

struct AlgoCell {
  std::string algo;  // "xnes" | "tnes" | "adam"
  std::string label;
  EsConfig es;
  AdamConfig adam;
  TransferPlan plan;
  std::vector<std::string> source_paths;  // priors consumed by tnes
};

struct ExperimentCell {
  std::string name;
  ProblemSpec problem;
  NetworkSpec network;
  int runs = 10;
  std::vector<AlgoCell> algos;
};

struct ExperimentConfig {
  std::uint64_t master_seed = 1;
  std::vector<ExperimentCell> cells;
};

// Benchmark-tuned optimizer settings per problem family: population size,
// step sizes, transfer cadence and budgets.
void apply_optimizer_defaults(const ProblemSpec& p, EsConfig& es,
                              AdamConfig& adam, TransferPlan& plan);

ExperimentConfig load_experiment(const std::string& path);

// Run seeds depend only on (master seed, cell name, label, run index), so a
// single run can be reproduced without executing the rest of the experiment.
std::uint64_t run_seed(std::uint64_t master_seed, const std::string& cell,
                       const std::string& label, int run_idx);

void save_record(const RunRecord& rec, const std::string& path);
RunRecord load_record(const std::string& path);

RunRecord dispatch_run(const ExperimentCell& cell, const AlgoCell& algo,
                       std::uint64_t seed);

// Executes every (cell, label, run) job, writes one record JSON per run under
// out_dir/records plus a manifest, then derives the summary tables. Worker
// count > 1 fans jobs out across threads; every output except the recorded
// wall times is identical for any worker count.
void run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                    int workers);

// Rebuilds convergence / final-loss / mixing / significance tables (and
// optionally SVG plots) from the record files under runs_dir.
void export_outputs(const std::string& runs_dir, const std::string& out_dir,
                    bool csv, bool svg);

// PINNEV_WORKERS, clamped to [1, 64]; 1 when unset or unparsable.
int env_workers();

}  // namespace pinnev
