#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "pinnev/network.hpp"

namespace pinnev {

// Everything a finished optimization run leaves behind. Histories use NaN in
// the test column for generations where no test evaluation was scheduled.
struct RunRecord {
  std::string algorithm;
  std::string problem_id;
  std::map<std::string, double> problem_constants;
  NetworkSpec network;
  std::uint64_t seed = 0;

  long evaluations = 0;
  long failed_evaluations = 0;
  double wall_seconds = 0.0;

  struct Row {
    long evals = 0;
    double best_train = std::numeric_limits<double>::infinity();
    double test = std::numeric_limits<double>::quiet_NaN();
  };
  std::vector<Row> history;

  // One row per mixing update: generation, alpha_target, alpha per source.
  std::vector<std::vector<double>> mixing_history;

  std::vector<double> best_weights;
  double best_test = std::numeric_limits<double>::infinity();
  double best_train = std::numeric_limits<double>::infinity();

  bool has_distribution = false;
  std::vector<double> final_mu;
  std::vector<double> final_a;  // row-major d x d
  double final_log_det_a = 0.0;

  // Best-so-far training loss at an evaluation budget (step interpolation).
  double best_train_at(long evals_limit) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& row : history) {
      if (row.evals > evals_limit) break;
      best = row.best_train;
    }
    return best;
  }
};

}  // namespace pinnev
