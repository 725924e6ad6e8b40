#pragma once

#include <cstdint>
#include <vector>

#include "pinnev/problems.hpp"
#include "pinnev/run_record.hpp"

namespace pinnev {

struct AdamConfig {
  double lr0 = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double init_sigma = 0.05;
  long max_steps = 200000;
  double target_loss = 1e-9;

  // step-size halving on smoothed-loss plateaus
  double ema = 0.99;
  double rel_improve = 1e-3;
  int patience = 500;
  double lr_min = 1e-6;

  int test_every_steps = 1000;
  int history_every_steps = 50;
};

struct AdamState {
  std::vector<double> m1, m2;
  long t = 0;
};

void adam_step(AdamState& st, std::vector<double>& w,
               const std::vector<double>& grad, double lr,
               const AdamConfig& cfg);

// Halves the learning rate (not below lr_min) when the EMA-smoothed loss has
// not improved the tracked best by a relative margin for `patience`
// consecutive observations.
struct PlateauSchedule {
  double lr = 0.0;
  double smoothed = 0.0;
  double best = 0.0;
  int stale = 0;
  bool primed = false;

  explicit PlateauSchedule(double lr0 = 0.05) : lr(lr0) {}
  double observe(double loss_value, const AdamConfig& cfg);
};

RunRecord adam_run(const ProblemSpec& problem, const NetworkSpec& net,
                   const AdamConfig& cfg, std::uint64_t seed);

}  // namespace pinnev
