#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "pinnev/problems.hpp"
#include "pinnev/rng.hpp"
#include "pinnev/run_record.hpp"

namespace pinnev {

// Search distribution N(mu, A A^T) in exponential parametrization; the
// log-determinant of A is tracked incrementally alongside the updates.
struct SearchDistribution {
  Eigen::VectorXd mu;
  Eigen::MatrixXd a_mat;
  double log_det_a = 0.0;
  int dim() const { return static_cast<int>(mu.size()); }
};

SearchDistribution init_distribution(int d, double mu0, double sigma0);

// Rank-based utilities: u_k = max(0, ln(lambda/2 + 1) - ln k), normalized to
// sum 1. Depends on ranks only.
std::vector<double> es_utilities(int lambda);

struct Offspring {
  Eigen::VectorXd z;  // natural coordinates used in the update
  Eigen::VectorXd w;  // evaluated candidate
  double fitness = 0.0;
  bool failed = false;
  int origin = -1;  // -1: target distribution, >= 0: source index
};

void sample_offspring(const SearchDistribution& sd, int lambda, Rng& rng,
                      std::vector<Offspring>& out);

// One natural-gradient step from offspring ranked best-first. natural_mu
// maps the mean gradient through A (default); otherwise the additive form
// mu += eta_mu * G_delta is used.
void xnes_step(SearchDistribution& sd,
               const std::vector<const Eigen::VectorXd*>& ranked_z,
               const std::vector<double>& utilities, double eta_mu,
               double eta_a, bool natural_mu);

struct EsConfig {
  int lambda = 20;
  double eta_mu = 1.0;
  double eta_a = 0.05;
  double mu0 = 0.0;
  double sigma0 = 0.05;
  long max_evaluations = 200000;
  double target_loss = 1e-9;
  bool natural_mu_update = true;
  bool shared_batch = false;  // one batch per generation instead of per offspring
  int test_every_gens = 50;
};

RunRecord xnes_run(const ProblemSpec& problem, const NetworkSpec& net,
                   const EsConfig& cfg, std::uint64_t seed);

}  // namespace pinnev
