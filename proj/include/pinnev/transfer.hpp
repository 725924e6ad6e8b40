#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "pinnev/xnes.hpp"

namespace pinnev {

struct SourcePrior {
  std::string label;
  SearchDistribution dist;
};

struct TransferPlan {
  int delta_t = 2;     // transfer-mode generations fire on multiples of this
  long t_max = 500;    // last transfer-eligible generation
  double radius = 3.4641016151377544;  // sqrt(12)
  double eta_alpha = 0.05;
  double alpha0 = -1.0;  // initial coefficient per source; < 0 = equal split
  double deactivate_below = 1e-3;
};

// Mixing coefficients over {target} + sources. Deactivation is absorbing:
// once a source drops below the threshold its coefficient stays exactly 0.
struct MixtureState {
  double alpha_target = 1.0;
  std::vector<double> alpha_source;
  std::vector<bool> active;

  bool any_active() const {
    for (bool a : active)
      if (a) return true;
    return false;
  }
};

MixtureState init_mixture(int n_sources, double alpha0);

// Pull-back of a source-drawn candidate into the target trust region:
// w~ = mu + diff * min(1, radius / ||A^-1 diff||).
Eigen::VectorXd project_offspring(const Eigen::VectorXd& w,
                                  const Eigen::VectorXd& mu,
                                  const Eigen::PartialPivLU<Eigen::MatrixXd>& a_lu,
                                  double radius);

double gaussian_log_density(const Eigen::VectorXd& mu,
                            const Eigen::PartialPivLU<Eigen::MatrixXd>& a_lu,
                            double log_det_a, const Eigen::VectorXd& w);

// One mixing-coefficient step. log_density(k, c): log density of offspring k
// under component c (0 = target, 1 + s = source s); utilities are aligned
// with offspring index. Steps along the fitness-shaped mixture gradient,
// clamps at zero, renormalizes, then applies absorbing deactivation.
void update_mixing(MixtureState& mix, const Eigen::MatrixXd& log_density,
                   const std::vector<double>& utilities, double eta_alpha,
                   double deactivate_below);

RunRecord tnes_run(const ProblemSpec& problem, const NetworkSpec& net,
                   const EsConfig& cfg, const TransferPlan& plan,
                   const std::vector<SourcePrior>& sources, std::uint64_t seed);

}  // namespace pinnev
