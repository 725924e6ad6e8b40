#include "pinnev/xnes.hpp"

#include <cassert>
#include <cmath>

namespace pinnev {

SearchDistribution init_distribution(int d, double mu0, double sigma0) {
  SearchDistribution sd;
  sd.mu = Eigen::VectorXd::Constant(d, mu0);
  sd.a_mat = sigma0 * Eigen::MatrixXd::Identity(d, d);
  sd.log_det_a = d * std::log(sigma0);
  return sd;
}

std::vector<double> es_utilities(int lambda) {
  std::vector<double> u(lambda);
  const double top = std::log(lambda / 2.0 + 1.0);
  double sum = 0.0;
  for (int k = 0; k < lambda; ++k) {
    u[k] = std::max(0.0, top - std::log(double(k + 1)));
    sum += u[k];
  }
  for (double& x : u) x /= sum;
  return u;
}

void sample_offspring(const SearchDistribution& sd, int lambda, Rng& rng,
                      std::vector<Offspring>& out) {
  const int d = sd.dim();
  out.resize(lambda);
  for (int k = 0; k < lambda; ++k) {
    Offspring& o = out[k];
    o.z.resize(d);
    for (int i = 0; i < d; ++i) o.z[i] = rng.normal();
    o.w = sd.mu + sd.a_mat * o.z;
    o.origin = -1;
    o.fitness = 0.0;
    o.failed = false;
  }
}

void xnes_step(SearchDistribution& sd,
               const std::vector<const Eigen::VectorXd*>& ranked_z,
               const std::vector<double>& utilities, double eta_mu,
               double eta_a, bool natural_mu) {
  const int d = sd.dim();
  const int lambda = static_cast<int>(ranked_z.size());
  assert(static_cast<int>(utilities.size()) == lambda);

  Eigen::VectorXd g_delta = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd g_m = Eigen::MatrixXd::Zero(d, d);
  double u_sum = 0.0;
  for (int k = 0; k < lambda; ++k) {
    const Eigen::VectorXd& z = *ranked_z[k];
    g_delta.noalias() += utilities[k] * z;
    g_m.noalias() += utilities[k] * (z * z.transpose());
    u_sum += utilities[k];
  }
  g_m.diagonal().array() -= u_sum;

  if (natural_mu)
    sd.mu.noalias() += eta_mu * (sd.a_mat * g_delta);
  else
    sd.mu.noalias() += eta_mu * g_delta;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * eta_a * g_m);
  const Eigen::MatrixXd exp_m =
      es.eigenvectors() *
      es.eigenvalues().array().exp().matrix().asDiagonal() *
      es.eigenvectors().transpose();
  sd.a_mat = sd.a_mat * exp_m;
  sd.log_det_a += 0.5 * eta_a * g_m.trace();
}

}  // namespace pinnev
