#include <cmath>

#include <Eigen/LU>

#include "doctest.h"
#include "pinnev/xnes.hpp"

using namespace pinnev;

namespace {

double lu_log_abs_det(const Eigen::MatrixXd& a) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    s += std::log(std::abs(lu.matrixLU()(i, i)));
  return s;
}

}  // namespace

TEST_CASE("rank utilities: log-linear decay, half the population weighted") {
  const auto u4 = es_utilities(4);
  REQUIRE(u4.size() == 4);
  const double raw1 = std::log(3.0), raw2 = std::log(3.0) - std::log(2.0);
  const double norm = raw1 + raw2;
  CHECK(u4[0] == doctest::Approx(raw1 / norm).epsilon(1e-15));
  CHECK(u4[1] == doctest::Approx(raw2 / norm).epsilon(1e-15));
  CHECK(u4[2] == 0.0);
  CHECK(u4[3] == 0.0);
  CHECK(u4[0] == doctest::Approx(0.7304227103091852).epsilon(1e-9));

  const auto u2 = es_utilities(2);
  CHECK(u2[0] == 1.0);
  CHECK(u2[1] == 0.0);

  const auto u20 = es_utilities(20);
  double sum = 0.0;
  for (int k = 0; k < 20; ++k) {
    if (k > 0) CHECK(u20[k] <= u20[k - 1]);
    if (k < 10) CHECK(u20[k] > 0.0);
    else CHECK(u20[k] == 0.0);
    sum += u20[k];
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("fresh distribution is an isotropic ball") {
  const SearchDistribution sd = init_distribution(6, 0.25, 0.05);
  CHECK(sd.dim() == 6);
  for (int i = 0; i < 6; ++i) {
    CHECK(sd.mu[i] == 0.25);
    for (int j = 0; j < 6; ++j)
      CHECK(sd.a_mat(i, j) == (i == j ? 0.05 : 0.0));
  }
  CHECK(sd.log_det_a == doctest::Approx(6.0 * std::log(0.05)).epsilon(1e-15));
}

TEST_CASE("offspring are an affine image of their natural coordinates") {
  SearchDistribution sd = init_distribution(4, 0.0, 0.1);
  sd.mu << 1.0, -2.0, 0.5, 0.0;
  sd.a_mat(2, 0) = 0.03;  // non-diagonal shape
  Rng rng(2020);
  std::vector<Offspring> pop;
  sample_offspring(sd, 6, rng, pop);
  REQUIRE(pop.size() == 6);
  for (const auto& o : pop) {
    const Eigen::VectorXd want = sd.mu + sd.a_mat * o.z;
    for (int i = 0; i < 4; ++i) CHECK(o.w[i] == want[i]);
  }
  // replay
  Rng rng2(2020);
  std::vector<Offspring> pop2;
  sample_offspring(sd, 6, rng2, pop2);
  for (int k = 0; k < 6; ++k)
    for (int i = 0; i < 4; ++i) CHECK(pop[k].z[i] == pop2[k].z[i]);
}

TEST_CASE("single centered offspring shrinks the shape isotropically") {
  const int d = 5;
  SearchDistribution sd = init_distribution(d, 0.0, 0.2);
  const Eigen::MatrixXd a0 = sd.a_mat;
  const double ld0 = sd.log_det_a;
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(d);
  const double eta_a = 0.1;
  xnes_step(sd, {&z}, {1.0}, 1.0, eta_a, true);
  // G_delta = 0, G_M = -I: A <- A exp(-eta_a/2), log det drops by d eta_a / 2
  const double shrink = std::exp(-eta_a / 2.0);
  for (int i = 0; i < d; ++i) {
    CHECK(sd.mu[i] == 0.0);
    for (int j = 0; j < d; ++j)
      CHECK(sd.a_mat(i, j) ==
            doctest::Approx(a0(i, j) * shrink).epsilon(1e-12));
  }
  CHECK(sd.log_det_a ==
        doctest::Approx(ld0 - d * eta_a / 2.0).epsilon(1e-12));
}

TEST_CASE("mean step: natural form maps through the shape") {
  const int d = 3;
  const double eta_mu = 0.5;
  Eigen::VectorXd z = Eigen::VectorXd::Zero(d);
  z[0] = 1.0;

  SearchDistribution nat = init_distribution(d, 0.0, 2.0);
  xnes_step(nat, {&z}, {1.0}, eta_mu, 0.0, true);
  CHECK(nat.mu[0] == doctest::Approx(eta_mu * 2.0).epsilon(1e-14));

  SearchDistribution add = init_distribution(d, 0.0, 2.0);
  xnes_step(add, {&z}, {1.0}, eta_mu, 0.0, false);
  CHECK(add.mu[0] == doctest::Approx(eta_mu).epsilon(1e-14));
}

TEST_CASE("tracked log-determinant stays glued to the matrix") {
  const int d = 8, lambda = 6;
  SearchDistribution sd = init_distribution(d, 0.0, 0.05);
  Rng rng(606);
  const auto util = es_utilities(lambda);
  std::vector<Eigen::VectorXd> zs(lambda, Eigen::VectorXd(d));
  for (int step = 0; step < 300; ++step) {
    std::vector<const Eigen::VectorXd*> ranked;
    for (int k = 0; k < lambda; ++k) {
      for (int i = 0; i < d; ++i) zs[k][i] = rng.normal();
      ranked.push_back(&zs[k]);
    }
    xnes_step(sd, ranked, util, 1.0, 0.05, true);
  }
  CHECK(std::abs(sd.log_det_a - lu_log_abs_det(sd.a_mat)) <= 1e-9);
}

TEST_CASE("short optimization run on the transport problem") {
  ProblemSpec p = ProblemSpec::preset("convdiff");
  p.set_constant("m_interior", 64);
  EsConfig cfg;
  cfg.max_evaluations = 600;
  cfg.test_every_gens = 10;
  const RunRecord rec = xnes_run(p, p.default_network(), cfg, 99);
  CHECK(rec.algorithm == "xnes");
  CHECK(rec.evaluations == 600);
  CHECK(rec.history.size() == 30);  // 600 / lambda(20)
  CHECK(std::isfinite(rec.best_train));
  CHECK(std::isfinite(rec.best_test));
  CHECK(rec.best_weights.size() == 45);
  REQUIRE(rec.has_distribution);
  CHECK(rec.final_mu.size() == 45);
  CHECK(rec.final_a.size() == 45 * 45);
  // best-so-far training loss never increases along the history
  for (std::size_t i = 1; i < rec.history.size(); ++i)
    CHECK(rec.history[i].best_train <= rec.history[i - 1].best_train);
  // same seed replays bitwise, different seed diverges
  const RunRecord rec2 = xnes_run(p, p.default_network(), cfg, 99);
  CHECK(rec2.best_train == rec.best_train);
  CHECK(rec2.final_mu == rec.final_mu);
  const RunRecord rec3 = xnes_run(p, p.default_network(), cfg, 100);
  CHECK(rec3.best_train != rec.best_train);
}

TEST_CASE("shared batch mode evaluates the generation on one draw") {
  ProblemSpec p = ProblemSpec::preset("convdiff");
  p.set_constant("m_interior", 32);
  EsConfig cfg;
  cfg.max_evaluations = 200;
  cfg.shared_batch = true;
  const RunRecord rec = xnes_run(p, p.default_network(), cfg, 4);
  CHECK(rec.evaluations == 200);
  CHECK(std::isfinite(rec.best_train));
}
