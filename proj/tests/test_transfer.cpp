#include <cmath>

#include "doctest.h"
#include "pinnev/transfer.hpp"

using namespace pinnev;

namespace {

Eigen::PartialPivLU<Eigen::MatrixXd> lu_of(const Eigen::MatrixXd& a) {
  return Eigen::PartialPivLU<Eigen::MatrixXd>(a);
}

}  // namespace

TEST_CASE("mixture initialization") {
  SUBCASE("equal split over target and sources") {
    const MixtureState m = init_mixture(2, -1.0);
    CHECK(m.alpha_target == doctest::Approx(1.0 / 3).epsilon(1e-15));
    CHECK(m.alpha_source[0] == doctest::Approx(1.0 / 3).epsilon(1e-15));
    CHECK(m.alpha_source[1] == doctest::Approx(1.0 / 3).epsilon(1e-15));
    CHECK(m.active[0]);
    CHECK(m.active[1]);
    CHECK(m.any_active());
  }
  SUBCASE("explicit coefficient") {
    const MixtureState m = init_mixture(2, 0.2);
    CHECK(m.alpha_target == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(m.alpha_source[0] == 0.2);
  }
  SUBCASE("zero coefficient keeps sources inert") {
    const MixtureState m = init_mixture(3, 0.0);
    CHECK(m.alpha_target == 1.0);
    CHECK(!m.any_active());
  }
  SUBCASE("overweight sources are rejected") {
    CHECK_THROWS(init_mixture(3, 0.5));
  }
}

TEST_CASE("trust-region pull-back") {
  SUBCASE("far point lands on the radius, direction preserved") {
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(2);
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(2, 2);
    Eigen::VectorXd w(2);
    w << 8.0, 0.0;
    const double r = std::sqrt(12.0);
    const Eigen::VectorXd p = project_offspring(w, mu, lu_of(a), r);
    CHECK(p[0] == doctest::Approx(r).epsilon(1e-14));
    CHECK(p[1] == 0.0);
  }
  SUBCASE("interior points pass through untouched") {
    Eigen::VectorXd mu(2);
    mu << 1.0, -1.0;
    Eigen::MatrixXd a = 0.5 * Eigen::MatrixXd::Identity(2, 2);
    Eigen::VectorXd w(2);
    w << 1.2, -0.8;
    const Eigen::VectorXd p = project_offspring(w, mu, lu_of(a), 3.0);
    CHECK(p[0] == w[0]);
    CHECK(p[1] == w[1]);
  }
  SUBCASE("idempotent under repeated application") {
    Eigen::VectorXd mu(3);
    mu << 0.2, 0.0, -0.4;
    Eigen::MatrixXd a(3, 3);
    a << 0.4, 0.1, 0.0, 0.0, 0.3, 0.05, 0.0, 0.0, 0.5;
    Eigen::VectorXd w(3);
    w << 9.0, -7.0, 11.0;
    const auto lu = lu_of(a);
    const Eigen::VectorXd p1 = project_offspring(w, mu, lu, 2.0);
    const Eigen::VectorXd p2 = project_offspring(p1, mu, lu, 2.0);
    CHECK((p2 - p1).norm() <= 1e-12);
    CHECK(lu.solve(p1 - mu).norm() == doctest::Approx(2.0).epsilon(1e-12));
    // pulled back along the segment towards the mean
    const Eigen::VectorXd dir0 = (w - mu).normalized();
    const Eigen::VectorXd dir1 = (p1 - mu).normalized();
    CHECK((dir0 - dir1).norm() <= 1e-12);
  }
}

TEST_CASE("gaussian log density at the mode and one sigma out") {
  const int d = 45;
  const double sigma = 0.05;
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd a = sigma * Eigen::MatrixXd::Identity(d, d);
  const double log_det = d * std::log(sigma);
  const auto lu = lu_of(a);
  const double at_mode = gaussian_log_density(mu, lu, log_det, mu);
  CHECK(at_mode == doctest::Approx(93.455718315719321).epsilon(1e-12));
  Eigen::VectorXd w = mu;
  w[3] = sigma;  // one standard deviation along an axis
  CHECK(gaussian_log_density(mu, lu, log_det, w) ==
        doctest::Approx(at_mode - 0.5).epsilon(1e-12));
}

TEST_CASE("mixing update keeps a simplex and rewards the likely component") {
  MixtureState mix = init_mixture(1, -1.0);
  const int lambda = 8;
  const auto util = es_utilities(lambda);
  Eigen::MatrixXd logd(lambda, 2);
  for (int k = 0; k < lambda; ++k) {
    logd(k, 0) = -5.0;  // target explains offspring poorly
    logd(k, 1) = -1.0;  // source explains them well
  }
  const double before = mix.alpha_source[0];
  update_mixing(mix, logd, util, 0.05, 1e-3);
  CHECK(mix.alpha_source[0] > before);
  CHECK(mix.alpha_target + mix.alpha_source[0] ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mix.alpha_target >= 0.0);
}

TEST_CASE("weak sources are deactivated exactly and permanently") {
  MixtureState mix = init_mixture(2, -1.0);
  mix.alpha_target = 0.99798;
  mix.alpha_source[0] = 0.00101;
  mix.alpha_source[1] = 0.00101;
  const int lambda = 4;
  const auto util = es_utilities(lambda);
  Eigen::MatrixXd logd(lambda, 3);
  for (int k = 0; k < lambda; ++k) {
    logd(k, 0) = -1.0;
    logd(k, 1) = -30.0;
    logd(k, 2) = -30.0;
  }
  update_mixing(mix, logd, util, 0.05, 1e-3);
  CHECK(mix.alpha_source[0] == 0.0);
  CHECK(mix.alpha_source[1] == 0.0);
  CHECK(!mix.any_active());
  CHECK(mix.alpha_target == 1.0);

  // absorbing: even a source-favoring update cannot revive them
  Eigen::MatrixXd logd2(lambda, 3);
  for (int k = 0; k < lambda; ++k) {
    logd2(k, 0) = -30.0;
    logd2(k, 1) = -1.0;
    logd2(k, 2) = -1.0;
  }
  update_mixing(mix, logd2, util, 0.05, 1e-3);
  CHECK(mix.alpha_source[0] == 0.0);
  CHECK(mix.alpha_source[1] == 0.0);
  CHECK(mix.alpha_target == 1.0);
}

TEST_CASE("degenerate coefficients recover without non-finite values") {
  // target starts at zero mass but explains the offspring far better
  MixtureState mix = init_mixture(1, 1.0);
  CHECK(mix.alpha_target == 0.0);
  const int lambda = 4;
  const auto util = es_utilities(lambda);
  Eigen::MatrixXd logd(lambda, 2);
  for (int k = 0; k < lambda; ++k) {
    logd(k, 0) = 200.0;
    logd(k, 1) = -200.0;
  }
  update_mixing(mix, logd, util, 0.05, 1e-3);
  CHECK(std::isfinite(mix.alpha_target));
  CHECK(mix.alpha_target >= 0.0);
  CHECK(mix.alpha_target <= 1.0);
  const double tot =
      mix.alpha_target + (mix.active[0] ? mix.alpha_source[0] : 0.0);
  CHECK(tot == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("transfer run with a zeroed mixing coefficient replays the plain run") {
  ProblemSpec p = ProblemSpec::preset("convdiff");
  p.set_constant("m_interior", 48);
  const NetworkSpec net = p.default_network();
  EsConfig cfg;
  cfg.max_evaluations = 800;
  cfg.test_every_gens = 10;

  const RunRecord base = xnes_run(p, net, cfg, 314);

  TransferPlan plan;
  plan.alpha0 = 0.0;
  SourcePrior src;
  src.label = "inert";
  src.dist = init_distribution(param_count(net), 0.3, 0.08);
  const RunRecord twin = tnes_run(p, net, cfg, plan, {src}, 314);

  CHECK(twin.mixing_history.empty());
  CHECK(twin.best_train == base.best_train);
  CHECK(twin.best_test == base.best_test);
  CHECK(twin.best_weights == base.best_weights);
  CHECK(twin.final_mu == base.final_mu);
  CHECK(twin.final_a == base.final_a);
  CHECK(twin.final_log_det_a == base.final_log_det_a);
  REQUIRE(twin.history.size() == base.history.size());
  for (std::size_t i = 0; i < base.history.size(); ++i) {
    CHECK(twin.history[i].evals == base.history[i].evals);
    CHECK(twin.history[i].best_train == base.history[i].best_train);
  }
}

TEST_CASE("active transfer records its mixing trajectory on schedule") {
  ProblemSpec p = ProblemSpec::preset("convdiff");
  p.set_constant("m_interior", 48);
  const NetworkSpec net = p.default_network();
  EsConfig cfg;
  cfg.max_evaluations = 400;  // 20 generations
  TransferPlan plan;
  plan.delta_t = 2;
  SourcePrior src;
  src.label = "s";
  src.dist = init_distribution(param_count(net), 0.0, 0.05);
  const RunRecord rec = tnes_run(p, net, cfg, plan, {src}, 8);
  REQUIRE(!rec.mixing_history.empty());
  for (const auto& row : rec.mixing_history) {
    REQUIRE(row.size() == 3);
    CHECK(static_cast<long>(row[0]) % plan.delta_t == 0);
    CHECK(row[1] >= 0.0);
    CHECK(row[2] >= 0.0);
    CHECK(row[1] + row[2] <= 1.0 + 1e-9);
  }
}

TEST_CASE("source priors must match the search dimension") {
  ProblemSpec p = ProblemSpec::preset("convdiff");
  const NetworkSpec net = p.default_network();
  EsConfig cfg;
  cfg.max_evaluations = 40;
  TransferPlan plan;
  SourcePrior bad;
  bad.label = "wrong-size";
  bad.dist = init_distribution(7, 0.0, 0.05);
  CHECK_THROWS_AS(tnes_run(p, net, cfg, plan, {bad}, 1), std::invalid_argument);
}
