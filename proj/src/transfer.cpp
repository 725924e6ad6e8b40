#include "pinnev/transfer.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace pinnev {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
}  // namespace

MixtureState init_mixture(int n_sources, double alpha0) {
  MixtureState m;
  const double a = alpha0 < 0.0 ? 1.0 / (n_sources + 1) : alpha0;
  m.alpha_source.assign(n_sources, a);
  m.active.assign(n_sources, a > 0.0);
  double used = 0.0;
  for (double x : m.alpha_source) used += x;
  if (used > 1.0 + 1e-12)
    throw std::invalid_argument("source mixing coefficients exceed 1");
  m.alpha_target = std::max(0.0, 1.0 - used);
  return m;
}

Eigen::VectorXd project_offspring(
    const Eigen::VectorXd& w, const Eigen::VectorXd& mu,
    const Eigen::PartialPivLU<Eigen::MatrixXd>& a_lu, double radius) {
  const Eigen::VectorXd diff = w - mu;
  const double dist = a_lu.solve(diff).norm();
  if (!(dist > radius)) return w;
  return mu + diff * (radius / dist);
}

double gaussian_log_density(const Eigen::VectorXd& mu,
                            const Eigen::PartialPivLU<Eigen::MatrixXd>& a_lu,
                            double log_det_a, const Eigen::VectorXd& w) {
  const double q = a_lu.solve(w - mu).squaredNorm();
  return -0.5 * double(mu.size()) * kLog2Pi - log_det_a - 0.5 * q;
}

void update_mixing(MixtureState& mix, const Eigen::MatrixXd& log_density,
                   const std::vector<double>& utilities, double eta_alpha,
                   double deactivate_below) {
  const int lambda = static_cast<int>(log_density.rows());
  const int n_src = static_cast<int>(mix.alpha_source.size());
  assert(log_density.cols() == 1 + n_src &&
         static_cast<int>(utilities.size()) == lambda);

  auto coeff = [&](int c) {
    return c == 0 ? mix.alpha_target : mix.alpha_source[c - 1];
  };
  auto comp_active = [&](int c) { return c == 0 || mix.active[c - 1]; };

  std::vector<double> grad(1 + n_src, 0.0);
  for (int k = 0; k < lambda; ++k) {
    if (utilities[k] == 0.0) continue;
    double peak = -kInf;
    for (int c = 0; c <= n_src; ++c) {
      if (!comp_active(c) || coeff(c) <= 0.0) continue;
      peak = std::max(peak, std::log(coeff(c)) + log_density(k, c));
    }
    double acc = 0.0;
    for (int c = 0; c <= n_src; ++c) {
      if (!comp_active(c) || coeff(c) <= 0.0) continue;
      acc += std::exp(std::log(coeff(c)) + log_density(k, c) - peak);
    }
    const double log_mix = peak + std::log(acc);
    for (int c = 0; c <= n_src; ++c) {
      if (!comp_active(c)) continue;
      const double e = std::min(log_density(k, c) - log_mix, 700.0);
      grad[c] += utilities[k] * std::exp(e);
    }
  }

  auto reset_target_only = [&] {
    mix.alpha_target = 1.0;
    std::fill(mix.alpha_source.begin(), mix.alpha_source.end(), 0.0);
    std::fill(mix.active.begin(), mix.active.end(), false);
  };

  mix.alpha_target = std::max(0.0, mix.alpha_target + eta_alpha * grad[0]);
  for (int s = 0; s < n_src; ++s)
    if (mix.active[s])
      mix.alpha_source[s] =
          std::max(0.0, mix.alpha_source[s] + eta_alpha * grad[1 + s]);

  auto renormalize = [&]() -> bool {
    double tot = mix.alpha_target;
    for (int s = 0; s < n_src; ++s)
      if (mix.active[s]) tot += mix.alpha_source[s];
    if (!(tot > 0.0) || !std::isfinite(tot)) return false;
    mix.alpha_target /= tot;
    for (int s = 0; s < n_src; ++s)
      if (mix.active[s]) mix.alpha_source[s] /= tot;
    return true;
  };

  if (!renormalize()) {
    reset_target_only();
    return;
  }
  bool dropped = false;
  for (int s = 0; s < n_src; ++s) {
    if (mix.active[s] && mix.alpha_source[s] < deactivate_below) {
      mix.alpha_source[s] = 0.0;
      mix.active[s] = false;
      dropped = true;
    }
  }
  if (dropped && !renormalize()) reset_target_only();
}

namespace {

struct SourceCtx {
  Eigen::VectorXd mu;
  Eigen::MatrixXd a;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  double log_det = 0.0;
};

RunRecord es_engine(const ProblemSpec& problem, const NetworkSpec& net,
                    const EsConfig& cfg, const TransferPlan* plan,
                    const std::vector<SourcePrior>& sources,
                    std::uint64_t seed, const char* algo) {
  const auto t_start = std::chrono::steady_clock::now();
  const kernels::NetPlan kplan = kernels::compile(net);
  const int d = kplan.n_params;
  const int lambda = cfg.lambda;
  if (lambda < 1) throw std::invalid_argument("population must be >= 1");
  if (net.input_dim() != problem.input_dim() ||
      net.output_dim() != problem.output_dim())
    throw std::invalid_argument("network does not fit problem signature");

  std::vector<SourceCtx> src;
  src.reserve(sources.size());
  for (const auto& s : sources) {
    if (s.dist.dim() != d)
      throw std::invalid_argument("source prior dimension mismatch: " +
                                  s.label);
    SourceCtx c;
    c.mu = s.dist.mu;
    c.a = s.dist.a_mat;
    c.lu.compute(c.a);
    c.log_det = s.dist.log_det_a;
    src.push_back(std::move(c));
  }

  const std::uint64_t run_key = fold_key(seed, streams::kRun);
  SearchDistribution sd = init_distribution(d, cfg.mu0, cfg.sigma0);
  MixtureState mix;
  if (plan) mix = init_mixture(static_cast<int>(src.size()), plan->alpha0);

  RunRecord rec;
  rec.algorithm = algo;
  rec.problem_id = problem.id();
  rec.problem_constants = problem.constants();
  rec.network = net;
  rec.seed = seed;

  const std::vector<double> util = es_utilities(lambda);
  EvalScratch scratch;
  std::vector<Offspring> pop(lambda);
  for (auto& o : pop) {
    o.z.resize(d);
    o.w.resize(d);
  }
  std::vector<double> wbuf(d);
  std::vector<int> order(lambda);
  std::vector<const Eigen::VectorXd*> ranked(lambda);

  long evals = 0;
  long gen = 0;
  long last_measured_gen = -1;
  double best_train = kInf;
  double last_test = kNaN;
  Eigen::VectorXd gen_best_w = Eigen::VectorXd::Zero(d);

  auto measure = [&](const Eigen::VectorXd& cand) {
    Eigen::VectorXd::Map(wbuf.data(), d) = cand;
    const LossBreakdown tl = test_loss(problem, kplan, wbuf.data(), scratch);
    last_test = tl.total;
    if (tl.finite && tl.total < rec.best_test) {
      rec.best_test = tl.total;
      rec.best_weights = wbuf;
    }
  };

  while (evals < cfg.max_evaluations) {
    const bool transfer_active = plan && mix.any_active() &&
                                 (gen % plan->delta_t == 0) &&
                                 (gen <= plan->t_max);

    Eigen::PartialPivLU<Eigen::MatrixXd> lu_target;
    if (transfer_active) lu_target.compute(sd.a_mat);

    Rng srng(fold_key(run_key, streams::kSampling, std::uint64_t(gen)));
    for (int k = 0; k < lambda; ++k) {
      Offspring& o = pop[k];
      for (int i = 0; i < d; ++i) o.z[i] = srng.normal();
      o.origin = -1;
      if (transfer_active) {
        const double uu = srng.uniform01();
        double cum = mix.alpha_target;
        if (uu >= cum) {
          for (int s = 0; s < static_cast<int>(src.size()); ++s) {
            if (!mix.active[s]) continue;
            cum += mix.alpha_source[s];
            o.origin = s;
            if (uu < cum) break;
          }
          if (o.origin < 0) o.origin = -1;  // no active source holds mass
        }
      }
      if (o.origin < 0)
        o.w.noalias() = sd.mu + sd.a_mat * o.z;
      else
        o.w.noalias() = src[o.origin].mu + src[o.origin].a * o.z;
    }

    CollocationBatch batch;
    for (int k = 0; k < lambda; ++k) {
      if (k == 0 || !cfg.shared_batch) {
        Rng brng(fold_key(run_key, streams::kBatch, std::uint64_t(gen),
                          cfg.shared_batch ? 0ull : std::uint64_t(k)));
        batch = sample_batch(problem, brng);
      }
      Eigen::VectorXd::Map(wbuf.data(), d) = pop[k].w;
      const LossBreakdown lb = loss(problem, kplan, wbuf.data(), batch, scratch);
      pop[k].failed = !lb.finite;
      pop[k].fitness = lb.finite ? -lb.total : -kInf;
      if (!lb.finite)
        ++rec.failed_evaluations;
      else if (lb.total < best_train)
        best_train = lb.total;
    }
    evals += lambda;

    // Densities are taken at the distribution the generation was sampled
    // from, and at the original (pre-projection) candidates.
    Eigen::MatrixXd logd;
    if (transfer_active) {
      logd.resize(lambda, 1 + static_cast<int>(src.size()));
      for (int k = 0; k < lambda; ++k) {
        logd(k, 0) =
            gaussian_log_density(sd.mu, lu_target, sd.log_det_a, pop[k].w);
        for (int s = 0; s < static_cast<int>(src.size()); ++s)
          logd(k, 1 + s) =
              mix.active[s] ? gaussian_log_density(src[s].mu, src[s].lu,
                                                   src[s].log_det, pop[k].w)
                            : 0.0;
      }
      for (Offspring& o : pop) {
        if (o.origin < 0) continue;
        const Eigen::VectorXd wt =
            project_offspring(o.w, sd.mu, lu_target, plan->radius);
        o.z = lu_target.solve(wt - sd.mu);
      }
    }

    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      if (pop[a].failed != pop[b].failed) return pop[b].failed;
      return pop[a].fitness > pop[b].fitness;
    });
    gen_best_w = pop[order[0]].w;

    for (int r = 0; r < lambda; ++r) ranked[r] = &pop[order[r]].z;
    xnes_step(sd, ranked, util, cfg.eta_mu, cfg.eta_a, cfg.natural_mu_update);

    if (transfer_active) {
      std::vector<double> u_by_off(lambda);
      for (int r = 0; r < lambda; ++r) u_by_off[order[r]] = util[r];
      update_mixing(mix, logd, u_by_off, plan->eta_alpha,
                    plan->deactivate_below);
      std::vector<double> row;
      row.reserve(2 + mix.alpha_source.size());
      row.push_back(double(gen));
      row.push_back(mix.alpha_target);
      for (double a : mix.alpha_source) row.push_back(a);
      rec.mixing_history.push_back(std::move(row));
    }

    if (gen % cfg.test_every_gens == 0) {
      measure(gen_best_w);
      last_measured_gen = gen;
    }
    rec.history.push_back(
        {evals, best_train, last_measured_gen == gen ? last_test : kNaN});

    ++gen;
    if (rec.best_test <= cfg.target_loss) break;
  }

  if (gen > 0 && last_measured_gen != gen - 1) {
    measure(gen_best_w);
    if (!rec.history.empty()) rec.history.back().test = last_test;
  }
  if (rec.best_weights.empty() && gen > 0) {
    rec.best_weights.resize(d);
    Eigen::VectorXd::Map(rec.best_weights.data(), d) = gen_best_w;
  }

  rec.best_train = best_train;
  rec.evaluations = evals;
  rec.has_distribution = true;
  rec.final_mu.assign(sd.mu.data(), sd.mu.data() + d);
  rec.final_a.resize(std::size_t(d) * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      rec.final_a[std::size_t(i) * d + j] = sd.a_mat(i, j);
  rec.final_log_det_a = sd.log_det_a;
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return rec;
}

}  // namespace

RunRecord xnes_run(const ProblemSpec& problem, const NetworkSpec& net,
                   const EsConfig& cfg, std::uint64_t seed) {
  return es_engine(problem, net, cfg, nullptr, {}, seed, "xnes");
}

RunRecord tnes_run(const ProblemSpec& problem, const NetworkSpec& net,
                   const EsConfig& cfg, const TransferPlan& plan,
                   const std::vector<SourcePrior>& sources,
                   std::uint64_t seed) {
  return es_engine(problem, net, cfg, &plan, sources, seed, "tnes");
}

}  // namespace pinnev
