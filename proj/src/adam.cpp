#include "pinnev/adam.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "pinnev/rng.hpp"

namespace pinnev {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}  // namespace

void adam_step(AdamState& st, std::vector<double>& w,
               const std::vector<double>& grad, double lr,
               const AdamConfig& cfg) {
  const std::size_t d = w.size();
  if (st.m1.size() != d) {
    st.m1.assign(d, 0.0);
    st.m2.assign(d, 0.0);
    st.t = 0;
  }
  ++st.t;
  const double bc1 = 1.0 - std::pow(cfg.beta1, double(st.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, double(st.t));
  for (std::size_t i = 0; i < d; ++i) {
    st.m1[i] = cfg.beta1 * st.m1[i] + (1.0 - cfg.beta1) * grad[i];
    st.m2[i] = cfg.beta2 * st.m2[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
    w[i] -= lr * (st.m1[i] / bc1) / (std::sqrt(st.m2[i] / bc2) + cfg.eps);
  }
}

double PlateauSchedule::observe(double loss_value, const AdamConfig& cfg) {
  if (!primed) {
    smoothed = loss_value;
    best = loss_value;
    stale = 0;
    primed = true;
    return lr;
  }
  smoothed = cfg.ema * smoothed + (1.0 - cfg.ema) * loss_value;
  if (smoothed < best * (1.0 - cfg.rel_improve)) {
    best = smoothed;
    stale = 0;
  } else if (++stale >= cfg.patience) {
    lr = std::max(lr * 0.5, cfg.lr_min);
    stale = 0;
  }
  return lr;
}

RunRecord adam_run(const ProblemSpec& problem, const NetworkSpec& net,
                   const AdamConfig& cfg, std::uint64_t seed) {
  const auto t_start = std::chrono::steady_clock::now();
  const kernels::NetPlan kplan = kernels::compile(net);
  const int d = kplan.n_params;

  const std::uint64_t run_key = fold_key(seed, streams::kRun);
  std::vector<double> w(d);
  {
    Rng irng(fold_key(run_key, streams::kInit));
    for (double& x : w) x = cfg.init_sigma * irng.normal();
  }

  RunRecord rec;
  rec.algorithm = "adam";
  rec.problem_id = problem.id();
  rec.problem_constants = problem.constants();
  rec.network = net;
  rec.seed = seed;

  AdamState st;
  PlateauSchedule sched;
  sched.lr = cfg.lr0;
  EvalScratch scratch;
  std::vector<double> grad(d);

  double best_train = kInf;
  double last_test = kNaN;
  long steps_done = 0;
  long last_measured_step = -1;

  auto measure = [&](long step) {
    const LossBreakdown tl = test_loss(problem, kplan, w.data(), scratch);
    last_test = tl.total;
    last_measured_step = step;
    if (tl.finite && tl.total < rec.best_test) {
      rec.best_test = tl.total;
      rec.best_weights = w;
    }
  };

  for (long step = 1; step <= cfg.max_steps; ++step) {
    Rng brng(fold_key(run_key, streams::kBatch, std::uint64_t(step)));
    const CollocationBatch batch = sample_batch(problem, brng);
    const LossBreakdown lb =
        loss_grad(problem, kplan, w.data(), batch, scratch, grad);
    bool ok = lb.finite;
    if (ok)
      for (double g : grad)
        if (!std::isfinite(g)) {
          ok = false;
          break;
        }
    if (!ok) {
      ++rec.failed_evaluations;
    } else {
      if (lb.total < best_train) best_train = lb.total;
      const double lr = sched.observe(lb.total, cfg);
      adam_step(st, w, grad, lr, cfg);
    }
    steps_done = step;

    if (step % cfg.test_every_steps == 0) measure(step);
    if (step % cfg.history_every_steps == 0 || step == cfg.max_steps)
      rec.history.push_back(
          {step, best_train, last_measured_step == step ? last_test : kNaN});
    if (rec.best_test <= cfg.target_loss) break;
  }

  if (last_measured_step != steps_done) {
    measure(steps_done);
    if (!rec.history.empty() && rec.history.back().evals == steps_done)
      rec.history.back().test = last_test;
    else
      rec.history.push_back({steps_done, best_train, last_test});
  }
  if (rec.best_weights.empty()) rec.best_weights = w;

  rec.best_train = best_train;
  rec.evaluations = steps_done;
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return rec;
}

}  // namespace pinnev
