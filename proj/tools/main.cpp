#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pinnev/harness.hpp"

namespace fs = std::filesystem;
using namespace pinnev;

namespace {

ProblemSpec build_problem(const std::string& id,
                          const std::vector<std::string>& consts) {
  ProblemSpec p = ProblemSpec::preset(id);
  for (const auto& kv : consts) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("expected name=value, got '" + kv + "'");
    p.set_constant(kv.substr(0, eq), std::stod(kv.substr(eq + 1)));
  }
  return p;
}

void select_kernel(const std::string& name) {
  if (name.empty()) return;
  if (!kernels::set_active_kernel(name)) {
    std::string have;
    for (const auto& k : kernels::available_kernels())
      have += (have.empty() ? "" : ", ") + k;
    throw std::runtime_error("kernel '" + name +
                             "' is not available (have: " + have + ")");
  }
}

int run_solve(const std::string& problem_id, std::vector<std::string> consts,
              const std::string& algo, std::vector<std::string> sources,
              std::uint64_t seed, const std::string& out_dir,
              const std::string& kernel, bool save_prior_too,
              long max_evals, int pop, double eta_mu, double eta_a,
              double eta_alpha, double sigma0, double lr, double target,
              int m_interior, int m_icbc, int delta_t, long t_max,
              double alpha0, double radius) {
  select_kernel(kernel);
  ProblemSpec problem = build_problem(problem_id, consts);
  if (m_interior > 0) problem.set_constant("m_interior", m_interior);
  if (m_icbc > 0) problem.set_constant("m_icbc", m_icbc);
  const NetworkSpec net = problem.default_network();

  EsConfig es;
  AdamConfig adam;
  TransferPlan plan;
  apply_optimizer_defaults(problem, es, adam, plan);
  if (max_evals > 0) {
    es.max_evaluations = max_evals;
    adam.max_steps = max_evals;
  }
  if (pop > 0) es.lambda = pop;
  if (eta_mu >= 0) es.eta_mu = eta_mu;
  if (eta_a >= 0) es.eta_a = eta_a;
  if (eta_alpha >= 0) plan.eta_alpha = eta_alpha;
  if (sigma0 > 0) {
    es.sigma0 = sigma0;
    adam.init_sigma = sigma0;
  }
  if (lr > 0) adam.lr0 = lr;
  if (target >= 0) {
    es.target_loss = target;
    adam.target_loss = target;
  }
  if (delta_t > 0) plan.delta_t = delta_t;
  if (t_max >= 0) plan.t_max = t_max;
  if (alpha0 > -1.5) plan.alpha0 = alpha0;
  if (radius > 0) plan.radius = radius;

  RunRecord rec;
  if (algo == "xnes") {
    rec = xnes_run(problem, net, es, seed);
  } else if (algo == "adam") {
    rec = adam_run(problem, net, adam, seed);
  } else if (algo == "tnes") {
    if (sources.empty())
      throw std::runtime_error("tnes needs at least one --source prior");
    std::vector<SourcePrior> sp;
    for (const auto& s : sources)
      sp.push_back(to_source(load_prior(s), fs::path(s).stem().string()));
    rec = tnes_run(problem, net, es, plan, sp, seed);
  } else {
    throw std::runtime_error("unknown algorithm '" + algo + "'");
  }

  fs::create_directories(out_dir);
  const std::string rec_path = out_dir + "/" + problem.id() + "_" + algo +
                               "_seed" + std::to_string(seed) + ".json";
  save_record(rec, rec_path);
  std::printf("problem        %s\n", rec.problem_id.c_str());
  std::printf("algorithm      %s\n", rec.algorithm.c_str());
  std::printf("kernel         %s\n", kernels::active_kernel().name);
  std::printf("evaluations    %ld (%ld failed)\n", rec.evaluations,
              rec.failed_evaluations);
  std::printf("best train     %.6g\n", rec.best_train);
  std::printf("best test      %.6g\n", rec.best_test);
  std::printf("wall seconds   %.2f\n", rec.wall_seconds);
  std::printf("record         %s\n", rec_path.c_str());
  if (save_prior_too) {
    if (!rec.has_distribution)
      throw std::runtime_error("adam runs leave no distribution to save");
    const PriorDocument doc = prior_from_record(rec);
    const std::string prior_path = out_dir + "/" + prior_filename(doc);
    save_prior(doc, prior_path);
    std::printf("prior          %s\n", prior_path.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "trains small physics-informed networks with evolution strategies "
      "(with optional transfer from saved priors) or a gradient baseline"};
  app.require_subcommand(1);

  // --- solve ---------------------------------------------------------------
  auto* solve = app.add_subcommand("solve", "run one optimization");
  std::string problem_id, algo = "xnes", out_dir = "runs", kernel;
  std::vector<std::string> consts, sources;
  std::uint64_t seed = 1;
  bool save_prior_too = false;
  long max_evals = -1, t_max = -1;
  int pop = -1, m_interior = -1, m_icbc = -1, delta_t = -1;
  double eta_mu = -1, eta_a = -1, eta_alpha = -1, sigma0 = -1, lr = -1,
         target = -1, alpha0 = -2, radius = -1;
  solve->add_option("--problem", problem_id,
                    "convdiff | projectile | linburgers | burgers | kdv")
      ->required();
  solve->add_option("--const", consts, "override a problem constant, name=value");
  solve->add_option("--algo", algo, "xnes | tnes | adam");
  solve->add_option("--source", sources, "source prior file (tnes)");
  solve->add_option("--seed", seed, "run seed");
  solve->add_option("--out", out_dir, "output directory");
  solve->add_option("--kernel", kernel, "force evaluation kernel (scalar | avx2)");
  solve->add_flag("--save-prior", save_prior_too,
                  "also save the final search distribution");
  solve->add_option("--max-evals", max_evals, "evaluation budget");
  solve->add_option("--pop", pop, "population size");
  solve->add_option("--eta-mu", eta_mu, "mean step size");
  solve->add_option("--eta-a", eta_a, "shape step size");
  solve->add_option("--eta-alpha", eta_alpha, "mixing step size");
  solve->add_option("--sigma0", sigma0, "initial search spread");
  solve->add_option("--lr", lr, "adam initial learning rate");
  solve->add_option("--target-loss", target, "early-stop test loss");
  solve->add_option("--m-interior", m_interior, "collocation points");
  solve->add_option("--m-icbc", m_icbc, "constraint points (PDE problems)");
  solve->add_option("--delta-t", delta_t, "transfer cadence in generations");
  solve->add_option("--t-max", t_max, "last transfer-eligible generation");
  solve->add_option("--alpha0", alpha0, "initial source coefficient");
  solve->add_option("--radius", radius, "pull-back trust radius");

  // --- compare ---------------------------------------------------------
  auto* compare = app.add_subcommand(
      "compare", "run a multi-algorithm experiment from a config file");
  std::string cmp_config, cmp_out = "runs";
  int cmp_workers = 0;
  compare->add_option("--config", cmp_config, "experiment JSON")->required();
  compare->add_option("--out", cmp_out, "output directory");
  compare->add_option("--workers", cmp_workers,
                      "worker threads (default: PINNEV_WORKERS or 1)");

  // --- priors ----------------------------------------------------------
  auto* priors = app.add_subcommand("priors", "manage saved distributions");
  priors->require_subcommand(1);
  auto* plist = priors->add_subcommand("list", "list priors in a directory");
  std::string pdir = ".";
  plist->add_option("--dir", pdir, "directory to scan");
  auto* pinspect = priors->add_subcommand("inspect", "describe one prior");
  std::string pfile;
  pinspect->add_option("--file", pfile, "prior file")->required();
  auto* pseed =
      priors->add_subcommand("seed-from-run", "turn a run record into a prior");
  std::string prec, pout = ".";
  pseed->add_option("--record", prec, "run record JSON")->required();
  pseed->add_option("--out", pout, "output directory");

  // --- export ----------------------------------------------------------
  auto* exp = app.add_subcommand(
      "export", "re-derive summary tables and plots from saved records");
  std::string exp_runs, exp_out;
  std::vector<std::string> exp_formats;
  exp->add_option("--runs", exp_runs, "experiment output directory")->required();
  exp->add_option("--out", exp_out, "destination (default: same directory)");
  exp->add_option("--format", exp_formats, "csv and/or svg (default both)")
      ->check(CLI::IsMember({"csv", "svg"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve)
      return run_solve(problem_id, consts, algo, sources, seed, out_dir,
                       kernel, save_prior_too, max_evals, pop, eta_mu, eta_a,
                       eta_alpha, sigma0, lr, target, m_interior, m_icbc,
                       delta_t, t_max, alpha0, radius);
    if (*compare) {
      const ExperimentConfig cfg = load_experiment(cmp_config);
      run_experiment(cfg, cmp_out, cmp_workers);
      std::printf("experiment written to %s\n", cmp_out.c_str());
      return 0;
    }
    if (*plist) {
      const auto listing = list_priors(pdir);
      if (listing.empty()) {
        std::printf("no priors under %s\n", pdir.c_str());
        return 0;
      }
      std::printf("%-12s %4s %10s %12s  %s\n", "problem", "d", "seed",
                  "test loss", "file");
      for (const auto& l : listing)
        std::printf("%-12s %4d %10" PRIu64 " %12.4g  %s\n",
                    l.problem_id.c_str(), l.dim, l.seed, l.final_test_loss,
                    l.path.c_str());
      return 0;
    }
    if (*pinspect) {
      const PriorDocument doc = load_prior(pfile);
      std::printf("problem        %s\n", doc.problem_id.c_str());
      for (const auto& [k, v] : doc.constants)
        std::printf("  %-12s %.6g\n", k.c_str(), v);
      std::printf("network        %s\n", describe(doc.network).c_str());
      std::printf("dimension      %d\n", int(doc.mu.size()));
      std::printf("seed           %" PRIu64 "\n", doc.seed);
      std::printf("train loss     %.6g\n", doc.final_training_loss);
      std::printf("test loss      %.6g\n", doc.final_test_loss);
      std::printf("log|det A|     %.6g\n", doc.log_det_a);
      return 0;
    }
    if (*pseed) {
      const RunRecord rec = load_record(prec);
      const PriorDocument doc = prior_from_record(rec);
      fs::create_directories(pout);
      const std::string path = pout + "/" + prior_filename(doc);
      save_prior(doc, path);
      std::printf("prior          %s\n", path.c_str());
      return 0;
    }
    if (*exp) {
      const bool want_csv = exp_formats.empty() ||
                            std::count(exp_formats.begin(), exp_formats.end(),
                                       "csv") > 0;
      const bool want_svg = exp_formats.empty() ||
                            std::count(exp_formats.begin(), exp_formats.end(),
                                       "svg") > 0;
      export_outputs(exp_runs, exp_out.empty() ? exp_runs : exp_out, want_csv,
                     want_svg);
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
