#include "pinnev/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>
#include <thread>

#include "json_util.hpp"
#include "pinnev/stats.hpp"

namespace fs = std::filesystem;

namespace pinnev {

using nlohmann::json;
using detail::fmt17;
using detail::parse17;

void apply_optimizer_defaults(const ProblemSpec& p, EsConfig& es,
                              AdamConfig& adam, TransferPlan& plan) {
  es = EsConfig{};
  adam = AdamConfig{};
  plan = TransferPlan{};
  switch (p.kind) {
    case ProblemKind::ConvDiff:
    case ProblemKind::Projectile:
      es.lambda = 20;
      es.eta_a = 0.05;
      plan.eta_alpha = 0.05;
      plan.t_max = 500;
      es.max_evaluations = 200000;
      adam.lr0 = 0.05;
      adam.max_steps = 200000;
      break;
    case ProblemKind::LinearBurgers:
    case ProblemKind::Burgers:
      es.lambda = 20;
      es.eta_a = 0.01;
      plan.eta_alpha = 0.01;
      plan.t_max = 500;
      es.max_evaluations = 200000;
      adam.lr0 = 0.01;
      adam.max_steps = 200000;
      break;
    case ProblemKind::KdV:
      es.lambda = 30;
      es.eta_a = 0.01;
      plan.eta_alpha = 0.01;
      plan.t_max = 1000;
      es.max_evaluations = 300000;
      adam.lr0 = 0.01;
      adam.max_steps = 300000;
      break;
  }
}

namespace {

void apply_override(AlgoCell& a, const std::string& key, const json& v) {
  auto num = [&] { return parse17(v, key.c_str()); };
  auto lng = [&] { return static_cast<long>(std::llround(num())); };
  auto itg = [&] { return static_cast<int>(std::llround(num())); };
  if (key == "lambda") a.es.lambda = itg();
  else if (key == "eta_mu") a.es.eta_mu = num();
  else if (key == "eta_a") a.es.eta_a = num();
  else if (key == "mu0") a.es.mu0 = num();
  else if (key == "sigma0") {
    a.es.sigma0 = num();
    a.adam.init_sigma = a.es.sigma0;
  } else if (key == "max_evaluations") {
    a.es.max_evaluations = lng();
    a.adam.max_steps = a.es.max_evaluations;
  } else if (key == "target_loss") {
    a.es.target_loss = num();
    a.adam.target_loss = a.es.target_loss;
  } else if (key == "natural_mu_update") a.es.natural_mu_update = v.get<bool>();
  else if (key == "shared_batch") a.es.shared_batch = v.get<bool>();
  else if (key == "test_every_gens") a.es.test_every_gens = itg();
  else if (key == "lr0") a.adam.lr0 = num();
  else if (key == "beta1") a.adam.beta1 = num();
  else if (key == "beta2") a.adam.beta2 = num();
  else if (key == "eps") a.adam.eps = num();
  else if (key == "max_steps") a.adam.max_steps = lng();
  else if (key == "ema") a.adam.ema = num();
  else if (key == "rel_improve") a.adam.rel_improve = num();
  else if (key == "patience") a.adam.patience = itg();
  else if (key == "lr_min") a.adam.lr_min = num();
  else if (key == "test_every_steps") a.adam.test_every_steps = itg();
  else if (key == "history_every_steps") a.adam.history_every_steps = itg();
  else if (key == "delta_t") a.plan.delta_t = itg();
  else if (key == "t_max") a.plan.t_max = lng();
  else if (key == "radius") a.plan.radius = num();
  else if (key == "eta_alpha") a.plan.eta_alpha = num();
  else if (key == "alpha0") a.plan.alpha0 = num();
  else if (key == "deactivate_below") a.plan.deactivate_below = num();
  else throw std::runtime_error("unknown override '" + key + "'");
}

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s)
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')
               ? c
               : '_';
  return out.empty() ? std::string("x") : out;
}

void write_text_atomic(const std::string& path, const std::string& body) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << body;
    if (!out.flush()) throw std::runtime_error("short write on " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec)
    throw std::runtime_error("cannot move " + tmp +
                             " into place: " + ec.message());
}

}  // namespace

ExperimentConfig load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j = json::parse(in);

  ExperimentConfig cfg;
  if (j.contains("master_seed"))
    cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
  for (const auto& cj : j.at("cells")) {
    ExperimentCell cell;
    cell.name = cj.at("name").get<std::string>();
    const json& pj = cj.at("problem");
    cell.problem = ProblemSpec::preset(pj.at("id").get<std::string>());
    if (pj.contains("constants"))
      for (const auto& [k, v] : pj.at("constants").items())
        cell.problem.set_constant(k, parse17(v, k.c_str()));
    cell.network = cj.contains("network")
                       ? detail::network_from_json(cj.at("network"))
                       : cell.problem.default_network();
    cell.runs = cj.value("runs", 10);
    if (cell.runs < 1) throw std::runtime_error("cell needs runs >= 1");

    std::set<std::string> seen;
    for (const auto& aj : cj.at("algos")) {
      AlgoCell a;
      a.algo = aj.at("algo").get<std::string>();
      if (a.algo != "xnes" && a.algo != "tnes" && a.algo != "adam")
        throw std::runtime_error("unknown algorithm '" + a.algo + "'");
      a.label = aj.value("label", a.algo);
      if (!seen.insert(a.label).second)
        throw std::runtime_error("duplicate label '" + a.label + "' in cell " +
                                 cell.name);
      apply_optimizer_defaults(cell.problem, a.es, a.adam, a.plan);
      if (aj.contains("sources"))
        for (const auto& s : aj.at("sources"))
          a.source_paths.push_back(s.get<std::string>());
      if (aj.contains("overrides"))
        for (const auto& [k, v] : aj.at("overrides").items())
          apply_override(a, k, v);
      cell.algos.push_back(std::move(a));
    }
    if (cell.algos.empty())
      throw std::runtime_error("cell " + cell.name + " has no algorithms");
    cfg.cells.push_back(std::move(cell));
  }
  return cfg;
}

std::uint64_t run_seed(std::uint64_t master_seed, const std::string& cell,
                       const std::string& label, int run_idx) {
  return fold_key(master_seed, hash_string(cell), hash_string(label),
                  std::uint64_t(run_idx));
}

void save_record(const RunRecord& rec, const std::string& path) {
  json j;
  j["format_version"] = 1;
  j["algorithm"] = rec.algorithm;
  j["problem"] = {{"id", rec.problem_id}, {"constants", json::object()}};
  for (const auto& [k, v] : rec.problem_constants)
    j["problem"]["constants"][k] = fmt17(v);
  j["network"] = detail::network_to_json(rec.network);
  j["seed"] = rec.seed;
  j["evaluations"] = rec.evaluations;
  j["failed_evaluations"] = rec.failed_evaluations;
  j["wall_seconds"] = rec.wall_seconds;
  json hist = json::array();
  for (const auto& row : rec.history)
    hist.push_back({row.evals, fmt17(row.best_train), fmt17(row.test)});
  j["history"] = std::move(hist);
  json mix = json::array();
  for (const auto& row : rec.mixing_history) {
    json r = json::array();
    for (double x : row) r.push_back(fmt17(x));
    mix.push_back(std::move(r));
  }
  j["mixing_history"] = std::move(mix);
  json bw = json::array();
  for (double x : rec.best_weights) bw.push_back(fmt17(x));
  j["best_weights"] = std::move(bw);
  j["best_train"] = fmt17(rec.best_train);
  j["best_test"] = fmt17(rec.best_test);
  j["has_distribution"] = rec.has_distribution;
  if (rec.has_distribution) {
    json mu = json::array();
    for (double x : rec.final_mu) mu.push_back(fmt17(x));
    j["final_mu"] = std::move(mu);
    json a = json::array();
    for (double x : rec.final_a) a.push_back(fmt17(x));
    j["final_a"] = std::move(a);
    j["final_log_det_a"] = fmt17(rec.final_log_det_a);
  }
  write_text_atomic(path, j.dump(1) + "\n");
}

RunRecord load_record(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j = json::parse(in);
  if (j.at("format_version").get<int>() != 1)
    throw std::runtime_error("unsupported record format in " + path);
  RunRecord rec;
  rec.algorithm = j.at("algorithm").get<std::string>();
  rec.problem_id = j.at("problem").at("id").get<std::string>();
  for (const auto& [k, v] : j.at("problem").at("constants").items())
    rec.problem_constants[k] = parse17(v, k.c_str());
  rec.network = detail::network_from_json(j.at("network"));
  rec.seed = j.at("seed").get<std::uint64_t>();
  rec.evaluations = j.at("evaluations").get<long>();
  rec.failed_evaluations = j.at("failed_evaluations").get<long>();
  rec.wall_seconds = j.at("wall_seconds").get<double>();
  for (const auto& row : j.at("history"))
    rec.history.push_back({row.at(0).get<long>(), parse17(row.at(1), "history"),
                           parse17(row.at(2), "history")});
  for (const auto& row : j.at("mixing_history")) {
    std::vector<double> r;
    for (const auto& x : row) r.push_back(parse17(x, "mixing_history"));
    rec.mixing_history.push_back(std::move(r));
  }
  for (const auto& x : j.at("best_weights"))
    rec.best_weights.push_back(parse17(x, "best_weights"));
  rec.best_train = parse17(j.at("best_train"), "best_train");
  rec.best_test = parse17(j.at("best_test"), "best_test");
  rec.has_distribution = j.at("has_distribution").get<bool>();
  if (rec.has_distribution) {
    for (const auto& x : j.at("final_mu"))
      rec.final_mu.push_back(parse17(x, "final_mu"));
    for (const auto& x : j.at("final_a"))
      rec.final_a.push_back(parse17(x, "final_a"));
    rec.final_log_det_a = parse17(j.at("final_log_det_a"), "final_log_det_a");
  }
  return rec;
}

RunRecord dispatch_run(const ExperimentCell& cell, const AlgoCell& algo,
                       std::uint64_t seed) {
  if (algo.algo == "xnes")
    return xnes_run(cell.problem, cell.network, algo.es, seed);
  if (algo.algo == "adam")
    return adam_run(cell.problem, cell.network, algo.adam, seed);
  if (algo.algo == "tnes") {
    if (algo.source_paths.empty())
      throw std::invalid_argument("tnes needs at least one source prior");
    std::vector<SourcePrior> sources;
    for (const auto& p : algo.source_paths) {
      const PriorDocument doc = load_prior(p);
      sources.push_back(to_source(doc, fs::path(p).stem().string()));
    }
    return tnes_run(cell.problem, cell.network, algo.es, algo.plan, sources,
                    seed);
  }
  throw std::invalid_argument("unknown algorithm '" + algo.algo + "'");
}

int env_workers() {
  const char* s = std::getenv("PINNEV_WORKERS");
  if (!s) return 1;
  char* end = nullptr;
  const long v = std::strtol(s, &end, 10);
  if (end == s || v < 1) return 1;
  return static_cast<int>(std::min(v, 64L));
}

namespace {

struct CellRecords {
  std::string name;
  std::vector<std::string> labels;
  int runs = 0;
  std::vector<std::vector<RunRecord>> by_label;  // [label][run]
};

std::vector<long> budget_grid(const CellRecords& cd) {
  long e_max = 0;
  for (const auto& rl : cd.by_label)
    for (const auto& rec : rl)
      if (!rec.history.empty())
        e_max = std::max(e_max, rec.history.back().evals);
  std::vector<long> grid;
  for (int i = 1; i <= 100; ++i) {
    const long g = std::llround(double(e_max) * i / 100.0);
    if (grid.empty() || g > grid.back()) grid.push_back(g);
  }
  return grid;
}

void write_convergence_csv(const CellRecords& cd, const std::vector<long>& grid,
                           const std::string& path) {
  std::string body = "evaluation";
  for (const auto& l : cd.labels)
    body += "," + l + "_p10," + l + "_median," + l + "_p90";
  body += "\n";
  for (long g : grid) {
    body += std::to_string(g);
    for (std::size_t li = 0; li < cd.labels.size(); ++li) {
      std::vector<double> vals;
      vals.reserve(cd.by_label[li].size());
      for (const auto& rec : cd.by_label[li])
        vals.push_back(rec.best_train_at(g));
      body += "," + fmt17(percentile(vals, 0.1));
      body += "," + fmt17(percentile(vals, 0.5));
      body += "," + fmt17(percentile(vals, 0.9));
    }
    body += "\n";
  }
  write_text_atomic(path, body);
}

void write_final_losses_csv(const CellRecords& cd, const std::string& path) {
  std::string body =
      "label,run,seed,evaluations,failed_evaluations,best_train,best_test\n";
  for (std::size_t li = 0; li < cd.labels.size(); ++li)
    for (std::size_t r = 0; r < cd.by_label[li].size(); ++r) {
      const RunRecord& rec = cd.by_label[li][r];
      body += cd.labels[li] + "," + std::to_string(r) + "," +
              std::to_string(rec.seed) + "," +
              std::to_string(rec.evaluations) + "," +
              std::to_string(rec.failed_evaluations) + "," +
              fmt17(rec.best_train) + "," + fmt17(rec.best_test) + "\n";
    }
  write_text_atomic(path, body);
}

void write_mixing_csv(const CellRecords& cd, const std::string& path) {
  std::size_t max_src = 0;
  for (const auto& rl : cd.by_label)
    for (const auto& rec : rl)
      for (const auto& row : rec.mixing_history)
        if (row.size() > 2) max_src = std::max(max_src, row.size() - 2);
  std::string body = "label,run,generation,alpha_target";
  for (std::size_t s = 1; s <= max_src; ++s)
    body += ",alpha_src" + std::to_string(s);
  body += "\n";
  for (std::size_t li = 0; li < cd.labels.size(); ++li)
    for (std::size_t r = 0; r < cd.by_label[li].size(); ++r)
      for (const auto& row : cd.by_label[li][r].mixing_history) {
        body += cd.labels[li] + "," + std::to_string(r) + "," +
                std::to_string(static_cast<long>(row[0])) + "," +
                fmt17(row[1]);
        for (std::size_t s = 0; s < max_src; ++s)
          body += "," + (2 + s < row.size() ? fmt17(row[2 + s]) : std::string());
        body += "\n";
      }
  write_text_atomic(path, body);
}

void write_tests_csv(const CellRecords& cd, const std::string& path) {
  std::string body =
      "test,metric,label_a,label_b,statistic,p_value,p_a_less,p_a_greater,"
      "exact\n";
  const std::pair<const char*, double RunRecord::*> metrics[] = {
      {"best_train", &RunRecord::best_train},
      {"best_test", &RunRecord::best_test}};
  for (const auto& [mname, member] : metrics) {
    std::vector<std::vector<double>> v(cd.labels.size());
    for (std::size_t li = 0; li < cd.labels.size(); ++li)
      for (const auto& rec : cd.by_label[li]) v[li].push_back(rec.*member);
    for (std::size_t i = 0; i < cd.labels.size(); ++i)
      for (std::size_t j = i + 1; j < cd.labels.size(); ++j) {
        const MannWhitneyResult mw = mann_whitney(v[i], v[j]);
        body += std::string("mann_whitney,") + mname + "," + cd.labels[i] +
                "," + cd.labels[j] + "," + fmt17(mw.u_a) + "," +
                fmt17(mw.p_two_sided) + "," + fmt17(mw.p_a_less) + "," +
                fmt17(mw.p_a_greater) + "," + (mw.exact ? "1" : "0") + "\n";
      }
    if (cd.labels.size() >= 2) {
      bool uniform = true;
      for (const auto& col : v)
        if (col.size() != v[0].size()) uniform = false;
      if (uniform && !v[0].empty()) {
        std::vector<std::vector<double>> blocks(
            v[0].size(), std::vector<double>(cd.labels.size()));
        for (std::size_t r = 0; r < v[0].size(); ++r)
          for (std::size_t li = 0; li < cd.labels.size(); ++li)
            blocks[r][li] = v[li][r];
        const FriedmanResult fr = friedman(blocks);
        body += std::string("friedman,") + mname + ",all,," +
                fmt17(fr.statistic) + "," + fmt17(fr.p_value) + ",,,\n";
      }
    }
  }
  write_text_atomic(path, body);
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};

std::string svg_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

void write_convergence_svg(const CellRecords& cd, const std::vector<long>& grid,
                           const std::string& path) {
  // median best-so-far training loss per label, log10 vertical axis
  std::vector<std::vector<double>> med(cd.labels.size());
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t li = 0; li < cd.labels.size(); ++li) {
    med[li].resize(grid.size());
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
      std::vector<double> vals;
      for (const auto& rec : cd.by_label[li])
        vals.push_back(rec.best_train_at(grid[gi]));
      const double m = percentile(vals, 0.5);
      med[li][gi] = m;
      if (std::isfinite(m) && m > 0.0) {
        lo = std::min(lo, std::log10(m));
        hi = std::max(hi, std::log10(m));
      }
    }
  }
  const double w = 720, h = 440, ml = 70, mr = 170, mt = 30, mb = 50;
  const double pw = w - ml - mr, ph = h - mt - mb;
  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + svg_num(w) +
       "\" height=\"" + svg_num(h) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + svg_num(ml) + "\" y=\"18\" font-family=\"sans-serif\" "
       "font-size=\"14\">" + cd.name + ": median training loss</text>\n";
  if (!std::isfinite(lo) || grid.empty()) {
    s += "<text x=\"" + svg_num(w / 2) + "\" y=\"" + svg_num(h / 2) +
         "\" font-family=\"sans-serif\" font-size=\"13\">no finite data"
         "</text>\n</svg>\n";
    write_text_atomic(path, s);
    return;
  }
  double ylo = std::floor(lo), yhi = std::ceil(hi);
  if (yhi <= ylo) yhi = ylo + 1.0;
  const double e_max = double(grid.back());
  auto px = [&](double e) { return ml + e / e_max * pw; };
  auto py = [&](double lg) { return mt + (yhi - lg) / (yhi - ylo) * ph; };

  s += "<g stroke=\"#444\" stroke-width=\"1\">\n";
  s += "<line x1=\"" + svg_num(ml) + "\" y1=\"" + svg_num(mt + ph) +
       "\" x2=\"" + svg_num(ml + pw) + "\" y2=\"" + svg_num(mt + ph) + "\"/>\n";
  s += "<line x1=\"" + svg_num(ml) + "\" y1=\"" + svg_num(mt) + "\" x2=\"" +
       svg_num(ml) + "\" y2=\"" + svg_num(mt + ph) + "\"/>\n";
  s += "</g>\n";
  for (int i = 0; i <= 2; ++i) {
    const double e = e_max * i / 2.0;
    s += "<text x=\"" + svg_num(px(e)) + "\" y=\"" + svg_num(mt + ph + 18) +
         "\" font-family=\"sans-serif\" font-size=\"11\" "
         "text-anchor=\"middle\">" + svg_num(e) + "</text>\n";
  }
  s += "<text x=\"" + svg_num(ml + pw / 2) + "\" y=\"" + svg_num(h - 12) +
       "\" font-family=\"sans-serif\" font-size=\"12\" "
       "text-anchor=\"middle\">evaluations</text>\n";
  const int step = std::max(1, int(std::ceil((yhi - ylo) / 6.0)));
  for (int yv = int(ylo); yv <= int(yhi); yv += step) {
    s += "<line x1=\"" + svg_num(ml - 4) + "\" y1=\"" + svg_num(py(yv)) +
         "\" x2=\"" + svg_num(ml) + "\" y2=\"" + svg_num(py(yv)) +
         "\" stroke=\"#444\"/>\n";
    s += "<text x=\"" + svg_num(ml - 8) + "\" y=\"" + svg_num(py(yv) + 4) +
         "\" font-family=\"sans-serif\" font-size=\"11\" "
         "text-anchor=\"end\">1e" + std::to_string(yv) + "</text>\n";
  }
  for (std::size_t li = 0; li < cd.labels.size(); ++li) {
    const char* color = kPalette[li % 8];
    std::string pts;
    auto flush = [&] {
      if (!pts.empty())
        s += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
             "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
      pts.clear();
    };
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
      const double m = med[li][gi];
      if (!std::isfinite(m) || m <= 0.0) {
        flush();
        continue;
      }
      pts += svg_num(px(double(grid[gi]))) + "," +
             svg_num(py(std::log10(m))) + " ";
    }
    flush();
    const double ly = mt + 16.0 * double(li) + 8.0;
    s += "<line x1=\"" + svg_num(ml + pw + 12) + "\" y1=\"" + svg_num(ly) +
         "\" x2=\"" + svg_num(ml + pw + 34) + "\" y2=\"" + svg_num(ly) +
         "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + svg_num(ml + pw + 40) + "\" y=\"" + svg_num(ly + 4) +
         "\" font-family=\"sans-serif\" font-size=\"11\">" + cd.labels[li] +
         "</text>\n";
  }
  s += "</svg>\n";
  write_text_atomic(path, s);
}

}  // namespace

void export_outputs(const std::string& runs_dir, const std::string& out_dir,
                    bool csv, bool svg) {
  std::ifstream in(runs_dir + "/manifest.json");
  if (!in)
    throw std::runtime_error("no manifest.json under " + runs_dir);
  json manifest = json::parse(in);
  fs::create_directories(out_dir);

  for (const auto& cj : manifest.at("cells")) {
    CellRecords cd;
    cd.name = cj.at("name").get<std::string>();
    cd.runs = cj.at("runs").get<int>();
    for (const auto& l : cj.at("labels"))
      cd.labels.push_back(l.get<std::string>());
    cd.by_label.assign(cd.labels.size(), {});
    for (auto& rl : cd.by_label) rl.resize(cd.runs);
    for (const auto& ej : cj.at("entries")) {
      const std::string label = ej.at("label").get<std::string>();
      const int run = ej.at("run").get<int>();
      const auto it = std::find(cd.labels.begin(), cd.labels.end(), label);
      if (it == cd.labels.end() || run < 0 || run >= cd.runs)
        throw std::runtime_error("manifest entry out of range in " + cd.name);
      cd.by_label[std::size_t(it - cd.labels.begin())][run] =
          load_record(runs_dir + "/" + ej.at("file").get<std::string>());
    }
    const std::vector<long> grid = budget_grid(cd);
    const std::string base = out_dir + "/";
    const std::string tag = sanitize(cd.name);
    if (csv) {
      write_convergence_csv(cd, grid, base + "convergence_" + tag + ".csv");
      write_final_losses_csv(cd, base + "final_losses_" + tag + ".csv");
      write_mixing_csv(cd, base + "mixing_" + tag + ".csv");
      write_tests_csv(cd, base + "tests_" + tag + ".csv");
    }
    if (svg)
      write_convergence_svg(cd, grid, base + "convergence_" + tag + ".svg");
  }
}

void run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                    int workers) {
  if (workers <= 0) workers = env_workers();
  fs::create_directories(out_dir + "/records");

  struct Job {
    int cell, algo, run;
  };
  std::vector<Job> jobs;
  std::set<std::string> tags;
  for (int c = 0; c < static_cast<int>(cfg.cells.size()); ++c) {
    const auto& cell = cfg.cells[c];
    if (!tags.insert(sanitize(cell.name)).second)
      throw std::runtime_error("cell names collide after sanitizing: " +
                               cell.name);
    std::set<std::string> ltags;
    for (int a = 0; a < static_cast<int>(cell.algos.size()); ++a) {
      if (!ltags.insert(sanitize(cell.algos[a].label)).second)
        throw std::runtime_error("labels collide after sanitizing in cell " +
                                 cell.name);
      for (int r = 0; r < cell.runs; ++r) jobs.push_back({c, a, r});
    }
  }

  std::vector<RunRecord> results(jobs.size());
  std::vector<std::string> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      const Job& jb = jobs[i];
      const auto& cell = cfg.cells[jb.cell];
      const auto& algo = cell.algos[jb.algo];
      try {
        results[i] = dispatch_run(
            cell, algo, run_seed(cfg.master_seed, cell.name, algo.label,
                                 jb.run));
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  if (workers <= 1 || jobs.size() <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    const int n = std::min<int>(workers, static_cast<int>(jobs.size()));
    pool.reserve(n);
    for (int i = 0; i < n; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (std::size_t i = 0; i < jobs.size(); ++i)
    if (!errors[i].empty())
      throw std::runtime_error(
          "run failed (" + cfg.cells[jobs[i].cell].name + "/" +
          cfg.cells[jobs[i].cell].algos[jobs[i].algo].label + " run " +
          std::to_string(jobs[i].run) + "): " + errors[i]);

  json manifest;
  manifest["format_version"] = 1;
  manifest["cells"] = json::array();
  for (int c = 0; c < static_cast<int>(cfg.cells.size()); ++c) {
    const auto& cell = cfg.cells[c];
    json cj;
    cj["name"] = cell.name;
    cj["runs"] = cell.runs;
    cj["labels"] = json::array();
    for (const auto& a : cell.algos) cj["labels"].push_back(a.label);
    cj["entries"] = json::array();
    manifest["cells"].push_back(std::move(cj));
  }
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const Job& jb = jobs[i];
    const auto& cell = cfg.cells[jb.cell];
    const auto& algo = cell.algos[jb.algo];
    const std::string file = "records/" + sanitize(cell.name) + "__" +
                             sanitize(algo.label) + "__run" +
                             std::to_string(jb.run) + ".json";
    save_record(results[i], out_dir + "/" + file);
    manifest["cells"][jb.cell]["entries"].push_back(
        {{"label", algo.label}, {"run", jb.run}, {"file", file}});
  }
  write_text_atomic(out_dir + "/manifest.json", manifest.dump(1) + "\n");
  export_outputs(out_dir, out_dir, true, true);
}

}  // namespace pinnev
