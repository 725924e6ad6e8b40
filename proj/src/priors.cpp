#include "pinnev/priors.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <Eigen/LU>
#include "json_util.hpp"
#include "pinnev/rng.hpp"

namespace pinnev {

using nlohmann::json;
using detail::fmt17;
using detail::parse17;

PriorDocument prior_from_record(const RunRecord& rec) {
  if (!rec.has_distribution)
    throw std::invalid_argument("run record carries no search distribution");
  PriorDocument doc;
  doc.problem_id = rec.problem_id;
  doc.constants = rec.problem_constants;
  doc.network = rec.network;
  doc.seed = rec.seed;
  doc.final_training_loss = rec.best_train;
  doc.final_test_loss = rec.best_test;
  const int d = static_cast<int>(rec.final_mu.size());
  doc.mu = Eigen::Map<const Eigen::VectorXd>(rec.final_mu.data(), d);
  doc.a_mat.resize(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      doc.a_mat(i, j) = rec.final_a[std::size_t(i) * d + j];
  doc.log_det_a = rec.final_log_det_a;
  return doc;
}

SourcePrior to_source(const PriorDocument& doc, std::string label) {
  SourcePrior s;
  s.label = std::move(label);
  s.dist.mu = doc.mu;
  s.dist.a_mat = doc.a_mat;
  s.dist.log_det_a = doc.log_det_a;
  return s;
}

std::string prior_filename(const PriorDocument& doc) {
  std::string blob;
  for (const auto& [k, v] : doc.constants) blob += k + "=" + fmt17(v) + ";";
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(hash_string(blob)));
  return doc.problem_id + "__" + hex + "__seed" + std::to_string(doc.seed) +
         ".prior.json";
}

void save_prior(const PriorDocument& doc, const std::string& path) {
  json j;
  j["format_version"] = 1;
  j["problem"] = {{"id", doc.problem_id}, {"constants", json::object()}};
  for (const auto& [k, v] : doc.constants)
    j["problem"]["constants"][k] = fmt17(v);
  j["network"] = detail::network_to_json(doc.network);
  j["d"] = doc.mu.size();
  j["seed"] = doc.seed;
  j["final_training_loss"] = fmt17(doc.final_training_loss);
  j["final_test_loss"] = fmt17(doc.final_test_loss);
  j["log_det_a"] = fmt17(doc.log_det_a);
  json mu = json::array();
  for (Eigen::Index i = 0; i < doc.mu.size(); ++i)
    mu.push_back(fmt17(doc.mu[i]));
  j["mu"] = std::move(mu);
  json a = json::array();
  for (Eigen::Index i = 0; i < doc.a_mat.rows(); ++i)
    for (Eigen::Index c = 0; c < doc.a_mat.cols(); ++c)
      a.push_back(fmt17(doc.a_mat(i, c)));
  j["a_mat"] = std::move(a);

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << j.dump(1) << "\n";
    if (!out.flush()) throw std::runtime_error("short write on " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec)
    throw std::runtime_error("cannot move " + tmp +
                             " into place: " + ec.message());
}

PriorDocument load_prior(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j = json::parse(in);
  if (j.at("format_version").get<int>() != 1)
    throw std::runtime_error("unsupported prior format in " + path);

  PriorDocument doc;
  doc.problem_id = j.at("problem").at("id").get<std::string>();
  for (const auto& [k, v] : j.at("problem").at("constants").items())
    doc.constants[k] = parse17(v, k.c_str());
  doc.network = detail::network_from_json(j.at("network"));
  doc.seed = j.at("seed").get<std::uint64_t>();
  doc.final_training_loss =
      parse17(j.at("final_training_loss"), "final_training_loss");
  doc.final_test_loss = parse17(j.at("final_test_loss"), "final_test_loss");
  doc.log_det_a = parse17(j.at("log_det_a"), "log_det_a");

  const int d = j.at("d").get<int>();
  if (d != param_count(doc.network))
    throw std::runtime_error("prior dimension does not match its network: " +
                             path);
  const json& mu = j.at("mu");
  const json& a = j.at("a_mat");
  if (static_cast<int>(mu.size()) != d || static_cast<int>(a.size()) != d * d)
    throw std::runtime_error("prior array sizes do not match d: " + path);
  doc.mu.resize(d);
  for (int i = 0; i < d; ++i) {
    doc.mu[i] = parse17(mu[i], "mu");
    if (!std::isfinite(doc.mu[i]))
      throw std::runtime_error("non-finite mu entry in " + path);
  }
  doc.a_mat.resize(d, d);
  for (int i = 0; i < d; ++i)
    for (int c = 0; c < d; ++c) {
      const double v = parse17(a[std::size_t(i) * d + c], "a_mat");
      if (!std::isfinite(v))
        throw std::runtime_error("non-finite a_mat entry in " + path);
      doc.a_mat(i, c) = v;
    }
  if (!std::isfinite(doc.log_det_a))
    throw std::runtime_error("non-finite log_det_a in " + path);

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(doc.a_mat);
  double check = 0.0;
  const auto& lum = lu.matrixLU();
  for (int i = 0; i < d; ++i) check += std::log(std::abs(lum(i, i)));
  if (!std::isfinite(check))
    throw std::runtime_error("singular a_mat in " + path);
  return doc;
}

std::vector<PriorListing> list_priors(const std::string& dir) {
  std::vector<PriorListing> out;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (!entry.is_regular_file()) continue;
    const std::string p = entry.path().string();
    const std::string suffix = ".prior.json";
    if (p.size() < suffix.size() ||
        p.compare(p.size() - suffix.size(), suffix.size(), suffix) != 0)
      continue;
    try {
      const PriorDocument doc = load_prior(p);
      out.push_back({p, doc.problem_id, doc.seed, doc.final_test_loss,
                     static_cast<int>(doc.mu.size())});
    } catch (const std::exception&) {
      // unreadable or invalid: not listed
    }
  }
  std::sort(out.begin(), out.end(),
            [](const PriorListing& a, const PriorListing& b) {
              if (a.problem_id != b.problem_id)
                return a.problem_id < b.problem_id;
              if (a.final_test_loss != b.final_test_loss)
                return a.final_test_loss < b.final_test_loss;
              return a.path < b.path;
            });
  return out;
}

}  // namespace pinnev
