#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "pinnev/run_record.hpp"
#include "pinnev/transfer.hpp"

namespace pinnev {

// A saved search distribution, reusable as a source mixture component.
// Numeric fields are serialized as 17-significant-digit decimal strings so
// a save/load round trip reproduces every double bit-for-bit.
struct PriorDocument {
  std::string problem_id;
  std::map<std::string, double> constants;
  NetworkSpec network;
  std::uint64_t seed = 0;
  double final_training_loss = std::numeric_limits<double>::quiet_NaN();
  double final_test_loss = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd mu;
  Eigen::MatrixXd a_mat;
  double log_det_a = 0.0;
};

PriorDocument prior_from_record(const RunRecord& rec);
SourcePrior to_source(const PriorDocument& doc, std::string label);

std::string prior_filename(const PriorDocument& doc);
void save_prior(const PriorDocument& doc, const std::string& path);
PriorDocument load_prior(const std::string& path);

struct PriorListing {
  std::string path;
  std::string problem_id;
  std::uint64_t seed = 0;
  double final_test_loss = std::numeric_limits<double>::quiet_NaN();
  int dim = 0;
};

// Scans a directory for *.prior.json, skipping files that fail validation.
std::vector<PriorListing> list_priors(const std::string& dir);

}  // namespace pinnev
