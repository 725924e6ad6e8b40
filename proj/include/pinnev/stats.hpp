#pragma once

#include <vector>

namespace pinnev {

struct MannWhitneyResult {
  double u_a = 0.0;          // rank-sum statistic for sample A
  double p_two_sided = 1.0;
  double p_a_less = 1.0;     // H1: A stochastically smaller than B
  double p_a_greater = 1.0;  // H1: A stochastically larger than B
  bool exact = false;        // exact enumeration vs normal approximation
};

// Two-sample rank test. Exact null enumeration when both samples have at
// most 8 observations, tie-corrected normal approximation otherwise.
MannWhitneyResult mann_whitney(const std::vector<double>& a,
                               const std::vector<double>& b);

struct FriedmanResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

// data[block][treatment]; every block must rank the same k treatments.
FriedmanResult friedman(const std::vector<std::vector<double>>& data);

// Upper tail of the chi-squared distribution (regularized incomplete gamma).
double chi_squared_sf(double x, int dof);

// Upper tail of the standard normal distribution.
double normal_sf(double z);

// Linear-interpolation percentile of an unsorted sample, q in [0, 1].
double percentile(std::vector<double> xs, double q);
double median(std::vector<double> xs);

}  // namespace pinnev
