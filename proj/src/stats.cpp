#include "pinnev/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace pinnev {

namespace {

// Average ranks (1-based) with ties sharing their midrank.
std::vector<double> midranks(const std::vector<double>& xs) {
  const int n = static_cast<int>(xs.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return xs[a] < xs[b]; });
  std::vector<double> rank(n);
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double r = 0.5 * double(i + j) + 1.0;
    for (int k = i; k <= j; ++k) rank[order[k]] = r;
    i = j + 1;
  }
  return rank;
}

double gamma_q(double a, double x) {  // regularized upper incomplete gamma
  if (!(x > 0.0)) return 1.0;
  if (x < a + 1.0) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int it = 0; it < 1000; ++it) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-16) break;
    }
    const double p = sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    return std::clamp(1.0 - p, 0.0, 1.0);
  }
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int it = 1; it <= 1000; ++it) {
    const double an = -double(it) * (double(it) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return std::clamp(std::exp(-x + a * std::log(x) - std::lgamma(a)) * h, 0.0,
                    1.0);
}

}  // namespace

double chi_squared_sf(double x, int dof) {
  if (dof < 1) throw std::invalid_argument("chi_squared_sf needs dof >= 1");
  return gamma_q(0.5 * dof, 0.5 * x);
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

MannWhitneyResult mann_whitney(const std::vector<double>& a,
                               const std::vector<double>& b) {
  const int n = static_cast<int>(a.size());
  const int m = static_cast<int>(b.size());
  if (n == 0 || m == 0)
    throw std::invalid_argument("mann_whitney needs non-empty samples");
  const int total = n + m;
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::vector<double> rank = midranks(pooled);

  double r_a = 0.0;
  for (int i = 0; i < n; ++i) r_a += rank[i];
  MannWhitneyResult res;
  res.u_a = r_a - 0.5 * double(n) * double(n + 1);
  const double half = 0.5 * double(n) * double(m);
  const double eps = 1e-9;

  if (n <= 8 && m <= 8) {
    res.exact = true;
    long hits_two = 0, hits_less = 0, hits_greater = 0, combos = 0;
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    const double spread_obs = std::abs(res.u_a - half);
    for (;;) {
      double r = 0.0;
      for (int i : idx) r += rank[i];
      const double u = r - 0.5 * double(n) * double(n + 1);
      if (std::abs(u - half) >= spread_obs - eps) ++hits_two;
      if (u <= res.u_a + eps) ++hits_less;
      if (u >= res.u_a - eps) ++hits_greater;
      ++combos;
      int i = n - 1;
      while (i >= 0 && idx[i] == total - n + i) --i;
      if (i < 0) break;
      ++idx[i];
      for (int j = i + 1; j < n; ++j) idx[j] = idx[j - 1] + 1;
    }
    res.p_two_sided = double(hits_two) / double(combos);
    res.p_a_less = double(hits_less) / double(combos);
    res.p_a_greater = double(hits_greater) / double(combos);
    return res;
  }

  double tie_term = 0.0;
  {
    std::vector<double> sorted(pooled);
    std::sort(sorted.begin(), sorted.end());
    int i = 0;
    while (i < total) {
      int j = i;
      while (j + 1 < total && sorted[j + 1] == sorted[i]) ++j;
      const double t = double(j - i + 1);
      tie_term += t * t * t - t;
      i = j + 1;
    }
  }
  const double var =
      double(n) * double(m) / 12.0 *
      (double(total + 1) - tie_term / (double(total) * double(total - 1)));
  if (!(var > 0.0)) {
    res.p_two_sided = res.p_a_less = res.p_a_greater = 1.0;
    return res;
  }
  const double z = (res.u_a - half) / std::sqrt(var);
  res.p_two_sided = std::min(1.0, 2.0 * normal_sf(std::abs(z)));
  res.p_a_less = normal_sf(-z);
  res.p_a_greater = normal_sf(z);
  return res;
}

FriedmanResult friedman(const std::vector<std::vector<double>>& data) {
  const int n = static_cast<int>(data.size());
  if (n == 0) throw std::invalid_argument("friedman needs at least one block");
  const int k = static_cast<int>(data[0].size());
  if (k < 2) throw std::invalid_argument("friedman needs >= 2 treatments");
  for (const auto& row : data)
    if (static_cast<int>(row.size()) != k)
      throw std::invalid_argument("friedman blocks differ in width");

  std::vector<double> r_sum(k, 0.0);
  for (const auto& row : data) {
    const std::vector<double> rank = midranks(row);
    for (int j = 0; j < k; ++j) r_sum[j] += rank[j];
  }
  double sq = 0.0;
  for (double r : r_sum) sq += r * r;
  FriedmanResult res;
  res.statistic =
      std::max(0.0, 12.0 / (double(n) * k * (k + 1)) * sq - 3.0 * n * (k + 1));
  res.dof = k - 1;
  res.p_value = chi_squared_sf(res.statistic, res.dof);
  return res;
}

double percentile(std::vector<double> xs, double q) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(xs.begin(), xs.end());
  q = std::clamp(q, 0.0, 1.0);
  const double h = q * double(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= xs.size()) return xs.back();
  const double frac = h - double(lo);
  return xs[lo] + frac * (xs[lo + 1] - xs[lo]);
}

double median(std::vector<double> xs) { return percentile(std::move(xs), 0.5); }

}  // namespace pinnev
