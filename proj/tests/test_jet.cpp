#include <cmath>

#include "doctest.h"
#include "pinnev/jet.hpp"
#include "pinnev/rng.hpp"

using namespace pinnev;

namespace {

// Composite test function with tunable coefficients, evaluated two ways: the
// plain scalar formula below is the oracle, the jet build mirrors it.
struct Coeffs {
  double a0, b0, c0, a1, c1, c2, a2, c3, c4;
};

double scalar_g(const Coeffs& c, double x) {
  return c.c0 * std::tanh(c.a0 * x + c.b0) +
         c.c1 * std::exp(c.c2 * std::sin(c.a1 * x)) +
         c.c3 / (2.5 + std::cos(c.a2 * x)) + c.c4 * x * x * x;
}

Jet jet_g(const Coeffs& c, double x) {
  const Jet xs = jet_seed(x);
  const Jet t1 = jet_scale(jet_tanh(jet_shift(jet_scale(xs, c.a0), c.b0)), c.c0);
  const Jet t2 = jet_scale(jet_exp(jet_scale(jet_sin(jet_scale(xs, c.a1)), c.c2)), c.c1);
  const Jet t3 = jet_scale(jet_recip(jet_shift(jet_cos(jet_scale(xs, c.a2)), 2.5)), c.c3);
  const Jet t4 = jet_scale(jet_mul(xs, jet_mul(xs, xs)), c.c4);
  return jet_add(jet_add(t1, t2), jet_add(t3, t4));
}

double fd1(const Coeffs& c, double x, double h) {
  return (scalar_g(c, x + h) - scalar_g(c, x - h)) / (2.0 * h);
}
double fd2(const Coeffs& c, double x, double h) {
  return (scalar_g(c, x + h) - 2.0 * scalar_g(c, x) + scalar_g(c, x - h)) /
         (h * h);
}
double fd3(const Coeffs& c, double x, double h) {
  return (-scalar_g(c, x - 2.0 * h) + 2.0 * scalar_g(c, x - h) -
          2.0 * scalar_g(c, x + h) + scalar_g(c, x + 2.0 * h)) /
         (2.0 * h * h * h);
}

double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

}  // namespace

TEST_CASE("known jets of elementary functions at zero") {
  const Jet t = jet_tanh(jet_seed(0.0));
  CHECK(t.v0 == 0.0);
  CHECK(t.v1 == 1.0);
  CHECK(t.v2 == 0.0);
  CHECK(t.v3 == -2.0);

  const Jet s = jet_sin(jet_seed(0.0));
  CHECK(s.v0 == 0.0);
  CHECK(s.v1 == 1.0);
  CHECK(s.v2 == 0.0);
  CHECK(s.v3 == -1.0);
}

TEST_CASE("cube via repeated products carries exact derivative values") {
  const Jet x = jet_seed(2.0);
  const Jet c = jet_mul(x, jet_mul(x, x));
  CHECK(c.v0 == 8.0);
  CHECK(c.v1 == 12.0);
  CHECK(c.v2 == 12.0);
  CHECK(c.v3 == 6.0);
}

TEST_CASE("jets match central differences on random compositions") {
  Rng rng(fold_key(99, 1));
  for (int trial = 0; trial < 100; ++trial) {
    Coeffs c{};
    auto draw = [&] { return 2.0 * rng.uniform01() - 1.0; };
    c.a0 = 1.5 * draw();
    c.b0 = draw();
    c.c0 = 2.0 * draw();
    c.a1 = 1.5 * draw();
    c.c1 = draw();
    c.c2 = draw();
    c.a2 = 1.5 * draw();
    c.c3 = draw();
    c.c4 = 0.5 * draw();
    const double x = 2.0 * draw();

    const Jet j = jet_g(c, x);
    REQUIRE(jet_finite(j));
    // recip+mul and a different addition tree differ from the scalar formula
    // by a couple of ulps at most
    CHECK(rel_err(j.v0, scalar_g(c, x)) < 1e-14);
    CHECK(rel_err(j.v1, fd1(c, x, 1e-5)) < 1e-5);
    CHECK(rel_err(j.v2, fd2(c, x, 5e-4)) < 1e-4);
    CHECK(rel_err(j.v3, fd3(c, x, 1e-3)) < 5e-3);
  }
}

TEST_CASE("input scaling maps exactly through the chain rule") {
  const double alpha = 1.75, x = 0.3;
  const Jet u = jet_scale(jet_seed(x), alpha);  // u = alpha * x
  const Jet f = jet_tanh(u);
  const double t = std::tanh(alpha * x);
  CHECK(f.v1 == alpha * (1.0 - t * t));
}

TEST_CASE("non-finite jets are flagged, never thrown") {
  const Jet bad = jet_recip(jet_const(0.0));
  CHECK(!jet_finite(bad));
  const Jet worse = jet_exp(jet_const(1e308));
  CHECK(!jet_finite(worse));
  CHECK(jet_finite(jet_tanh(jet_seed(1e12))));
}

TEST_CASE("product rule agrees with expanded polynomial") {
  // p(x) = (x^2 + 1)(2x - 3) = 2x^3 - 3x^2 + 2x - 3
  const double x = 1.3;
  const Jet xs = jet_seed(x);
  const Jet left = jet_shift(jet_mul(xs, xs), 1.0);
  const Jet right = jet_shift(jet_scale(xs, 2.0), -3.0);
  const Jet p = jet_mul(left, right);
  CHECK(p.v0 == doctest::Approx(2 * x * x * x - 3 * x * x + 2 * x - 3).epsilon(1e-14));
  CHECK(p.v1 == doctest::Approx(6 * x * x - 6 * x + 2).epsilon(1e-14));
  CHECK(p.v2 == doctest::Approx(12 * x - 6).epsilon(1e-14));
  CHECK(p.v3 == doctest::Approx(12.0).epsilon(1e-14));
}
