#pragma once

#include <cmath>

namespace pinnev {

// Order-3 truncated forward-mode derivative bundle with respect to a single
// seed variable. Components hold derivative values (f, f', f'', f'''), not
// Taylor coefficients. Ops never trap; non-finite components are detected by
// callers via jet_finite and surfaced as failed evaluations.
struct Jet {
  double v0 = 0.0;
  double v1 = 0.0;
  double v2 = 0.0;
  double v3 = 0.0;
};

inline Jet jet_const(double c) { return {c, 0.0, 0.0, 0.0}; }
inline Jet jet_seed(double x) { return {x, 1.0, 0.0, 0.0}; }

inline Jet jet_add(const Jet& a, const Jet& b) {
  return {a.v0 + b.v0, a.v1 + b.v1, a.v2 + b.v2, a.v3 + b.v3};
}

inline Jet jet_sub(const Jet& a, const Jet& b) {
  return {a.v0 - b.v0, a.v1 - b.v1, a.v2 - b.v2, a.v3 - b.v3};
}

inline Jet jet_neg(const Jet& a) { return {-a.v0, -a.v1, -a.v2, -a.v3}; }

inline Jet jet_scale(const Jet& a, double s) {
  return {s * a.v0, s * a.v1, s * a.v2, s * a.v3};
}

inline Jet jet_shift(const Jet& a, double c) {
  return {a.v0 + c, a.v1, a.v2, a.v3};
}

// Leibniz rule on derivative values up to order 3.
inline Jet jet_mul(const Jet& a, const Jet& b) {
  return {a.v0 * b.v0,
          a.v1 * b.v0 + a.v0 * b.v1,
          a.v2 * b.v0 + 2.0 * a.v1 * b.v1 + a.v0 * b.v2,
          a.v3 * b.v0 + 3.0 * a.v2 * b.v1 + 3.0 * a.v1 * b.v2 + a.v0 * b.v3};
}

// Univariate composition f(u) given f and its first three derivatives at u.v0.
inline Jet jet_chain(const Jet& u, double f0, double f1, double f2, double f3) {
  return {f0,
          f1 * u.v1,
          f2 * u.v1 * u.v1 + f1 * u.v2,
          f3 * u.v1 * u.v1 * u.v1 + 3.0 * f2 * u.v1 * u.v2 + f1 * u.v3};
}

inline Jet jet_tanh(const Jet& u) {
  const double t = std::tanh(u.v0);
  const double s = 1.0 - t * t;
  return jet_chain(u, t, s, -2.0 * t * s, -2.0 * s * (1.0 - 3.0 * t * t));
}

inline Jet jet_exp(const Jet& u) {
  const double e = std::exp(u.v0);
  return jet_chain(u, e, e, e, e);
}

inline Jet jet_sin(const Jet& u) {
  const double s = std::sin(u.v0);
  const double c = std::cos(u.v0);
  return jet_chain(u, s, c, -s, -c);
}

inline Jet jet_cos(const Jet& u) {
  const double s = std::sin(u.v0);
  const double c = std::cos(u.v0);
  return jet_chain(u, c, -s, -c, s);
}

// Requires u.v0 != 0; at 0 the components become non-finite and must be
// caught by the caller.
inline Jet jet_recip(const Jet& u) {
  const double r = 1.0 / u.v0;
  const double r2 = r * r;
  return jet_chain(u, r, -r2, 2.0 * r2 * r, -6.0 * r2 * r2);
}

inline bool jet_finite(const Jet& a) {
  return std::isfinite(a.v0) && std::isfinite(a.v1) && std::isfinite(a.v2) &&
         std::isfinite(a.v3);
}

}  // namespace pinnev
