#include "pinnev/problems.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pinnev {

namespace {

constexpr double kPi = 3.14159265358979323846;

double sech(double z) { return 1.0 / std::cosh(z); }

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = lo;
    return v;
  }
  for (std::size_t i = 0; i < n; ++i)
    v[i] = lo + (hi - lo) * double(i) / double(n - 1);
  return v;
}

void pad_batch(CollocationBatch& b, int input_dim) {
  const std::size_t n = b.n_total();
  const std::size_t np = kernels::padded(n);
  b.xs.resize(np, n ? b.xs[n - 1] : 0.0);
  if (input_dim == 2) b.ts.resize(np, n ? b.ts[n - 1] : 0.0);
}

bool is_wave(ProblemKind k) {
  return k == ProblemKind::LinearBurgers || k == ProblemKind::Burgers ||
         k == ProblemKind::KdV;
}

}  // namespace

std::string ProblemSpec::id() const {
  switch (kind) {
    case ProblemKind::ConvDiff: return "convdiff";
    case ProblemKind::Projectile: return "projectile";
    case ProblemKind::LinearBurgers: return "linburgers";
    case ProblemKind::Burgers: return "burgers";
    case ProblemKind::KdV: return "kdv";
  }
  return "?";
}

int ProblemSpec::input_dim() const { return is_wave(kind) ? 2 : 1; }

int ProblemSpec::output_dim() const {
  return kind == ProblemKind::Projectile ? 2 : 1;
}

int ProblemSpec::required_order() const {
  return kind == ProblemKind::KdV ? 3 : 2;
}

NetworkSpec ProblemSpec::default_network() const {
  switch (kind) {
    case ProblemKind::ConvDiff: return net_conv_diff();
    case ProblemKind::Projectile: return net_projectile();
    case ProblemKind::LinearBurgers:
    case ProblemKind::Burgers: return net_burgers();
    case ProblemKind::KdV: return net_kdv();
  }
  return {};
}

std::map<std::string, double> ProblemSpec::constants() const {
  std::map<std::string, double> c;
  switch (kind) {
    case ProblemKind::ConvDiff:
      c = {{"v", cd_v}, {"k", cd_k}, {"L", cd_len}};
      break;
    case ProblemKind::Projectile:
      c = {{"g", pj_g},     {"a0", pj_angle},    {"vel0", pj_speed},
           {"x0", pj_x0},   {"y0", pj_y0},       {"T", pj_T},
           {"rho", pj_rho}, {"cd", pj_cd},       {"radius", pj_radius},
           {"mass", pj_mass}};
      break;
    case ProblemKind::LinearBurgers:
      c = {{"nu", wv_nu},     {"c", wv_c},       {"x_lo", wv_x_lo},
           {"x_hi", wv_x_hi}, {"t_hi", wv_t_hi}};
      break;
    case ProblemKind::Burgers:
      c = {{"nu", wv_nu},     {"x_lo", wv_x_lo}, {"x_hi", wv_x_hi},
           {"t_hi", wv_t_hi}};
      break;
    case ProblemKind::KdV:
      c = {{"nu", wv_nu},     {"x_lo", wv_x_lo}, {"x_hi", wv_x_hi},
           {"t_hi", wv_t_hi}, {"c1", kdv_c1},    {"c2", kdv_c2},
           {"x1", kdv_x1},    {"x2", kdv_x2}};
      break;
  }
  return c;
}

void ProblemSpec::set_constant(const std::string& name, double value) {
  auto match = [&](const char* n, double& field) {
    if (name != n) return false;
    field = value;
    return true;
  };
  if (name == "m_interior") {
    m_interior = static_cast<int>(value);
    return;
  }
  if (name == "m_icbc") {
    if (kind == ProblemKind::ConvDiff || kind == ProblemKind::Projectile)
      throw std::invalid_argument("constraint point count is fixed for " + id());
    m_icbc = static_cast<int>(value);
    return;
  }
  if (match("beta_ic", beta_ic) || match("beta_bc", beta_bc)) return;
  switch (kind) {
    case ProblemKind::ConvDiff:
      if (match("v", cd_v) || match("k", cd_k) || match("L", cd_len)) return;
      break;
    case ProblemKind::Projectile:
      if (match("g", pj_g) || match("a0", pj_angle) || match("vel0", pj_speed) ||
          match("x0", pj_x0) || match("y0", pj_y0) || match("T", pj_T) ||
          match("rho", pj_rho) || match("cd", pj_cd) ||
          match("radius", pj_radius) || match("mass", pj_mass))
        return;
      break;
    case ProblemKind::LinearBurgers:
      if (match("c", wv_c) || match("nu", wv_nu) || match("x_lo", wv_x_lo) ||
          match("x_hi", wv_x_hi) || match("t_hi", wv_t_hi))
        return;
      break;
    case ProblemKind::Burgers:
      if (match("nu", wv_nu) || match("x_lo", wv_x_lo) ||
          match("x_hi", wv_x_hi) || match("t_hi", wv_t_hi))
        return;
      break;
    case ProblemKind::KdV:
      if (match("nu", wv_nu) || match("x_lo", wv_x_lo) ||
          match("x_hi", wv_x_hi) || match("t_hi", wv_t_hi) ||
          match("c1", kdv_c1) || match("c2", kdv_c2) || match("x1", kdv_x1) ||
          match("x2", kdv_x2))
        return;
      break;
  }
  throw std::invalid_argument("unknown constant '" + name + "' for " + id());
}

ProblemSpec ProblemSpec::preset(const std::string& id) {
  ProblemSpec p;
  if (id == "convdiff") {
    p.kind = ProblemKind::ConvDiff;
    p.m_interior = 1000;
    p.m_icbc = 2;
  } else if (id == "projectile") {
    p.kind = ProblemKind::Projectile;
    p.m_interior = 1000;
    p.m_icbc = 1;
  } else if (id == "linburgers") {
    p.kind = ProblemKind::LinearBurgers;
    p.wv_nu = 0.01;
    p.wv_x_lo = -1.5;
    p.wv_x_hi = 6.5;
    p.wv_t_hi = 5.0;
    p.m_interior = 5000;
    p.m_icbc = 50;
  } else if (id == "burgers") {
    p.kind = ProblemKind::Burgers;
    p.wv_nu = 0.01;
    p.wv_x_lo = -1.5;
    p.wv_x_hi = 2.0;
    p.wv_t_hi = 2.0;
    p.m_interior = 5000;
    p.m_icbc = 50;
  } else if (id == "kdv") {
    p.kind = ProblemKind::KdV;
    p.wv_nu = 0.001;
    p.wv_x_lo = 0.0;
    p.wv_x_hi = 1.5;
    p.wv_t_hi = 2.0;
    p.m_interior = 10000;
    p.m_icbc = 100;
  } else {
    throw std::invalid_argument("unknown problem id '" + id + "'");
  }
  return p;
}

void latin_hypercube(Rng& rng, std::size_t m, double lo, double hi,
                     double* out) {
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = m; i > 1; --i)
    std::swap(perm[i - 1], perm[rng.below(i)]);
  const double inv_m = 1.0 / double(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double unit = (double(perm[i]) + rng.uniform01()) * inv_m;
    out[i] = lo + (hi - lo) * unit;
  }
}

CollocationBatch sample_batch(const ProblemSpec& p, Rng& rng) {
  CollocationBatch b;
  b.n_interior = static_cast<std::size_t>(p.m_interior);
  switch (p.kind) {
    case ProblemKind::ConvDiff: {
      b.n_icbc = 2;
      b.xs.resize(b.n_total());
      latin_hypercube(rng, b.n_interior, 0.0, p.cd_len, b.xs.data());
      b.xs[b.n_interior] = 0.0;
      b.xs[b.n_interior + 1] = p.cd_len;
      break;
    }
    case ProblemKind::Projectile: {
      b.n_icbc = 1;
      b.xs.resize(b.n_total());
      latin_hypercube(rng, b.n_interior, 0.0, p.pj_T, b.xs.data());
      b.xs[b.n_interior] = 0.0;
      break;
    }
    default: {
      b.n_icbc = static_cast<std::size_t>(p.m_icbc);
      b.xs.resize(b.n_total());
      b.ts.resize(b.n_total());
      latin_hypercube(rng, b.n_interior, p.wv_x_lo, p.wv_x_hi, b.xs.data());
      latin_hypercube(rng, b.n_interior, 0.0, p.wv_t_hi, b.ts.data());
      latin_hypercube(rng, b.n_icbc, p.wv_x_lo, p.wv_x_hi,
                      b.xs.data() + b.n_interior);
      std::fill(b.ts.begin() + b.n_interior, b.ts.end(), 0.0);
      break;
    }
  }
  pad_batch(b, p.input_dim());
  return b;
}

CollocationBatch test_batch(const ProblemSpec& p) {
  CollocationBatch b;
  switch (p.kind) {
    case ProblemKind::ConvDiff: {
      b.n_interior = 1000;
      b.n_icbc = 2;
      b.xs = linspace(0.0, p.cd_len, 1000);
      b.xs.push_back(0.0);
      b.xs.push_back(p.cd_len);
      break;
    }
    case ProblemKind::Projectile: {
      b.n_interior = 1000;
      b.n_icbc = 1;
      b.xs = linspace(0.0, p.pj_T, 1000);
      b.xs.push_back(0.0);
      break;
    }
    default: {
      const std::size_t nx = 100, nt = 100;
      b.n_interior = nx * nt;
      b.n_icbc = static_cast<std::size_t>(p.m_icbc);
      const auto gx = linspace(p.wv_x_lo, p.wv_x_hi, nx);
      const auto gt = linspace(0.0, p.wv_t_hi, nt);
      b.xs.reserve(b.n_total());
      b.ts.reserve(b.n_total());
      for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < nt; ++j) {
          b.xs.push_back(gx[i]);
          b.ts.push_back(gt[j]);
        }
      const auto gic = linspace(p.wv_x_lo, p.wv_x_hi, b.n_icbc);
      b.xs.insert(b.xs.end(), gic.begin(), gic.end());
      b.ts.insert(b.ts.end(), b.n_icbc, 0.0);
      break;
    }
  }
  pad_batch(b, p.input_dim());
  return b;
}

double pde_residual(const ProblemSpec& p, const ScalarDerivs& d) {
  switch (p.kind) {
    case ProblemKind::ConvDiff: return p.cd_k * d.u_xx - p.cd_v * d.u_x;
    case ProblemKind::LinearBurgers:
      return d.u_t + p.wv_c * d.u_x - p.wv_nu * d.u_xx;
    case ProblemKind::Burgers: return d.u_t + d.u * d.u_x - p.wv_nu * d.u_xx;
    case ProblemKind::KdV: return d.u_t + d.u * d.u_x - p.wv_nu * d.u_xxx;
    default: break;
  }
  assert(false);
  return 0.0;
}

double drag_coefficient(const ProblemSpec& p) {
  if (p.pj_rho <= 0.0) return 0.0;
  return 0.5 * p.pj_rho * p.pj_cd * kPi * p.pj_radius * p.pj_radius /
         p.pj_mass;
}

void projectile_residuals(const ProblemSpec& p, const ProjDerivs& d,
                          double* res_x, double* res_y) {
  const double C = drag_coefficient(p);
  double R = 0.0;
  if (C > 0.0) R = C * std::sqrt(d.x_t * d.x_t + d.y_t * d.y_t);
  *res_x = d.x_tt + R * d.x_t;
  *res_y = d.y_tt + R * d.y_t + p.pj_g;
}

namespace {

struct Passes {
  kernels::JetsOut xj;  // seeded on x (or on t for 1-input problems)
  kernels::JetsOut tj;  // seeded on t over the interior block (2-input only)
};

// Runs the jet passes for loss evaluation. When grads is non-null, runs the
// tangent variants and fills grads->first (x pass) / grads->second (t pass).
Passes run_passes(const ProblemSpec& p, const kernels::NetPlan& plan,
                  const double* w, const CollocationBatch& b,
                  EvalScratch& s,
                  std::pair<kernels::TangentsOut, kernels::TangentsOut>* grads) {
  const auto& K = kernels::active_kernel();
  const int order = p.required_order();
  Passes out;
  const std::size_t np_all = kernels::padded(b.n_total());
  out.xj.n_pad = np_all;
  out.xj.n_out = plan.output_dim;
  out.xj.n_comp = order + 1;
  s.jets_a.resize(out.xj.size());
  out.xj.data = s.jets_a.data();

  const double* coords[2] = {b.xs.data(), b.ts.data()};
  kernels::BatchView view_all{coords, p.input_dim(), b.n_total()};

  if (!grads) {
    K.eval_jets(plan, w, view_all, 0, order, out.xj);
  } else {
    auto& tx = grads->first;
    tx.n_pad = np_all;
    tx.n_out = plan.output_dim;
    tx.n_dirs = plan.n_params;
    tx.n_comp = order + 1;
    s.tan_a.resize(tx.size());
    tx.data = s.tan_a.data();
    K.eval_jets_grad(plan, w, view_all, 0, order, out.xj, tx);
  }

  if (p.input_dim() == 2) {
    const std::size_t np_int = kernels::padded(b.n_interior);
    out.tj.n_pad = np_int;
    out.tj.n_out = plan.output_dim;
    out.tj.n_comp = 2;
    s.jets_b.resize(out.tj.size());
    out.tj.data = s.jets_b.data();
    kernels::BatchView view_int{coords, 2, b.n_interior};
    if (!grads) {
      K.eval_jets(plan, w, view_int, 1, 1, out.tj);
    } else {
      auto& tt = grads->second;
      tt.n_pad = np_int;
      tt.n_out = plan.output_dim;
      tt.n_dirs = plan.n_params;
      tt.n_comp = 2;
      s.tan_b.resize(tt.size());
      tt.data = s.tan_b.data();
      K.eval_jets_grad(plan, w, view_int, 1, 1, out.tj, tt);
    }
  }
  return out;
}

// Assembles the loss parts from completed passes, leaving per-point residual
// and error arrays in the scratch for gradient reuse.
LossBreakdown assemble(const ProblemSpec& p, const CollocationBatch& b,
                       const Passes& v, EvalScratch& s) {
  LossBreakdown lb;
  const std::size_t m = b.n_interior;
  switch (p.kind) {
    case ProblemKind::ConvDiff: {
      const double* u0 = v.xj.at(0, 0);
      const double* u1 = v.xj.at(0, 1);
      const double* u2 = v.xj.at(0, 2);
      s.res.resize(m);
      double sum = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        const double r = pde_residual(p, {u0[j], 0.0, u1[j], u2[j], 0.0});
        s.res[j] = r;
        sum += r * r;
      }
      lb.l_de = sum / double(m);
      s.res2.assign(2, 0.0);
      s.res2[0] = u0[m] - 0.0;
      s.res2[1] = u0[m + 1] - 1.0;
      lb.l_bc = (s.res2[0] * s.res2[0] + s.res2[1] * s.res2[1]) / 2.0;
      lb.total = lb.l_de + p.beta_bc * lb.l_bc;
      break;
    }
    case ProblemKind::Projectile: {
      const double* x1 = v.xj.at(0, 1);
      const double* x2 = v.xj.at(0, 2);
      const double* y1 = v.xj.at(1, 1);
      const double* y2 = v.xj.at(1, 2);
      s.res.resize(m);
      s.res2.resize(m);
      s.aux.resize(m);
      double sum = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        double rx, ry;
        projectile_residuals(p, {x1[j], x2[j], y1[j], y2[j]}, &rx, &ry);
        s.res[j] = rx;
        s.res2[j] = ry;
        s.aux[j] = std::sqrt(x1[j] * x1[j] + y1[j] * y1[j]);
        sum += rx * rx + ry * ry;
      }
      lb.l_de = sum / double(2 * m);
      const double a = p.pj_angle * kPi / 180.0;
      const double e0 = v.xj.at(0, 0)[m] - p.pj_x0;
      const double e1 = v.xj.at(1, 0)[m] - p.pj_y0;
      const double e2 = x1[m] - p.pj_speed * std::cos(a);
      const double e3 = y1[m] - p.pj_speed * std::sin(a);
      lb.l_ic = (e0 * e0 + e1 * e1 + e2 * e2 + e3 * e3) / 4.0;
      lb.total = lb.l_de + p.beta_ic * lb.l_ic;
      break;
    }
    default: {
      const int order = p.required_order();
      const double* u0 = v.xj.at(0, 0);
      const double* u1 = v.xj.at(0, 1);
      const double* u2 = v.xj.at(0, 2);
      const double* u3 = order >= 3 ? v.xj.at(0, 3) : nullptr;
      const double* ut = v.tj.at(0, 1);
      s.res.resize(m);
      double sum = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        ScalarDerivs d;
        d.u = u0[j];
        d.u_t = ut[j];
        d.u_x = u1[j];
        d.u_xx = u2[j];
        d.u_xxx = u3 ? u3[j] : 0.0;
        const double r = pde_residual(p, d);
        s.res[j] = r;
        sum += r * r;
      }
      lb.l_de = sum / double(m);
      s.res2.resize(b.n_icbc);
      double ic = 0.0;
      for (std::size_t j = 0; j < b.n_icbc; ++j) {
        const double e = u0[m + j] - initial_condition(p, b.xs[m + j]);
        s.res2[j] = e;
        ic += e * e;
      }
      lb.l_ic = ic / double(b.n_icbc);
      lb.total = lb.l_de + p.beta_ic * lb.l_ic;
      break;
    }
  }
  lb.finite = std::isfinite(lb.total);
  return lb;
}

}  // namespace

LossBreakdown loss(const ProblemSpec& p, const kernels::NetPlan& plan,
                   const double* w, const CollocationBatch& batch,
                   EvalScratch& scratch) {
  const Passes v = run_passes(p, plan, w, batch, scratch, nullptr);
  return assemble(p, batch, v, scratch);
}

LossBreakdown test_loss(const ProblemSpec& p, const kernels::NetPlan& plan,
                        const double* w, EvalScratch& scratch) {
  const CollocationBatch grid = test_batch(p);
  return loss(p, plan, w, grid, scratch);
}

LossBreakdown loss_grad(const ProblemSpec& p, const kernels::NetPlan& plan,
                        const double* w, const CollocationBatch& batch,
                        EvalScratch& scratch, std::vector<double>& grad_out) {
  std::pair<kernels::TangentsOut, kernels::TangentsOut> tangents;
  const Passes v = run_passes(p, plan, w, batch, scratch, &tangents);
  const LossBreakdown lb = assemble(p, batch, v, scratch);
  const auto& tx = tangents.first;
  const auto& tt = tangents.second;
  const std::size_t m = batch.n_interior;
  const int d = plan.n_params;
  grad_out.assign(d, 0.0);

  switch (p.kind) {
    case ProblemKind::ConvDiff: {
      for (int dir = 0; dir < d; ++dir) {
        const double* t0 = tx.at(0, dir, 0);
        const double* t1 = tx.at(0, dir, 1);
        const double* t2 = tx.at(0, dir, 2);
        double gde = 0.0;
        for (std::size_t j = 0; j < m; ++j)
          gde += scratch.res[j] * (p.cd_k * t2[j] - p.cd_v * t1[j]);
        const double gbc = scratch.res2[0] * t0[m] + scratch.res2[1] * t0[m + 1];
        grad_out[dir] = 2.0 * gde / double(m) + p.beta_bc * gbc;
      }
      break;
    }
    case ProblemKind::Projectile: {
      const double* x1 = v.xj.at(0, 1);
      const double* y1 = v.xj.at(1, 1);
      const double C = drag_coefficient(p);
      for (int dir = 0; dir < d; ++dir) {
        const double* tx0 = tx.at(0, dir, 0);
        const double* tx1 = tx.at(0, dir, 1);
        const double* tx2 = tx.at(0, dir, 2);
        const double* ty0 = tx.at(1, dir, 0);
        const double* ty1 = tx.at(1, dir, 1);
        const double* ty2 = tx.at(1, dir, 2);
        double gde = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
          const double V = scratch.aux[j];
          const double R = C * V;
          double dR = 0.0;
          if (C > 0.0 && V > 0.0)
            dR = C * (x1[j] * tx1[j] + y1[j] * ty1[j]) / V;
          const double drx = tx2[j] + dR * x1[j] + R * tx1[j];
          const double dry = ty2[j] + dR * y1[j] + R * ty1[j];
          gde += scratch.res[j] * drx + scratch.res2[j] * dry;
        }
        const double a = p.pj_angle * kPi / 180.0;
        const double e0 = v.xj.at(0, 0)[m] - p.pj_x0;
        const double e1 = v.xj.at(1, 0)[m] - p.pj_y0;
        const double e2 = x1[m] - p.pj_speed * std::cos(a);
        const double e3 = y1[m] - p.pj_speed * std::sin(a);
        const double gic =
            e0 * tx0[m] + e1 * ty0[m] + e2 * tx1[m] + e3 * ty1[m];
        grad_out[dir] = gde / double(m) + p.beta_ic * gic / 2.0;
      }
      break;
    }
    default: {
      const int order = p.required_order();
      const double* u0 = v.xj.at(0, 0);
      const double* u1 = v.xj.at(0, 1);
      for (int dir = 0; dir < d; ++dir) {
        const double* a0 = tx.at(0, dir, 0);
        const double* a1 = tx.at(0, dir, 1);
        const double* a2 = tx.at(0, dir, 2);
        const double* a3 = order >= 3 ? tx.at(0, dir, 3) : nullptr;
        const double* b1 = tt.at(0, dir, 1);
        double gde = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
          double dres;
          switch (p.kind) {
            case ProblemKind::LinearBurgers:
              dres = b1[j] + p.wv_c * a1[j] - p.wv_nu * a2[j];
              break;
            case ProblemKind::Burgers:
              dres = b1[j] + a0[j] * u1[j] + u0[j] * a1[j] - p.wv_nu * a2[j];
              break;
            default:  // KdV
              dres = b1[j] + a0[j] * u1[j] + u0[j] * a1[j] - p.wv_nu * a3[j];
              break;
          }
          gde += scratch.res[j] * dres;
        }
        double gic = 0.0;
        for (std::size_t j = 0; j < batch.n_icbc; ++j)
          gic += scratch.res2[j] * a0[m + j];
        grad_out[dir] = 2.0 * gde / double(m) +
                        p.beta_ic * 2.0 * gic / double(batch.n_icbc);
      }
      break;
    }
  }
  return lb;
}

double analytic_conv_diff(double x, double v, double k, double L) {
  const double a = L * v / k;
  const double b = x * v / k;
  if (a < -700.0) return -std::expm1(b);
  if (a > 700.0) return std::exp(b - a) * std::expm1(-b) / std::expm1(-a);
  return std::expm1(b) / std::expm1(a);
}

ProjectileStates projectile_oracle(const ProblemSpec& p,
                                   const std::vector<double>& t_grid) {
  const double C = drag_coefficient(p);
  const double a = p.pj_angle * kPi / 180.0;
  double st[4] = {p.pj_x0, p.pj_y0, p.pj_speed * std::cos(a),
                  p.pj_speed * std::sin(a)};
  auto deriv = [&](const double* s, double* ds) {
    const double R = C > 0.0 ? C * std::sqrt(s[2] * s[2] + s[3] * s[3]) : 0.0;
    ds[0] = s[2];
    ds[1] = s[3];
    ds[2] = -R * s[2];
    ds[3] = -R * s[3] - p.pj_g;
  };
  const double h_max = 1e-3 * p.pj_T;
  ProjectileStates out;
  double t = 0.0;
  for (double target : t_grid) {
    assert(target >= t - 1e-12);
    const double dt = target - t;
    if (dt > 0.0) {
      const int nsub = std::max(1, static_cast<int>(std::ceil(dt / h_max)));
      const double h = dt / nsub;
      for (int s = 0; s < nsub; ++s) {
        double k1[4], k2[4], k3[4], k4[4], tmp[4];
        deriv(st, k1);
        for (int i = 0; i < 4; ++i) tmp[i] = st[i] + 0.5 * h * k1[i];
        deriv(tmp, k2);
        for (int i = 0; i < 4; ++i) tmp[i] = st[i] + 0.5 * h * k2[i];
        deriv(tmp, k3);
        for (int i = 0; i < 4; ++i) tmp[i] = st[i] + h * k3[i];
        deriv(tmp, k4);
        for (int i = 0; i < 4; ++i)
          st[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      }
    }
    t = target;
    out.x.push_back(st[0]);
    out.y.push_back(st[1]);
    out.vx.push_back(st[2]);
    out.vy.push_back(st[3]);
  }
  return out;
}

double initial_condition(const ProblemSpec& p, double x) {
  switch (p.kind) {
    case ProblemKind::LinearBurgers: {
      const double z = 2.0 * x;
      return 10.0 * std::exp(-z * z);
    }
    case ProblemKind::Burgers: {
      const double z = 2.0 * x;
      return std::exp(-z * z);
    }
    case ProblemKind::KdV: {
      const double a1 = 0.5 * std::sqrt(p.kdv_c1 / p.wv_nu);
      const double a2 = 0.5 * std::sqrt(p.kdv_c2 / p.wv_nu);
      const double s1 = sech(a1 * (x - p.kdv_x1));
      const double s2 = sech(a2 * (x - p.kdv_x2));
      return 3.0 * p.kdv_c1 * s1 * s1 + 3.0 * p.kdv_c2 * s2 * s2;
    }
    default: break;
  }
  throw std::logic_error("no initial condition for " + p.id());
}

double mse_vs_conv_diff_analytic(const ProblemSpec& p,
                                 const kernels::NetPlan& plan, const double* w,
                                 EvalScratch& scratch) {
  const CollocationBatch grid = test_batch(p);
  kernels::JetsOut jo;
  jo.n_pad = kernels::padded(grid.n_total());
  jo.n_out = plan.output_dim;
  jo.n_comp = 2;
  scratch.jets_a.resize(jo.size());
  jo.data = scratch.jets_a.data();
  const double* coords[1] = {grid.xs.data()};
  kernels::active_kernel().eval_jets(
      plan, w, {coords, 1, grid.n_total()}, 0, 1, jo);
  const double* u0 = jo.at(0, 0);
  double sum = 0.0;
  for (std::size_t j = 0; j < grid.n_interior; ++j) {
    const double e = u0[j] - analytic_conv_diff(grid.xs[j], p.cd_v, p.cd_k,
                                                p.cd_len);
    sum += e * e;
  }
  return sum / double(grid.n_interior);
}

double mse_vs_projectile_oracle(const ProblemSpec& p,
                                const kernels::NetPlan& plan, const double* w,
                                EvalScratch& scratch) {
  const CollocationBatch grid = test_batch(p);
  std::vector<double> ts(grid.xs.begin(),
                         grid.xs.begin() + grid.n_interior);
  const ProjectileStates ref = projectile_oracle(p, ts);
  kernels::JetsOut jo;
  jo.n_pad = kernels::padded(grid.n_total());
  jo.n_out = plan.output_dim;
  jo.n_comp = 2;
  scratch.jets_a.resize(jo.size());
  jo.data = scratch.jets_a.data();
  const double* coords[1] = {grid.xs.data()};
  kernels::active_kernel().eval_jets(
      plan, w, {coords, 1, grid.n_total()}, 0, 1, jo);
  const double* x0 = jo.at(0, 0);
  const double* y0 = jo.at(1, 0);
  double sum = 0.0;
  for (std::size_t j = 0; j < grid.n_interior; ++j) {
    const double ex = x0[j] - ref.x[j];
    const double ey = y0[j] - ref.y[j];
    sum += ex * ex + ey * ey;
  }
  return sum / double(2 * grid.n_interior);
}

}  // namespace pinnev
