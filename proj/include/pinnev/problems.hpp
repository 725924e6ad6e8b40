#pragma once

#include <map>
#include <string>
#include <vector>

#include "pinnev/kernels.hpp"
#include "pinnev/network.hpp"
#include "pinnev/rng.hpp"

namespace pinnev {

enum class ProblemKind { ConvDiff, Projectile, LinearBurgers, Burgers, KdV };

// A differential-equation benchmark instance: equation constants, domain,
// collocation make-up and loss weights.
struct ProblemSpec {
  ProblemKind kind = ProblemKind::ConvDiff;

  // convection-diffusion: k u_xx - v u_x = 0 on [0, L], u(0) = 0, u(L) = 1
  double cd_v = 2.0, cd_k = 1.0, cd_len = 5.0;

  // projectile with optional quadratic drag (drag active iff rho > 0):
  // x_tt = -R x_t, y_tt = -R y_t - g, R = C sqrt(x_t^2 + y_t^2)
  double pj_g = 9.8, pj_angle = 45.0, pj_speed = 8.0;
  double pj_x0 = 0.0, pj_y0 = 2.0, pj_T = 2.0;
  double pj_rho = 1.2, pj_cd = 0.54, pj_radius = 0.12, pj_mass = 0.6;

  // advection / Burgers / KdV on [x_lo, x_hi] x [0, t_hi]
  double wv_nu = 0.01, wv_c = 1.0;
  double wv_x_lo = -1.5, wv_x_hi = 6.5, wv_t_hi = 5.0;
  double kdv_c1 = 0.3, kdv_c2 = 0.1, kdv_x1 = 0.4, kdv_x2 = 0.8;

  int m_interior = 1000;
  int m_icbc = 2;
  double beta_ic = 1.0, beta_bc = 1.0;

  std::string id() const;
  int input_dim() const;
  int output_dim() const;
  int required_order() const;  // highest derivative order in the residual
  NetworkSpec default_network() const;
  std::map<std::string, double> constants() const;
  void set_constant(const std::string& name, double value);
  static ProblemSpec preset(const std::string& id);
};

// One collocation draw. SoA arrays are padded to a multiple of kernels::kPad
// (pad slots replicate the last point); constraint (IC/BC) points follow the
// interior block. 1-input problems keep their lone coordinate in xs.
struct CollocationBatch {
  std::size_t n_interior = 0;
  std::size_t n_icbc = 0;
  std::vector<double> xs, ts;
  std::size_t n_total() const { return n_interior + n_icbc; }
};

// Randomized Latin hypercube draw on [lo, hi): one point per stratum.
void latin_hypercube(Rng& rng, std::size_t m, double lo, double hi,
                     double* out);

CollocationBatch sample_batch(const ProblemSpec& p, Rng& rng);
// Deterministic evaluation grid: uniform including endpoints (100 x 100 for
// 2-input problems, 1000 points otherwise) plus the instance's IC/BC points.
CollocationBatch test_batch(const ProblemSpec& p);

struct LossBreakdown {
  double l_de = 0.0, l_ic = 0.0, l_bc = 0.0;
  double total = 0.0;
  bool finite = false;
};

// Reusable buffers for the batched evaluators.
struct EvalScratch {
  std::vector<double> jets_a, jets_b, tan_a, tan_b, res, res2, aux;
};

LossBreakdown loss(const ProblemSpec& p, const kernels::NetPlan& plan,
                   const double* w, const CollocationBatch& batch,
                   EvalScratch& scratch);
LossBreakdown test_loss(const ProblemSpec& p, const kernels::NetPlan& plan,
                        const double* w, EvalScratch& scratch);
// Exact gradient of LossBreakdown::total; returns the same breakdown as
// loss() on the same batch.
LossBreakdown loss_grad(const ProblemSpec& p, const kernels::NetPlan& plan,
                        const double* w, const CollocationBatch& batch,
                        EvalScratch& scratch, std::vector<double>& grad_out);

// Per-point residual from raw derivative records (shared by the loss
// assembly and by oracle checks that bypass the network).
struct ScalarDerivs {
  double u = 0, u_t = 0, u_x = 0, u_xx = 0, u_xxx = 0;
};
double pde_residual(const ProblemSpec& p, const ScalarDerivs& d);

struct ProjDerivs {
  double x_t = 0, x_tt = 0, y_t = 0, y_tt = 0;
};
void projectile_residuals(const ProblemSpec& p, const ProjDerivs& d,
                          double* res_x, double* res_y);

// Closed-form steady solution of the convection-diffusion instance,
// evaluated via expm1 ratios to survive large v L / k.
double analytic_conv_diff(double x, double v, double k, double L);

// Reference trajectory by classical fixed-step RK4 (step <= 1e-3 T).
struct ProjectileStates {
  std::vector<double> x, y, vx, vy;
};
ProjectileStates projectile_oracle(const ProblemSpec& p,
                                   const std::vector<double>& t_grid);

double initial_condition(const ProblemSpec& p, double x);
double drag_coefficient(const ProblemSpec& p);

// Mean squared solution error on the deterministic test grid.
double mse_vs_conv_diff_analytic(const ProblemSpec& p,
                                 const kernels::NetPlan& plan, const double* w,
                                 EvalScratch& scratch);
double mse_vs_projectile_oracle(const ProblemSpec& p,
                                const kernels::NetPlan& plan, const double* w,
                                EvalScratch& scratch);

}  // namespace pinnev
