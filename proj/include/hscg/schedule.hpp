#ifndef HSCG_SCHEDULE_HPP
#define HSCG_SCHEDULE_HPP

#include <vector>

#include "hscg/estimators.hpp"
#include "hscg/outer.hpp"
#include "hscg/problem.hpp"

namespace hscg {

/// Derived constants driving the theorem step-size recipes.
///
/// P and Q combine the problem constants with the outer function's Lipschitz
/// bound M_phi and base smoothness (||K||^2 for the max-form, the gradient
/// Lipschitz constant for a smooth outer); L_Phi(gamma) is the smoothness of
/// the composed objective.
struct Constants {
  double M_F = 0.0, L_F = 0.0, sigma_F = 0.0, sigma_J = 0.0;
  double M_phi = 0.0;      // Lipschitz bound of phi_gamma (gamma-free)
  double Lphi_unit = 0.0;  // ||K||^2, or L of a smooth outer
  double K_norm = 0.0;
  double mu_psi = 0.0;
  bool smooth_outer = false;
  int kappa = 1, kappa_hat = 1;
  double c0 = 1.0;

  double P = 0.0;
  double Q = 0.0;
  double L_Phi0 = 0.0;       // smoothness at gamma = 0 (needs mu_psi > 0)
  double L_Phi_gamma = 0.0;  // smoothness at the gamma passed at build time

  // L_F*M_phi + M_F^2 * Lphi_unit/(gamma + mu_psi); smooth outers ignore
  // gamma.
  double L_Phi(double gamma) const;
};

Constants compute_constants(const ProblemConstants& pc,
                            const OuterFunction& outer, const BatchPlan& plan,
                            double gamma);

enum class ScheduleKind { Thm1, Thm2, Thm3, Thm4, Manual };

// Manual-mode knobs: constant eta > 0 and theta in (0,1], tuned rather than
// theorem-derived; gamma follows 1/(2(t+1)^{1/3}) for nonsmooth outers.
struct ManualOverrides {
  double eta = 0.1;
  double theta = 1.0;
};

/// Full parameter trajectory for t = 0..T: smoothing gamma_t, hybrid weights
/// beta_t, averaging step theta_t, step-size eta_t, per-iteration value
/// batches, and the composed smoothness L_{Phi_{gamma_t}} used for the
/// output weights omega_t = theta_t / L_{Phi_{gamma_t}}.
struct ScheduleState {
  ScheduleKind kind = ScheduleKind::Manual;
  int T = 0;
  std::vector<double> gamma, beta, beta_hat, theta, eta, L_phi;
  std::vector<int> b1, b2;
  int b0 = 1, bhat0 = 1, bhat1 = 1, bhat2 = 1;

  double omega(int t) const { return theta[t] / L_phi[t]; }
};

// Builds the trajectory for the requested recipe. bhat0_in = 0 derives the
// initial Jacobian batch from the c1 recipe ceil(c1^2 [b(T+1)]^{1/3}).
// Throws ConfigError naming the violated constraint when infeasible.
ScheduleState make_schedule(ScheduleKind kind, int T, int b, int bhat0_in,
                            const Constants& consts, const BatchPlan& plan,
                            int num_samples, double gamma_const = 0.5,
                            const ManualOverrides* manual = nullptr);

}  // namespace hscg

#endif
