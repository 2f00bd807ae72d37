#include "hscg/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hscg {

double Constants::L_Phi(double gamma) const {
  if (smooth_outer) return L_F * M_phi + M_F * M_F * Lphi_unit;
  const double denom = gamma + mu_psi;
  if (!(denom > 0.0))
    throw ConfigError("L_Phi: gamma = 0 with non-strongly-convex psi");
  return L_F * M_phi + M_F * M_F * Lphi_unit / denom;
}

Constants compute_constants(const ProblemConstants& pc,
                            const OuterFunction& outer, const BatchPlan& plan,
                            double gamma) {
  Constants c;
  c.M_F = pc.M_F;
  c.L_F = pc.L_F;
  c.sigma_F = pc.sigma_F;
  c.sigma_J = pc.sigma_J;
  c.kappa = plan.kappa();
  c.kappa_hat = plan.kappa_hat();
  c.c0 = plan.c0;
  c.smooth_outer = !outer.is_max_form();
  c.mu_psi = outer.mu_psi();
  c.M_phi = outer.lipschitz_const();
  c.K_norm = outer.k_norm();
  c.Lphi_unit = outer.is_max_form() ? c.K_norm * c.K_norm
                                    : outer.smoothness_const(0.0);
  if (!(c.c0 > 0.0)) throw ConfigError("compute_constants: c0 must be positive");

  // P = sqrt(26)||K||/(3 sqrt(c0)) * sqrt(kappa M_F^4 ||K||^2
  //     + c0 kappa_hat L_F^2 M_psi^2), written in the (M_phi, Lphi_unit)
  // form so smooth outers are covered by the same expression.
  const double inner_p = c.kappa * std::pow(c.M_F, 4) * c.Lphi_unit * c.Lphi_unit +
                         c.c0 * c.kappa_hat * c.L_F * c.L_F * c.M_phi * c.M_phi;
  c.P = std::sqrt(26.0) / (3.0 * std::sqrt(c.c0)) * std::sqrt(inner_p);
  const double inner_q =
      c.kappa * std::pow(c.M_F, 4) * c.Lphi_unit * c.Lphi_unit * c.sigma_F * c.sigma_F +
      c.c0 * c.kappa_hat * c.M_phi * c.M_phi * c.sigma_J * c.sigma_J;
  c.Q = 26.0 / (9.0 * c.c0) * inner_q;

  if (c.smooth_outer || c.mu_psi > 0.0) c.L_Phi0 = c.L_Phi(0.0);
  c.L_Phi_gamma = c.L_Phi(gamma);
  return c;
}

namespace {

int round_clamp(double v, int n) {
  double r = std::ceil(v);
  if (r < 1.0) r = 1.0;
  if (r > static_cast<double>(n)) r = static_cast<double>(n);
  return static_cast<int>(r);
}

int derive_bhat0(int bhat0_in, double c1, int b, int T, int n) {
  if (bhat0_in > 0) return std::min(bhat0_in, n);
  return round_clamp(c1 * c1 * std::cbrt(static_cast<double>(b) * (T + 1)), n);
}

void check_theta(double theta, const char* recipe, const std::string& detail) {
  if (!(theta > 0.0) || theta > 1.0)
    throw ConfigError(std::string(recipe) + ": theta = " + std::to_string(theta) +
                      " outside (0, 1]; " + detail);
}

}  // namespace

ScheduleState make_schedule(ScheduleKind kind, int T, int b, int bhat0_in,
                            const Constants& consts, const BatchPlan& plan,
                            int num_samples, double gamma_const,
                            const ManualOverrides* manual) {
  if (T < 0) throw ConfigError("schedule: T must be >= 0");
  if (b < 1) throw ConfigError("schedule: b must be >= 1");
  const int n = num_samples;
  const double c0 = plan.c0;

  ScheduleState s;
  s.kind = kind;
  s.T = T;
  const int len = T + 1;
  s.gamma.assign(len, 0.0);
  s.beta.assign(len, 1.0);
  s.beta_hat.assign(len, 1.0);
  s.theta.assign(len, 1.0);
  s.eta.assign(len, 0.0);
  s.L_phi.assign(len, 0.0);
  s.b1.assign(len, b);
  s.b2.assign(len, b);
  s.bhat1 = std::min(b, n);
  s.bhat2 = s.bhat1;

  switch (kind) {
    case ScheduleKind::Thm1: {
      if (!(consts.mu_psi > 0.0) && !consts.smooth_outer)
        throw ConfigError("Thm1 schedule requires a smooth/strongly-concave outer");
      s.bhat0 = derive_bhat0(bhat0_in, plan.c1, b, T, n);
      s.b0 = round_clamp(c0 * s.bhat0, n);
      const double L = consts.L_Phi0;
      const double pool = static_cast<double>(s.bhat0) * (T + 1);
      const double beta = 1.0 - std::sqrt(static_cast<double>(b) / pool);
      if (!(beta > 0.0))
        throw ConfigError("Thm1: beta <= 0, need b < bhat0*(T+1)");
      const double theta = L * std::pow(b, 0.75) / (consts.P * std::pow(pool, 0.25));
      check_theta(theta, "Thm1", "need bhat0*(T+1)/b^3 > (L_Phi0/P)^4");
      const double eta = 2.0 / (L * (3.0 + theta));
      const int b12 = round_clamp(c0 * b, n);
      for (int t = 0; t < len; ++t) {
        s.beta[t] = s.beta_hat[t] = beta;
        s.theta[t] = theta;
        s.eta[t] = eta;
        s.L_phi[t] = L;
        s.b1[t] = s.b2[t] = b12;
      }
      break;
    }
    case ScheduleKind::Thm2: {
      if (!(consts.mu_psi > 0.0) && !consts.smooth_outer)
        throw ConfigError("Thm2 schedule requires a smooth/strongly-concave outer");
      s.bhat0 = derive_bhat0(bhat0_in, plan.c1, b, T, n);
      s.b0 = round_clamp(c0 * s.bhat0, n);
      const double L = consts.L_Phi0;
      const int b12 = round_clamp(c0 * b, n);
      for (int t = 0; t < len; ++t) {
        const double tp2 = static_cast<double>(t) + 2.0;
        s.beta[t] = s.beta_hat[t] = 1.0 - 1.0 / std::pow(tp2, 2.0 / 3.0);
        s.theta[t] = L * std::sqrt(static_cast<double>(b)) /
                     (consts.P * std::cbrt(tp2));
        s.eta[t] = 2.0 / (L * (3.0 + s.theta[t]));
        s.L_phi[t] = L;
        s.b1[t] = s.b2[t] = b12;
      }
      check_theta(s.theta[0], "Thm2", "reduce b or increase P");
      break;
    }
    case ScheduleKind::Thm3: {
      if (consts.smooth_outer || consts.mu_psi > 0.0)
        throw ConfigError("Thm3 schedule targets the nonsmooth outer (mu_psi = 0)");
      if (!(gamma_const > 0.0) || gamma_const > 1.0)
        throw ConfigError("Thm3: gamma must lie in (0, 1]");
      const double g2 = gamma_const * gamma_const;
      s.bhat0 = derive_bhat0(0, plan.c1, b, T, n);
      s.b0 = round_clamp(c0 * s.bhat0 / g2, n);
      const double L = consts.L_Phi(gamma_const);
      const double pool = static_cast<double>(s.bhat0) * (T + 1);
      const double beta = 1.0 - std::sqrt(static_cast<double>(b) / pool);
      if (!(beta > 0.0))
        throw ConfigError("Thm3: beta <= 0, need b < bhat0*(T+1)");
      const double theta = L * std::pow(b, 0.75) / (consts.P * std::pow(pool, 0.25));
      check_theta(theta, "Thm3", "need bhat0*(T+1)/b^3 > (L_Phi_gamma/P)^4");
      const double eta = 2.0 / (L * (3.0 + theta));
      const int b12 = round_clamp(c0 * b / g2, n);
      for (int t = 0; t < len; ++t) {
        s.gamma[t] = gamma_const;
        s.beta[t] = s.beta_hat[t] = beta;
        s.theta[t] = theta;
        s.eta[t] = eta;
        s.L_phi[t] = L;
        s.b1[t] = s.b2[t] = b12;
      }
      break;
    }
    case ScheduleKind::Thm4: {
      if (consts.smooth_outer || consts.mu_psi > 0.0)
        throw ConfigError("Thm4 schedule targets the nonsmooth outer (mu_psi = 0)");
      s.bhat0 = derive_bhat0(bhat0_in, plan.c1, b, T, n);
      for (int t = 0; t < len; ++t) {
        const double tp2 = static_cast<double>(t) + 2.0;
        s.gamma[t] = 1.0 / std::cbrt(tp2);
        s.beta[t] = s.beta_hat[t] = 1.0 - 1.0 / std::pow(tp2, 2.0 / 3.0);
        const double L = consts.L_Phi(s.gamma[t]);
        s.theta[t] = L * std::sqrt(static_cast<double>(b)) /
                     (consts.P * std::cbrt(tp2));
        check_theta(s.theta[t], "Thm4", "theta_t left (0, 1] at t=" + std::to_string(t));
        s.eta[t] = 2.0 / (L * (3.0 + s.theta[t]));
        s.L_phi[t] = L;
        s.b1[t] = s.b2[t] = round_clamp(c0 * b * std::pow(tp2, 2.0 / 3.0), n);
      }
      s.b0 = round_clamp(c0 * s.bhat0 / (s.gamma[0] * s.gamma[0]), n);
      break;
    }
    case ScheduleKind::Manual: {
      if (manual == nullptr)
        throw ConfigError("Manual schedule requires eta/theta overrides");
      if (!(manual->eta > 0.0)) throw ConfigError("Manual: eta must be positive");
      check_theta(manual->theta, "Manual", "choose theta from (0, 1]");
      const bool nonsmooth = !consts.smooth_outer && consts.mu_psi == 0.0;
      s.bhat0 = bhat0_in > 0 ? std::min(bhat0_in, n) : std::min(b, n);
      s.b0 = s.bhat0;
      for (int t = 0; t < len; ++t) {
        s.gamma[t] = nonsmooth ? 1.0 / (2.0 * std::cbrt(static_cast<double>(t) + 1.0))
                               : 0.0;
        s.beta[t] = s.beta_hat[t] = 1.0 - 1.0 / std::pow(static_cast<double>(t) + 2.0, 2.0 / 3.0);
        s.theta[t] = manual->theta;
        s.eta[t] = manual->eta;
        s.L_phi[t] = consts.L_Phi(s.gamma[t]);
        s.b1[t] = s.b2[t] = std::min(b, n);
      }
      break;
    }
  }
  return s;
}

}  // namespace hscg
