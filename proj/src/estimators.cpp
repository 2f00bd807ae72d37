#include "hscg/estimators.hpp"

#include <string>

namespace hscg {

namespace {

void check_batch(int size, int n, bool with_replacement, const char* name) {
  if (size < 1) throw ConfigError(std::string(name) + " must be >= 1");
  if (!with_replacement && size > n)
    throw ConfigError(std::string(name) + " exceeds sample count in without-replacement mode");
}

}  // namespace

void BatchPlan::validate(int num_samples) const {
  check_batch(b0, num_samples, with_replacement, "b0");
  check_batch(bhat0, num_samples, with_replacement, "bhat0");
  check_batch(b1, num_samples, with_replacement, "b1");
  check_batch(b2, num_samples, with_replacement, "b2");
  check_batch(bhat1, num_samples, with_replacement, "bhat1");
  check_batch(bhat2, num_samples, with_replacement, "bhat2");
  if (corr_F && b1 != b2)
    throw ConfigError("correlated value batches require b1 == b2");
  if (corr_J && bhat1 != bhat2)
    throw ConfigError("correlated Jacobian batches require bhat1 == bhat2");
  if (!(c0 > 0.0) || !(c1 > 0.0) || !(c2 >= 0.0))
    throw ConfigError("batch constants c0, c1 must be positive and c2 nonnegative");
}

std::vector<int> HybridEstimators::draw(int n, int k) {
  return plan_.with_replacement ? rng_.sample_with_replacement(n, k)
                                : rng_.sample_without_replacement(n, k);
}

HybridEstimators HybridEstimators::init(const CompositionProblem& problem,
                                        const Vec& x0, const BatchPlan& plan,
                                        std::uint64_t seed) {
  if (!x0.allFinite()) throw std::invalid_argument("init: non-finite x0");
  const int n = problem.num_samples();
  plan.validate(n);

  HybridEstimators est(plan, seed);
  const int q = problem.dim_q();
  const int p = problem.dim_p();

  est.F_ = Vec::Zero(q);
  Vec tmp(q);
  for (int i : est.draw(n, plan.b0)) {
    problem.sample_value(x0, i, tmp);
    est.F_ += tmp;
  }
  est.F_ /= static_cast<double>(plan.b0);

  est.J_ = Mat::Zero(q, p);
  const double w = 1.0 / static_cast<double>(plan.bhat0);
  for (int i : est.draw(n, plan.bhat0)) problem.add_jacobian(x0, i, w, est.J_);

  est.x_prev_ = x0;
  est.t_ = 0;
  return est;
}

void HybridEstimators::update_F(const CompositionProblem& problem,
                                const Vec& x_t, double beta, int b1, int b2) {
  if (!(beta >= 0.0 && beta <= 1.0))
    throw ConfigError("update_F: beta outside [0, 1]");
  const int n = problem.num_samples();
  check_batch(b1, n, plan_.with_replacement, "b1");
  check_batch(b2, n, plan_.with_replacement, "b2");

  Vec next = beta * F_;
  Vec f_new(F_.size()), f_old(F_.size());

  if (plan_.corr_F && beta > 0.0 && beta < 1.0) {
    // Shared batch: each F(x_t, i) serves both the increment and the plain
    // term, saving b1 evaluations per iteration.
    const double w_new = beta / b1 + (1.0 - beta) / b2;
    for (int i : draw(n, b1)) {
      problem.sample_value(x_t, i, f_new);
      problem.sample_value(x_prev_, i, f_old);
      next += w_new * f_new - (beta / b1) * f_old;
    }
  } else {
    if (beta > 0.0) {
      for (int i : draw(n, b1)) {
        problem.sample_value(x_t, i, f_new);
        problem.sample_value(x_prev_, i, f_old);
        next += (beta / b1) * (f_new - f_old);
      }
    }
    if (beta < 1.0) {
      for (int i : draw(n, b2)) {
        problem.sample_value(x_t, i, f_new);
        next += ((1.0 - beta) / b2) * f_new;
      }
    }
  }
  F_ = std::move(next);
}

void HybridEstimators::update_J(const CompositionProblem& problem,
                                const Vec& x_t, double beta_hat, int bhat1,
                                int bhat2) {
  if (!(beta_hat >= 0.0 && beta_hat <= 1.0))
    throw ConfigError("update_J: beta_hat outside [0, 1]");
  const int n = problem.num_samples();
  check_batch(bhat1, n, plan_.with_replacement, "bhat1");
  check_batch(bhat2, n, plan_.with_replacement, "bhat2");

  J_ *= beta_hat;
  if (plan_.corr_J && beta_hat > 0.0 && beta_hat < 1.0) {
    const double w_new = beta_hat / bhat1 + (1.0 - beta_hat) / bhat2;
    for (int i : draw(n, bhat1)) {
      problem.add_jacobian(x_t, i, w_new, J_);
      problem.add_jacobian(x_prev_, i, -beta_hat / bhat1, J_);
    }
  } else {
    if (beta_hat > 0.0) {
      for (int i : draw(n, bhat1)) {
        problem.add_jacobian(x_t, i, beta_hat / bhat1, J_);
        problem.add_jacobian(x_prev_, i, -beta_hat / bhat1, J_);
      }
    }
    if (beta_hat < 1.0) {
      for (int i : draw(n, bhat2)) {
        problem.add_jacobian(x_t, i, (1.0 - beta_hat) / bhat2, J_);
      }
    }
  }
}

void HybridEstimators::advance(const Vec& x_t) {
  x_prev_ = x_t;
  ++t_;
}

Vec HybridEstimators::gradient_estimate(const OuterFunction& outer,
                                        double gamma) const {
  const Vec g = outer.grad_phi_gamma(F_, gamma);
  return J_.transpose() * g;
}

}  // namespace hscg
