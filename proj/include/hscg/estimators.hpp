#ifndef HSCG_ESTIMATORS_HPP
#define HSCG_ESTIMATORS_HPP

#include <cstdint>

#include "hscg/outer.hpp"
#include "hscg/problem.hpp"

namespace hscg {

/// Batch configuration for the hybrid estimators.
///
/// corr_F / corr_J select whether the increment batch and the plain
/// mini-batch coincide (the STORM-style single-batch mode, kappa = 2) or are
/// drawn independently (kappa = 1). Sampling is uniform without replacement
/// by default.
struct BatchPlan {
  int b0 = 1;
  int bhat0 = 1;
  int b1 = 1, b2 = 1;
  int bhat1 = 1, bhat2 = 1;
  double c0 = 1.0, c1 = 1.0, c2 = 1.0;
  bool corr_F = true;
  bool corr_J = true;
  bool with_replacement = false;

  int kappa() const { return corr_F ? 2 : 1; }
  int kappa_hat() const { return corr_J ? 2 : 1; }

  // Throws ConfigError on invalid sizes (e.g. batch > N without replacement).
  void validate(int num_samples) const;
};

/// Recursive hybrid estimators of the mean map F and its Jacobian.
///
/// F_t = beta*F_{t-1} + (beta/b1) * sum_{B1} [F(x_t,xi) - F(x_{t-1},xi)]
///       + ((1-beta)/b2) * sum_{B2} F(x_t,zeta),
/// and the same recursion for the Jacobian with (beta_hat, bhat1, bhat2).
/// beta = 1 gives the SARAH correction, beta = 0 a plain mini-batch mean.
/// Terms with zero coefficient are neither sampled nor evaluated.
class HybridEstimators {
 public:
  // F_0 / J_0 as plain means over batches of size plan.b0 / plan.bhat0.
  static HybridEstimators init(const CompositionProblem& problem, const Vec& x0,
                               const BatchPlan& plan, std::uint64_t seed);

  // One recursion step for the value estimator at the new iterate x_t;
  // b1/b2 may vary per iteration (growing-batch schedules).
  void update_F(const CompositionProblem& problem, const Vec& x_t, double beta,
                int b1, int b2);

  // Jacobian counterpart.
  void update_J(const CompositionProblem& problem, const Vec& x_t,
                double beta_hat, int bhat1, int bhat2);

  // Store x_t as the previous iterate and bump the iteration index. Call
  // after both updates for the iteration.
  void advance(const Vec& x_t);

  // v = J^T grad phi_gamma(F); exactly one dual prox evaluation in max-form.
  Vec gradient_estimate(const OuterFunction& outer, double gamma) const;

  const Vec& value_estimate() const { return F_; }
  const Mat& jacobian_estimate() const { return J_; }
  const Vec& previous_iterate() const { return x_prev_; }
  int iteration() const { return t_; }

 private:
  HybridEstimators(const BatchPlan& plan, std::uint64_t seed)
      : plan_(plan), rng_(seed) {}

  std::vector<int> draw(int n, int k);

  BatchPlan plan_;
  Rng rng_;
  Vec F_;
  Mat J_;
  Vec x_prev_;
  int t_ = 0;
};

}  // namespace hscg

#endif
