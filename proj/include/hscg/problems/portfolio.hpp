#ifndef HSCG_PROBLEMS_PORTFOLIO_HPP
#define HSCG_PROBLEMS_PORTFOLIO_HPP

#include <cstdint>

#include "hscg/outer.hpp"
#include "hscg/problem.hpp"

namespace hscg {

/// Risk-averse portfolio composition: per period i with return row r_i,
/// F(x, i) = (<r_i, x>, <r_i, x>^2), so the mean-variance reward
/// E[h] - rho*Var[h] becomes a function of E[F].
class PortfolioProblem : public CompositionProblem {
 public:
  // returns: N x p matrix of per-period asset returns.
  explicit PortfolioProblem(Mat returns) : r_(std::move(returns)) {}

  int dim_p() const override { return static_cast<int>(r_.cols()); }
  int dim_q() const override { return 2; }
  int num_samples() const override { return static_cast<int>(r_.rows()); }

  void sample_value(const Vec& x, int i, Vec& out) const override;
  void add_jacobian(const Vec& x, int i, double weight,
                    Eigen::Ref<Mat> acc) const override;

  const Mat& returns() const { return r_; }

 private:
  Mat r_;
};

// Smooth outer for the minimization form of the mean-variance objective:
// value(u) = -u1 - rho*u1^2 + rho*u2, grad(u) = (-1 - 2*rho*u1, rho).
// u1_bound caps |u1| over the working domain for the Lipschitz estimate.
OuterFunction portfolio_outer(double rho, double u1_bound = 10.0);

// Synthetic Gaussian return matrix for desk-scale experiments.
Mat synthetic_portfolio_returns(int N, int p, std::uint64_t seed);

}  // namespace hscg

#endif
