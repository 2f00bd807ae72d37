#include "hscg/problem.hpp"

#include <algorithm>
#include <cmath>

namespace hscg {

Vec CompositionProblem::mean_value(const Vec& x) const {
  const int n = num_samples();
  Vec acc = Vec::Zero(dim_q());
  Vec tmp(dim_q());
  for (int i = 0; i < n; ++i) {
    sample_value(x, i, tmp);
    acc += tmp;
  }
  return acc / static_cast<double>(n);
}

Mat CompositionProblem::mean_jacobian(const Vec& x) const {
  const int n = num_samples();
  Mat acc = Mat::Zero(dim_q(), dim_p());
  const double w = 1.0 / static_cast<double>(n);
  for (int i = 0; i < n; ++i) add_jacobian(x, i, w, acc);
  return acc;
}

ProblemConstants estimate_constants(const CompositionProblem& problem,
                                    const Vec& x0, double radius,
                                    std::uint64_t seed, int n_pairs) {
  Rng rng(seed);
  const int p = problem.dim_p();
  const int q = problem.dim_q();
  const int n = problem.num_samples();

  double max_jac_sq = 0.0;    // ||F'(x,xi)||_F^2
  double max_lip_sq = 0.0;    // ||F'(x,xi)-F'(y,xi)||^2 / ||x-y||^2
  Mat jx(q, p), jy(q, p);
  for (int k = 0; k < n_pairs; ++k) {
    Vec x = x0;
    for (int d = 0; d < p; ++d) x[d] += radius * rng.normal();
    Vec y = x;
    for (int d = 0; d < p; ++d) y[d] += radius * rng.normal();
    const int i = static_cast<int>(rng.uniform_int(n));
    jx.setZero();
    jy.setZero();
    problem.add_jacobian(x, i, 1.0, jx);
    problem.add_jacobian(y, i, 1.0, jy);
    max_jac_sq = std::max(max_jac_sq, jx.squaredNorm());
    const double dist_sq = (x - y).squaredNorm();
    if (dist_sq > 1e-16)
      max_lip_sq = std::max(max_lip_sq, (jx - jy).squaredNorm() / dist_sq);
  }

  // Variances: mean over the dataset at a handful of sampled points.
  double max_var_f = 0.0, max_var_j = 0.0;
  const int n_points = 10;
  Vec fv(q);
  for (int k = 0; k < n_points; ++k) {
    Vec x = x0;
    for (int d = 0; d < p; ++d) x[d] += radius * rng.normal();
    const Vec fbar = problem.mean_value(x);
    const Mat jbar = problem.mean_jacobian(x);
    double var_f = 0.0, var_j = 0.0;
    for (int i = 0; i < n; ++i) {
      problem.sample_value(x, i, fv);
      var_f += (fv - fbar).squaredNorm();
      jx.setZero();
      problem.add_jacobian(x, i, 1.0, jx);
      var_j += (jx - jbar).squaredNorm();
    }
    max_var_f = std::max(max_var_f, var_f / n);
    max_var_j = std::max(max_var_j, var_j / n);
  }

  ProblemConstants pc;
  pc.M_F = 1.1 * std::sqrt(max_jac_sq);
  pc.L_F = 1.1 * std::sqrt(max_lip_sq);
  pc.sigma_F = 1.1 * std::sqrt(max_var_f);
  pc.sigma_J = 1.1 * std::sqrt(max_var_j);
  pc.estimated = true;
  pc.estimation_seed = seed;
  pc.estimation_pairs = n_pairs;
  return pc;
}

}  // namespace hscg
