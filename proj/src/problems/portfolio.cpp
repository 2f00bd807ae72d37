#include "hscg/problems/portfolio.hpp"

#include <cmath>

namespace hscg {

void PortfolioProblem::sample_value(const Vec& x, int i, Vec& out) const {
  const double z = r_.row(i).dot(x);
  out.resize(2);
  out[0] = z;
  out[1] = z * z;
}

void PortfolioProblem::add_jacobian(const Vec& x, int i, double weight,
                                    Eigen::Ref<Mat> acc) const {
  const double z = r_.row(i).dot(x);
  acc.row(0) += weight * r_.row(i);
  acc.row(1) += (2.0 * z * weight) * r_.row(i);
}

OuterFunction portfolio_outer(double rho, double u1_bound) {
  if (!(rho > 0.0)) throw ConfigError("portfolio_outer: rho must be positive");
  auto value = [rho](const Vec& u) {
    return -u[0] - rho * u[0] * u[0] + rho * u[1];
  };
  auto grad = [rho](const Vec& u) {
    Vec g(2);
    g[0] = -1.0 - 2.0 * rho * u[0];
    g[1] = rho;
    return g;
  };
  const double smooth_L = 2.0 * rho;
  const double smooth_M =
      std::sqrt((1.0 + 2.0 * rho * u1_bound) * (1.0 + 2.0 * rho * u1_bound) +
                rho * rho);
  return OuterFunction::smooth(value, grad, smooth_L, smooth_M);
}

Mat synthetic_portfolio_returns(int N, int p, std::uint64_t seed) {
  Rng rng(seed);
  Mat r(N, p);
  // Per-asset mean drift plus noise, loosely shaped like monthly returns.
  Vec mu(p);
  for (int j = 0; j < p; ++j) mu[j] = 0.02 * rng.normal();
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < p; ++j) r(i, j) = mu[j] + 0.1 * rng.normal();
  return r;
}

}  // namespace hscg
