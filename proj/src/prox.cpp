#include "hscg/prox.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace hscg {

Vec prox_l1(const Vec& x, double tau) {
  if (!(tau > 0.0)) throw ConfigError("prox_l1: tau must be positive");
  Vec out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double a = std::abs(x[i]) - tau;
    out[i] = a > 0.0 ? (x[i] > 0.0 ? a : -a) : 0.0;
  }
  return out;
}

Vec prox_sql2(const Vec& x, double eta, double lambda) {
  if (!(eta > 0.0) || !(lambda > 0.0))
    throw ConfigError("prox_sql2: eta and lambda must be positive");
  return x / (1.0 + eta * lambda);
}

Vec project_l1_ball(const Vec& z, double r) {
  if (!(r > 0.0)) throw ConfigError("project_l1_ball: radius must be positive");
  const double l1 = z.lpNorm<1>();
  if (l1 <= r) return z;

  // Threshold tau solving sum_i max(|z_i| - tau, 0) = r over sorted |z|.
  std::vector<double> mag(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) mag[i] = std::abs(z[i]);
  std::sort(mag.begin(), mag.end(), std::greater<double>());
  double cumsum = 0.0, tau = 0.0;
  for (std::size_t k = 0; k < mag.size(); ++k) {
    cumsum += mag[k];
    const double cand = (cumsum - r) / static_cast<double>(k + 1);
    if (k + 1 == mag.size() || mag[k + 1] <= cand) {
      tau = cand;
      break;
    }
  }
  Vec out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double a = std::abs(z[i]) - tau;
    out[i] = a > 0.0 ? (z[i] > 0.0 ? a : -a) : 0.0;
  }
  return out;
}

double Regularizer::value(const Vec& x) const {
  switch (kind) {
    case RegKind::Zero:
      return 0.0;
    case RegKind::L1:
      return lambda * x.lpNorm<1>();
    case RegKind::SquaredL2:
      return 0.5 * lambda * x.squaredNorm();
  }
  return 0.0;
}

Vec Regularizer::prox(const Vec& x, double eta) const {
  switch (kind) {
    case RegKind::Zero:
      return x;
    case RegKind::L1:
      if (lambda == 0.0) return x;
      return prox_l1(x, eta * lambda);
    case RegKind::SquaredL2:
      if (lambda == 0.0) return x;
      return prox_sql2(x, eta, lambda);
  }
  return x;
}

double subdiff_dist_R(const Regularizer& reg, const Vec& x, const Vec& g) {
  switch (reg.kind) {
    case RegKind::Zero:
      return g.norm();
    case RegKind::L1: {
      double sq = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        double d;
        if (x[i] != 0.0) {
          d = g[i] + (x[i] > 0.0 ? reg.lambda : -reg.lambda);
        } else {
          d = std::max(std::abs(g[i]) - reg.lambda, 0.0);
        }
        sq += d * d;
      }
      return std::sqrt(sq);
    }
    case RegKind::SquaredL2:
      return (g + reg.lambda * x).norm();
  }
  throw NotImplementedError("subdiff_dist_R: unsupported regularizer");
}

}  // namespace hscg
