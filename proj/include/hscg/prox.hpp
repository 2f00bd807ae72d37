#ifndef HSCG_PROX_HPP
#define HSCG_PROX_HPP

#include <Eigen/Dense>

#include "hscg/errors.hpp"

namespace hscg {

using Vec = Eigen::VectorXd;

// Coordinatewise soft-threshold: argmin_z tau*||z||_1 + 0.5*||z - x||^2.
Vec prox_l1(const Vec& x, double tau);

// argmin_z (lambda/2)*||z||^2 + ||z - x||^2/(2*eta) = x / (1 + eta*lambda).
Vec prox_sql2(const Vec& x, double eta, double lambda);

// Euclidean projection onto { y : ||y||_1 <= r }. Interior points are
// returned unchanged (bitwise). Sort-based threshold, O(n log n).
Vec project_l1_ball(const Vec& z, double r);

enum class RegKind { Zero, L1, SquaredL2 };

/// Regularizer R(x): value, prox_{eta R}, and the subdifferential distance
/// dist(0, g + dR(x)) used by the KKT residual.
struct Regularizer {
  RegKind kind = RegKind::Zero;
  double lambda = 0.0;

  static Regularizer zero() { return {RegKind::Zero, 0.0}; }
  static Regularizer l1(double lambda) { return {RegKind::L1, lambda}; }
  static Regularizer squared_l2(double lambda) {
    return {RegKind::SquaredL2, lambda};
  }

  double value(const Vec& x) const;
  Vec prox(const Vec& x, double eta) const;
};

// Exact Euclidean distance from 0 to g + dR(x).
double subdiff_dist_R(const Regularizer& reg, const Vec& x, const Vec& g);

}  // namespace hscg

#endif
