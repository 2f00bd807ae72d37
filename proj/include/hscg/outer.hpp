#ifndef HSCG_OUTER_HPP
#define HSCG_OUTER_HPP

#include <Eigen/Dense>
#include <functional>

#include "hscg/errors.hpp"

namespace hscg {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Spectral norm by power iteration to the given relative tolerance.
double spectral_norm(const Mat& K, double rel_tol = 1e-8);

enum class PsiKind {
  L1BallIndicator,   // psi = indicator of { ||y||_1 <= r }, mu_psi = 0
  BoundedQuadratic,  // psi = 0.5*||y - y_dot||^2 on { ||y - y_dot|| <= r },
                     // mu_psi = 1
};

/// Outer function phi of the composition phi(E[F(x,xi)]).
///
/// Two variants:
///  - Smooth: phi given directly by a value/gradient pair with a smoothness
///    constant; no smoothing machinery is involved (gamma is ignored).
///  - MaxForm: phi_0(u) = max_y { <u, K y> - psi(y) }, smoothed with the
///    quadratic prox term b(y) = 0.5*||y - y_dot||^2 into
///    phi_gamma(u) = max_y { <u, K y> - psi(y) - gamma*b(y) }.
///
/// The dual solution y*_gamma(u) is the proximal point
/// prox_{psi/gamma}(y_dot + K^T u / gamma); for an indicator psi this is a
/// Euclidean projection.
class OuterFunction {
 public:
  enum class Kind { Smooth, MaxForm };

  // Smooth variant. smooth_L bounds the gradient's Lipschitz constant,
  // smooth_M bounds the gradient norm over the working domain.
  static OuterFunction smooth(std::function<double(const Vec&)> value,
                              std::function<Vec(const Vec&)> grad,
                              double smooth_L, double smooth_M);

  // MaxForm with psi the indicator of the L1 ball of the given radius,
  // K = I_q, y_dot = 0.
  static OuterFunction l1_ball(int q, double radius = 1.0);

  // Same with an explicit coupling matrix K (q x n).
  static OuterFunction l1_ball_with_K(Mat K, double radius = 1.0);

  // MaxForm with a 1-strongly-convex psi on a Euclidean ball; yields a
  // smooth phi_0, usable with gamma = 0.
  static OuterFunction bounded_quadratic(Mat K, double radius, Vec y_dot);

  Kind kind() const { return kind_; }
  bool is_max_form() const { return kind_ == Kind::MaxForm; }
  int dual_dim() const { return n_; }
  double mu_psi() const { return mu_psi_; }
  double M_psi() const { return M_psi_; }
  double B_psi() const { return B_psi_; }
  double D_psi() const { return D_psi_; }
  double psi_radius() const { return radius_; }
  const Vec& y_dot() const { return y_dot_; }
  double k_norm() const { return k_norm_; }
  const Mat& K() const { return K_; }
  bool k_is_identity() const { return k_identity_; }

  // Lipschitz bound M_{phi_gamma} and smoothness L_{phi_gamma} of the
  // (smoothed) outer function.
  double lipschitz_const() const;
  double smoothness_const(double gamma) const;

  // Dual maximizer y*_gamma(u). Requires gamma > 0 unless mu_psi > 0.
  Vec y_star(const Vec& u, double gamma) const;

  // Gradient of phi_gamma: K y*_gamma(u) (Smooth: grad(u), gamma ignored).
  Vec grad_phi_gamma(const Vec& u, double gamma) const;

  // phi_gamma(u) = <u, K y*> - psi(y*) - gamma*b(y*). MaxForm only.
  double phi_gamma_value(const Vec& u, double gamma) const;

  // Unsmoothed outer value phi_0(u) (metric use).
  double phi0_value(const Vec& u) const;

  // Euclidean distance from u to dpsi(y). MaxForm only; y must be feasible.
  double subdiff_dist_psi(const Vec& y, const Vec& u) const;

  // psi value and prox-term value at a feasible y.
  double psi_value(const Vec& y) const;
  double b_value(const Vec& y) const;

  Vec apply_Kt(const Vec& u) const;  // K^T u
  Vec apply_K(const Vec& y) const;   // K y

 private:
  OuterFunction() = default;
  void check_gamma(double gamma) const;

  Kind kind_ = Kind::Smooth;

  // Smooth fields.
  std::function<double(const Vec&)> value_;
  std::function<Vec(const Vec&)> grad_;
  double smooth_L_ = 0.0;
  double smooth_M_ = 0.0;

  // MaxForm fields.
  int n_ = 0;
  Mat K_;
  bool k_identity_ = true;
  PsiKind psi_ = PsiKind::L1BallIndicator;
  double radius_ = 1.0;
  double mu_psi_ = 0.0;
  double M_psi_ = 1.0;
  Vec y_dot_;
  double B_psi_ = 0.5;
  double D_psi_ = 1.0;
  double k_norm_ = 1.0;
};

}  // namespace hscg

#endif
