#include "hscg/outer.hpp"

#include "hscg/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace hscg {

double spectral_norm(const Mat& K, double rel_tol) {
  if (K.size() == 0) return 0.0;
  Vec v(K.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v[i] = 1.0 / static_cast<double>(i + 1);
  v.normalize();
  double s_prev = 0.0;
  for (int it = 0; it < 10000; ++it) {
    const Vec w = K * v;
    const double s = w.norm();
    if (s == 0.0) return 0.0;
    Vec v_next = K.transpose() * w;
    const double vn = v_next.norm();
    if (vn == 0.0) return s;
    v = v_next / vn;
    if (it > 0 && std::abs(s - s_prev) <= rel_tol * s) return s;
    s_prev = s;
  }
  return s_prev;
}

namespace {

// sup of ||y - y_dot|| over the L1 ball of the given radius; attained at a
// vertex r*s*e_i.
double l1_ball_max_dist(double radius, const Vec& y_dot) {
  const double base = y_dot.squaredNorm();
  double best = 0.0;
  for (Eigen::Index i = 0; i < y_dot.size(); ++i) {
    for (double s : {radius, -radius}) {
      const double d = base - y_dot[i] * y_dot[i] + (s - y_dot[i]) * (s - y_dot[i]);
      best = std::max(best, d);
    }
  }
  return std::sqrt(best);
}

void require_finite(const Vec& u, const char* what) {
  if (!u.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite input");
}

}  // namespace

OuterFunction OuterFunction::smooth(std::function<double(const Vec&)> value,
                                    std::function<Vec(const Vec&)> grad,
                                    double smooth_L, double smooth_M) {
  OuterFunction f;
  f.kind_ = Kind::Smooth;
  f.value_ = std::move(value);
  f.grad_ = std::move(grad);
  f.smooth_L_ = smooth_L;
  f.smooth_M_ = smooth_M;
  f.mu_psi_ = 1.0;
  return f;
}

OuterFunction OuterFunction::l1_ball(int q, double radius) {
  OuterFunction f;
  f.kind_ = Kind::MaxForm;
  f.n_ = q;
  f.k_identity_ = true;
  f.k_norm_ = 1.0;
  f.psi_ = PsiKind::L1BallIndicator;
  f.radius_ = radius;
  f.mu_psi_ = 0.0;
  f.M_psi_ = radius;
  f.y_dot_ = Vec::Zero(q);
  f.B_psi_ = 0.5 * radius * radius;
  f.D_psi_ = radius;
  return f;
}

OuterFunction OuterFunction::l1_ball_with_K(Mat K, double radius) {
  OuterFunction f;
  f.kind_ = Kind::MaxForm;
  f.n_ = static_cast<int>(K.cols());
  f.K_ = std::move(K);
  f.k_identity_ = false;
  f.k_norm_ = spectral_norm(f.K_);
  f.psi_ = PsiKind::L1BallIndicator;
  f.radius_ = radius;
  f.mu_psi_ = 0.0;
  f.M_psi_ = radius;
  f.y_dot_ = Vec::Zero(f.n_);
  const double dmax = l1_ball_max_dist(radius, f.y_dot_);
  f.B_psi_ = 0.5 * dmax * dmax;
  f.D_psi_ = dmax;
  return f;
}

OuterFunction OuterFunction::bounded_quadratic(Mat K, double radius, Vec y_dot) {
  OuterFunction f;
  f.kind_ = Kind::MaxForm;
  f.n_ = static_cast<int>(K.cols());
  f.K_ = std::move(K);
  f.k_identity_ = false;
  f.k_norm_ = spectral_norm(f.K_);
  f.psi_ = PsiKind::BoundedQuadratic;
  f.radius_ = radius;
  f.mu_psi_ = 1.0;
  f.M_psi_ = y_dot.norm() + radius;
  f.y_dot_ = std::move(y_dot);
  f.B_psi_ = 0.5 * radius * radius;
  f.D_psi_ = radius;
  return f;
}

double OuterFunction::lipschitz_const() const {
  if (kind_ == Kind::Smooth) return smooth_M_;
  return M_psi_ * k_norm_;
}

double OuterFunction::smoothness_const(double gamma) const {
  if (kind_ == Kind::Smooth) return smooth_L_;
  const double denom = gamma + mu_psi_;
  if (!(denom > 0.0))
    throw ConfigError("smoothness_const: gamma = 0 with non-strongly-convex psi");
  return k_norm_ * k_norm_ / denom;
}

void OuterFunction::check_gamma(double gamma) const {
  if (gamma < 0.0) throw ConfigError("gamma must be nonnegative");
  if (gamma == 0.0 && mu_psi_ == 0.0)
    throw ConfigError("gamma = 0 requires a strongly convex psi");
}

Vec OuterFunction::apply_Kt(const Vec& u) const {
  return k_identity_ ? u : Vec(K_.transpose() * u);
}

Vec OuterFunction::apply_K(const Vec& y) const {
  return k_identity_ ? y : Vec(K_ * y);
}

Vec OuterFunction::y_star(const Vec& u, double gamma) const {
  if (kind_ != Kind::MaxForm)
    throw ConfigError("y_star: outer function has no max-form dual");
  require_finite(u, "y_star");
  check_gamma(gamma);
  switch (psi_) {
    case PsiKind::L1BallIndicator: {
      // prox_{psi/gamma}(y_dot + K^T u / gamma): projection onto the ball.
      const Vec v = y_dot_ + apply_Kt(u) / gamma;
      return project_l1_ball(v, radius_);
    }
    case PsiKind::BoundedQuadratic: {
      Vec w = apply_Kt(u) / (1.0 + gamma);
      const double wn = w.norm();
      if (wn > radius_) w *= radius_ / wn;
      return y_dot_ + w;
    }
  }
  throw NotImplementedError("y_star: unknown psi");
}

Vec OuterFunction::grad_phi_gamma(const Vec& u, double gamma) const {
  if (kind_ == Kind::Smooth) {
    require_finite(u, "grad_phi_gamma");
    return grad_(u);
  }
  return apply_K(y_star(u, gamma));
}

double OuterFunction::phi_gamma_value(const Vec& u, double gamma) const {
  if (kind_ != Kind::MaxForm)
    throw ConfigError("phi_gamma_value: outer function is not max-form");
  const Vec ys = y_star(u, gamma);
  return u.dot(apply_K(ys)) - psi_value(ys) - gamma * b_value(ys);
}

double OuterFunction::phi0_value(const Vec& u) const {
  if (kind_ == Kind::Smooth) return value_(u);
  switch (psi_) {
    case PsiKind::L1BallIndicator:
      return radius_ * apply_Kt(u).lpNorm<Eigen::Infinity>();
    case PsiKind::BoundedQuadratic: {
      const Vec w = apply_Kt(u);
      const double wn = w.norm();
      const double inner = wn <= radius_ ? 0.5 * wn * wn
                                         : radius_ * wn - 0.5 * radius_ * radius_;
      return w.dot(y_dot_) + inner;
    }
  }
  throw NotImplementedError("phi0_value: unknown psi");
}

double OuterFunction::psi_value(const Vec& y) const {
  switch (psi_) {
    case PsiKind::L1BallIndicator:
      if (y.lpNorm<1>() > radius_ + 1e-12)
        throw std::invalid_argument("psi_value: y outside the L1 ball");
      return 0.0;
    case PsiKind::BoundedQuadratic: {
      const Vec d = y - y_dot_;
      if (d.norm() > radius_ + 1e-12)
        throw std::invalid_argument("psi_value: y outside the domain ball");
      return 0.5 * d.squaredNorm();
    }
  }
  return 0.0;
}

double OuterFunction::b_value(const Vec& y) const {
  return 0.5 * (y - y_dot_).squaredNorm();
}

double OuterFunction::subdiff_dist_psi(const Vec& y, const Vec& u) const {
  if (kind_ != Kind::MaxForm)
    throw NotImplementedError("subdiff_dist_psi: outer function is not max-form");
  require_finite(u, "subdiff_dist_psi");
  switch (psi_) {
    case PsiKind::L1BallIndicator: {
      const double l1 = y.lpNorm<1>();
      if (l1 > radius_ + 1e-12)
        throw std::invalid_argument("subdiff_dist_psi: y outside the L1 ball");
      // Interior/boundary split with tolerance relative to the radius.
      if (l1 < radius_ * (1.0 - 1e-9)) return u.norm();

      // Normal cone at a boundary point: g_i = t*sign(y_i) on the support,
      // |g_i| <= t off it, t >= 0. The squared distance is piecewise
      // quadratic in t; minimize exactly over segment roots and breakpoints.
      double supp_sum = 0.0;
      int supp_count = 0;
      std::vector<double> off_mag;
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (y[i] != 0.0) {
          supp_sum += y[i] > 0.0 ? u[i] : -u[i];
          ++supp_count;
        } else {
          off_mag.push_back(std::abs(u[i]));
        }
      }
      std::sort(off_mag.begin(), off_mag.end(), std::greater<double>());
      const int m_total = static_cast<int>(off_mag.size());

      auto dist_sq_at = [&](double t) {
        double sq = 0.0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
          if (y[i] != 0.0) {
            const double d = u[i] - (y[i] > 0.0 ? t : -t);
            sq += d * d;
          } else {
            const double d = std::max(std::abs(u[i]) - t, 0.0);
            sq += d * d;
          }
        }
        return sq;
      };

      double best = dist_sq_at(0.0);
      double prefix = 0.0;
      for (int m = 0; m <= m_total; ++m) {
        if (m > 0) prefix += off_mag[m - 1];
        const double hi = m > 0 ? off_mag[m - 1] : std::numeric_limits<double>::infinity();
        const double lo = m < m_total ? off_mag[m] : 0.0;
        double t_hat = (supp_sum + prefix) / static_cast<double>(supp_count + m);
        t_hat = std::clamp(t_hat, std::max(lo, 0.0), hi);
        if (t_hat >= 0.0) best = std::min(best, dist_sq_at(t_hat));
        if (lo >= 0.0) best = std::min(best, dist_sq_at(lo));
      }
      return std::sqrt(best);
    }
    case PsiKind::BoundedQuadratic: {
      const Vec d = y - y_dot_;
      const double dn = d.norm();
      if (dn > radius_ + 1e-12)
        throw std::invalid_argument("subdiff_dist_psi: y outside the domain ball");
      if (dn < radius_ * (1.0 - 1e-9)) return (u - d).norm();
      // dpsi(y) = { c*d : c >= 1 } at the boundary.
      const double c = std::max(1.0, u.dot(d) / d.squaredNorm());
      return (u - c * d).norm();
    }
  }
  throw NotImplementedError("subdiff_dist_psi: unknown psi");
}

}  // namespace hscg
