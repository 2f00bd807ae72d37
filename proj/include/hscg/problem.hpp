#ifndef HSCG_PROBLEM_HPP
#define HSCG_PROBLEM_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <memory>

#include "hscg/rng.hpp"

namespace hscg {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Finite-sample oracle for a stochastic vector map and its Jacobian.
///
/// The map takes x in R^p to a q-vector per sample index i < N; the library
/// only ever touches it through sample_value / add_jacobian, which must be
/// deterministic functions of (x, i) and safe to call concurrently.
class CompositionProblem {
 public:
  virtual ~CompositionProblem() = default;

  virtual int dim_p() const = 0;
  virtual int dim_q() const = 0;
  virtual int num_samples() const = 0;

  // out (length q) <- value of sample i at x.
  virtual void sample_value(const Vec& x, int i, Vec& out) const = 0;

  // acc (q x p) += weight * Jacobian of sample i at x.
  virtual void add_jacobian(const Vec& x, int i, double weight,
                            Eigen::Ref<Mat> acc) const = 0;

  // Dense Jacobian of one sample; convenience for tests and small problems.
  Mat sample_jacobian(const Vec& x, int i) const {
    Mat j = Mat::Zero(dim_q(), dim_p());
    add_jacobian(x, i, 1.0, j);
    return j;
  }

  // Exact mean value / mean Jacobian over all samples.
  Vec mean_value(const Vec& x) const;
  Mat mean_jacobian(const Vec& x) const;
};

// Per-run oracle-call counters; epochs are value_calls / N.
struct OracleCounter {
  std::int64_t value_calls = 0;
  std::int64_t jacobian_calls = 0;
};

// Counting view over a problem. Metric evaluations bypass this wrapper so
// they never distort the counters.
class CountingProblem : public CompositionProblem {
 public:
  CountingProblem(const CompositionProblem& inner, OracleCounter& counter)
      : inner_(inner), counter_(counter) {}

  int dim_p() const override { return inner_.dim_p(); }
  int dim_q() const override { return inner_.dim_q(); }
  int num_samples() const override { return inner_.num_samples(); }

  void sample_value(const Vec& x, int i, Vec& out) const override {
    ++counter_.value_calls;
    inner_.sample_value(x, i, out);
  }

  void add_jacobian(const Vec& x, int i, double weight,
                    Eigen::Ref<Mat> acc) const override {
    ++counter_.jacobian_calls;
    inner_.add_jacobian(x, i, weight, acc);
  }

 private:
  const CompositionProblem& inner_;
  OracleCounter& counter_;
};

/// Problem-level constants: M_F bounds E||F'(x,xi)||^2, L_F the average
/// smoothness of the samples, sigma_F / sigma_J the value / Jacobian
/// variances. Either supplied by the problem or estimated by sampling.
struct ProblemConstants {
  double M_F = 0.0;
  double L_F = 0.0;
  double sigma_F = 0.0;
  double sigma_J = 0.0;
  bool estimated = false;
  std::uint64_t estimation_seed = 0;
  int estimation_pairs = 0;
};

// Empirical estimate around x0: max over ~n_pairs sampled points/pairs of the
// relevant norms plus a 10% safety margin. Deterministic under the seed.
ProblemConstants estimate_constants(const CompositionProblem& problem,
                                    const Vec& x0, double radius,
                                    std::uint64_t seed, int n_pairs = 1000);

}  // namespace hscg

#endif
