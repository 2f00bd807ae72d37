#ifndef HSCG_PROBLEMS_MODEL_SELECTION_HPP
#define HSCG_PROBLEMS_MODEL_SELECTION_HPP

#include <cstdint>

#include "hscg/outer.hpp"
#include "hscg/problem.hpp"
#include "hscg/problems/dataset.hpp"

namespace hscg {

/// Stochastic minimax model selection over four nonnegative nonconvex
/// binary-classification losses of the margin z = b<a, x>:
///   F1 = 1 - tanh(z)
///   F2 = log(1+e^{-z}) - log(1+e^{-z-1})
///   F3 = sigma(-z)^2
///   F4 = log(1+e^{-z})
/// All rows of the Jacobian are multiples of b*a, accumulated sparsely.
/// Stable log1p/exp formulations keep values finite for |z| up to ~700.
class ModelSelectionProblem : public CompositionProblem {
 public:
  explicit ModelSelectionProblem(Dataset data) : data_(std::move(data)) {}

  int dim_p() const override { return data_.p; }
  int dim_q() const override { return 4; }
  int num_samples() const override { return data_.num_rows(); }

  void sample_value(const Vec& x, int i, Vec& out) const override;
  void add_jacobian(const Vec& x, int i, double weight,
                    Eigen::Ref<Mat> acc) const override;

  const Dataset& data() const { return data_; }

  // Loss values and d/dz derivatives at a margin z (shared with tests).
  static void losses(double z, double out[4]);
  static void loss_derivatives(double z, double out[4]);

 private:
  Dataset data_;
};

// Max-form outer max_i u_i = max_{||y||_1 <= 1} <u, y> with K = I_4.
OuterFunction model_selection_outer();

// Planted-model synthetic dataset: unit-norm Gaussian features, labels from
// sign(<a, x_star>).
Dataset synthetic_minimax_dataset(int N, int p, std::uint64_t seed);

}  // namespace hscg

#endif
