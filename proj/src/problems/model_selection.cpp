#include "hscg/problems/model_selection.hpp"

#include <cmath>

#include "hscg/rng.hpp"

namespace hscg {

namespace {

double stable_sigmoid(double s) {
  if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

// log(1 + e^t) without overflow.
double softplus(double t) {
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

}  // namespace

void ModelSelectionProblem::losses(double z, double out[4]) {
  out[0] = 2.0 * stable_sigmoid(-2.0 * z);  // 1 - tanh(z)
  out[1] = softplus(-z) - softplus(-z - 1.0);
  const double s = stable_sigmoid(-z);
  out[2] = s * s;
  out[3] = softplus(-z);
}

void ModelSelectionProblem::loss_derivatives(double z, double out[4]) {
  const double s2p = stable_sigmoid(2.0 * z);
  const double s2m = stable_sigmoid(-2.0 * z);
  out[0] = -4.0 * s2p * s2m;  // -sech^2(z)
  const double sm = stable_sigmoid(-z);
  out[1] = -sm + stable_sigmoid(-z - 1.0);
  out[2] = -2.0 * sm * sm * stable_sigmoid(z);
  out[3] = -sm;
}

void ModelSelectionProblem::sample_value(const Vec& x, int i, Vec& out) const {
  const double z = data_.labels[i] * data_.dot(i, x);
  out.resize(4);
  double vals[4];
  losses(z, vals);
  for (int j = 0; j < 4; ++j) out[j] = vals[j];
}

void ModelSelectionProblem::add_jacobian(const Vec& x, int i, double weight,
                                         Eigen::Ref<Mat> acc) const {
  const double b = data_.labels[i];
  const double z = b * data_.dot(i, x);
  double d[4];
  loss_derivatives(z, d);
  const SparseRow& row = data_.rows[i];
  for (int j = 0; j < 4; ++j) {
    const double c = weight * d[j] * b;
    for (std::size_t k = 0; k < row.idx.size(); ++k)
      acc(j, row.idx[k]) += c * row.val[k];
  }
}

OuterFunction model_selection_outer() { return OuterFunction::l1_ball(4, 1.0); }

Dataset synthetic_minimax_dataset(int N, int p, std::uint64_t seed) {
  Rng rng(seed);
  Vec x_star(p);
  for (int d = 0; d < p; ++d) x_star[d] = rng.normal();

  Dataset data;
  data.p = p;
  data.source_path = "synthetic_minimax(seed=" + std::to_string(seed) + ")";
  data.rows.resize(N);
  data.labels.resize(N);
  Vec a(p);
  for (int i = 0; i < N; ++i) {
    for (int d = 0; d < p; ++d) a[d] = rng.normal();
    a.normalize();
    const double margin = a.dot(x_star);
    data.labels[i] = margin >= 0.0 ? 1.0 : -1.0;
    SparseRow& row = data.rows[i];
    row.idx.resize(p);
    row.val.resize(p);
    for (int d = 0; d < p; ++d) {
      row.idx[d] = d;
      row.val[d] = a[d];
    }
  }
  return data;
}

}  // namespace hscg
