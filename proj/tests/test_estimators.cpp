#include <doctest.h>

#include <cmath>

#include "hscg/estimators.hpp"
#include "hscg/problems/model_selection.hpp"
#include "hscg/problems/portfolio.hpp"
#include "test_util.hpp"

using namespace hscg;
using testutil::AffineToy;
using testutil::QuadraticToy;

namespace {

Vec random_vec(Rng& rng, int n, double scale = 1.0) {
  Vec x(n);
  for (int i = 0; i < n; ++i) x[i] = scale * rng.normal();
  return x;
}

BatchPlan full_plan(int n) {
  BatchPlan plan;
  plan.b0 = plan.bhat0 = n;
  plan.b1 = plan.b2 = n;
  plan.bhat1 = plan.bhat2 = n;
  return plan;
}

}  // namespace

TEST_CASE("init: full batch equals the exact mean") {
  const QuadraticToy prob(4, 7, 11);
  const Vec x0 = Vec::Ones(4);
  const auto est = HybridEstimators::init(prob, x0, full_plan(7), 0);
  CHECK((est.value_estimate() - prob.mean_value(x0)).norm() <= 1e-15);
  CHECK((est.jacobian_estimate() - prob.mean_jacobian(x0)).norm() <= 1e-15);
}

TEST_CASE("init: single-sample dataset") {
  const QuadraticToy prob(3, 1, 2);
  BatchPlan plan = full_plan(1);
  const Vec x0 = Vec::Constant(3, 0.5);
  const auto est = HybridEstimators::init(prob, x0, plan, 9);
  Vec f(1);
  prob.sample_value(x0, 0, f);
  CHECK(est.value_estimate()[0] == f[0]);
}

TEST_CASE("init determinism is bitwise") {
  const QuadraticToy prob(5, 9, 4);
  BatchPlan plan;
  plan.b0 = plan.bhat0 = 3;
  plan.b1 = plan.b2 = 2;
  plan.bhat1 = plan.bhat2 = 2;
  const Vec x0 = Vec::Zero(5);
  auto a = HybridEstimators::init(prob, x0, plan, 1234);
  auto b = HybridEstimators::init(prob, x0, plan, 1234);
  CHECK((a.value_estimate() - b.value_estimate()).norm() == 0.0);
  CHECK((a.jacobian_estimate() - b.jacobian_estimate()).norm() == 0.0);

  // And whole trajectories under identical updates.
  Rng rng(5);
  for (int t = 1; t <= 5; ++t) {
    const Vec x = random_vec(rng, 5);
    a.update_F(prob, x, 0.7, 2, 2);
    a.update_J(prob, x, 0.7, 2, 2);
    a.advance(x);
  }
  Rng rng2(5);
  for (int t = 1; t <= 5; ++t) {
    const Vec x = random_vec(rng2, 5);
    b.update_F(prob, x, 0.7, 2, 2);
    b.update_J(prob, x, 0.7, 2, 2);
    b.advance(x);
  }
  CHECK((a.value_estimate() - b.value_estimate()).norm() == 0.0);
  CHECK((a.jacobian_estimate() - b.jacobian_estimate()).norm() == 0.0);
}

TEST_CASE("update_F: beta = 0 with a full plain batch is exact") {
  const QuadraticToy prob(4, 8, 3);
  auto est = HybridEstimators::init(prob, Vec::Zero(4), full_plan(8), 1);
  Rng rng(2);
  Vec x = Vec::Zero(4);
  for (int t = 1; t <= 4; ++t) {
    x = random_vec(rng, 4);
    est.update_F(prob, x, 0.0, 8, 8);
    est.advance(x);
    CHECK((est.value_estimate() - prob.mean_value(x)).norm() <= 1e-12);
  }
}

TEST_CASE("update_F: beta = 1 telescopes exactly on full batches") {
  const QuadraticToy prob(3, 6, 13);
  auto full = HybridEstimators::init(prob, Vec::Zero(3), full_plan(6), 21);
  Rng rng(3);
  for (int t = 1; t <= 5; ++t) {
    const Vec x = random_vec(rng, 3);
    full.update_F(prob, x, 1.0, 6, 6);
    full.advance(x);
    CHECK((full.value_estimate() - prob.mean_value(x)).norm() <= 1e-12);
  }
}

TEST_CASE("update_F: beta = 0.5 matches the direct arithmetic oracle") {
  // Three samples, full batches on both terms.
  const QuadraticToy prob(2, 3, 31);
  auto est = HybridEstimators::init(prob, Vec::Zero(2), full_plan(3), 5);
  Vec x_prev = Vec::Zero(2);
  Vec expected = prob.mean_value(x_prev);
  Rng rng(8);
  for (int t = 1; t <= 4; ++t) {
    const Vec x = random_vec(rng, 2);
    est.update_F(prob, x, 0.5, 3, 3);
    est.advance(x);
    // 0.5*F_prev + 0.5*(mean(x) - mean(x_prev)) + 0.5*mean(x)
    expected = 0.5 * expected + prob.mean_value(x) - 0.5 * prob.mean_value(x_prev);
    CHECK((est.value_estimate() - expected).norm() <= 1e-13);
    x_prev = x;
  }
}

TEST_CASE("update_J: beta_hat = 0 full batch is exact entrywise") {
  const AffineToy prob(3, 2, 5, 17);
  auto est = HybridEstimators::init(prob, Vec::Zero(3), full_plan(5), 2);
  Rng rng(12);
  const Vec x = random_vec(rng, 3);
  est.update_F(prob, x, 0.0, 5, 5);
  est.update_J(prob, x, 0.0, 5, 5);
  est.advance(x);
  const Mat exact = prob.mean_jacobian(x);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 3; ++c)
      CHECK(est.jacobian_estimate()(r, c) == doctest::Approx(exact(r, c)).epsilon(1e-14));
}

TEST_CASE("update_J: SARAH telescoping identity") {
  const QuadraticToy prob(4, 6, 23);
  BatchPlan plan = full_plan(6);
  plan.b1 = plan.b2 = 3;
  plan.bhat1 = plan.bhat2 = 3;
  auto est = HybridEstimators::init(prob, Vec::Zero(4), plan, 77);
  const Mat j0 = est.jacobian_estimate();

  // Track the sum of mean increments applied by the recursion.
  Mat sum_increments = Mat::Zero(1, 4);
  Rng rng(14);
  for (int t = 1; t <= 6; ++t) {
    const Vec x = random_vec(rng, 4);
    est.update_F(prob, x, 1.0, 3, 3);
    const Mat before = est.jacobian_estimate();
    est.update_J(prob, x, 1.0, 3, 3);
    sum_increments += est.jacobian_estimate() - before;
    est.advance(x);
  }
  CHECK((est.jacobian_estimate() - j0 - sum_increments).norm() <= 1e-12);
}

TEST_CASE("update_J: constant Jacobian rows have zero increments") {
  // Portfolio first component is linear, so row 0 is x-independent.
  const Mat r = synthetic_portfolio_returns(6, 3, 40);
  const PortfolioProblem prob(r);
  auto est = HybridEstimators::init(prob, Vec::Zero(3), full_plan(6), 3);
  const Eigen::RowVectorXd row0 = est.jacobian_estimate().row(0);
  Rng rng(15);
  for (int t = 1; t <= 5; ++t) {
    const Vec x = random_vec(rng, 3);
    const double beta = 0.2 + 0.15 * t;
    est.update_F(prob, x, beta, 6, 6);
    est.update_J(prob, x, beta, 6, 6);
    est.advance(x);
    CHECK((est.jacobian_estimate().row(0) - row0).norm() <= 1e-13);
  }
}

TEST_CASE("gradient_estimate basics") {
  // q = 1 and identity outer reduce to the plain mean-gradient estimator.
  const QuadraticToy prob(5, 4, 51);
  const OuterFunction identity = OuterFunction::smooth(
      [](const Vec& u) { return u[0]; },
      [](const Vec&) { return Vec::Ones(1); }, 0.0, 1.0);
  auto est = HybridEstimators::init(prob, Vec::Ones(5), full_plan(4), 4);
  const Vec v = est.gradient_estimate(identity, 0.0);
  CHECK((v - est.jacobian_estimate().transpose() * Vec::Ones(1)).norm() <= 1e-15);

  // Zero Jacobian keeps v at zero: evaluate at the mean center where the
  // mean Jacobian of the quadratic toy vanishes.
  const QuadraticToy centered(3, 5, 52);
  auto est2 =
      HybridEstimators::init(centered, centered.mean_center(), full_plan(5), 5);
  CHECK(est2.gradient_estimate(identity, 0.0).norm() <= 1e-12);
}

TEST_CASE("gradient_estimate matches finite differences of phi(F(x))") {
  const Dataset data = synthetic_minimax_dataset(20, 6, 61);
  const ModelSelectionProblem prob(data);
  const OuterFunction outer = model_selection_outer();
  const double gamma = 0.5;
  Rng rng(16);
  const Vec x = random_vec(rng, 6, 0.5);
  auto est = HybridEstimators::init(prob, x, full_plan(20), 6);
  const Vec v = est.gradient_estimate(outer, gamma);

  const double h = 1e-5;
  Vec fd(6);
  for (int d = 0; d < 6; ++d) {
    Vec xp = x, xm = x;
    xp[d] += h;
    xm[d] -= h;
    fd[d] = (outer.phi_gamma_value(prob.mean_value(xp), gamma) -
             outer.phi_gamma_value(prob.mean_value(xm), gamma)) /
            (2.0 * h);
  }
  CHECK((fd - v).norm() / std::max(1.0, v.norm()) <= 1e-5);
}

TEST_CASE("beta = 0 plain estimator is unbiased over resamplings") {
  const QuadraticToy prob(3, 5, 71);
  Rng rng(17);
  const Vec x0 = random_vec(rng, 3);
  const Vec x1 = random_vec(rng, 3);
  const Vec truth = prob.mean_value(x1);

  BatchPlan plan;
  plan.b0 = 2;
  plan.bhat0 = 2;
  plan.b1 = plan.b2 = 2;
  plan.bhat1 = plan.bhat2 = 2;

  const int reps = 10000;
  double mean = 0.0, m2 = 0.0;
  for (int rep = 0; rep < reps; ++rep) {
    auto est = HybridEstimators::init(prob, x0, plan, 1000 + rep);
    est.update_F(prob, x1, 0.0, 2, 2);
    const double v = est.value_estimate()[0];
    const double delta = v - mean;
    mean += delta / (rep + 1);
    m2 += delta * (v - mean);
  }
  const double se = std::sqrt(m2 / (reps - 1)) / std::sqrt(double(reps));
  CHECK(std::abs(mean - truth[0]) <= 3.0 * se);
}

TEST_CASE("correlated batches save the duplicate evaluations") {
  const QuadraticToy prob(3, 10, 81);
  const int b = 4;

  for (bool corr : {true, false}) {
    OracleCounter counter;
    CountingProblem counting(prob, counter);
    BatchPlan plan;
    plan.b0 = plan.bhat0 = 10;
    plan.b1 = plan.b2 = b;
    plan.bhat1 = plan.bhat2 = b;
    plan.corr_F = plan.corr_J = corr;
    auto est = HybridEstimators::init(counting, Vec::Zero(3), plan, 7);
    const auto init_vals = counter.value_calls;
    const auto init_jacs = counter.jacobian_calls;
    CHECK(init_vals == 10);
    CHECK(init_jacs == 10);

    testutil::RecordingProblem recording(prob);
    CountingProblem counted_rec(recording, counter);
    const Vec x1 = Vec::Ones(3);
    est.update_F(counted_rec, x1, 0.5, b, b);
    est.update_J(counted_rec, x1, 0.5, b, b);
    est.advance(x1);

    // Single-batch mode: b evaluations at the new point plus b at the old
    // one; independent batches add b more at the new point.
    const auto step_vals = counter.value_calls - init_vals;
    const auto step_jacs = counter.jacobian_calls - init_jacs;
    CHECK(step_vals == (corr ? 2 * b : 3 * b));
    CHECK(step_jacs == (corr ? 2 * b : 3 * b));

    int at_new = 0;
    for (const Vec& pt : recording.value_points)
      if ((pt - x1).norm() == 0.0) ++at_new;
    CHECK(at_new == (corr ? b : 2 * b));
  }
}

TEST_CASE("zero-coefficient terms are not evaluated") {
  const QuadraticToy prob(2, 6, 91);
  OracleCounter counter;
  CountingProblem counting(prob, counter);
  BatchPlan plan = full_plan(6);
  plan.b1 = plan.b2 = 3;
  plan.bhat1 = plan.bhat2 = 3;
  auto est = HybridEstimators::init(counting, Vec::Zero(2), plan, 1);
  const auto base = counter.value_calls;

  est.update_F(counting, Vec::Ones(2), 0.0, 3, 3);
  CHECK(counter.value_calls - base == 3);  // plain term only

  est.advance(Vec::Ones(2));
  const auto base2 = counter.value_calls;
  est.update_F(counting, Vec::Constant(2, 2.0), 1.0, 3, 3);
  CHECK(counter.value_calls - base2 == 6);  // increment pair only
}

TEST_CASE("invalid batch configurations") {
  const QuadraticToy prob(2, 4, 3);
  BatchPlan plan = full_plan(4);
  plan.b0 = 9;  // > N without replacement
  CHECK_THROWS_AS(HybridEstimators::init(prob, Vec::Zero(2), plan, 0),
                  ConfigError);

  BatchPlan corr_bad = full_plan(4);
  corr_bad.b1 = 2;
  corr_bad.b2 = 3;
  corr_bad.corr_F = true;
  CHECK_THROWS_AS(corr_bad.validate(4), ConfigError);

  // With replacement, oversized batches are allowed.
  BatchPlan wr = full_plan(4);
  wr.with_replacement = true;
  wr.b0 = 9;
  CHECK_NOTHROW(HybridEstimators::init(prob, Vec::Zero(2), wr, 0));
}
