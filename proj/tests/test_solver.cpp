#include <doctest.h>

#include <cmath>

#include "hscg/problems/model_selection.hpp"
#include "hscg/solver.hpp"
#include "test_util.hpp"

using namespace hscg;
using testutil::QuadraticToy;

namespace {

// Single sample F(x) = x in one dimension; the minimax toy for KKT checks.
class ScalarIdentity : public CompositionProblem {
 public:
  int dim_p() const override { return 1; }
  int dim_q() const override { return 1; }
  int num_samples() const override { return 1; }
  void sample_value(const Vec& x, int, Vec& out) const override {
    out.resize(1);
    out[0] = x[0];
  }
  void add_jacobian(const Vec&, int, double w,
                    Eigen::Ref<Mat> acc) const override {
    acc(0, 0) += w;
  }
};

OuterFunction identity_outer() {
  return OuterFunction::smooth([](const Vec& u) { return u[0]; },
                               [](const Vec&) { return Vec::Ones(1); }, 0.0,
                               1.0);
}

ProblemConstants toy_constants() {
  ProblemConstants pc;
  pc.M_F = 4.0;
  pc.L_F = 1.0;
  pc.sigma_F = 0.5;
  pc.sigma_J = 0.5;
  return pc;
}

SolverConfig manual_config(int T, double eta, double theta, int b,
                           std::uint64_t seed) {
  SolverConfig cfg;
  cfg.schedule = ScheduleKind::Manual;
  cfg.T = T;
  cfg.b = b;
  cfg.manual.eta = eta;
  cfg.manual.theta = theta;
  cfg.seed = seed;
  cfg.metric_cadence = 1;
  return cfg;
}

bool records_equal(const RunRecord& a, const RunRecord& b) {
  if (a.records.size() != b.records.size()) return false;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const MetricRecord &x = a.records[i], &y = b.records[i];
    if (x.t != y.t || x.stage != y.stage || x.epoch != y.epoch ||
        x.objective != y.objective || x.grad_map_sq != y.grad_map_sq ||
        x.oracle_F != y.oracle_F || x.oracle_J != y.oracle_J)
      return false;
  }
  return a.selected_t == b.selected_t && a.selected_stage == b.selected_stage &&
         (a.x_bar - b.x_bar).norm() == 0.0 && a.eta_bar == b.eta_bar &&
         a.counters.value_calls == b.counters.value_calls &&
         a.counters.jacobian_calls == b.counters.jacobian_calls;
}

}  // namespace

TEST_CASE("proximal averaged step") {
  const Regularizer zero = Regularizer::zero();
  Vec x(2), v(2);
  x << 1.0, -2.0;
  v << 0.5, 0.5;

  // theta = 1 returns the prox point itself.
  auto r = proximal_averaged_step(x, v, 0.1, 1.0, zero);
  CHECK((r.x_next - r.x_hat).norm() == 0.0);

  // Zero direction with no regularizer is a fixed point.
  r = proximal_averaged_step(x, Vec::Zero(2), 0.1, 0.7, zero);
  CHECK((r.x_next - x).norm() == 0.0);

  // Soft threshold kills steps no larger than eta*lambda from the origin.
  const Regularizer l1 = Regularizer::l1(2.0);
  Vec small(2);
  small << 2.0, -1.5;  // |eta*v| <= eta*lambda
  r = proximal_averaged_step(Vec::Zero(2), small, 0.3, 1.0, l1);
  CHECK(r.x_hat.isZero(0.0));

  Vec bad(2);
  bad << std::nan(""), 0.0;
  CHECK_THROWS_AS(proximal_averaged_step(x, bad, 0.1, 1.0, zero), NumericError);
}

TEST_CASE("weighted draw boundary goes to the lower index") {
  const std::vector<double> w{1.0, 1.0, 2.0};
  CHECK(weighted_draw_index(w, 0.0) == 0);
  CHECK(weighted_draw_index(w, 0.25) == 0);   // target = 1.0, boundary
  CHECK(weighted_draw_index(w, 0.26) == 1);
  CHECK(weighted_draw_index(w, 0.49) == 1);
  CHECK(weighted_draw_index(w, 0.51) == 2);
  CHECK(weighted_draw_index(w, 0.999) == 2);
}

TEST_CASE("output selection law matches the omega weights") {
  // Decaying weights like a diminishing-step trajectory.
  std::vector<double> w;
  double total = 0.0;
  for (int t = 0; t < 8; ++t) {
    w.push_back(1.0 / std::cbrt(static_cast<double>(t) + 2.0));
    total += w.back();
  }
  const int n = 100000;

  SUBCASE("inverse-CDF draw") {
    Rng rng(123);
    std::vector<int> counts(w.size(), 0);
    for (int i = 0; i < n; ++i) ++counts[weighted_draw_index(w, rng.uniform())];
    for (std::size_t t = 0; t < w.size(); ++t) {
      const double p = w[t] / total;
      const double sigma = std::sqrt(p * (1.0 - p) / n);
      CHECK(std::abs(counts[t] / double(n) - p) <= 3.0 * sigma);
    }
  }

  SUBCASE("weighted reservoir draw") {
    Rng rng(321);
    std::vector<int> counts(w.size(), 0);
    for (int i = 0; i < n; ++i) {
      OutputSelector sel(0.0, 1, static_cast<long>(w.size()), rng.split(i));
      CHECK_FALSE(sel.stores_all());
      for (std::size_t t = 0; t < w.size(); ++t)
        sel.offer(Vec::Constant(1, double(t)), 1, static_cast<int>(t), w[t],
                  0.1, 0.0);
      ++counts[sel.select().t];
    }
    for (std::size_t t = 0; t < w.size(); ++t) {
      const double p = w[t] / total;
      const double sigma = std::sqrt(p * (1.0 - p) / n);
      CHECK(std::abs(counts[t] / double(n) - p) <= 3.0 * sigma);
    }
  }
}

TEST_CASE("deterministic toy run descends to stationarity") {
  const QuadraticToy prob(3, 1, 5);
  SolverConfig cfg = manual_config(60, 0.9, 1.0, 1, 7);
  const RunRecord rec =
      run(prob, identity_outer(), Regularizer::zero(), cfg, toy_constants());

  // The last record carries the selected output; the per-iterate trace is
  // everything before it.
  REQUIRE(rec.records.size() >= 3);
  const std::size_t trace_end = rec.records.size() - 1;
  for (std::size_t i = 1; i < trace_end; ++i) {
    if (rec.records[i - 1].grad_map_sq < 1e-16) break;
    CHECK(rec.records[i].objective < rec.records[i - 1].objective);
  }
  CHECK(rec.records[trace_end - 1].grad_map_sq <= 1e-16);  // ||grad|| <= 1e-8
}

TEST_CASE("identical seeds give identical run records") {
  const QuadraticToy prob(4, 9, 6);
  SolverConfig cfg = manual_config(40, 0.3, 0.8, 3, 99);
  const OuterFunction outer = identity_outer();
  const RunRecord a = run(prob, outer, Regularizer::l1(0.01), cfg, toy_constants());
  const RunRecord b = run(prob, outer, Regularizer::l1(0.01), cfg, toy_constants());
  CHECK(records_equal(a, b));

  SolverConfig other = cfg;
  other.seed = 100;
  const RunRecord c = run(prob, outer, Regularizer::l1(0.01), other, toy_constants());
  CHECK_FALSE(records_equal(a, c));
}

TEST_CASE("full-batch runs reduce to the deterministic averaged loop") {
  const Dataset data = synthetic_minimax_dataset(6, 3, 17);
  const ModelSelectionProblem prob(data);
  const OuterFunction outer = model_selection_outer();
  const Regularizer reg = Regularizer::squared_l2(0.1);
  const int n = prob.num_samples();

  SolverConfig cfg = manual_config(20, 0.2, 0.6, n, 11);
  cfg.bhat0 = n;
  cfg.capture_iterates = true;
  const RunRecord rec = run(prob, outer, reg, cfg, toy_constants());
  REQUIRE(static_cast<int>(rec.iterates.size()) == 21);

  // Directly coded loop on the same schedule.
  Vec x = Vec::Zero(3);
  for (int t = 0; t <= 20; ++t) {
    CHECK((rec.iterates[t] - x).norm() <= 1e-12);
    const double gamma = 0.5 / std::cbrt(static_cast<double>(t) + 1.0);
    const Vec grad =
        prob.mean_jacobian(x).transpose() *
        outer.grad_phi_gamma(prob.mean_value(x), gamma);
    const Vec x_hat = reg.prox(x - 0.2 * grad, 0.2);
    x = 0.4 * x + 0.6 * x_hat;
  }
}

TEST_CASE("gradient mapping identities") {
  const QuadraticToy prob(3, 5, 25);
  const OuterFunction outer = identity_outer();
  const Regularizer zero = Regularizer::zero();
  Rng rng(1);
  Vec x(3);
  for (int i = 0; i < 3; ++i) x[i] = rng.normal();

  // Without a regularizer the mapping equals the mega-batch gradient for
  // any eta.
  const auto g1 = gradient_mapping(prob, outer, zero, x, 0.1, 0.0, 0, 0);
  const auto g2 = gradient_mapping(prob, outer, zero, x, 1.0, 0.0, 0, 0);
  CHECK((g1.G - g2.G).norm() == 0.0);
  const Vec direct = prob.mean_jacobian(x).transpose() * Vec::Ones(1);
  CHECK((g1.G - direct).norm() <= 1e-14);

  // Stationary point of the deterministic toy.
  const auto gs =
      gradient_mapping(prob, outer, zero, prob.mean_center(), 0.5, 0.0, 0, 0);
  CHECK(std::sqrt(gs.norm_sq) <= 1e-8);

  // mega_batch = N coincides with the exact full-batch value.
  const auto full = gradient_mapping(prob, outer, zero, x, 0.1, 0.0, 5, 42);
  CHECK((full.G - g1.G).norm() == 0.0);

  CHECK_THROWS_AS(gradient_mapping(prob, outer, zero, x, 0.1, 0.0, 99, 0),
                  ConfigError);
}

TEST_CASE("kkt construction identities") {
  const ScalarIdentity prob;
  const OuterFunction outer = OuterFunction::l1_ball(1, 1.0);
  const Regularizer zero = Regularizer::zero();
  KKTConfig kcfg;  // full batches

  // Stationary point of Psi_gamma at the origin.
  const auto pair =
      kkt_construct(prob, outer, zero, Vec::Zero(1), 0.1, 0.5, kcfg, 3);
  CHECK(pair.x_star.isZero(1e-14));
  CHECK(pair.y_star.isZero(1e-14));
  CHECK(kkt_residual(prob, outer, zero, pair.x_star, pair.y_star, 0, 4) <=
        1e-6);

  // Without a regularizer the construction is an explicit gradient step.
  Vec x_bar(1);
  x_bar << 0.8;
  const auto pair2 =
      kkt_construct(prob, outer, zero, x_bar, 0.25, 0.5, kcfg, 5);
  const Vec grad = prob.mean_jacobian(x_bar).transpose() *
                   outer.grad_phi_gamma(prob.mean_value(x_bar), 0.5);
  CHECK((pair2.x_star - (x_bar - 0.25 * grad)).norm() <= 1e-15);

  // gamma = 0 needs a strongly convex dual regularizer.
  CHECK_THROWS_AS(kkt_construct(prob, outer, zero, x_bar, 0.25, 0.0, kcfg, 5),
                  ConfigError);
}

TEST_CASE("kkt residual hand-solved cases") {
  const ScalarIdentity prob;
  const OuterFunction outer = OuterFunction::l1_ball(1, 1.0);

  // (x, y) = (0, 0): both inclusions hold exactly.
  CHECK(kkt_residual(prob, outer, Regularizer::zero(), Vec::Zero(1),
                     Vec::Zero(1), 0, 0) <= 1e-12);

  // With R = |x|, any dual in [-1, 1] pairs with x = 0; y on the boundary.
  const Regularizer l1 = Regularizer::l1(1.0);
  Vec y(1);
  y << 1.0;
  CHECK(kkt_residual(prob, outer, l1, Vec::Zero(1), y, 0, 0) <= 1e-12);
  y << -1.0;
  CHECK(kkt_residual(prob, outer, l1, Vec::Zero(1), y, 0, 0) <= 1e-12);

  // Interior dual: the second term is ||K^T F(x)||.
  Vec x(1);
  x << 0.7;
  const double e =
      kkt_residual(prob, outer, Regularizer::zero(), x, Vec::Zero(1), 0, 0);
  CHECK(e == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(e >= 0.0);
}

TEST_CASE("restart with one stage is bitwise the single run") {
  const QuadraticToy prob(3, 8, 31);
  SolverConfig cfg = manual_config(25, 0.2, 0.7, 2, 5);
  cfg.stages = 1;
  const OuterFunction outer = identity_outer();
  const RunRecord a = run(prob, outer, Regularizer::zero(), cfg, toy_constants());
  const RunRecord b =
      run_restart(prob, outer, Regularizer::zero(), cfg, toy_constants());
  CHECK(records_equal(a, b));
}

TEST_CASE("restart oracle counters are additive over stages") {
  const QuadraticToy prob(3, 8, 33);
  SolverConfig cfg = manual_config(15, 0.2, 0.7, 2, 5);
  const OuterFunction outer = identity_outer();
  const RunRecord single =
      run(prob, outer, Regularizer::zero(), cfg, toy_constants());

  SolverConfig rcfg = cfg;
  rcfg.stages = 4;
  const RunRecord multi =
      run_restart(prob, outer, Regularizer::zero(), rcfg, toy_constants());
  CHECK(multi.counters.value_calls == 4 * single.counters.value_calls);
  CHECK(multi.counters.jacobian_calls == 4 * single.counters.jacobian_calls);
  CHECK(multi.selected_stage >= 1);
  CHECK(multi.selected_stage <= 4);
}

TEST_CASE("restart rejects varying-parameter schedules") {
  const Dataset data = synthetic_minimax_dataset(8, 3, 3);
  const ModelSelectionProblem prob(data);
  SolverConfig cfg = manual_config(10, 0.2, 1.0, 2, 5);
  cfg.stages = 3;
  // Nonsmooth manual mode decays gamma, so restarting is refused.
  CHECK_THROWS_AS(run_restart(prob, model_selection_outer(),
                              Regularizer::squared_l2(0.1), cfg,
                              toy_constants()),
                  ConfigError);
}

TEST_CASE("metric cadence does not change oracle counters") {
  const QuadraticToy prob(3, 10, 41);
  const OuterFunction outer = identity_outer();
  SolverConfig dense = manual_config(30, 0.2, 0.7, 3, 5);
  dense.metric_cadence = 1;
  SolverConfig sparse = dense;
  sparse.metric_cadence = 1000000;
  const RunRecord a = run(prob, outer, Regularizer::zero(), dense, toy_constants());
  const RunRecord b = run(prob, outer, Regularizer::zero(), sparse, toy_constants());
  CHECK(a.counters.value_calls == b.counters.value_calls);
  CHECK(a.counters.jacobian_calls == b.counters.jacobian_calls);
  CHECK(a.records.size() > b.records.size());
}

TEST_CASE("divergent runs raise a numeric failure with context") {
  const QuadraticToy prob(2, 1, 51);
  SolverConfig cfg = manual_config(50, 1e120, 1.0, 1, 5);
  CHECK_THROWS_WITH_AS(
      run(prob, identity_outer(), Regularizer::zero(), cfg, toy_constants()),
      doctest::Contains("iteration"), NumericError);
}
