#include "hscg/baselines.hpp"

#include <cmath>
#include <string>

namespace hscg {

namespace {

double shared_gamma(const OuterFunction& outer, int t) {
  if (!outer.is_max_form() || outer.mu_psi() > 0.0) return 0.0;
  return 1.0 / (2.0 * std::cbrt(static_cast<double>(t) + 1.0));
}

// Per-iterate metric recording shared by both baselines.
struct MetricSink {
  const CompositionProblem& raw;
  const OuterFunction& outer;
  const Regularizer& reg;
  RunRecord& rec;
  int n;
  int cadence;
  int mega_batch;
  Rng metric_rng;
  double last_epoch_mark = -1.0;

  void maybe_record(int t, const Vec& x, double eta, double gamma, bool last) {
    bool want = false;
    if (!last) {
      if (cadence > 0) {
        want = t % cadence == 0;
      } else {
        const double epoch = static_cast<double>(rec.counters.value_calls) / n;
        want = std::floor(epoch) > last_epoch_mark;
        if (want) last_epoch_mark = std::floor(epoch);
      }
    } else {
      want = true;
    }
    if (!want) return;
    MetricRecord m;
    m.t = t;
    m.epoch = static_cast<double>(rec.counters.value_calls) / n;
    m.objective =
        objective_estimate(raw, outer, reg, x, mega_batch, metric_rng.next_u64());
    m.grad_map_sq =
        gradient_mapping(raw, outer, reg, x, eta, gamma, mega_batch,
                         metric_rng.next_u64())
            .norm_sq;
    m.oracle_F = rec.counters.value_calls;
    m.oracle_J = rec.counters.jacobian_calls;
    rec.records.push_back(m);
  }
};

void finalize_last_iterate(RunRecord& rec, const Vec& x, int t, double eta,
                           double gamma, const CompositionProblem& raw,
                           const OuterFunction& outer, const Regularizer& reg,
                           int mega_batch, Rng& metric_rng) {
  rec.x_final = x;
  rec.x_bar = x;
  rec.selected_t = t;
  rec.eta_bar = eta;
  rec.gamma_bar = gamma;
  rec.grad_map_sq_xbar = gradient_mapping(raw, outer, reg, x, eta, gamma,
                                          mega_batch, metric_rng.next_u64())
                             .norm_sq;
  rec.objective_xbar =
      objective_estimate(raw, outer, reg, x, mega_batch, metric_rng.next_u64());
}

}  // namespace

RunRecord run_scg(const CompositionProblem& problem, const OuterFunction& outer,
                  const Regularizer& reg, const ScgConfig& cfg) {
  if (cfg.T < 0) throw ConfigError("run_scg: T must be >= 0");
  if (!(cfg.eta > 0.0)) throw ConfigError("run_scg: eta must be positive");
  if (cfg.batch < 1 || cfg.batch > problem.num_samples())
    throw ConfigError("run_scg: batch outside [1, N]");

  const int n = problem.num_samples();
  const int p = problem.dim_p();
  const int q = problem.dim_q();

  RunRecord rec;
  CountingProblem counting(problem, rec.counters);
  Rng rng(cfg.seed);
  MetricSink sink{problem, outer,       reg,
                  rec,     n,           cfg.metric_cadence,
                  cfg.mega_batch,       Rng(cfg.seed).split(0x3e7a1cULL)};

  Vec x = cfg.x0.size() > 0 ? cfg.x0 : Vec::Zero(p);
  Vec u = Vec::Zero(q);
  Vec f_batch(q), tmp(q);
  Mat j_batch(q, p);
  double gamma = 0.0;

  for (int t = 0; t <= cfg.T; ++t) {
    gamma = shared_gamma(outer, t);
    const double a_t = 1.0 / std::pow(static_cast<double>(t) + 1.0, cfg.a_exponent);

    const auto idx = rng.sample_without_replacement(n, cfg.batch);
    f_batch.setZero();
    j_batch.setZero();
    const double w = 1.0 / static_cast<double>(cfg.batch);
    for (int i : idx) {
      counting.sample_value(x, i, tmp);
      f_batch += tmp;
      counting.add_jacobian(x, i, w, j_batch);
    }
    f_batch *= w;

    u = (1.0 - a_t) * u + a_t * f_batch;
    const Vec v = j_batch.transpose() * outer.grad_phi_gamma(u, gamma);
    if (!v.allFinite())
      throw NumericError("run_scg: non-finite direction at iteration " +
                         std::to_string(t));

    sink.maybe_record(t, x, cfg.eta, gamma, t == cfg.T);
    x = reg.prox(x - cfg.eta * v, cfg.eta);
  }

  rec.omega.assign(static_cast<std::size_t>(cfg.T) + 1, 1.0);
  finalize_last_iterate(rec, x, cfg.T, cfg.eta, gamma, problem, outer, reg,
                        cfg.mega_batch, sink.metric_rng);
  return rec;
}

RunRecord run_civr(const CompositionProblem& problem,
                   const OuterFunction& outer, const Regularizer& reg,
                   const CivrConfig& cfg) {
  if (cfg.T < 0) throw ConfigError("run_civr: T must be >= 0");
  if (cfg.epoch_len < 1) throw ConfigError("run_civr: epoch_len must be >= 1");
  if (!(cfg.eta > 0.0)) throw ConfigError("run_civr: eta must be positive");
  const int n = problem.num_samples();
  const int p = problem.dim_p();
  const int mega = cfg.mega <= 0 || cfg.mega > n ? n : cfg.mega;
  if (cfg.batch < 1 || cfg.batch > n)
    throw ConfigError("run_civr: batch outside [1, N]");

  RunRecord rec;
  CountingProblem counting(problem, rec.counters);
  Rng master(cfg.seed);
  MetricSink sink{problem, outer,       reg,
                  rec,     n,           cfg.metric_cadence,
                  cfg.mega_batch,       Rng(cfg.seed).split(0x3e7a1cULL)};

  BatchPlan plan;
  plan.b0 = mega;
  plan.bhat0 = mega;
  plan.b1 = plan.b2 = cfg.batch;
  plan.bhat1 = plan.bhat2 = cfg.batch;
  plan.corr_F = plan.corr_J = true;

  Vec x = cfg.x0.size() > 0 ? cfg.x0 : Vec::Zero(p);
  double gamma = 0.0;
  int t = 0;
  while (t <= cfg.T) {
    // Epoch start: fresh mega-batch estimators.
    HybridEstimators est =
        HybridEstimators::init(counting, x, plan, master.next_u64());
    for (int j = 0; j < cfg.epoch_len && t <= cfg.T; ++j, ++t) {
      if (j > 0) {
        est.update_F(counting, x, 1.0, cfg.batch, cfg.batch);
        est.update_J(counting, x, 1.0, cfg.batch, cfg.batch);
        est.advance(x);
      }
      gamma = shared_gamma(outer, t);
      const Vec v = est.gradient_estimate(outer, gamma);
      if (!v.allFinite())
        throw NumericError("run_civr: non-finite direction at iteration " +
                           std::to_string(t));
      sink.maybe_record(t, x, cfg.eta, gamma, t == cfg.T);
      x = reg.prox(x - cfg.eta * v, cfg.eta);
    }
  }

  rec.omega.assign(static_cast<std::size_t>(cfg.T) + 1, 1.0);
  finalize_last_iterate(rec, x, cfg.T, cfg.eta, gamma, problem, outer, reg,
                        cfg.mega_batch, sink.metric_rng);
  return rec;
}

}  // namespace hscg
