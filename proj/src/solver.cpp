#include "hscg/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

namespace hscg {

namespace {

// Mean value and Jacobian over the full data or a seeded subset; the same
// index set serves both so the estimate matches Eq-style pairing.
void mega_mean(const CompositionProblem& problem, const Vec& x, int mega_batch,
               std::uint64_t seed, Vec& f_out, Mat* j_out) {
  const int n = problem.num_samples();
  const int q = problem.dim_q();
  const int p = problem.dim_p();
  std::vector<int> idx;
  if (mega_batch <= 0 || mega_batch >= n) {
    idx.resize(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
  } else {
    Rng rng(seed);
    idx = rng.sample_without_replacement(n, mega_batch);
  }
  f_out = Vec::Zero(q);
  if (j_out != nullptr) *j_out = Mat::Zero(q, p);
  Vec tmp(q);
  const double w = 1.0 / static_cast<double>(idx.size());
  for (int i : idx) {
    problem.sample_value(x, i, tmp);
    f_out += tmp;
    if (j_out != nullptr) problem.add_jacobian(x, i, w, *j_out);
  }
  f_out *= w;
}

RunRecord run_engine(const CompositionProblem& problem,
                     const OuterFunction& outer, const Regularizer& reg,
                     const SolverConfig& cfg, const ProblemConstants& pc,
                     int stages) {
  const int n = problem.num_samples();
  const int p = problem.dim_p();
  if (cfg.T < 0) throw ConfigError("run: T must be >= 0");
  if (stages < 1) throw ConfigError("run: stages must be >= 1");

  BatchPlan plan = cfg.plan;
  const double gamma_ref =
      (outer.is_max_form() && outer.mu_psi() == 0.0)
          ? (cfg.schedule == ScheduleKind::Thm3 ? cfg.gamma : 1.0)
          : 0.0;
  const Constants consts = compute_constants(pc, outer, plan, gamma_ref);
  const ScheduleState sched =
      make_schedule(cfg.schedule, cfg.T, cfg.b, cfg.bhat0, consts, plan, n,
                    cfg.gamma, &cfg.manual);
  if (stages > 1) {
    const bool constant =
        sched.kind == ScheduleKind::Thm1 || sched.kind == ScheduleKind::Thm3 ||
        (sched.kind == ScheduleKind::Manual && sched.gamma[0] == sched.gamma[cfg.T]);
    if (!constant)
      throw ConfigError("run_restart requires a constant-parameter schedule "
                        "(Thm1, Thm3, or constant Manual)");
  }
  plan.b0 = sched.b0;
  plan.bhat0 = sched.bhat0;
  plan.b1 = sched.b1[0];
  plan.b2 = sched.b2[0];
  plan.bhat1 = sched.bhat1;
  plan.bhat2 = sched.bhat2;
  plan.validate(n);

  RunRecord rec;
  CountingProblem counting(problem, rec.counters);
  Rng master(cfg.seed);
  OutputSelector store(cfg.memory_budget_bytes, p,
                       static_cast<long>(stages) * (cfg.T + 1),
                       Rng(cfg.seed).split(0x0075cdULL));
  Rng metric_rng = Rng(cfg.seed).split(0x3e7a1cULL);

  Vec x = cfg.x0.size() > 0 ? cfg.x0 : Vec::Zero(p);
  if (!x.allFinite()) throw std::invalid_argument("run: non-finite x0");

  const int cadence = cfg.metric_cadence;
  const auto start_time = std::chrono::steady_clock::now();
  double last_epoch_mark = -1.0;

  auto record_metrics = [&](int stage, int global_t, const Vec& xt, double eta_t,
                            double gamma_t) {
    MetricRecord m;
    m.stage = stage;
    m.t = global_t;
    m.epoch = static_cast<double>(rec.counters.value_calls) / n;
    m.objective = objective_estimate(problem, outer, reg, xt, cfg.mega_batch,
                                     metric_rng.next_u64());
    m.grad_map_sq = gradient_mapping(problem, outer, reg, xt, eta_t, gamma_t,
                                     cfg.mega_batch, metric_rng.next_u64())
                        .norm_sq;
    m.oracle_F = rec.counters.value_calls;
    m.oracle_J = rec.counters.jacobian_calls;
    rec.records.push_back(m);
  };

  int global_t = 0;
  for (int stage = 1; stage <= stages && !rec.incomplete; ++stage) {
    const std::uint64_t est_seed = master.next_u64();
    HybridEstimators est = HybridEstimators::init(counting, x, plan, est_seed);

    for (int t = 0; t <= cfg.T; ++t, ++global_t) {
      if (t >= 1) {
        est.update_F(counting, x, sched.beta[t - 1], sched.b1[t], sched.b2[t]);
        est.update_J(counting, x, sched.beta_hat[t - 1], sched.bhat1,
                     sched.bhat2);
        est.advance(x);
      }
      if (!est.value_estimate().allFinite() ||
          !est.jacobian_estimate().allFinite())
        throw NumericError("non-finite estimator state at stage " +
                           std::to_string(stage) + ", iteration " +
                           std::to_string(t));
      const Vec v = est.gradient_estimate(outer, sched.gamma[t]);
      if (!v.allFinite())
        throw NumericError("non-finite gradient estimate at stage " +
                           std::to_string(stage) + ", iteration " +
                           std::to_string(t));

      store.offer(x, stage, t, sched.omega(t), sched.eta[t], sched.gamma[t]);
      if (cfg.capture_iterates) rec.iterates.push_back(x);

      const bool is_last = stage == stages && t == cfg.T;
      bool want_record = false;
      if (!is_last) {
        if (cadence > 0) {
          want_record = (global_t % cadence) == 0;
        } else {
          const double epoch = static_cast<double>(rec.counters.value_calls) / n;
          want_record = std::floor(epoch) > last_epoch_mark;
          if (want_record) last_epoch_mark = std::floor(epoch);
        }
      }
      if (want_record) record_metrics(stage, global_t, x, sched.eta[t], sched.gamma[t]);

      x = proximal_averaged_step(x, v, sched.eta[t], sched.theta[t], reg).x_next;

      if (cfg.max_seconds > 0.0) {
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          start_time)
                .count();
        if (elapsed > cfg.max_seconds) {
          rec.incomplete = true;
          break;
        }
      }
    }
  }

  rec.x_final = x;
  rec.omega.resize(cfg.T + 1);
  for (int t = 0; t <= cfg.T; ++t) rec.omega[t] = sched.omega(t);

  auto sel = store.select();
  rec.selected_t = sel.t;
  rec.selected_stage = sel.stage;
  rec.x_bar = sel.x;
  rec.eta_bar = sel.eta;
  rec.gamma_bar = sel.gamma;
  rec.grad_map_sq_xbar =
      gradient_mapping(problem, outer, reg, rec.x_bar, rec.eta_bar,
                       rec.gamma_bar, cfg.mega_batch, metric_rng.next_u64())
          .norm_sq;
  rec.objective_xbar = objective_estimate(problem, outer, reg, rec.x_bar,
                                          cfg.mega_batch, metric_rng.next_u64());

  // Final record carries the selected-output metrics.
  {
    MetricRecord m;
    m.stage = stages;
    m.t = global_t - 1;
    m.epoch = static_cast<double>(rec.counters.value_calls) / n;
    m.objective = rec.objective_xbar;
    m.grad_map_sq = rec.grad_map_sq_xbar;
    m.oracle_F = rec.counters.value_calls;
    m.oracle_J = rec.counters.jacobian_calls;
    rec.records.push_back(m);
  }
  return rec;
}

}  // namespace

StepResult proximal_averaged_step(const Vec& x, const Vec& v, double eta,
                                  double theta, const Regularizer& reg) {
  if (!(eta > 0.0)) throw ConfigError("step: eta must be positive");
  if (!(theta > 0.0) || theta > 1.0)
    throw ConfigError("step: theta outside (0, 1]");
  if (!v.allFinite()) throw NumericError("step: non-finite direction");
  StepResult r;
  r.x_hat = reg.prox(x - eta * v, eta);
  r.x_next = (1.0 - theta) * x + theta * r.x_hat;
  return r;
}

int weighted_draw_index(const std::vector<double>& weights, double u) {
  double total = 0.0;
  for (double w : weights) total += w;
  const double target = u * total;
  double cum = 0.0;
  std::size_t k = 0;
  for (; k + 1 < weights.size(); ++k) {
    cum += weights[k];
    if (cum >= target) break;
  }
  return static_cast<int>(k);
}

OutputSelector::OutputSelector(double budget_bytes, int dim, long total_offers,
                               Rng rng)
    : rng_(rng) {
  store_all_ =
      static_cast<double>(total_offers) * dim * sizeof(double) <= budget_bytes;
}

void OutputSelector::offer(const Vec& x, int stage, int t, double weight,
                           double eta, double gamma) {
  total_weight_ += weight;
  if (store_all_) {
    iterates_.push_back(x);
    meta_.push_back({stage, t, weight, eta, gamma});
  } else if (rng_.uniform() * total_weight_ < weight) {
    candidate_ = x;
    cand_meta_ = {stage, t, weight, eta, gamma};
  }
}

OutputSelector::Selection OutputSelector::select() {
  if (meta_.empty() && candidate_.size() == 0)
    throw ConfigError("OutputSelector: nothing offered");
  if (!store_all_) {
    return {candidate_, cand_meta_.stage, cand_meta_.t, cand_meta_.eta,
            cand_meta_.gamma};
  }
  std::vector<double> w(meta_.size());
  for (std::size_t i = 0; i < meta_.size(); ++i) w[i] = meta_[i].weight;
  const int k = weighted_draw_index(w, rng_.uniform());
  return {iterates_[k], meta_[k].stage, meta_[k].t, meta_[k].eta,
          meta_[k].gamma};
}

GradientMapping gradient_mapping(const CompositionProblem& problem,
                                 const OuterFunction& outer,
                                 const Regularizer& reg, const Vec& x,
                                 double eta, double gamma, int mega_batch,
                                 std::uint64_t seed) {
  if (!(eta > 0.0)) throw ConfigError("gradient_mapping: eta must be positive");
  if (mega_batch > problem.num_samples())
    throw ConfigError("gradient_mapping: mega_batch exceeds sample count");
  Vec f;
  Mat j;
  mega_mean(problem, x, mega_batch, seed, f, &j);
  const Vec grad = j.transpose() * outer.grad_phi_gamma(f, gamma);
  GradientMapping out;
  // With no regularizer the prox is the identity and the mapping reduces to
  // the gradient itself, independent of eta.
  if (reg.kind == RegKind::Zero)
    out.G = grad;
  else
    out.G = (x - reg.prox(x - eta * grad, eta)) / eta;
  out.norm_sq = out.G.squaredNorm();
  return out;
}

double objective_estimate(const CompositionProblem& problem,
                          const OuterFunction& outer, const Regularizer& reg,
                          const Vec& x, int mega_batch, std::uint64_t seed) {
  Vec f;
  mega_mean(problem, x, mega_batch, seed, f, nullptr);
  return outer.phi0_value(f) + reg.value(x);
}

RunRecord run(const CompositionProblem& problem, const OuterFunction& outer,
              const Regularizer& reg, const SolverConfig& config,
              const ProblemConstants& pc) {
  return run_engine(problem, outer, reg, config, pc, 1);
}

RunRecord run_restart(const CompositionProblem& problem,
                      const OuterFunction& outer, const Regularizer& reg,
                      const SolverConfig& config, const ProblemConstants& pc) {
  return run_engine(problem, outer, reg, config, pc, config.stages);
}

KKTPair kkt_construct(const CompositionProblem& problem,
                      const OuterFunction& outer, const Regularizer& reg,
                      const Vec& x_bar, double eta_bar, double gamma_T,
                      const KKTConfig& kcfg, std::uint64_t seed) {
  if (!outer.is_max_form())
    throw NotImplementedError("kkt_construct: outer function is not max-form");
  if (gamma_T == 0.0 && outer.mu_psi() == 0.0)
    throw ConfigError("kkt_construct: gamma_T = 0 requires strongly convex psi");
  if (!(eta_bar > 0.0)) throw ConfigError("kkt_construct: eta_bar must be positive");
  const int n = problem.num_samples();
  auto resolve = [n](int v) { return v <= 0 || v > n ? n : v; };

  Rng rng(seed);
  // Three independent fresh estimates, drawn in a fixed order.
  Vec f_bar;
  mega_mean(problem, x_bar, resolve(kcfg.b_T), rng.next_u64(), f_bar, nullptr);
  Vec dummy;
  Mat j_bar;
  mega_mean(problem, x_bar, resolve(kcfg.bhat_T), rng.next_u64(), dummy, &j_bar);
  const Vec grad = j_bar.transpose() * outer.grad_phi_gamma(f_bar, gamma_T);

  KKTPair pair;
  pair.x_star = reg.prox(x_bar - eta_bar * grad, eta_bar);
  Vec f_star;
  mega_mean(problem, pair.x_star, resolve(kcfg.btilde_T), rng.next_u64(),
            f_star, nullptr);
  pair.y_star = outer.y_star(f_star, gamma_T);
  return pair;
}

double kkt_residual(const CompositionProblem& problem,
                    const OuterFunction& outer, const Regularizer& reg,
                    const Vec& x, const Vec& y, int mega_batch,
                    std::uint64_t seed) {
  if (!outer.is_max_form())
    throw NotImplementedError("kkt_residual: outer function is not max-form");
  Vec f;
  Mat j;
  mega_mean(problem, x, mega_batch, seed, f, &j);
  const Vec g = j.transpose() * outer.apply_K(y);
  const double term_x = subdiff_dist_R(reg, x, g);
  const double term_y = outer.subdiff_dist_psi(y, outer.apply_Kt(f));
  return term_x + term_y;
}

}  // namespace hscg
