#ifndef HSCG_SOLVER_HPP
#define HSCG_SOLVER_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "hscg/prox.hpp"
#include "hscg/schedule.hpp"

namespace hscg {

struct SolverConfig {
  ScheduleKind schedule = ScheduleKind::Manual;
  int T = 100;     // iterations per stage
  int stages = 1;  // restart stages; 1 runs the single-loop algorithm
  int b = 1;       // mini-batch size
  int bhat0 = 0;   // initial Jacobian batch; 0 derives it from c1
  double gamma = 0.5;  // constant smoothing parameter (Thm3)
  ManualOverrides manual;
  BatchPlan plan;  // correlation flags and c0/c1/c2; sizes come from the schedule
  std::uint64_t seed = 0;
  Vec x0;               // empty = origin
  int metric_cadence = 0;   // iterations between records; 0 = every epoch
  int mega_batch = 0;       // metric batch size; 0 = full data
  double memory_budget_bytes = double(1) * (1u << 30);
  double max_seconds = 0.0;  // 0 = no wall-clock cap
  bool capture_iterates = false;
};

struct MetricRecord {
  int stage = 1;
  int t = 0;              // global iteration index across stages
  double epoch = 0.0;     // value oracle calls / N
  double objective = 0.0; // mega-batch Psi_0 estimate
  double grad_map_sq = 0.0;
  std::int64_t oracle_F = 0;
  std::int64_t oracle_J = 0;
};

struct RunRecord {
  std::vector<MetricRecord> records;
  OracleCounter counters;

  // omega-weighted categorical output draw.
  int selected_t = -1;
  int selected_stage = 1;
  Vec x_bar;
  double eta_bar = 0.0;
  double gamma_bar = 0.0;
  double grad_map_sq_xbar = 0.0;
  double objective_xbar = 0.0;

  Vec x_final;  // last iterate x_{T+1} of the last stage
  std::vector<double> omega;  // per-iterate weights of one stage
  bool incomplete = false;
  std::vector<Vec> iterates;  // filled when capture_iterates is set
};

struct KKTConfig {
  int b_T = 0;       // value batch at x_bar; 0 = full data
  int bhat_T = 0;    // Jacobian batch at x_bar
  int btilde_T = 0;  // value batch at the constructed primal point
};

// One iteration of the averaged proximal step:
// x_hat = prox_{eta R}(x - eta v), x_next = (1 - theta) x + theta x_hat.
struct StepResult {
  Vec x_hat;
  Vec x_next;
};
StepResult proximal_averaged_step(const Vec& x, const Vec& v, double eta,
                                  double theta, const Regularizer& reg);

// Inverse-CDF index draw over nonnegative weights with a single uniform
// variate in [0, 1); a boundary hit selects the lower index.
int weighted_draw_index(const std::vector<double>& weights, double u);

/// Output-iterate selection with Prob{select t} = w_t / sum_j w_j.
/// Stores every offered iterate while the memory budget allows, otherwise
/// switches to single-draw weighted reservoir sampling (same law, single
/// pass).
class OutputSelector {
 public:
  OutputSelector(double budget_bytes, int dim, long total_offers, Rng rng);

  void offer(const Vec& x, int stage, int t, double weight, double eta,
             double gamma);

  struct Selection {
    Vec x;
    int stage = 1;
    int t = 0;
    double eta = 0.0;
    double gamma = 0.0;
  };
  Selection select();

  bool stores_all() const { return store_all_; }

 private:
  struct Meta {
    int stage;
    int t;
    double weight;
    double eta;
    double gamma;
  };
  bool store_all_ = true;
  std::vector<Vec> iterates_;
  std::vector<Meta> meta_;
  Vec candidate_;
  Meta cand_meta_{};
  double total_weight_ = 0.0;
  Rng rng_;
};

// Mega-batch estimate of the gradient mapping
// G_eta(x) = (x - prox_{eta R}(x - eta grad Phi_gamma(x))) / eta.
// mega_batch = 0 or N uses the exact full-data mean.
struct GradientMapping {
  Vec G;
  double norm_sq = 0.0;
};
GradientMapping gradient_mapping(const CompositionProblem& problem,
                                 const OuterFunction& outer,
                                 const Regularizer& reg, const Vec& x,
                                 double eta, double gamma, int mega_batch,
                                 std::uint64_t seed);

// Single-loop smoothing hybrid variance-reduced run.
RunRecord run(const CompositionProblem& problem, const OuterFunction& outer,
              const Regularizer& reg, const SolverConfig& config,
              const ProblemConstants& pc);

// Restarting variant: config.stages warm-started stages of T iterations each.
// Requires a constant-parameter schedule (Thm1, Thm3, or Manual).
RunRecord run_restart(const CompositionProblem& problem,
                      const OuterFunction& outer, const Regularizer& reg,
                      const SolverConfig& config, const ProblemConstants& pc);

// Approximate KKT pair from a solver output: fresh mini-batch estimates of
// F(x_bar) and F'(x_bar) build x* = prox_{eta R}(x_bar - eta grad), then
// y* = y*_gamma(F_tilde(x*)). Max-form outer only.
struct KKTPair {
  Vec x_star;
  Vec y_star;
};
KKTPair kkt_construct(const CompositionProblem& problem,
                      const OuterFunction& outer, const Regularizer& reg,
                      const Vec& x_bar, double eta_bar, double gamma_T,
                      const KKTConfig& kcfg, std::uint64_t seed);

// E(x, y) = dist(0, F'(x)^T K y + dR(x)) + dist(0, K^T F(x) - dpsi(y)) with
// mega-batch estimates of F and F'.
double kkt_residual(const CompositionProblem& problem,
                    const OuterFunction& outer, const Regularizer& reg,
                    const Vec& x, const Vec& y, int mega_batch,
                    std::uint64_t seed);

// Mega-batch objective estimate Psi_0(x) = phi_0(F(x)) + R(x).
double objective_estimate(const CompositionProblem& problem,
                          const OuterFunction& outer, const Regularizer& reg,
                          const Vec& x, int mega_batch, std::uint64_t seed);

}  // namespace hscg

#endif
