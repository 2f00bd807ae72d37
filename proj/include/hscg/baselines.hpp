#ifndef HSCG_BASELINES_HPP
#define HSCG_BASELINES_HPP

#include "hscg/solver.hpp"

namespace hscg {

/// Two-timescale stochastic compositional gradient: the auxiliary average
/// u_{t+1} = (1 - a_t) u_t + a_t F_B(x_t) tracks F(x_t), and the step is
/// x_{t+1} = prox_{eta R}(x_t - eta J_B(x_t)^T grad phi_{gamma_t}(u_{t+1})).
/// The smoothing schedule matches the tuned hybrid solver so the methods are
/// comparable on nonsmooth outers.
struct ScgConfig {
  int T = 100;
  int batch = 1;
  double eta = 0.1;
  double a_exponent = 0.6;  // a_t = 1/(t+1)^a_exponent, a_0 = 1
  std::uint64_t seed = 0;
  Vec x0;
  int metric_cadence = 0;
  int mega_batch = 0;
};

RunRecord run_scg(const CompositionProblem& problem, const OuterFunction& outer,
                  const Regularizer& reg, const ScgConfig& cfg);

/// Epoch-restarted SARAH-type compositional variance reduction: each epoch
/// re-estimates (F, J) from a mega-batch of size B, then runs tau - 1 inner
/// SARAH-corrected proximal steps (the beta = 1 correlated mode of the
/// hybrid estimators) with theta = 1.
struct CivrConfig {
  int T = 100;        // total iterations across epochs
  int epoch_len = 8;  // tau
  int mega = 0;       // B; 0 = full data
  int batch = 1;      // inner batch size
  double eta = 0.1;
  std::uint64_t seed = 0;
  Vec x0;
  int metric_cadence = 0;
  int mega_batch = 0;
};

RunRecord run_civr(const CompositionProblem& problem,
                   const OuterFunction& outer, const Regularizer& reg,
                   const CivrConfig& cfg);

}  // namespace hscg

#endif
