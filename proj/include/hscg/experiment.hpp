#ifndef HSCG_EXPERIMENT_HPP
#define HSCG_EXPERIMENT_HPP

#include <memory>
#include <string>
#include <vector>

#include "hscg/baselines.hpp"
#include "hscg/config.hpp"
#include "hscg/solver.hpp"

namespace hscg {

/// A fully wired problem instance: oracle, outer function, regularizer, and
/// (estimated or supplied) problem constants.
struct ProblemBundle {
  std::unique_ptr<CompositionProblem> problem;
  OuterFunction outer = OuterFunction::l1_ball(1);
  Regularizer reg;
  ProblemConstants pc;
  std::string kind;
  int n_blocks = 8;
  int block_batch = 1;  // ceil(N / n_blocks)
};

// Builds the problem from the [problem] section. Dataset paths are resolved
// against HSCG_DATA_DIR when relative and the variable is set.
ProblemBundle build_problem(const ConfigFile& cfg);

// Derives the per-solver run settings from a `[solver.<name>]` section.
// The iteration count comes from `T`, or from `epochs` via the solver's
// per-iteration oracle cost when T is absent.
struct SolverEntry {
  std::string name;  // hscg | hscg-restart | scg | civr
  double epochs = 0.0;
  SolverConfig hscg;
  ScgConfig scg;
  CivrConfig civr;
};
SolverEntry build_solver_entry(const ConfigFile& cfg, const std::string& name,
                               const ProblemBundle& bundle);

// Executes one (solver, seed) run.
RunRecord execute(const SolverEntry& entry, const ProblemBundle& bundle,
                  std::uint64_t seed);

// Metric trace serialization: one JSON object per record plus a companion
// CSV with identical columns. `reward` (the negated objective) is appended
// for portfolio problems. Returns the JSONL path.
struct TraceFiles {
  std::string jsonl;
  std::string csv;
  std::string summary;
};
TraceFiles write_trace(const std::string& out_dir, const std::string& solver,
                       std::uint64_t seed, const RunRecord& rec,
                       const ProblemBundle& bundle, bool wall_clock,
                       std::int64_t wall_ms);

}  // namespace hscg

#endif
