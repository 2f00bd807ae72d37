#include "hscg/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "hscg/problems/model_selection.hpp"
#include "hscg/problems/portfolio.hpp"

namespace hscg {

namespace {

std::string resolve_data_path(const std::string& path) {
  namespace fs = std::filesystem;
  if (path.empty() || fs::path(path).is_absolute()) return path;
  const char* base = std::getenv("HSCG_DATA_DIR");
  if (base == nullptr || *base == '\0') return path;
  return (fs::path(base) / path).string();
}

// Shortest round-trip decimal text for a double; keeps records diff-stable.
std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

ProblemBundle build_problem(const ConfigFile& cfg) {
  ProblemBundle b;
  b.kind = cfg.get_string_or("problem", "kind", "");
  if (b.kind.empty()) throw ConfigError("[problem] kind is required");
  const double lambda = cfg.get_number_or("problem", "lambda", 0.0);

  if (b.kind == "portfolio" || b.kind == "synthetic_portfolio") {
    Mat returns;
    if (b.kind == "portfolio") {
      const std::string path =
          resolve_data_path(cfg.get_string("problem", "data"));
      returns = load_portfolio_csv(
          path, cfg.get_bool_or("problem", "drop_missing", false));
    } else {
      returns = synthetic_portfolio_returns(
          static_cast<int>(cfg.get_int_or("problem", "n", 1000)),
          static_cast<int>(cfg.get_int_or("problem", "p", 30)),
          static_cast<std::uint64_t>(cfg.get_int_or("problem", "data_seed", 0)));
    }
    const double rho = cfg.get_number_or("problem", "rho", 0.2);
    b.problem = std::make_unique<PortfolioProblem>(std::move(returns));
    b.outer = portfolio_outer(rho);
    b.reg = lambda > 0.0 ? Regularizer::l1(lambda) : Regularizer::zero();
    b.n_blocks = static_cast<int>(cfg.get_int_or("problem", "n_blocks", 8));
  } else if (b.kind == "model_selection" || b.kind == "synthetic_minimax") {
    Dataset data;
    if (b.kind == "model_selection") {
      const std::string path =
          resolve_data_path(cfg.get_string("problem", "data"));
      data = load_libsvm(path,
                         static_cast<int>(cfg.get_int_or("problem", "p", 0)));
      const std::string want = cfg.get_string_or("problem", "checksum", "");
      if (!want.empty() && want != data.checksum)
        throw DataError("checksum mismatch for " + path + ": expected " + want +
                        ", got " + data.checksum);
      if (cfg.get_bool_or("problem", "scale", false)) max_abs_scale(data);
    } else {
      data = synthetic_minimax_dataset(
          static_cast<int>(cfg.get_int_or("problem", "n", 2000)),
          static_cast<int>(cfg.get_int_or("problem", "p", 100)),
          static_cast<std::uint64_t>(cfg.get_int_or("problem", "data_seed", 0)));
    }
    b.problem = std::make_unique<ModelSelectionProblem>(std::move(data));
    b.outer = model_selection_outer();
    b.reg = lambda > 0.0 ? Regularizer::squared_l2(lambda) : Regularizer::zero();
    b.n_blocks = static_cast<int>(cfg.get_int_or("problem", "n_blocks", 32));
  } else {
    throw ConfigError("[problem] unknown kind '" + b.kind + "'");
  }

  const int n = b.problem->num_samples();
  b.block_batch = std::max(1, (n + b.n_blocks - 1) / b.n_blocks);

  const auto const_seed =
      static_cast<std::uint64_t>(cfg.get_int_or("problem", "constants_seed", 9001));
  b.pc = estimate_constants(*b.problem, Vec::Zero(b.problem->dim_p()), 1.0,
                            const_seed);
  return b;
}

namespace {

ScheduleKind parse_schedule(const std::string& s) {
  if (s == "manual") return ScheduleKind::Manual;
  if (s == "thm1") return ScheduleKind::Thm1;
  if (s == "thm2") return ScheduleKind::Thm2;
  if (s == "thm3") return ScheduleKind::Thm3;
  if (s == "thm4") return ScheduleKind::Thm4;
  throw ConfigError("unknown schedule '" + s + "'");
}

// Value-oracle calls per iteration of the tuned hybrid loop.
long hscg_iter_cost(const SolverConfig& sc) {
  const long b1 = sc.b;
  return sc.plan.corr_F ? 2 * b1 : 3 * b1;
}

}  // namespace

SolverEntry build_solver_entry(const ConfigFile& cfg, const std::string& name,
                               const ProblemBundle& bundle) {
  const std::string sec = "solver." + name;
  SolverEntry e;
  e.name = name;
  const int n = bundle.problem->num_samples();
  e.epochs = cfg.get_number_or(sec, "epochs", 0.0);
  const int b_cfg = static_cast<int>(cfg.get_int_or(sec, "b", 0));
  const int b = b_cfg > 0 ? b_cfg : bundle.block_batch;
  long T = cfg.get_int_or(sec, "T", 0);

  if (name == "hscg" || name == "hscg-restart") {
    SolverConfig& sc = e.hscg;
    sc.schedule = parse_schedule(cfg.get_string_or(sec, "schedule", "manual"));
    sc.b = b;
    sc.bhat0 = static_cast<int>(cfg.get_int_or(sec, "bhat0", 0));
    sc.gamma = cfg.get_number_or(sec, "gamma", 0.5);
    sc.manual.eta = cfg.get_number_or(sec, "eta", 0.1);
    sc.manual.theta = cfg.get_number_or(sec, "theta", 1.0);
    sc.stages = static_cast<int>(cfg.get_int_or(sec, "stages", 1));
    sc.plan.c0 = cfg.get_number_or(sec, "c0", 1.0);
    sc.plan.c1 = cfg.get_number_or(sec, "c1", 1.0);
    sc.plan.c2 = cfg.get_number_or(sec, "c2", 1.0);
    sc.plan.corr_F = sc.plan.corr_J = cfg.get_bool_or(sec, "corr", true);
    sc.plan.with_replacement = cfg.get_bool_or(sec, "with_replacement", false);
    sc.metric_cadence = static_cast<int>(cfg.get_int_or("run", "cadence", 0));
    sc.mega_batch = static_cast<int>(cfg.get_int_or("run", "mega_batch", 0));
    if (name == "hscg-restart" && sc.stages < 2)
      throw ConfigError("[solver.hscg-restart] needs stages >= 2");
    if (T == 0) {
      if (e.epochs <= 0.0)
        throw ConfigError("[" + sec + "] set T or epochs");
      if (sc.schedule != ScheduleKind::Manual)
        throw ConfigError("[" + sec + "] theorem schedules need an explicit T");
      const long budget = static_cast<long>(e.epochs * n);
      const long init = 2L * std::min(b, n);
      T = std::max<long>(1, (budget / sc.stages - init) / hscg_iter_cost(sc));
    }
    sc.T = static_cast<int>(T);
    if (e.epochs <= 0.0) e.epochs = -1.0;
  } else if (name == "scg") {
    ScgConfig& sc = e.scg;
    sc.batch = b;
    sc.eta = cfg.get_number_or(sec, "eta", 0.1);
    sc.a_exponent = cfg.get_number_or(sec, "a_exponent", 0.6);
    sc.metric_cadence = static_cast<int>(cfg.get_int_or("run", "cadence", 0));
    sc.mega_batch = static_cast<int>(cfg.get_int_or("run", "mega_batch", 0));
    if (T == 0) {
      if (e.epochs <= 0.0) throw ConfigError("[" + sec + "] set T or epochs");
      T = std::max<long>(1, static_cast<long>(e.epochs * n) / b);
    }
    sc.T = static_cast<int>(T);
  } else if (name == "civr") {
    CivrConfig& sc = e.civr;
    sc.batch = b;
    sc.eta = cfg.get_number_or(sec, "eta", 0.1);
    sc.epoch_len = static_cast<int>(cfg.get_int_or(sec, "epoch_len", 0));
    if (sc.epoch_len <= 0) sc.epoch_len = bundle.n_blocks;
    sc.mega = static_cast<int>(cfg.get_int_or(sec, "mega", 0));
    sc.metric_cadence = static_cast<int>(cfg.get_int_or("run", "cadence", 0));
    sc.mega_batch = static_cast<int>(cfg.get_int_or("run", "mega_batch", 0));
    if (T == 0) {
      if (e.epochs <= 0.0) throw ConfigError("[" + sec + "] set T or epochs");
      // Simulate the per-iteration cost to match the evaluation budget.
      const long budget = static_cast<long>(e.epochs * n);
      const long mega = sc.mega <= 0 || sc.mega > n ? n : sc.mega;
      long calls = 0, t = 0;
      while (calls < budget) {
        calls += (t % sc.epoch_len == 0) ? mega : 2L * sc.batch;
        ++t;
      }
      T = std::max<long>(1, t - 1);
    }
    sc.T = static_cast<int>(T);
  } else {
    throw ConfigError("unknown solver '" + name + "'");
  }
  return e;
}

RunRecord execute(const SolverEntry& entry, const ProblemBundle& bundle,
                  std::uint64_t seed) {
  if (entry.name == "hscg") {
    SolverConfig sc = entry.hscg;
    sc.seed = seed;
    sc.stages = 1;
    return run(*bundle.problem, bundle.outer, bundle.reg, sc, bundle.pc);
  }
  if (entry.name == "hscg-restart") {
    SolverConfig sc = entry.hscg;
    sc.seed = seed;
    return run_restart(*bundle.problem, bundle.outer, bundle.reg, sc, bundle.pc);
  }
  if (entry.name == "scg") {
    ScgConfig sc = entry.scg;
    sc.seed = seed;
    return run_scg(*bundle.problem, bundle.outer, bundle.reg, sc);
  }
  if (entry.name == "civr") {
    CivrConfig sc = entry.civr;
    sc.seed = seed;
    return run_civr(*bundle.problem, bundle.outer, bundle.reg, sc);
  }
  throw ConfigError("unknown solver '" + entry.name + "'");
}

TraceFiles write_trace(const std::string& out_dir, const std::string& solver,
                       std::uint64_t seed, const RunRecord& rec,
                       const ProblemBundle& bundle, bool wall_clock,
                       std::int64_t wall_ms) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const bool is_portfolio =
      bundle.kind == "portfolio" || bundle.kind == "synthetic_portfolio";
  const std::string stem = solver + "_" + std::to_string(seed);
  TraceFiles files;
  files.jsonl = (fs::path(out_dir) / (stem + ".jsonl")).string();
  files.csv = (fs::path(out_dir) / (stem + ".csv")).string();
  files.summary = (fs::path(out_dir) / (stem + "_summary.json")).string();

  std::ofstream jf(files.jsonl);
  std::ofstream cf(files.csv);
  if (!jf || !cf) throw DataError("cannot write trace files in " + out_dir);

  cf << "solver,seed,stage,t,epoch,objective,grad_map_sq,oracle_F,oracle_J";
  if (is_portfolio) cf << ",reward";
  if (wall_clock) cf << ",wall_ms";
  cf << "\n";

  for (const MetricRecord& m : rec.records) {
    nlohmann::ordered_json j;
    j["solver"] = solver;
    j["seed"] = seed;
    j["stage"] = m.stage;
    j["t"] = m.t;
    j["epoch"] = m.epoch;
    j["objective"] = m.objective;
    j["grad_map_sq"] = m.grad_map_sq;
    j["oracle_F"] = m.oracle_F;
    j["oracle_J"] = m.oracle_J;
    if (is_portfolio) j["reward"] = -m.objective;
    if (wall_clock) j["wall_ms"] = wall_ms;
    jf << j.dump() << "\n";

    cf << solver << "," << seed << "," << m.stage << "," << m.t << ","
       << format_double(m.epoch) << "," << format_double(m.objective) << ","
       << format_double(m.grad_map_sq) << "," << m.oracle_F << ","
       << m.oracle_J;
    if (is_portfolio) cf << "," << format_double(-m.objective);
    if (wall_clock) cf << "," << wall_ms;
    cf << "\n";
  }

  nlohmann::ordered_json s;
  s["solver"] = solver;
  s["seed"] = seed;
  s["selected_t"] = rec.selected_t;
  s["selected_stage"] = rec.selected_stage;
  s["eta_bar"] = rec.eta_bar;
  s["gamma_bar"] = rec.gamma_bar;
  s["grad_map_sq_xbar"] = rec.grad_map_sq_xbar;
  s["objective_xbar"] = rec.objective_xbar;
  s["oracle_F"] = rec.counters.value_calls;
  s["oracle_J"] = rec.counters.jacobian_calls;
  s["incomplete"] = rec.incomplete;
  if (wall_clock) s["wall_ms"] = wall_ms;
  s["x_bar"] = std::vector<double>(rec.x_bar.data(),
                                   rec.x_bar.data() + rec.x_bar.size());
  std::ofstream sf(files.summary);
  sf << s.dump(2) << "\n";
  return files;
}

}  // namespace hscg
