#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include "hscg/experiment.hpp"
#include "hscg/problems/model_selection.hpp"
#include "hscg/problems/portfolio.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitCheckFailed = 4;

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  long seed_override = -1;
  int cadence = -1;
  int mega_batch = -1;
  int jobs = 1;
  bool wall_clock = false;
};

hscg::ConfigFile load_config(const CommonOpts& opts) {
  hscg::ConfigFile cfg = hscg::ConfigFile::parse_file(opts.config_path);
  if (opts.cadence >= 0)
    cfg.set("run", "cadence", std::to_string(opts.cadence));
  if (opts.mega_batch >= 0)
    cfg.set("run", "mega_batch", std::to_string(opts.mega_batch));
  if (!opts.out_dir.empty()) cfg.set("run", "out", "\"" + opts.out_dir + "\"");
  return cfg;
}

std::vector<std::string> solver_names(const hscg::ConfigFile& cfg) {
  std::vector<std::string> names;
  for (const std::string& sec : cfg.sections())
    if (sec.rfind("solver.", 0) == 0) names.push_back(sec.substr(7));
  return names;
}

std::vector<std::uint64_t> run_seeds(const hscg::ConfigFile& cfg,
                                     long seed_override) {
  if (seed_override >= 0)
    return {static_cast<std::uint64_t>(seed_override)};
  std::vector<std::uint64_t> seeds;
  for (long s : cfg.get_int_list_or("run", "seeds", {0}))
    seeds.push_back(static_cast<std::uint64_t>(s));
  if (seeds.empty()) seeds.push_back(0);
  return seeds;
}

int cmd_run(const CommonOpts& opts, const std::string& only_solver) {
  const hscg::ConfigFile cfg = load_config(opts);
  const hscg::ProblemBundle bundle = hscg::build_problem(cfg);
  const std::string out = cfg.get_string_or("run", "out", "results");
  const bool wall_clock =
      opts.wall_clock || cfg.get_bool_or("run", "wall_clock", false);

  std::vector<std::string> names = solver_names(cfg);
  if (!only_solver.empty()) names = {only_solver};
  if (names.empty())
    throw hscg::ConfigError("no [solver.*] sections in " + opts.config_path);

  for (const std::string& name : names) {
    const hscg::SolverEntry entry = hscg::build_solver_entry(cfg, name, bundle);
    for (std::uint64_t seed : run_seeds(cfg, opts.seed_override)) {
      const auto t0 = std::chrono::steady_clock::now();
      const hscg::RunRecord rec = hscg::execute(entry, bundle, seed);
      const auto wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                               std::chrono::steady_clock::now() - t0)
                               .count();
      const auto files = hscg::write_trace(out, name, seed, rec, bundle,
                                           wall_clock, wall_ms);
      std::cout << name << " seed=" << seed << " records=" << rec.records.size()
                << " epochs=" << rec.records.back().epoch
                << " objective=" << rec.objective_xbar
                << " grad_map_sq=" << rec.grad_map_sq_xbar << " -> "
                << files.jsonl << "\n";
    }
  }
  return 0;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / v.size();
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / (v.size() - 1));
}

int cmd_compare(const CommonOpts& opts) {
  const hscg::ConfigFile cfg = load_config(opts);
  const hscg::ProblemBundle bundle = hscg::build_problem(cfg);
  const std::string out = cfg.get_string_or("run", "out", "results");
  const bool wall_clock =
      opts.wall_clock || cfg.get_bool_or("run", "wall_clock", false);

  const std::vector<std::string> names = solver_names(cfg);
  if (names.size() < 2)
    throw hscg::ConfigError("compare needs at least two [solver.*] sections");

  std::vector<hscg::SolverEntry> entries;
  for (const std::string& name : names)
    entries.push_back(hscg::build_solver_entry(cfg, name, bundle));
  const double budget = entries.front().epochs;
  for (const hscg::SolverEntry& e : entries) {
    if (e.epochs <= 0.0)
      throw hscg::ConfigError("[solver." + e.name +
                              "] compare requires an `epochs` budget");
    if (std::abs(e.epochs - budget) > 1e-12)
      throw hscg::ConfigError(
          "epoch budgets mismatched across solvers: " + std::to_string(budget) +
          " vs " + std::to_string(e.epochs) + " ([solver." + e.name + "])");
  }

  const std::vector<std::uint64_t> seeds = run_seeds(cfg, opts.seed_override);
  struct Job {
    std::size_t entry_idx;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < entries.size(); ++i)
    for (std::uint64_t s : seeds) jobs.push_back({i, s});

  std::vector<hscg::RunRecord> results(jobs.size());
  std::vector<std::int64_t> wall(jobs.size(), 0);
  const int parallel = std::max(1, opts.jobs);
  for (std::size_t base = 0; base < jobs.size();
       base += static_cast<std::size_t>(parallel)) {
    std::vector<std::future<void>> futs;
    for (std::size_t k = base;
         k < std::min(jobs.size(), base + static_cast<std::size_t>(parallel));
         ++k) {
      futs.push_back(std::async(std::launch::async, [&, k] {
        const auto t0 = std::chrono::steady_clock::now();
        results[k] = hscg::execute(entries[jobs[k].entry_idx], bundle,
                                   jobs[k].seed);
        wall[k] = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
      }));
    }
    for (auto& f : futs) f.get();
  }

  for (std::size_t k = 0; k < jobs.size(); ++k)
    hscg::write_trace(out, entries[jobs[k].entry_idx].name, jobs[k].seed,
                      results[k], bundle, wall_clock, wall[k]);

  // Wide CSV keyed on epoch; per-solver means over seeds at the nearest
  // record to each integer epoch.
  fs::create_directories(out);
  std::ofstream merged(fs::path(out) / "compare.csv");
  merged << "epoch";
  for (const auto& e : entries)
    merged << "," << e.name << "_objective," << e.name << "_grad_map_sq";
  merged << "\n";
  const int max_epoch = static_cast<int>(std::floor(budget));
  for (int ep = 0; ep <= max_epoch; ++ep) {
    merged << ep;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      std::vector<double> obj, gms;
      for (std::size_t k = 0; k < jobs.size(); ++k) {
        if (jobs[k].entry_idx != i) continue;
        const auto& recs = results[k].records;
        double best_d = 1e300;
        const hscg::MetricRecord* best = nullptr;
        for (const auto& m : recs) {
          const double d = std::abs(m.epoch - ep);
          if (d < best_d) {
            best_d = d;
            best = &m;
          }
        }
        if (best != nullptr) {
          obj.push_back(best->objective);
          gms.push_back(best->grad_map_sq);
        }
      }
      merged << "," << mean_of(obj) << "," << mean_of(gms);
    }
    merged << "\n";
  }

  // Final table: objective and grad mapping at the selected output.
  std::ostringstream table;
  table << "solver          objective (mean +- std)      grad_map_sq (mean +- std)\n";
  std::vector<double> final_obj_mean(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    std::vector<double> obj, gms;
    for (std::size_t k = 0; k < jobs.size(); ++k) {
      if (jobs[k].entry_idx != i) continue;
      obj.push_back(results[k].objective_xbar);
      gms.push_back(results[k].grad_map_sq_xbar);
    }
    final_obj_mean[i] = mean_of(obj);
    char line[160];
    std::snprintf(line, sizeof line, "%-14s %12.6g +- %-10.4g %14.6g +- %-10.4g\n",
                  entries[i].name.c_str(), mean_of(obj), std_of(obj),
                  mean_of(gms), std_of(gms));
    table << line;
  }

  // Qualitative ordering check against the two-timescale baseline.
  auto idx_of = [&](const std::string& n) -> long {
    for (std::size_t i = 0; i < entries.size(); ++i)
      if (entries[i].name == n) return static_cast<long>(i);
    return -1;
  };
  const long ih = idx_of("hscg"), is = idx_of("scg");
  if (ih >= 0 && is >= 0 && final_obj_mean[ih] > final_obj_mean[is]) {
    table << "warning: hscg mean final objective " << final_obj_mean[ih]
          << " exceeds scg's " << final_obj_mean[is] << "\n";
  }
  std::cout << table.str();
  std::ofstream(fs::path(out) / "compare_table.txt") << table.str();
  return 0;
}

// Problem wrapper with one Jacobian entry shifted; gradcheck's negative
// control.
class CorruptedJacobian : public hscg::CompositionProblem {
 public:
  CorruptedJacobian(const hscg::CompositionProblem& inner, double eps)
      : inner_(inner), eps_(eps) {}
  int dim_p() const override { return inner_.dim_p(); }
  int dim_q() const override { return inner_.dim_q(); }
  int num_samples() const override { return inner_.num_samples(); }
  void sample_value(const hscg::Vec& x, int i, hscg::Vec& out) const override {
    inner_.sample_value(x, i, out);
  }
  void add_jacobian(const hscg::Vec& x, int i, double w,
                    Eigen::Ref<hscg::Mat> acc) const override {
    inner_.add_jacobian(x, i, w, acc);
    acc(0, 0) += w * eps_;
  }

 private:
  const hscg::CompositionProblem& inner_;
  double eps_;
};

int cmd_gradcheck(const CommonOpts& opts, double perturb) {
  const hscg::ConfigFile cfg = load_config(opts);
  const hscg::ProblemBundle bundle = hscg::build_problem(cfg);
  const hscg::CompositionProblem* problem = bundle.problem.get();
  CorruptedJacobian corrupted(*bundle.problem, perturb);
  if (perturb != 0.0) problem = &corrupted;

  const int p = problem->dim_p();
  const int q = problem->dim_q();
  const double gamma = bundle.outer.is_max_form() ? 0.5 : 0.0;
  const double h = 1e-5;
  hscg::Rng rng(314159);
  auto random_x = [&] {
    hscg::Vec x(p);
    for (int d = 0; d < p; ++d) x[d] = 0.5 * rng.normal();
    return x;
  };

  // (1) Sample Jacobians against central differences.
  double err_jac = 0.0;
  for (int rep = 0; rep < 5; ++rep) {
    const hscg::Vec x = random_x();
    const int i = static_cast<int>(rng.uniform_int(problem->num_samples()));
    const hscg::Mat jac = problem->sample_jacobian(x, i);
    hscg::Mat fd(q, p);
    hscg::Vec fp(q), fm(q);
    for (int d = 0; d < p; ++d) {
      hscg::Vec xp = x, xm = x;
      xp[d] += h;
      xm[d] -= h;
      problem->sample_value(xp, i, fp);
      problem->sample_value(xm, i, fm);
      fd.col(d) = (fp - fm) / (2.0 * h);
    }
    err_jac = std::max(err_jac, (fd - jac).norm() / std::max(1.0, jac.norm()));
  }

  // (2) Outer gradient against central differences of phi_gamma.
  double err_outer = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    hscg::Vec u(q);
    for (int j = 0; j < q; ++j) u[j] = rng.normal();
    const hscg::Vec g = bundle.outer.grad_phi_gamma(u, gamma);
    hscg::Vec fd(q);
    for (int j = 0; j < q; ++j) {
      hscg::Vec up = u, um = u;
      up[j] += h;
      um[j] -= h;
      const double vp = bundle.outer.is_max_form()
                            ? bundle.outer.phi_gamma_value(up, gamma)
                            : bundle.outer.phi0_value(up);
      const double vm = bundle.outer.is_max_form()
                            ? bundle.outer.phi_gamma_value(um, gamma)
                            : bundle.outer.phi0_value(um);
      fd[j] = (vp - vm) / (2.0 * h);
    }
    err_outer = std::max(err_outer, (fd - g).norm() / std::max(1.0, g.norm()));
  }

  // (3) Full-batch direction v against central differences of
  // x -> phi_gamma(F(x)).
  double err_v = 0.0;
  {
    const hscg::Vec x = random_x();
    const hscg::Vec f = problem->mean_value(x);
    const hscg::Mat j = problem->mean_jacobian(x);
    const hscg::Vec v = j.transpose() * bundle.outer.grad_phi_gamma(f, gamma);
    hscg::Vec fd(p);
    for (int d = 0; d < p; ++d) {
      hscg::Vec xp = x, xm = x;
      xp[d] += h;
      xm[d] -= h;
      const hscg::Vec f_p = problem->mean_value(xp);
      const hscg::Vec f_m = problem->mean_value(xm);
      const double vp = bundle.outer.is_max_form()
                            ? bundle.outer.phi_gamma_value(f_p, gamma)
                            : bundle.outer.phi0_value(f_p);
      const double vm = bundle.outer.is_max_form()
                            ? bundle.outer.phi_gamma_value(f_m, gamma)
                            : bundle.outer.phi0_value(f_m);
      fd[d] = (vp - vm) / (2.0 * h);
    }
    err_v = (fd - v).norm() / std::max(1.0, v.norm());
  }

  const double tol = 1e-4;
  std::cout << "gradcheck max relative errors:\n"
            << "  sample_jacobian: " << err_jac << "\n"
            << "  outer_gradient:  " << err_outer << "\n"
            << "  full_batch_v:    " << err_v << "\n";
  int rc = 0;
  if (err_jac > tol) {
    std::cout << "FAIL sample_jacobian > " << tol << "\n";
    rc = kExitCheckFailed;
  }
  if (err_outer > tol) {
    std::cout << "FAIL outer_gradient > " << tol << "\n";
    rc = kExitCheckFailed;
  }
  if (err_v > tol) {
    std::cout << "FAIL full_batch_v > " << tol << "\n";
    rc = kExitCheckFailed;
  }
  if (rc == 0) std::cout << "gradcheck OK\n";
  return rc;
}

int cmd_kkt(const CommonOpts& opts, const std::string& run_dir,
            const std::string& solver, long seed_in) {
  const hscg::ConfigFile cfg = load_config(opts);
  const hscg::ProblemBundle bundle = hscg::build_problem(cfg);
  if (!bundle.outer.is_max_form())
    throw hscg::ConfigError("kkt: the configured problem has no max-form dual");

  const std::uint64_t seed = seed_in >= 0 ? seed_in : 0;
  const std::string stem = solver + "_" + std::to_string(seed);
  const fs::path summary_path = fs::path(run_dir) / (stem + "_summary.json");
  std::ifstream sf(summary_path);
  if (!sf) throw hscg::DataError("missing run summary: " + summary_path.string());
  ordered_json summary = ordered_json::parse(sf);

  hscg::Vec x_bar(summary["x_bar"].size());
  for (std::size_t i = 0; i < summary["x_bar"].size(); ++i)
    x_bar[static_cast<Eigen::Index>(i)] = summary["x_bar"][i].get<double>();
  const double eta_bar = summary["eta_bar"].get<double>();
  const double gamma_bar = summary["gamma_bar"].get<double>();
  const double grad_map_sq = summary["grad_map_sq_xbar"].get<double>();

  if (gamma_bar == 0.0 && bundle.outer.mu_psi() == 0.0)
    throw hscg::ConfigError("kkt: gamma_T = 0 with non-strongly-convex psi");

  hscg::KKTConfig kcfg;  // full batches
  const auto pair =
      hscg::kkt_construct(*bundle.problem, bundle.outer, bundle.reg, x_bar,
                          eta_bar, gamma_bar, kcfg, seed ^ 0x5eedULL);
  const double E = hscg::kkt_residual(*bundle.problem, bundle.outer, bundle.reg,
                                      pair.x_star, pair.y_star, 0,
                                      seed ^ 0x5eedf00dULL);

  const double eps_hat = std::sqrt(grad_map_sq);
  const double c2 = eps_hat > 0.0 ? gamma_bar / eps_hat : 0.0;
  const double K = bundle.outer.k_norm();
  const double bound_rhs =
      (13.0 / 3.0 + (8.0 / 3.0) * bundle.pc.M_F * K * K +
       c2 * bundle.outer.D_psi()) *
      eps_hat;

  ordered_json out;
  out["E"] = E;
  out["grad_map_sq"] = grad_map_sq;
  out["bound_rhs"] = bound_rhs;
  out["c2"] = c2;
  const fs::path kkt_path = fs::path(run_dir) / (stem + "_kkt.json");
  std::ofstream(kkt_path, std::ios::app) << out.dump() << "\n";
  std::cout << "E=" << E << " bound_rhs=" << bound_rhs << " ("
            << (E <= bound_rhs ? "ok" : "violated") << ") -> " << kkt_path
            << "\n";
  return E <= bound_rhs ? 0 : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid stochastic compositional gradient benchmark harness"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string only_solver, run_dir, kkt_solver = "hscg";
  double perturb = 0.0;

  auto add_common = [&](CLI::App* sub, bool needs_config = true) {
    auto* c = sub->add_option("--config", opts.config_path, "config file");
    if (needs_config) c->required();
    sub->add_option("--seed", opts.seed_override, "override the seed list");
    sub->add_option("--out", opts.out_dir, "output directory");
    sub->add_option("--cadence", opts.cadence, "metric cadence in iterations");
    sub->add_option("--mega-batch", opts.mega_batch, "metric mega-batch size");
    sub->add_option("--jobs", opts.jobs, "parallel runs (compare)");
    sub->add_flag("--wall-clock", opts.wall_clock,
                  "record wall time in metric records");
  };

  auto* run_cmd = app.add_subcommand("run", "execute configured runs");
  add_common(run_cmd);
  run_cmd->add_option("--solver", only_solver, "run a single solver section");

  auto* compare_cmd =
      app.add_subcommand("compare", "run all solvers and merge traces");
  add_common(compare_cmd);

  auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference checks");
  add_common(grad_cmd);
  grad_cmd->add_option("--perturb", perturb,
                       "corrupt one Jacobian entry (self-test)");

  auto* kkt_cmd = app.add_subcommand("kkt", "KKT residual of a finished run");
  add_common(kkt_cmd);
  kkt_cmd->add_option("--run-dir", run_dir, "directory of a finished run")
      ->required();
  kkt_cmd->add_option("--kkt-solver", kkt_solver, "solver name of the run");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return cmd_run(opts, only_solver);
    if (compare_cmd->parsed()) return cmd_compare(opts);
    if (grad_cmd->parsed()) return cmd_gradcheck(opts, perturb);
    if (kkt_cmd->parsed())
      return cmd_kkt(opts, run_dir, kkt_solver, opts.seed_override);
  } catch (const hscg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const hscg::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const hscg::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return 0;
}
