#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "wpme/wpme.hpp"

using namespace wpme;

namespace {

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("-c,--config", c.config, "flat key = value config file");
  sub->add_option("-s,--set", c.sets, "override one key, key=value (repeatable)");
  sub->add_option("--out", c.out, "output directory (file for sweep)");
}

FlatConfig load(const Common& c) {
  FlatConfig cfg = c.config.empty() ? FlatConfig{} : FlatConfig::load(c.config);
  for (const auto& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got " + kv);
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  // the seed picks the perturbed realization and nothing else
  if (c.seed && cfg.str("density.profile", "exact") == "perturbed") cfg.set("density.seed", std::to_string(*c.seed));
  return cfg;
}

ExperimentSpec spec_from(const Common& c) {
  const FlatConfig cfg = load(c);
  ExperimentSpec e = experiment_from(cfg);
  cfg.reject_unused();
  if (!c.out.empty()) e.output_dir = c.out;
  return e;
}

void emit(const json& j) { std::cout << j.dump(2) << '\n'; }

int cmd_feasibility(const Common& c) {
  const ExperimentSpec e = spec_from(c);
  const ProblemSpec& s = e.problem;
  json out = json::array();
  bool all = true;
  auto run = [&](auto&& fn) {
    try {
      FeasibilityReport r = fn();
      all = all && r.feasible;
      out.push_back(to_json(r));
    } catch (const Infeasible& ex) {
      all = false;
      out.push_back(to_json(ex.report()));
    }
  };
  if (e.overrides) {
    run([&] {
      FeasibilityReport r;
      detail::certify_override(*e.overrides, s, r);
      return r;
    });
  } else if (s.density.q() == 2.0) {
    run([&] { return solve_super_q2(s); });
    if (s.p > s.m) run([&] { return solve_sub_q2(s); });
  } else {
    run([&] { return solve_super_qgt2(s); });
  }
  emit(out);
  if (!e.output_dir.empty()) {
    std::filesystem::create_directories(e.output_dir);
    std::ofstream(std::filesystem::path(e.output_dir) / "feasibility.json") << out.dump(2) << '\n';
  }
  return all ? 0 : 3;
}

int cmd_verify(const Common& c, int n_r, int n_t) {
  ExperimentSpec e = spec_from(c);
  e.kind = ExperimentKind::VerifyBarrier;
  VerifyGrid g;
  g.n_r = n_r;
  g.n_t = n_t;
  const ExperimentReport r = run_verify_barrier(e, g);
  emit(to_json(r));
  if (!e.output_dir.empty()) write_experiment(e.output_dir, r);
  return r.exit_code();
}

int cmd_simulate(const Common& c, const std::string& datum) {
  const ExperimentSpec e = spec_from(c);
  const ProblemSpec& s = e.problem;
  BarrierParams bp;
  RadialFunction u0;
  if (datum == "cap" && s.density.q() == 2.0) {
    bp = e.overrides ? check_super_q2(*e.overrides, s).params : solve_super_q2(s).params;
    u0 = initial_datum_supersolution_q2(bp, s);
  } else if (datum == "cap") {
    bp = e.overrides ? check_super_qgt2(*e.overrides, s).params : solve_super_qgt2(s).params;
    u0 = initial_datum_supersolution_qgt2(bp, s);
  } else if (datum == "floor") {
    if (e.overrides) {
      bp = check_sub_q2(*e.overrides, s).params;
    } else {
      const SubBounds b = SubBounds::from(s.density);
      bp = solve_sub_q2(s, b, e.horizon.value_or(default_blowup_horizon(solve_sub_q2(s, b, 1.0).params))).params;
    }
    u0 = initial_datum_subsolution_q2(bp, s);
  } else {
    throw ConfigError("--datum must be cap or floor");
  }
  SolverConfig cfg = e.solver;
  if (e.t_end) cfg.t_end = *e.t_end;
  if (cfg.grid.r_max <= 0.0) cfg.grid.r_max = 2.0 * std::max(support_radius(bp, 0.0), s.density.q() == 2.0 ? kE : 6.0);
  std::vector<double> u = sample(u0, cfg.grid);
  for (double& v : u) v *= e.data_scale;
  const Trajectory tr = solve(u, s, cfg);
  emit({{"outcome", to_string(tr.outcome)},
        {"t_final", tr.t_final},
        {"t_detect", detail::opt(tr.t_detect)},
        {"t_extrapolated", detail::opt(tr.t_extrapolated)},
        {"steps", tr.steps},
        {"r_max", cfg.grid.r_max},
        {"n_cells", cfg.grid.n_cells},
        {"params", to_json(bp)}});
  if (!e.output_dir.empty()) {
    std::filesystem::create_directories(e.output_dir);
    std::ofstream snap(std::filesystem::path(e.output_dir) / "snapshots.csv");
    write_snapshots_csv(snap, tr);
    std::ofstream ser(std::filesystem::path(e.output_dir) / "series.csv");
    write_series_csv(ser, tr);
  }
  return tr.outcome == Outcome::StepCollapse ? 4 : 0;
}

int cmd_experiment(const Common& c, const std::string& kind) {
  ExperimentSpec e = spec_from(c);
  if (!kind.empty()) e.kind = experiment_kind_from(kind);
  const ExperimentReport r = run_experiment(e);
  json j = to_json(r);
  std::cout << "{\"kind\": " << json(to_string(r.kind)) << ", \"pass\": " << json(r.pass())
            << ", \"exit_code\": " << r.exit_code() << ", \"outcome\": " << json(to_string(r.outcome)) << "}\n";
  for (const auto& a : r.assertions)
    std::cout << (a.pass ? "PASS " : "FAIL ") << a.id << " value=" << detail::num(a.value)
              << " limit=" << detail::num(a.limit) << (a.detail.empty() ? "" : " " + a.detail) << '\n';
  for (const auto& n : r.notes) std::cout << "note: " << n << '\n';
  if (!e.output_dir.empty()) write_experiment(e.output_dir, r);
  return r.exit_code();
}

int cmd_sweep(const std::string& out, const std::vector<int>& Ns, const std::vector<double>& ms,
              const std::vector<double>& ps, const std::vector<double>& qs, double r0, const SweepOptions& opt) {
  auto cells = sweep_grid(Ns, ms, ps, qs);
  for (auto& c : cells) c.r0 = r0;
  const auto rows = sweep(cells, opt);
  if (out.empty()) {
    write_sweep_csv(std::cout, rows);
  } else {
    std::ofstream f(out);
    if (!f) throw Error("cannot write " + out);
    write_sweep_csv(f, rows);
  }
  for (const auto& r : rows)
    if (!r.error.empty()) return 2;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Porous medium equation with fast decaying density: barriers, feasibility and simulation"};
  app.require_subcommand(1);
  Common common;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "seed of the perturbed density realization");

  auto* feas = app.add_subcommand("feasibility", "solve and certify barrier parameters");
  add_common(feas, common);

  int n_r = 200, n_t = 50;
  auto* ver = app.add_subcommand("verify", "residual sign check of the barriers on a grid");
  add_common(ver, common);
  ver->add_option("--n-r", n_r, "radial samples")->check(CLI::PositiveNumber);
  ver->add_option("--n-t", n_t, "time samples")->check(CLI::PositiveNumber);

  std::string datum = "cap";
  auto* sim = app.add_subcommand("simulate", "solve from the theorem's initial datum");
  add_common(sim, common);
  sim->add_option("--datum", datum, "cap (supersolution) or floor (subsolution)")
      ->check(CLI::IsMember({"cap", "floor"}));

  std::string kind;
  auto* exp = app.add_subcommand("experiment", "run one experiment and check its assertions");
  add_common(exp, common);
  exp->add_option("--kind", kind, "experiment kind (overrides experiment.kind)");

  std::vector<int> Ns{4};
  std::vector<double> ms{2.0}, ps{2.5, 3.0, 3.5}, qs{2.0, 3.0, 4.0};
  SweepOptions sopt;
  std::string sweep_out;
  double r0 = 0.0;
  auto* sw = app.add_subcommand("sweep", "regime map over a parameter grid");
  sw->add_option("--N", Ns)->delimiter(',');
  sw->add_option("--m", ms)->delimiter(',');
  sw->add_option("--p", ps)->delimiter(',');
  sw->add_option("--q", qs)->delimiter(',');
  sw->add_option("--n-cells", sopt.n_cells)->check(CLI::Range(2, 1 << 20));
  sw->add_option("--t-end", sopt.t_end_global);
  sw->add_option("--threads", sopt.threads);
  sw->add_option("--r0", r0, "envelope shift for every cell (0: e^2 for q = 2, 2 for q > 2)");
  sw->add_option("--out", sweep_out, "CSV path (stdout if absent)");

  CLI11_PARSE(app, argc, argv);
  if (*seed_opt) common.seed = seed;

  try {
    if (*feas) return cmd_feasibility(common);
    if (*ver) return cmd_verify(common, n_r, n_t);
    if (*sim) return cmd_simulate(common, datum);
    if (*exp) return cmd_experiment(common, kind);
    if (*sw) return cmd_sweep(sweep_out, Ns, ms, ps, qs, r0, sopt);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 1;
  } catch (const Infeasible& e) {
    emit(to_json(e.report()));
    return 3;
  } catch (const InfeasibleParams& e) {
    std::cerr << e.what() << '\n';
    return 3;
  } catch (const PreconditionError& e) {
    std::cerr << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  return 1;
}
