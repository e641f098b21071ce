#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "wpme/barenblatt.hpp"
#include "wpme/barriers.hpp"
#include "wpme/feasibility.hpp"
#include "wpme/solver.hpp"
#include "wpme/verifier.hpp"

namespace wpme {

enum class ExperimentKind {
  GlobalExistenceQ2,
  BlowupQ2,
  GlobalExistenceQgt2,
  VerifyBarrier,
  FeasibilityOnly,
  SolverValidation
};

inline std::string_view to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::GlobalExistenceQ2: return "global_existence_q2";
    case ExperimentKind::BlowupQ2: return "blowup_q2";
    case ExperimentKind::GlobalExistenceQgt2: return "global_existence_qgt2";
    case ExperimentKind::VerifyBarrier: return "verify_barrier";
    case ExperimentKind::FeasibilityOnly: return "feasibility_only";
    case ExperimentKind::SolverValidation: return "solver_validation";
  }
  return "?";
}

inline ExperimentKind experiment_kind_from(std::string_view s) {
  for (auto k : {ExperimentKind::GlobalExistenceQ2, ExperimentKind::BlowupQ2,
                 ExperimentKind::GlobalExistenceQgt2, ExperimentKind::VerifyBarrier,
                 ExperimentKind::FeasibilityOnly, ExperimentKind::SolverValidation})
    if (to_string(k) == s) return k;
  throw DomainError("unknown experiment kind: " + std::string(s));
}

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::GlobalExistenceQ2;
  ProblemSpec problem;
  /// Barrier to use instead of the solver's construction; certified on entry.
  std::optional<BarrierParams> overrides;
  /// grid.r_max = 0 selects a radius from the barrier support.
  SolverConfig solver;
  /// Multiplies the theorem's initial datum (cap for global runs, floor for blow-up runs).
  double data_scale = 1.0;
  /// Horizon T of the blow-up subsolution; default makes a T^beta = 2.
  std::optional<double> horizon;
  /// Final time; default 5 (q = 2 global), 1.1 T (blow-up), 1 (q > 2).
  std::optional<double> t_end;
  std::string output_dir;
};

/// One pass/fail statement of an experiment; value is compared against limit.
struct Assertion {
  std::string id;
  bool pass = false;
  double value = 0.0;
  double limit = 0.0;
  std::string detail;
};

struct ExperimentReport {
  ExperimentKind kind = ExperimentKind::GlobalExistenceQ2;
  std::optional<FeasibilityReport> feasibility;
  std::optional<BarrierParams> params;
  /// The initial datum satisfies the theorem's hypothesis; false means exploratory mode.
  bool certified = false;
  bool infeasible = false;
  Outcome outcome = Outcome::ReachedTEnd;
  double t_final = 0.0;
  std::optional<double> t_detect;
  std::optional<double> t_extrapolated;
  long steps = 0;
  double h = 0.0;
  double tol_grid = 0.0;
  /// max(u - super) for global runs, max(sub - u) for blow-up runs, over the checked times.
  double max_ordering_excess = -std::numeric_limits<double>::infinity();
  std::optional<double> first_violation_t;
  /// Global runs: max(front - barrier support). Blow-up runs: max(sub support - first zero of u).
  double max_support_excess = -std::numeric_limits<double>::infinity();
  /// Blow-up runs: threshold crossed and extrapolated time in [0.8 T, 1.1 T].
  bool blowup_confirmed = false;
  std::vector<Assertion> assertions;
  std::vector<ResidualReport> residuals;
  std::vector<std::string> notes;
  Trajectory trajectory;

  [[nodiscard]] bool pass() const {
    if (infeasible) return false;
    return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.pass; });
  }

  /// 0 pass, 2 assertion failure, 3 infeasible, 4 solver collapse.
  [[nodiscard]] int exit_code() const {
    if (infeasible) return 3;
    if (outcome == Outcome::StepCollapse) return 4;
    return pass() ? 0 : 2;
  }
};

namespace detail {

inline void require_q2(const ProblemSpec& s, const char* what) {
  if (s.density.q() != 2.0) throw PreconditionError(std::string(what) + ": needs q = 2");
  if (!(s.p > s.m)) throw PreconditionError(std::string(what) + ": needs p > m");
}

inline Assertion assertion(std::string id, bool pass, double value, double limit, std::string detail = {}) {
  return {std::move(id), pass, value, limit, std::move(detail)};
}

inline BarrierParams certify_override(const BarrierParams& bp, const ProblemSpec& spec, FeasibilityReport& rep) {
  switch (bp.family) {
    case BarrierFamily::SuperQ2: rep = check_super_q2(bp, spec); break;
    case BarrierFamily::SubQ2: rep = check_sub_q2(bp, spec); break;
    case BarrierFamily::SuperQgt2: rep = check_super_qgt2(bp, spec); break;
  }
  return rep.params;
}

inline void copy_outcome(ExperimentReport& rep, Trajectory tr) {
  rep.outcome = tr.outcome;
  rep.t_final = tr.t_final;
  rep.t_detect = tr.t_detect;
  rep.t_extrapolated = tr.t_extrapolated;
  rep.steps = tr.steps;
  rep.trajectory = std::move(tr);
}

/// Largest u - barrier over the nodes of one state (barrier evaluated at time t).
inline double excess_over(const std::vector<double>& u, const RadialGrid& g, const BarrierParams& bp,
                          const ProblemSpec& spec, double t) {
  double e = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= g.n_cells; ++i) e = std::max(e, u[i] - eval_barrier(bp, spec, g.node(i), t).value);
  return e;
}

/// First node radius where u vanishes (r_max if none).
inline double first_zero(const std::vector<double>& u, const RadialGrid& g) {
  for (int i = 0; i <= g.n_cells; ++i)
    if (!(u[i] > 0.0)) return g.node(i);
  return g.r_max;
}

/// Supersolution ordering and support checks at every snapshot.
inline void check_under_barrier(ExperimentReport& rep, const BarrierParams& bp, const ProblemSpec& spec,
                                bool with_support) {
  const RadialGrid& g = rep.trajectory.grid;
  for (const Snapshot& s : rep.trajectory.snapshots) {
    if (!std::all_of(s.u.begin(), s.u.end(), [](double v) { return std::isfinite(v); })) continue;
    const double e = excess_over(s.u, g, bp, spec, s.t);
    if (e > rep.tol_grid && !rep.first_violation_t) rep.first_violation_t = s.t;
    rep.max_ordering_excess = std::max(rep.max_ordering_excess, e);
    if (with_support)
      rep.max_support_excess =
          std::max(rep.max_support_excess, front_radius(s.u, g) - support_radius(bp, s.t));
  }
}

}  // namespace detail

/// Solution from the capped datum stays under the q = 2 supersolution with the same support.
inline ExperimentReport run_global_existence_q2(const ExperimentSpec& exp) {
  const ProblemSpec& spec = exp.problem;
  detail::require_q2(spec, "global existence q = 2");
  ExperimentReport rep;
  rep.kind = ExperimentKind::GlobalExistenceQ2;
  FeasibilityReport fr;
  try {
    fr = exp.overrides ? FeasibilityReport{} : solve_super_q2(spec);
    if (exp.overrides) detail::certify_override(*exp.overrides, spec, fr);
  } catch (const Infeasible& e) {
    rep.feasibility = e.report();
    rep.infeasible = true;
    return rep;
  }
  rep.feasibility = fr;
  if (!fr.feasible) {
    rep.infeasible = true;
    return rep;
  }
  const BarrierParams bp = fr.params;
  rep.params = bp;
  const double t_end = exp.t_end.value_or(5.0);
  SolverConfig cfg = exp.solver;
  cfg.t_end = t_end;
  if (cfg.grid.r_max <= 0.0) cfg.grid.r_max = 2.0 * std::max(support_radius(bp, t_end), 1.0);
  rep.h = cfg.grid.h();
  rep.tol_grid = 10.0 * rep.h;
  rep.certified = exp.data_scale >= 0.0 && exp.data_scale <= 1.0;
  const RadialFunction cap = initial_datum_supersolution_q2(bp, spec);
  std::vector<double> u0 = sample(cap, cfg.grid);
  for (double& v : u0) v *= exp.data_scale;
  detail::copy_outcome(rep, solve(u0, spec, cfg));
  if (!rep.certified) {
    rep.notes.emplace_back("initial datum above the cap: exploratory run, outcome only");
    return rep;
  }
  detail::check_under_barrier(rep, bp, spec, true);
  rep.assertions.push_back(detail::assertion("ordering", rep.max_ordering_excess <= rep.tol_grid,
                                             rep.max_ordering_excess, rep.tol_grid));
  rep.assertions.push_back(detail::assertion("support", rep.max_support_excess <= 2.0 * rep.h,
                                             rep.max_support_excess, 2.0 * rep.h));
  rep.assertions.push_back(detail::assertion("reached_t_end", rep.outcome == Outcome::ReachedTEnd,
                                             rep.t_final, t_end, std::string(to_string(rep.outcome))));
  return rep;
}

/// Horizon with a T^beta = 2, so the subsolution starts with support |x| < e^2.
inline double default_blowup_horizon(const BarrierParams& bp) { return std::pow(2.0 / bp.a, 1.0 / bp.beta); }

/// Solution from the floored datum stays above the q = 2 subsolution and blows up by about T.
inline ExperimentReport run_blowup_q2(const ExperimentSpec& exp) {
  const ProblemSpec& spec = exp.problem;
  detail::require_q2(spec, "blow-up q = 2");
  ExperimentReport rep;
  rep.kind = ExperimentKind::BlowupQ2;
  FeasibilityReport fr;
  try {
    if (exp.overrides) {
      detail::certify_override(*exp.overrides, spec, fr);
    } else {
      const SubBounds bounds = SubBounds::from(spec.density);
      const FeasibilityReport first = solve_sub_q2(spec, bounds, 1.0);
      const double T = exp.horizon.value_or(default_blowup_horizon(first.params));
      fr = solve_sub_q2(spec, bounds, T);
    }
  } catch (const Infeasible& e) {
    rep.feasibility = e.report();
    rep.infeasible = true;
    return rep;
  }
  rep.feasibility = fr;
  if (!fr.feasible) {
    rep.infeasible = true;
    return rep;
  }
  const BarrierParams bp = fr.params;
  rep.params = bp;
  const double T = bp.T;
  SolverConfig cfg = exp.solver;
  cfg.t_end = exp.t_end.value_or(1.1 * T);
  if (cfg.grid.r_max <= 0.0) cfg.grid.r_max = 2.0 * std::max(support_radius(bp, 0.0), kE);
  rep.h = cfg.grid.h();
  rep.tol_grid = 10.0 * rep.h;
  rep.certified = exp.data_scale >= 1.0;
  std::vector<double> u0 = sample(initial_datum_subsolution_q2(bp, spec), cfg.grid);
  for (double& v : u0) v *= exp.data_scale;

  // ordering and support inclusion are checked after every step while the subsolution exists
  const double t_sub_end = std::min(T, sub_collapse_time(bp));
  auto check = [&](double t, const std::vector<double>& u) {
    if (!(t < t_sub_end)) return;
    if (!std::all_of(u.begin(), u.end(), [](double v) { return std::isfinite(v); })) return;
    double e = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= cfg.grid.n_cells; ++i)
      e = std::max(e, eval_barrier(bp, spec, cfg.grid.node(i), t).value - u[i]);
    if (e > rep.tol_grid && !rep.first_violation_t) rep.first_violation_t = t;
    rep.max_ordering_excess = std::max(rep.max_ordering_excess, e);
    const double R = std::min(support_radius(bp, t), cfg.grid.r_max);
    rep.max_support_excess = std::max(rep.max_support_excess, R - detail::first_zero(u, cfg.grid));
  };
  RadialSolver<DensityModel> solver(spec, spec.density, cfg);
  detail::copy_outcome(rep, solver.solve(u0, check));

  if (rep.t_extrapolated)
    rep.blowup_confirmed = rep.outcome == Outcome::BlowUp && *rep.t_extrapolated >= 0.8 * T &&
                           *rep.t_extrapolated <= 1.1 * T;
  if (rep.outcome == Outcome::BlowUp && !rep.blowup_confirmed)
    rep.notes.emplace_back("threshold crossed; extrapolated time outside [0.8 T, 1.1 T]: weak evidence");
  if (!rep.certified) {
    rep.notes.emplace_back("initial datum below the floor: exploratory run, outcome only");
    return rep;
  }
  rep.assertions.push_back(detail::assertion("ordering", rep.max_ordering_excess <= rep.tol_grid,
                                             rep.max_ordering_excess, rep.tol_grid));
  rep.assertions.push_back(detail::assertion(
      "blowup", rep.outcome == Outcome::BlowUp && rep.t_detect && *rep.t_detect <= 1.05 * T,
      rep.t_detect.value_or(rep.t_final), 1.05 * T, std::string(to_string(rep.outcome))));
  rep.assertions.push_back(detail::assertion("support", rep.max_support_excess <= 2.0 * rep.h,
                                             rep.max_support_excess, 2.0 * rep.h));
  return rep;
}

/// Solution from the capped datum on the ball of radius r_max stays under the q > 2 supersolution.
inline ExperimentReport run_global_existence_qgt2(const ExperimentSpec& exp) {
  const ProblemSpec& spec = exp.problem;
  if (!(spec.density.q() > 2.0)) throw PreconditionError("global existence q > 2: needs q > 2");
  ExperimentReport rep;
  rep.kind = ExperimentKind::GlobalExistenceQgt2;
  FeasibilityReport fr;
  try {
    if (exp.overrides)
      detail::certify_override(*exp.overrides, spec, fr);
    else
      fr = solve_super_qgt2(spec);
  } catch (const Infeasible& e) {
    rep.feasibility = e.report();
    rep.infeasible = true;
    return rep;
  }
  rep.feasibility = fr;
  if (!fr.feasible) {
    rep.infeasible = true;
    return rep;
  }
  const BarrierParams bp = fr.params;
  rep.params = bp;
  const double t_end = exp.t_end.value_or(1.0);
  SolverConfig cfg = exp.solver;
  cfg.t_end = t_end;
  if (cfg.grid.r_max <= 0.0) cfg.grid.r_max = 6.0;
  rep.h = cfg.grid.h();
  rep.tol_grid = 10.0 * rep.h;
  rep.certified = exp.data_scale >= 0.0 && exp.data_scale <= 1.0;
  std::vector<double> u0 = sample(initial_datum_supersolution_qgt2(bp, spec), cfg.grid);
  for (double& v : u0) v *= exp.data_scale;
  rep.notes.push_back("datum truncated at r_max = " + std::to_string(cfg.grid.r_max) +
                      " where the cap is " + std::to_string(u0[cfg.grid.n_cells - 1]));
  detail::copy_outcome(rep, solve(u0, spec, cfg));
  if (!rep.certified) {
    rep.notes.emplace_back("initial datum above the cap: exploratory run, outcome only");
    return rep;
  }
  detail::check_under_barrier(rep, bp, spec, false);
  rep.assertions.push_back(detail::assertion("ordering", rep.max_ordering_excess <= rep.tol_grid,
                                             rep.max_ordering_excess, rep.tol_grid));
  rep.assertions.push_back(detail::assertion("reached_t_end", rep.outcome == Outcome::ReachedTEnd,
                                             rep.t_final, t_end, std::string(to_string(rep.outcome))));
  return rep;
}

/// Feasibility of every system that applies to the problem.
inline ExperimentReport run_feasibility_only(const ExperimentSpec& exp) {
  const ProblemSpec& spec = exp.problem;
  ExperimentReport rep;
  rep.kind = ExperimentKind::FeasibilityOnly;
  try {
    if (spec.density.q() == 2.0) {
      FeasibilityReport r = solve_super_q2(spec);
      rep.feasibility = r;
      rep.params = r.params;
    } else {
      FeasibilityReport r = solve_super_qgt2(spec);
      rep.feasibility = r;
      rep.params = r.params;
    }
  } catch (const Infeasible& e) {
    rep.feasibility = e.report();
    rep.infeasible = true;
    return rep;
  }
  rep.certified = true;
  rep.assertions.push_back(detail::assertion("feasible", rep.feasibility->feasible,
                                             rep.feasibility->min_margin(), 0.0));
  return rep;
}

/// Residual verification of the barriers built for the problem.
inline ExperimentReport run_verify_barrier(const ExperimentSpec& exp, const VerifyGrid& grid = {}) {
  const ProblemSpec& spec = exp.problem;
  ExperimentReport rep;
  rep.kind = ExperimentKind::VerifyBarrier;
  std::vector<BarrierParams> list;
  try {
    if (exp.overrides) {
      FeasibilityReport fr;
      list.push_back(detail::certify_override(*exp.overrides, spec, fr));
      rep.feasibility = fr;
      if (!fr.feasible) {
        rep.infeasible = true;
        return rep;
      }
    } else if (spec.density.q() == 2.0) {
      if (check_hpC(spec).feasible) list.push_back(solve_super_q2(spec).params);
      if (spec.p > spec.m) list.push_back(solve_sub_q2(spec).params);
    } else {
      list.push_back(solve_super_qgt2(spec).params);
    }
  } catch (const Infeasible& e) {
    rep.feasibility = e.report();
    rep.infeasible = true;
    return rep;
  }
  if (list.empty()) {
    rep.infeasible = true;
    return rep;
  }
  rep.certified = true;
  for (const auto& bp : list) {
    ResidualReport r = bp.family == BarrierFamily::SubQ2 ? verify_subsolution(bp, spec, grid)
                                                         : verify_supersolution(bp, spec, grid);
    rep.assertions.push_back(detail::assertion("verify." + std::string(to_string(bp.family)), r.pass,
                                               r.worst_margin, 0.0,
                                               std::to_string(r.violations) + " violations"));
    rep.residuals.push_back(std::move(r));
  }
  rep.params = list.front();
  return rep;
}

struct BarenblattCheck {
  int n_cells = 0;
  double rel_error = 0.0;
  long steps = 0;
};

/// Porous medium run (rho = 1, no reaction) from the N = 3, m = 2 Barenblatt profile at t = 0.5
/// to t = 1; the grid puts the t = 1 front on a node.
inline BarenblattCheck barenblatt_validation(int n_cells) {
  const Barenblatt B{3, 2.0, 1.0};
  ProblemSpec s;
  s.N = 3;
  s.m = 2.0;
  s.p = 3.0;
  SolverConfig c;
  c.grid = {1.25 * B.front(1.0), n_cells};
  c.reaction = false;
  c.t_end = 0.5;
  c.n_snapshots = 1;
  std::vector<double> u0(c.grid.size());
  for (int i = 0; i <= n_cells; ++i) u0[i] = B(c.grid.node(i), 0.5);
  const Trajectory tr = solve(u0, s, UniformDensity{}, c);
  double err = 0.0;
  for (int i = 0; i <= n_cells; ++i)
    err = std::max(err, std::abs(tr.snapshots.back().u[i] - B(c.grid.node(i), 1.0)));
  return {n_cells, err / B(0.0, 1.0), tr.steps};
}

struct OdeCheck {
  double t_star = 0.0;
  double t_detect = 0.0;
  double rel_error = 0.0;
};

/// Constant datum u0 on a large ball: the centre follows u' = u^p until t* = u0^{1-p}/(p-1).
inline OdeCheck ode_blowup_validation(double u0 = 2.0, double p = 3.0) {
  ProblemSpec s;
  s.N = 3;
  s.m = 2.0;
  s.p = p;
  SolverConfig c;
  c.grid = {1000.0, 200};
  c.t_end = 2.0 * std::pow(u0, 1.0 - p) / (p - 1.0);
  const Trajectory tr = solve(std::vector<double>(c.grid.size(), u0), s, UniformDensity{}, c);
  OdeCheck out;
  out.t_star = std::pow(u0, 1.0 - p) / (p - 1.0);
  out.t_detect = tr.t_detect.value_or(std::numeric_limits<double>::infinity());
  out.rel_error = std::abs(out.t_detect - out.t_star) / out.t_star;
  return out;
}

inline ExperimentReport run_solver_validation(const ExperimentSpec& exp) {
  ExperimentReport rep;
  rep.kind = ExperimentKind::SolverValidation;
  rep.certified = true;
  const int n = exp.solver.grid.n_cells >= 200 ? exp.solver.grid.n_cells : 2000;
  const BarenblattCheck fine = barenblatt_validation(n);
  const BarenblattCheck coarse = barenblatt_validation(n / 2);
  const OdeCheck ode = ode_blowup_validation();
  rep.assertions.push_back(detail::assertion("barenblatt_error", fine.rel_error <= 0.02, fine.rel_error, 0.02));
  rep.assertions.push_back(detail::assertion("barenblatt_order", coarse.rel_error >= 1.7 * fine.rel_error,
                                             coarse.rel_error / fine.rel_error, 1.7));
  rep.assertions.push_back(detail::assertion("ode_blowup_time", ode.rel_error <= 0.02, ode.rel_error, 0.02));
  return rep;
}

inline ExperimentReport run_experiment(const ExperimentSpec& exp) {
  switch (exp.kind) {
    case ExperimentKind::GlobalExistenceQ2: return run_global_existence_q2(exp);
    case ExperimentKind::BlowupQ2: return run_blowup_q2(exp);
    case ExperimentKind::GlobalExistenceQgt2: return run_global_existence_qgt2(exp);
    case ExperimentKind::VerifyBarrier: return run_verify_barrier(exp);
    case ExperimentKind::FeasibilityOnly: return run_feasibility_only(exp);
    case ExperimentKind::SolverValidation: return run_solver_validation(exp);
  }
  throw DomainError("unknown experiment kind");
}

// ---------------------------------------------------------------- worked instances

/// N = 4, m = 2, p = 3, 1/rho = (|x| + e^2)^2, t_end = 5 on 2000 cells.
inline ExperimentSpec worked_global_q2() {
  ExperimentSpec e;
  e.kind = ExperimentKind::GlobalExistenceQ2;
  e.problem = {4, 2.0, 3.0, DensityModel::exact_power(2.0, 1.0, kE * kE)};
  e.solver.grid = {0.0, 2000};
  e.solver.n_snapshots = 50;
  e.t_end = 5.0;
  return e;
}

/// N = 4, m = 2, p = 3, 1/rho = max(|x|, e)^2 on 400 cells.
inline ExperimentSpec worked_blowup_q2() {
  ExperimentSpec e;
  e.kind = ExperimentKind::BlowupQ2;
  e.problem = {4, 2.0, 3.0, DensityModel(2.0, 1.0, 1.0, kE, ExactPower{1.0}, EnvelopeShape::Clamped)};
  e.solver.grid = {0.0, 400};
  e.solver.n_snapshots = 200;
  return e;
}

/// N = 5, q = 4, r0 = 2, 1/rho = (|x| + 2)^4 on [0, 6] with 150 cells, t_end = 1.
inline ExperimentSpec worked_global_qgt2(double m, double p, double r0 = 2.0) {
  ExperimentSpec e;
  e.kind = ExperimentKind::GlobalExistenceQgt2;
  e.problem = {5, m, p, DensityModel::exact_power(4.0, 1.0, r0)};
  e.solver.grid = {6.0, 150};
  e.solver.n_snapshots = 20;
  e.t_end = 1.0;
  return e;
}

// ---------------------------------------------------------------- sweeps

struct SweepCell {
  int N = 4;
  double m = 2.0;
  double p = 3.0;
  double q = 2.0;
  /// Shift of the envelope; 0 selects e^2 for q = 2 and 2 for q > 2. The q = 2 blow-up run
  /// uses the clamped profile max(|x|, e)^2 instead.
  double r0 = 0.0;
};

struct SweepOptions {
  int n_cells = 200;
  double t_end_global = 1.0;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct SweepRow {
  SweepCell cell;
  bool feasible_super = false;
  bool feasible_sub = false;
  std::string global_outcome = "skipped";
  double global_t_final = 0.0;
  double global_margin = std::numeric_limits<double>::quiet_NaN();
  std::string blowup_outcome = "skipped";
  double blowup_t_detect = std::numeric_limits<double>::quiet_NaN();
  double blowup_T = std::numeric_limits<double>::quiet_NaN();
  double blowup_margin = std::numeric_limits<double>::quiet_NaN();
  std::string error;
};

inline SweepRow run_sweep_cell(const SweepCell& c, const SweepOptions& opt) {
  SweepRow row;
  row.cell = c;
  try {
    const double r0 = c.r0 > 0.0 ? c.r0 : (c.q == 2.0 ? kE * kE : 2.0);
    row.cell.r0 = r0;
    const ProblemSpec spec{c.N, c.m, c.p, DensityModel::exact_power(c.q, 1.0, r0)};
    spec.validate();
    ExperimentSpec e;
    e.problem = spec;
    e.solver.grid = {0.0, opt.n_cells};
    e.solver.n_snapshots = 20;
    if (c.q == 2.0) {
      if (c.p > c.m) {
        e.kind = ExperimentKind::GlobalExistenceQ2;
        e.t_end = opt.t_end_global;
        const ExperimentReport g = run_global_existence_q2(e);
        row.feasible_super = !g.infeasible;
        if (!g.infeasible) {
          row.global_outcome = std::string(to_string(g.outcome));
          row.global_t_final = g.t_final;
          row.global_margin = 0.0 - g.max_ordering_excess + 0.0;
        } else {
          row.global_outcome = "infeasible";
        }
        e.kind = ExperimentKind::BlowupQ2;
        e.t_end.reset();
        e.problem.density = DensityModel(2.0, 1.0, 1.0, kE, ExactPower{1.0}, EnvelopeShape::Clamped);
        const ExperimentReport b = run_blowup_q2(e);
        row.feasible_sub = !b.infeasible;
        row.blowup_outcome = std::string(to_string(b.outcome));
        row.blowup_t_detect = b.t_detect.value_or(std::numeric_limits<double>::quiet_NaN());
        row.blowup_T = b.params ? b.params->T : row.blowup_T;
        row.blowup_margin = 0.0 - b.max_ordering_excess + 0.0;
      } else {
        row.global_outcome = "infeasible";
        row.blowup_outcome = "infeasible";
      }
    } else {
      e.kind = ExperimentKind::GlobalExistenceQgt2;
      e.t_end = opt.t_end_global;
      e.solver.grid = {6.0, opt.n_cells};
      const ExperimentReport g = run_global_existence_qgt2(e);
      row.feasible_super = !g.infeasible;
      row.global_outcome = g.infeasible ? "infeasible" : std::string(to_string(g.outcome));
      row.global_t_final = g.t_final;
      if (!g.infeasible) row.global_margin = 0.0 - g.max_ordering_excess + 0.0;
    }
  } catch (const std::exception& ex) {
    row.error = ex.what();
  }
  return row;
}

/// Runs every cell (in parallel); rows come back in input order.
inline std::vector<SweepRow> sweep(const std::vector<SweepCell>& cells, const SweepOptions& opt = {}) {
  std::vector<SweepRow> rows(cells.size());
  if (cells.empty()) return rows;
  unsigned nt = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
  nt = std::min<unsigned>(nt, static_cast<unsigned>(cells.size()));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned k = 0; k < nt; ++k)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < cells.size(); i = next++) rows[i] = run_sweep_cell(cells[i], opt);
    });
  for (auto& th : pool) th.join();
  return rows;
}

/// Cartesian product of the value lists, N outermost.
inline std::vector<SweepCell> sweep_grid(const std::vector<int>& Ns, const std::vector<double>& ms,
                                         const std::vector<double>& ps, const std::vector<double>& qs) {
  std::vector<SweepCell> out;
  for (int N : Ns)
    for (double m : ms)
      for (double p : ps)
        for (double q : qs) out.push_back({N, m, p, q, 0.0});
  return out;
}

}  // namespace wpme
