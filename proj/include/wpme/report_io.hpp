#pragma once

#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>

#include "wpme/experiments.hpp"

namespace wpme {

using nlohmann::json;

namespace detail {

/// Shortest round-trip text for a double; nan and inf are spelled out.
inline std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace detail

inline json to_json(const BarrierParams& b) {
  return {{"family", to_string(b.family)}, {"C", b.C},         {"a", b.a},
          {"omega", b.omega},              {"T", b.T},         {"alpha", b.alpha},
          {"beta", b.beta},                {"b_bar", b.b_bar}, {"c_bar", b.c_bar},
          {"r0", b.r0},
          {"certificate", b.certificate ? json(to_string(*b.certificate)) : json(nullptr)}};
}

inline json to_json(const ProblemSpec& s) {
  const auto& d = s.density;
  json j = {{"N", s.N},
            {"m", s.m},
            {"p", s.p},
            {"q", d.q()},
            {"k1", d.k1()},
            {"k2", d.k2()},
            {"r0", d.r0()},
            {"shape", d.shape() == EnvelopeShape::Shifted ? "shifted" : "clamped"}};
  if (const auto* ep = std::get_if<ExactPower>(&d.profile()))
    j["profile"] = {{"kind", "exact"}, {"k", ep->k}};
  else
    j["profile"] = {{"kind", "perturbed"}, {"seed", std::get<Perturbed>(d.profile()).seed}};
  return j;
}

inline json to_json(const FeasibilityReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"id", c.id}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"margin", c.margin},
                      {"strict", c.strict}, {"pass", c.pass}});
  return {{"system", to_string(r.system)},     {"feasible", r.feasible},
          {"params", to_json(r.params)},       {"checks", checks},
          {"notes", r.notes},                  {"omega0", detail::opt(r.omega0)},
          {"omega1", detail::opt(r.omega1)},   {"c_bound", detail::opt(r.c_bound)}};
}

inline json to_json(const ResidualReport& r) {
  return {{"family", to_string(r.family)},
          {"pass", r.pass},
          {"n_r", r.n_r},
          {"n_t", r.n_t},
          {"violations", r.violations},
          {"worst_margin", r.worst_margin},
          {"excluded_origin_radius", r.excluded_origin_radius},
          {"count_core", r.count_core},
          {"count_inner", r.count_inner},
          {"count_cutoff", r.count_cutoff},
          {"count_skipped", r.count_skipped},
          {"flux_sign_ok", r.flux_sign_ok},
          {"max_jump_value", r.max_jump_value},
          {"max_jump_flux", r.max_jump_flux}};
}

inline json to_json(const ExperimentReport& r) {
  json as = json::array();
  for (const auto& a : r.assertions)
    as.push_back({{"id", a.id}, {"pass", a.pass}, {"value", a.value}, {"limit", a.limit}, {"detail", a.detail}});
  json res = json::array();
  for (const auto& x : r.residuals) res.push_back(to_json(x));
  return {{"kind", to_string(r.kind)},
          {"pass", r.pass()},
          {"exit_code", r.exit_code()},
          {"certified", r.certified},
          {"infeasible", r.infeasible},
          {"feasibility", r.feasibility ? to_json(*r.feasibility) : json(nullptr)},
          {"params", r.params ? to_json(*r.params) : json(nullptr)},
          {"outcome", to_string(r.outcome)},
          {"t_final", r.t_final},
          {"t_detect", detail::opt(r.t_detect)},
          {"t_extrapolated", detail::opt(r.t_extrapolated)},
          {"blowup_confirmed", r.blowup_confirmed},
          {"steps", r.steps},
          {"h", r.h},
          {"tol_grid", r.tol_grid},
          {"max_ordering_excess", r.max_ordering_excess},
          {"first_violation_t", detail::opt(r.first_violation_t)},
          {"max_support_excess", r.max_support_excess},
          {"assertions", as},
          {"residuals", res},
          {"notes", r.notes}};
}

inline void write_snapshots_csv(std::ostream& o, const Trajectory& tr) {
  o << "t,r,u\n";
  for (const auto& s : tr.snapshots)
    for (int i = 0; i <= tr.grid.n_cells; ++i)
      o << detail::num(s.t) << ',' << detail::num(tr.grid.node(i)) << ',' << detail::num(s.u[i]) << '\n';
}

inline void write_series_csv(std::ostream& o, const Trajectory& tr) {
  o << "t,supnorm,front\n";
  for (const auto& s : tr.series)
    o << detail::num(s.t) << ',' << detail::num(s.supnorm) << ',' << detail::num(s.front) << '\n';
}

inline void write_worst_csv(std::ostream& o, const ResidualReport& r) {
  o << "r,t,residual,margin,value,region\n";
  for (const auto& s : r.worst)
    o << detail::num(s.r) << ',' << detail::num(s.t) << ',' << detail::num(s.residual) << ','
      << detail::num(s.margin) << ',' << detail::num(s.value) << ',' << to_string(s.region) << '\n';
}

inline void write_sweep_csv(std::ostream& o, const std::vector<SweepRow>& rows) {
  o << "N,m,p,q,r0,feasible_super,feasible_sub,global_outcome,global_t_final,global_margin,"
       "blowup_outcome,blowup_t_detect,blowup_T,blowup_margin,error\n";
  for (const auto& r : rows) {
    std::string err = r.error;
    for (char& ch : err)
      if (ch == ',' || ch == '\n') ch = ';';
    o << r.cell.N << ',' << detail::num(r.cell.m) << ',' << detail::num(r.cell.p) << ','
      << detail::num(r.cell.q) << ',' << detail::num(r.cell.r0) << ',' << (r.feasible_super ? 1 : 0) << ','
      << (r.feasible_sub ? 1 : 0) << ',' << r.global_outcome << ',' << detail::num(r.global_t_final) << ','
      << detail::num(r.global_margin) << ',' << r.blowup_outcome << ',' << detail::num(r.blowup_t_detect)
      << ',' << detail::num(r.blowup_T) << ',' << detail::num(r.blowup_margin) << ',' << err << '\n';
  }
}

/// report.json, snapshots.csv, series.csv and (for residual runs) worst_<family>.csv in dir.
inline void write_experiment(const std::filesystem::path& dir, const ExperimentReport& r) {
  std::filesystem::create_directories(dir);
  auto open = [&](const std::string& name) {
    std::ofstream f(dir / name);
    if (!f) throw Error("cannot write " + (dir / name).string());
    return f;
  };
  open("report.json") << to_json(r).dump(2) << '\n';
  if (!r.trajectory.snapshots.empty()) {
    auto s = open("snapshots.csv");
    write_snapshots_csv(s, r.trajectory);
    auto t = open("series.csv");
    write_series_csv(t, r.trajectory);
  }
  for (const auto& res : r.residuals) {
    auto w = open("worst_" + std::string(to_string(res.family)) + ".csv");
    write_worst_csv(w, res);
  }
}

}  // namespace wpme
