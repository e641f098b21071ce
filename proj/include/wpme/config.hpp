#pragma once

#include <CLI11.hpp>

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "wpme/experiments.hpp"

namespace wpme {

/// Flat key = value configuration. Keys are dotted ("solver.n_cells"); an INI section
/// [solver] followed by "n_cells = 400" gives the same key.
class FlatConfig {
 public:
  FlatConfig() = default;

  static FlatConfig parse(std::istream& in) {
    FlatConfig cfg;
    CLI::ConfigINI ini;
    std::vector<CLI::ConfigItem> items;
    try {
      items = ini.from_config(in);
    } catch (const CLI::Error& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
    for (const auto& it : items) {
      if (it.name == "++" || it.name == "--") continue;  // section markers
      std::string key;
      for (const auto& p : it.parents)
        if (p != "default") key += p + ".";
      key += it.name;
      std::string value;
      for (std::size_t i = 0; i < it.inputs.size(); ++i) value += (i ? "," : "") + it.inputs[i];
      cfg.set(key, value);
    }
    return cfg;
  }

  static FlatConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
  }

  static FlatConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    return parse(in);
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  [[nodiscard]] bool has(const std::string& key) const { return values_.count(key) != 0; }
  [[nodiscard]] const std::map<std::string, std::string>& values() const { return values_; }

  [[nodiscard]] std::string str(const std::string& key, const std::string& fallback) const {
    used_.insert(key);
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  [[nodiscard]] double num(const std::string& key, double fallback) const {
    used_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return to_double(key, it->second);
  }

  [[nodiscard]] std::optional<double> opt_num(const std::string& key) const {
    used_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return to_double(key, it->second);
  }

  [[nodiscard]] long integer(const std::string& key, long fallback) const {
    used_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    long v = 0;
    const auto& s = it->second;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError("config: " + key + " is not an integer: " + s);
    return v;
  }

  [[nodiscard]] std::uint64_t seed(const std::string& key) const {
    used_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return 0;
    std::uint64_t v = 0;
    const auto& s = it->second;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError("config: " + key + " is not a seed: " + s);
    return v;
  }

  [[nodiscard]] bool flag(const std::string& key, bool fallback) const {
    used_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const auto& s = it->second;
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError("config: " + key + " is not a boolean: " + s);
  }

  /// Throws ConfigError naming the first key nothing has read.
  void reject_unused() const {
    for (const auto& [k, v] : values_)
      if (!used_.count(k)) throw ConfigError("config: unknown key " + k);
  }

 private:
  static double to_double(const std::string& key, const std::string& s) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError("config: " + key + " is not a number: " + s);
  }

  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

inline ProblemSpec problem_from(const FlatConfig& c) {
  ProblemSpec s;
  s.N = static_cast<int>(c.integer("problem.N", s.N));
  s.m = c.num("problem.m", s.m);
  s.p = c.num("problem.p", s.p);
  const double q = c.num("density.q", 2.0);
  const double k1 = c.num("density.k1", 1.0);
  const double k2 = c.num("density.k2", k1);
  const double r0 = c.num("density.r0", q == 2.0 ? kE * kE : 2.0);
  const std::string shape = c.str("density.shape", "shifted");
  const std::string profile = c.str("density.profile", "exact");
  EnvelopeShape sh = EnvelopeShape::Shifted;
  if (shape == "clamped")
    sh = EnvelopeShape::Clamped;
  else if (shape != "shifted")
    throw ConfigError("config: density.shape must be shifted or clamped");
  DensityProfile prof;
  if (profile == "exact")
    prof = ExactPower{c.num("density.k", k1)};
  else if (profile == "perturbed")
    prof = Perturbed{c.seed("density.seed")};
  else
    throw ConfigError("config: density.profile must be exact or perturbed");
  try {
    s.density = DensityModel(q, k1, k2, r0, prof, sh);
    s.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return s;
}

inline SolverConfig solver_from(const FlatConfig& c) {
  SolverConfig s;
  s.grid.r_max = c.num("solver.r_max", 0.0);
  s.grid.n_cells = static_cast<int>(c.integer("solver.n_cells", s.grid.n_cells));
  s.cfl_safety = c.num("solver.cfl_safety", s.cfl_safety);
  s.u_blowup = c.num("solver.u_blowup", s.u_blowup);
  s.dt_min = c.num("solver.dt_min", s.dt_min);
  s.t_end = c.num("solver.t_end", s.t_end);
  s.n_snapshots = static_cast<int>(c.integer("solver.n_snapshots", s.n_snapshots));
  s.reaction = c.flag("solver.reaction", s.reaction);
  s.front_threshold = c.num("solver.front_threshold", s.front_threshold);
  return s;
}

/// Barrier given by barrier.family and its coefficients; nullopt when the family is absent.
inline std::optional<BarrierParams> barrier_from(const FlatConfig& c, const ProblemSpec& s) {
  const std::string fam = c.str("barrier.family", "");
  if (fam.empty()) return std::nullopt;
  const double C = c.num("barrier.C", 1.0);
  const double T = c.num("barrier.T", 1.0);
  try {
    if (fam == "super_q2") return BarrierParams::super_q2(C, c.num("barrier.a", 1.0), T, s.m, s.p, s.density.r0());
    if (fam == "sub_q2") return BarrierParams::sub_q2(C, c.num("barrier.a", 1.0), T, s.m, s.p);
    if (fam == "super_qgt2")
      return BarrierParams::super_qgt2(C, T, c.num("barrier.alpha", 0.0), c.num("barrier.b_bar", 0.0),
                                       c.num("barrier.c_bar", 0.0), s.density.r0());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  throw ConfigError("config: barrier.family must be super_q2, sub_q2 or super_qgt2");
}

inline ExperimentSpec experiment_from(const FlatConfig& c) {
  ExperimentSpec e;
  try {
    e.kind = experiment_kind_from(c.str("experiment.kind", "global_existence_q2"));
  } catch (const DomainError& ex) {
    throw ConfigError(std::string("config: ") + ex.what());
  }
  e.problem = problem_from(c);
  e.solver = solver_from(c);
  e.overrides = barrier_from(c, e.problem);
  e.data_scale = c.num("experiment.data_scale", 1.0);
  e.horizon = c.opt_num("experiment.horizon");
  e.t_end = c.opt_num("experiment.t_end");
  e.output_dir = c.str("experiment.output_dir", "");
  return e;
}

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream o;
  o.precision(17);
  o << v;
  return o.str();
}

}  // namespace detail

/// Flat text that experiment_from reads back to the same spec (ExactPower or Perturbed profiles).
inline std::string to_config(const ExperimentSpec& e) {
  using detail::fmt;
  const auto& d = e.problem.density;
  std::ostringstream o;
  o << "experiment.kind = " << to_string(e.kind) << "\n";
  o << "experiment.data_scale = " << fmt(e.data_scale) << "\n";
  if (e.horizon) o << "experiment.horizon = " << fmt(*e.horizon) << "\n";
  if (e.t_end) o << "experiment.t_end = " << fmt(*e.t_end) << "\n";
  if (!e.output_dir.empty()) o << "experiment.output_dir = \"" << e.output_dir << "\"\n";
  o << "problem.N = " << e.problem.N << "\n";
  o << "problem.m = " << fmt(e.problem.m) << "\n";
  o << "problem.p = " << fmt(e.problem.p) << "\n";
  o << "density.q = " << fmt(d.q()) << "\n";
  o << "density.k1 = " << fmt(d.k1()) << "\n";
  o << "density.k2 = " << fmt(d.k2()) << "\n";
  o << "density.r0 = " << fmt(d.r0()) << "\n";
  o << "density.shape = " << (d.shape() == EnvelopeShape::Shifted ? "shifted" : "clamped") << "\n";
  if (const auto* ep = std::get_if<ExactPower>(&d.profile()))
    o << "density.profile = exact\ndensity.k = " << fmt(ep->k) << "\n";
  else
    o << "density.profile = perturbed\ndensity.seed = " << std::get<Perturbed>(d.profile()).seed << "\n";
  const auto& s = e.solver;
  o << "solver.r_max = " << fmt(s.grid.r_max) << "\n";
  o << "solver.n_cells = " << s.grid.n_cells << "\n";
  o << "solver.cfl_safety = " << fmt(s.cfl_safety) << "\n";
  o << "solver.u_blowup = " << fmt(s.u_blowup) << "\n";
  o << "solver.dt_min = " << fmt(s.dt_min) << "\n";
  o << "solver.t_end = " << fmt(s.t_end) << "\n";
  o << "solver.n_snapshots = " << s.n_snapshots << "\n";
  o << "solver.reaction = " << (s.reaction ? "true" : "false") << "\n";
  o << "solver.front_threshold = " << fmt(s.front_threshold) << "\n";
  if (e.overrides) {
    const auto& b = *e.overrides;
    o << "barrier.family = " << to_string(b.family) << "\n";
    o << "barrier.C = " << fmt(b.C) << "\n";
    o << "barrier.T = " << fmt(b.T) << "\n";
    if (b.family == BarrierFamily::SuperQgt2)
      o << "barrier.alpha = " << fmt(b.alpha) << "\nbarrier.b_bar = " << fmt(b.b_bar)
        << "\nbarrier.c_bar = " << fmt(b.c_bar) << "\n";
    else
      o << "barrier.a = " << fmt(b.a) << "\n";
  }
  return o.str();
}

}  // namespace wpme
