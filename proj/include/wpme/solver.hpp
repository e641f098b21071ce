#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "wpme/errors.hpp"
#include "wpme/model.hpp"

namespace wpme {

struct SolverConfig {
  RadialGrid grid;
  double cfl_safety = 0.4;
  double u_blowup = 1e6;
  double dt_min = 1e-12;
  double t_end = 1.0;
  int n_snapshots = 100;
  bool reaction = true;
  double front_threshold = 1e-10;

  void validate() const {
    grid.validate();
    if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) throw DomainError("solver: cfl_safety in (0, 1]");
    if (!(u_blowup > 0.0)) throw DomainError("solver: u_blowup must be > 0");
    if (!(dt_min > 0.0)) throw DomainError("solver: dt_min must be > 0");
    if (!(t_end >= 0.0)) throw DomainError("solver: t_end must be >= 0");
    if (n_snapshots < 1) throw DomainError("solver: need at least one snapshot");
  }
};

/// rho == 1.
struct UniformDensity {
  double operator()(double) const { return 1.0; }
};

enum class Outcome { ReachedTEnd, BlowUp, StepCollapse };

inline std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::ReachedTEnd: return "reached_t_end";
    case Outcome::BlowUp: return "blow_up";
    case Outcome::StepCollapse: return "step_collapse";
  }
  return "?";
}

struct Snapshot {
  double t;
  std::vector<double> u;
};

struct SeriesPoint {
  double t;
  double supnorm;
  double front;
};

struct Trajectory {
  RadialGrid grid;
  std::vector<Snapshot> snapshots;
  std::vector<SeriesPoint> series;
  Outcome outcome = Outcome::ReachedTEnd;
  double t_final = 0.0;
  /// First time with sup u > u_blowup.
  std::optional<double> t_detect;
  /// Zero of the linear fit of sup u^{1-p} against t near the end of the run.
  std::optional<double> t_extrapolated;
  long steps = 0;
};

inline double supnorm(const std::vector<double>& u) {
  double s = 0.0;
  for (double v : u) s = std::max(s, v);
  return s;
}

/// Largest node radius with u > threshold (0 if none).
inline double front_radius(const std::vector<double>& u, const RadialGrid& g,
                           double threshold = 1e-10) {
  for (int i = g.n_cells; i >= 0; --i)
    if (u[i] > threshold) return g.node(i);
  return 0.0;
}

namespace detail {

/// x^e with cheap paths for the small integer exponents that dominate the test problems.
inline double ipow(double x, double e) {
  if (e == 1.0) return x;
  if (e == 2.0) return x * x;
  if (e == 3.0) return x * x * x;
  if (e == 0.0) return 1.0;
  return std::pow(x, e);
}

}  // namespace detail

/// Explicit scheme for rho u_t = Delta(u^m) + rho u^p on the nodes of a uniform radial grid.
/// Diffusion uses node-centred control volumes [r_{i-1/2}, r_{i+1/2}] (a half cell at the
/// origin, so the flux there vanishes); the reaction u' = u^p is integrated exactly over each
/// step. u = 0 is imposed at r_max.
template <class Density>
class RadialSolver {
 public:
  RadialSolver(const ProblemSpec& spec, Density density, SolverConfig cfg)
      : N_(spec.N), m_(spec.m), p_(spec.p), density_(std::move(density)), cfg_(std::move(cfg)) {
    if (N_ < 1) throw DomainError("solver: N must be >= 1");
    if (!(m_ >= 1.0)) throw DomainError("solver: m must be >= 1");
    if (!(p_ > 1.0)) throw DomainError("solver: p must be > 1");
    cfg_.validate();
    const int n = cfg_.grid.n_cells;
    const double h = cfg_.grid.h();
    rho_.resize(n + 1);
    w_minus_.assign(n + 1, 0.0);
    w_plus_.assign(n + 1, 0.0);
    stiff_.assign(n + 1, 0.0);
    for (int i = 0; i <= n; ++i) {
      const double r = cfg_.grid.node(i);
      rho_[i] = density_(r);
      if (!(rho_[i] > 0.0) || !std::isfinite(rho_[i])) throw DomainError("solver: density not positive");
      const double rl = i == 0 ? 0.0 : r - 0.5 * h;
      const double rr = r + 0.5 * h;
      const double vol = (std::pow(rr, N_) - std::pow(rl, N_)) / N_;
      w_plus_[i] = std::pow(rr, N_ - 1) / (h * vol);
      w_minus_[i] = i == 0 ? 0.0 : std::pow(rl, N_ - 1) / (h * vol);
      stiff_[i] = m_ * (w_plus_[i] + w_minus_[i]) / rho_[i];
    }
  }

  [[nodiscard]] const SolverConfig& config() const { return cfg_; }
  [[nodiscard]] const std::vector<double>& rho() const { return rho_; }

  /// Largest stable diffusion step for state u (infinity if u == 0).
  [[nodiscard]] double diffusion_dt(const std::vector<double>& u) const {
    const int n = cfg_.grid.n_cells;
    double dt = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      double um = u[i];
      if (i > 0) um = std::max(um, u[i - 1]);
      um = std::max(um, u[i + 1]);
      if (!(um > 0.0)) continue;
      const double coef = detail::ipow(um, m_ - 1.0) * stiff_[i];
      dt = std::min(dt, 1.0 / coef);
    }
    return cfg_.cfl_safety * dt;
  }

  [[nodiscard]] double reaction_dt(const std::vector<double>& u) const {
    if (!cfg_.reaction) return std::numeric_limits<double>::infinity();
    const double s = supnorm(u);
    if (!(s > 0.0)) return std::numeric_limits<double>::infinity();
    return cfg_.cfl_safety * 0.5 * std::pow(s, 1.0 - p_) / std::max(1.0, p_ - 1.0);
  }

  /// Advances u by dt (no step-size control).
  void advance(std::vector<double>& u, double dt) const {
    const int n = cfg_.grid.n_cells;
    U_.resize(u.size());
    next_.resize(u.size());
    for (int i = 0; i <= n; ++i) U_[i] = detail::ipow(u[i], m_);
    for (int i = 0; i < n; ++i) {
      double lap = w_plus_[i] * (U_[i + 1] - U_[i]);
      if (i > 0) lap -= w_minus_[i] * (U_[i] - U_[i - 1]);
      double v = u[i] + dt * lap / rho_[i];
      if (v < 0.0) v = 0.0;
      if (cfg_.reaction && v > 0.0) {
        const double base = 1.0 - (p_ - 1.0) * dt * detail::ipow(v, p_ - 1.0);
        v = base > 0.0 ? v * std::pow(base, -1.0 / (p_ - 1.0))
                       : std::numeric_limits<double>::infinity();
      }
      next_[i] = v;
    }
    std::copy(next_.begin(), next_.begin() + n, u.begin());
    u[n] = 0.0;
  }

  /// One adaptive step; returns the step used. Throws nothing: collapse is reported by solve.
  double step(std::vector<double>& u, double dt_cap = std::numeric_limits<double>::infinity()) const {
    const double dt = std::min({diffusion_dt(u), reaction_dt(u), dt_cap});
    if (std::isfinite(dt)) advance(u, dt);
    return dt;
  }

  [[nodiscard]] Trajectory solve(std::vector<double> u) const {
    return solve(std::move(u), [](double, const std::vector<double>&) {});
  }

  /// As solve(u); observe(t, u) is called with the initial state and after every step.
  template <class Observer>
  [[nodiscard]] Trajectory solve(std::vector<double> u, Observer&& observe) const {
    const RadialGrid& g = cfg_.grid;
    if (u.size() != g.size()) throw DomainError("solve: initial datum size does not match grid");
    for (double v : u)
      if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("solve: initial datum must be finite, >= 0");
    u.back() = 0.0;
    Trajectory tr;
    tr.grid = g;
    double t = 0.0;
    int next_snap = 1;
    const double dts = cfg_.t_end / cfg_.n_snapshots;
    tr.snapshots.push_back({0.0, u});
    record(tr, t, u, true);
    observe(t, static_cast<const std::vector<double>&>(u));
    while (true) {
      const double t_next = next_snap >= cfg_.n_snapshots ? cfg_.t_end : next_snap * dts;
      if (t >= cfg_.t_end) {
        tr.outcome = Outcome::ReachedTEnd;
        break;
      }
      const double dtd = diffusion_dt(u);
      if (dtd < cfg_.dt_min) {
        tr.outcome = Outcome::StepCollapse;
        break;
      }
      double dt = std::min(dtd, reaction_dt(u));
      bool land = false;
      if (!std::isfinite(dt) || t + dt >= t_next) {
        dt = t_next - t;
        land = true;
      }
      advance(u, dt);
      t = land ? t_next : t + dt;
      ++tr.steps;
      observe(t, static_cast<const std::vector<double>&>(u));
      const double s = supnorm(u);
      record(tr, t, u, false);
      if (!(s <= cfg_.u_blowup)) {
        tr.outcome = Outcome::BlowUp;
        tr.t_detect = t;
        tr.snapshots.push_back({t, u});
        break;
      }
      if (land) {
        tr.snapshots.push_back({t, u});
        ++next_snap;
      }
    }
    tr.t_final = t;
    if (tr.outcome == Outcome::BlowUp) tr.t_extrapolated = extrapolate_blowup(tr.series, p_);
    return tr;
  }

  /// Zero of the least-squares line through (t, sup u^{1-p}) over the late part of the series.
  static std::optional<double> extrapolate_blowup(const std::vector<SeriesPoint>& series, double p) {
    if (series.size() < 3) return std::nullopt;
    const double top = series.back().supnorm;
    std::vector<std::pair<double, double>> pts;
    for (const auto& s : series)
      if (std::isfinite(s.supnorm) && s.supnorm >= std::sqrt(std::isfinite(top) ? top : 1e300) &&
          s.supnorm > 0.0)
        pts.emplace_back(s.t, std::pow(s.supnorm, 1.0 - p));
    if (pts.size() < 3) {
      pts.clear();
      const std::size_t k = std::min<std::size_t>(series.size(), 10);
      for (std::size_t i = series.size() - k; i < series.size(); ++i)
        if (std::isfinite(series[i].supnorm) && series[i].supnorm > 0.0)
          pts.emplace_back(series[i].t, std::pow(series[i].supnorm, 1.0 - p));
    }
    if (pts.size() < 2) return std::nullopt;
    double st = 0, sy = 0, stt = 0, sty = 0;
    const double n = static_cast<double>(pts.size());
    for (auto [x, y] : pts) {
      st += x;
      sy += y;
      stt += x * x;
      sty += x * y;
    }
    const double den = n * stt - st * st;
    if (den == 0.0) return std::nullopt;
    const double slope = (n * sty - st * sy) / den;
    const double icpt = (sy - slope * st) / n;
    if (!(slope < 0.0)) return std::nullopt;
    return -icpt / slope;
  }

 private:
  void record(Trajectory& tr, double t, const std::vector<double>& u, bool force) const {
    const double s = supnorm(u);
    const double f = front_radius(u, cfg_.grid, cfg_.front_threshold);
    if (!force && !tr.series.empty()) {
      const SeriesPoint& last = tr.series.back();
      const bool big_change = !std::isfinite(s) || std::abs(s - last.supnorm) > 1e-3 * last.supnorm;
      const bool time_gap = t - last.t >= cfg_.t_end * 1e-4;
      if (!big_change && !time_gap && f == last.front) return;
    }
    tr.series.push_back({t, s, f});
  }

  int N_;
  double m_;
  double p_;
  Density density_;
  SolverConfig cfg_;
  std::vector<double> rho_;
  std::vector<double> w_minus_;
  std::vector<double> w_plus_;
  std::vector<double> stiff_;  // m (w+ + w-) / rho
  mutable std::vector<double> U_;
  mutable std::vector<double> next_;
};

template <class Density>
Trajectory solve(const std::vector<double>& u0, const ProblemSpec& spec, Density density,
                 const SolverConfig& cfg) {
  return RadialSolver<Density>(spec, std::move(density), cfg).solve(u0);
}

inline Trajectory solve(const std::vector<double>& u0, const ProblemSpec& spec,
                        const SolverConfig& cfg) {
  return solve(u0, spec, spec.density, cfg);
}

/// One adaptive step on a copy of the state; returns the new state and the step used.
template <class Density>
std::pair<std::vector<double>, double> step(std::vector<double> u, const ProblemSpec& spec,
                                            Density density, const SolverConfig& cfg) {
  RadialSolver<Density> s(spec, std::move(density), cfg);
  const double dt = s.step(u);
  if (dt < cfg.dt_min) throw StepCollapse("step: step size collapsed");
  return {std::move(u), dt};
}

struct NestedBalls {
  std::vector<double> radii;
  std::vector<Trajectory> runs;
  double max_decrease = 0.0;  // largest u_R - u_R' over common nodes/snapshots, R < R'
};

/// Solves on balls of increasing radius with the grid spacing of `cfg` and checks that the
/// solutions increase with the radius. The last run is the proxy for the minimal solution.
template <class Density>
NestedBalls minimal_solution_extrapolate(const RadialFunction& u0, const ProblemSpec& spec,
                                         Density density, const SolverConfig& cfg,
                                         const std::vector<double>& radii, double tol = 1e-8) {
  if (radii.empty()) throw DomainError("nested balls: need at least one radius");
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] > radii[i - 1])) throw DomainError("nested balls: radii must increase");
  const double h = cfg.grid.h();
  std::vector<std::future<Trajectory>> jobs;
  for (double R : radii) {
    SolverConfig c = cfg;
    c.grid = RadialGrid{0.0, static_cast<int>(std::lround(R / h))};
    c.grid.r_max = c.grid.n_cells * h;
    jobs.push_back(std::async(std::launch::async, [c, &u0, &spec, density] {
      std::vector<double> init = sample(u0, c.grid);
      init.back() = 0.0;
      return solve(init, spec, density, c);
    }));
  }
  NestedBalls out;
  out.radii = radii;
  for (auto& j : jobs) out.runs.push_back(j.get());
  for (std::size_t k = 1; k < out.runs.size(); ++k) {
    const Trajectory& a = out.runs[k - 1];
    const Trajectory& b = out.runs[k];
    const std::size_t ns = std::min(a.snapshots.size(), b.snapshots.size());
    for (std::size_t s = 0; s < ns; ++s) {
      if (a.snapshots[s].t != b.snapshots[s].t) break;
      const auto& ua = a.snapshots[s].u;
      const auto& ub = b.snapshots[s].u;
      for (std::size_t i = 0; i < ua.size(); ++i) {
        if (!std::isfinite(ua[i]) || !std::isfinite(ub[i])) continue;
        out.max_decrease = std::max(out.max_decrease, ua[i] - ub[i]);
      }
    }
  }
  if (out.max_decrease > tol)
    throw MonotonicityViolation("nested balls: solution decreased with the radius");
  return out;
}

}  // namespace wpme
