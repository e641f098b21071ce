#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "wpme/barrier_params.hpp"
#include "wpme/barriers.hpp"
#include "wpme/errors.hpp"
#include "wpme/feasibility.hpp"
#include "wpme/model.hpp"

namespace wpme {

/// u_t - (1/rho) Delta(u^m) - u^p from the analytic fields of a barrier evaluation.
inline double residual(const BarrierEval& ev, const DensityModel& density, const ProblemSpec& spec,
                       double r, double /*t*/) {
  if (ev.region == Region::Cutoff) return 0.0;
  if (std::abs(ev.profile) < 1e-12) throw OnCutoffSurface("residual: sample on the free boundary");
  return ev.du_dt - density.inverse_density(r) * ev.lap_um - std::pow(ev.value, spec.p);
}

/// Sampling plan for the residual checks. Radii are log-spaced on [eps, r_max(t)].
struct VerifyGrid {
  int n_r = 100;
  int n_t = 20;
  /// Outer radius; 0 selects 2x the barrier support (or 100 (1 + r0) for unbounded support).
  double r_max = 0.0;
  /// Final time for supersolutions; t samples are uniform on [0, t_max].
  double t_max = 10.0;
  /// Origin exclusion as a fraction of r_max; the inner ball of the subsolution uses e instead.
  double eps_fraction = 1e-3;
  /// Explicit time samples; overrides n_t / t_max when not empty.
  std::vector<double> t_samples;
};

struct ResidualSample {
  double r;
  double t;
  double residual;
  double margin;  // signed so that negative means the wrong side
  double value;
  Region region;
};

struct ResidualReport {
  BarrierFamily family = BarrierFamily::SuperQ2;
  int n_r = 0;
  int n_t = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  long violations = 0;
  double excluded_origin_radius = 0.0;
  long count_core = 0;
  long count_inner = 0;
  long count_cutoff = 0;
  long count_skipped = 0;
  bool flux_sign_ok = true;
  // gluing jumps at r = e relative to 1 + |value| and 1 + |flux|
  double max_jump_value = 0.0;
  double max_jump_flux = 0.0;
  std::vector<ResidualSample> worst;  // up to 100, most negative margin first
  bool pass = false;
};

namespace detail {

inline constexpr double kViolationRel = 1e-8;
inline constexpr double kFloorProfile = 1e-6;
inline constexpr std::size_t kKeepWorst = 100;

inline std::vector<double> geometric_radii(double lo, double hi, int n) {
  std::vector<double> r(static_cast<std::size_t>(n));
  const double ratio = n > 1 ? std::log(hi / lo) / (n - 1) : 0.0;
  for (int i = 0; i < n; ++i) r[i] = lo * std::exp(ratio * i);
  return r;
}

/// Times at which eta(t) = (T - t)^{-beta} is uniform on [T^{-beta}, 2a): the whole lifetime
/// of the subsolution, from t = 0 to its collapse.
inline std::vector<double> sub_times(const BarrierParams& bp, int n) {
  std::vector<double> t;
  const double e0 = std::pow(bp.T, -bp.beta);
  const double e1 = 2.0 * bp.a;
  if (!(e1 > e0)) return {0.0};
  for (int k = 0; k < n; ++k) {
    const double eta = e0 + (e1 - e0) * k / n;
    t.push_back(std::max(0.0, bp.T - std::pow(eta, -1.0 / bp.beta)));
  }
  return t;
}

inline void keep_worst(std::vector<ResidualSample>& w) {
  std::sort(w.begin(), w.end(),
            [](const ResidualSample& x, const ResidualSample& y) { return x.margin < y.margin; });
  if (w.size() > kKeepWorst) w.resize(kKeepWorst);
}

inline ResidualReport verify(const BarrierParams& bp, const ProblemSpec& spec,
                             const DensityModel& density, const VerifyGrid& grid, bool super) {
  ResidualReport rep;
  rep.family = bp.family;
  std::vector<double> times = grid.t_samples;
  if (times.empty()) {
    if (super) {
      for (int k = 0; k < grid.n_t; ++k)
        times.push_back(grid.n_t > 1 ? grid.t_max * k / (grid.n_t - 1) : 0.0);
    } else {
      times = sub_times(bp, grid.n_t);
    }
  }
  rep.n_r = grid.n_r;
  rep.n_t = static_cast<int>(times.size());
  const double sign = super ? 1.0 : -1.0;
  std::vector<ResidualSample> samples;

  for (double t : times) {
    double r_hi = grid.r_max;
    if (r_hi <= 0.0) {
      const double s = support_radius(bp, t);
      r_hi = std::isfinite(s) ? std::max(2.0 * s, 2.0 * kE) : 100.0 * (1.0 + bp.r0);
    }
    const double eps = bp.family == BarrierFamily::SubQ2 ? grid.eps_fraction * kE
                                                          : grid.eps_fraction * r_hi;
    rep.excluded_origin_radius = std::max(rep.excluded_origin_radius, eps);

    // flux of u^m at the origin: (u^m)_r(0+, t) <= 0
    if (eval_barrier(bp, spec, 0.0, t).dum_dr > 0.0) rep.flux_sign_ok = false;
    if (bp.family == BarrierFamily::SubQ2) {
      const InterfaceJump j = interface_flux_match(bp, spec, t);
      const BarrierEval at_e = eval_sub_q2(bp, spec, kE, t);
      rep.max_jump_value = std::max(rep.max_jump_value, j.value / (1.0 + std::abs(at_e.value)));
      rep.max_jump_flux = std::max(rep.max_jump_flux, j.flux / (1.0 + std::abs(at_e.dum_dr)));
    }

    for (double r : geometric_radii(eps, r_hi, grid.n_r)) {
      const BarrierEval ev = eval_barrier(bp, spec, r, t);
      if (ev.region == Region::Cutoff) {
        ++rep.count_cutoff;
        continue;
      }
      if (ev.profile < kFloorProfile && bp.family != BarrierFamily::SuperQgt2) {
        ++rep.count_skipped;
        continue;
      }
      if (ev.region == Region::InnerBall)
        ++rep.count_inner;
      else
        ++rep.count_core;
      if (ev.dum_dr > 0.0) rep.flux_sign_ok = false;
      const double res = residual(ev, density, spec, r, t);
      if (!std::isfinite(res)) {
        ++rep.count_skipped;
        continue;
      }
      const double tol =
          kViolationRel * (1.0 + std::abs(ev.du_dt) + std::pow(ev.value, spec.p));
      const double margin = sign * res;
      if (margin < -tol) ++rep.violations;
      rep.worst_margin = std::min(rep.worst_margin, margin);
      samples.push_back({r, t, res, margin, ev.value, ev.region});
      if (samples.size() > 8 * kKeepWorst) keep_worst(samples);
    }
  }
  keep_worst(samples);
  rep.worst = std::move(samples);
  rep.pass = rep.violations == 0 && rep.flux_sign_ok;
  if (bp.family == BarrierFamily::SubQ2)
    rep.pass = rep.pass && rep.max_jump_value <= 1e-12 && rep.max_jump_flux <= 1e-12;
  return rep;
}

}  // namespace detail

/// Samples the positive core of a certified supersolution and counts sign violations.
inline ResidualReport verify_supersolution(const BarrierParams& bp, const ProblemSpec& spec,
                                           const VerifyGrid& grid = {}) {
  if (bp.family == BarrierFamily::SubQ2) throw DomainError("verify_supersolution: wrong family");
  if (!bp.certificate) throw InfeasibleParams("verify_supersolution: parameters are not certified");
  return detail::verify(bp, spec, spec.density, grid, true);
}

/// Same sampling with a density other than the one the parameters were certified for.
inline ResidualReport verify_supersolution_with(const BarrierParams& bp, const ProblemSpec& spec,
                                                const DensityModel& density,
                                                const VerifyGrid& grid = {}) {
  if (bp.family == BarrierFamily::SubQ2) throw DomainError("verify_supersolution: wrong family");
  return detail::verify(bp, spec, density, grid, true);
}

/// Samples the outer region (r >= e) and the inner ball of a certified subsolution.
/// Default time samples cover the barrier's whole lifetime, uniformly in eta.
inline ResidualReport verify_subsolution(const BarrierParams& bp, const ProblemSpec& spec,
                                         const VerifyGrid& grid = {}) {
  if (bp.family != BarrierFamily::SubQ2) throw DomainError("verify_subsolution: wrong family");
  if (!bp.certificate) throw InfeasibleParams("verify_subsolution: parameters are not certified");
  for (double t : grid.t_samples)
    if (!(t < bp.T)) throw TimeAtOrBeyondHorizon("verify_subsolution: t samples must be < T");
  return detail::verify(bp, spec, spec.density, grid, false);
}

inline ResidualReport verify_subsolution_with(const BarrierParams& bp, const ProblemSpec& spec,
                                              const DensityModel& density,
                                              const VerifyGrid& grid = {}) {
  if (bp.family != BarrierFamily::SubQ2) throw DomainError("verify_subsolution: wrong family");
  return detail::verify(bp, spec, density, grid, false);
}

/// Bound C F^{1/(m-1)-1} phi(F) on the outer region of the subsolution, with the exterior
/// constant k2 of the bounds; the residual never exceeds it.
inline double sub_phi_bound(const BarrierParams& bp, const ProblemSpec& spec,
                            const SubBounds& bounds, double r, double t) {
  if (!(r >= kE)) throw DomainError("sub_phi_bound: needs r >= e");
  const BarrierEval ev = eval_sub_q2(bp, spec, r, t);
  if (ev.region == Region::Cutoff) return 0.0;
  const SubCoefficients c = sub_coefficients(bp, spec, bounds, t, false);
  const double F = ev.profile;
  return bp.C * std::pow(F, 1.0 / (spec.m - 1.0) - 1.0) * sub_phi(c, spec.m, spec.p, F);
}

struct DerivativeCheck {
  double max_rel_error = 0.0;
  double max_rel_du_dt = 0.0;
  double max_rel_dum_dr = 0.0;
  double max_rel_d2um_dr2 = 0.0;
  int samples = 0;
};

namespace detail {

/// Magnitudes of the terms that make up each derivative field, used as the scale of the
/// relative error so sign changes of a sum do not blow the ratio up.
struct TermScales {
  double du_dt;
  double dum_dr;
  double d2um_dr2;
};

inline TermScales term_scales(const BarrierParams& bp, const ProblemSpec& spec, double r,
                              double t) {
  const double m = spec.m;
  const BarrierEval ev = eval_barrier(bp, spec, r, t);
  if (bp.family == BarrierFamily::SuperQgt2)
    return {std::abs(ev.du_dt), std::abs(ev.dum_dr), std::abs(ev.d2um_dr2)};
  const double s = 1.0 / (m - 1.0);
  const bool fwd = bp.family == BarrierFamily::SuperQ2;
  const double tau = fwd ? bp.T + t : bp.T - t;
  const double zeta = std::pow(tau, -bp.alpha);
  const double eta = std::pow(tau, -bp.beta);
  const double P = ev.profile;
  const double Ps = std::pow(P, s);
  double S = 0.0;
  double Sr = 0.0;
  double Srr = 0.0;
  if (bp.family == BarrierFamily::SuperQ2) {
    S = std::log(r + bp.r0);
    Sr = 1.0 / (r + bp.r0);
    Srr = Sr * Sr;
  } else if (r >= kE) {
    S = std::log(r);
    Sr = 1.0 / r;
    Srr = Sr * Sr;
  } else {
    S = (r * r + kE * kE) / (2.0 * kE * kE);
    Sr = r / (kE * kE);
    Srr = 1.0 / (kE * kE);
  }
  const double Pt = S * bp.beta * eta / (tau * bp.a);
  const double Pr = Sr * eta / bp.a;
  const double Prr = Srr * eta / bp.a;
  const double Cm = std::pow(bp.C * zeta, m) * (1.0 + s);
  return {bp.C * bp.alpha * zeta / tau * Ps + bp.C * zeta * s * Ps / P * Pt,
          Cm * Ps * Pr, Cm * (s * Ps / P * Pr * Pr + Ps * Prr)};
}

}  // namespace detail

/// Worst relative deviation of the analytic derivative fields from central differences of the
/// closed-form value (evaluated in long double; steps are 1e-5 times max(r, r0) in space, with e in
/// place of r0 for the subsolution, and 1e-5 times T + t (T - t) in time).
inline DerivativeCheck crosscheck_derivatives(const BarrierParams& bp, const ProblemSpec& spec,
                                              int n_samples, std::uint64_t seed = 1) {
  using LD = long double;
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double m = spec.m;
  DerivativeCheck out;
  const double rel = 1e-5;
  int guard = 0;
  while (out.samples < n_samples) {
    if (++guard > 1000 * n_samples) throw Error("crosscheck_derivatives: sampling region empty");
    double t = 0.0;
    double r_hi = 0.0;
    if (bp.family == BarrierFamily::SubQ2) {
      const auto ts = detail::sub_times(bp, 1000);
      t = ts[static_cast<std::size_t>(unit(gen) * static_cast<double>(ts.size()))];
      r_hi = std::max(support_radius(bp, t), 2.0 * kE);
    } else {
      t = 10.0 * unit(gen);
      r_hi = bp.family == BarrierFamily::SuperQ2 ? support_radius(bp, t) : 100.0 * (1.0 + bp.r0);
    }
    const double r_lo = 1e-2;
    if (!(r_hi > r_lo)) continue;
    const double r = r_lo * std::exp(std::log(r_hi / r_lo) * unit(gen));
    const BarrierEval ev = eval_barrier(bp, spec, r, t);
    if (ev.region == Region::Cutoff) continue;
    if (bp.family != BarrierFamily::SuperQgt2 && ev.profile <= 0.05) continue;
    const double len = bp.family == BarrierFamily::SubQ2 ? kE : bp.r0;
    const double hr = rel * std::max(r, len);
    if (bp.family == BarrierFamily::SubQ2 && std::abs(r - kE) < 4.0 * hr) continue;
    const double tscale = bp.family == BarrierFamily::SubQ2 ? bp.T - t : bp.T + t;
    const double ht = rel * tscale;

    auto um = [&](LD rr, LD tt) {
      return std::pow(barrier_value<LD>(bp, spec, rr, tt), static_cast<LD>(m));
    };
    const LD R = r;
    const LD Tt = t;
    const LD Hr = hr;
    const LD Ht = ht;
    const LD fd_t = (barrier_value<LD>(bp, spec, R, Tt + Ht) -
                     barrier_value<LD>(bp, spec, R, Tt - Ht)) /
                    (2 * Ht);
    const LD u0 = um(R, Tt);
    const LD up = um(R + Hr, Tt);
    const LD un = um(R - Hr, Tt);
    const LD fd_r = (up - un) / (2 * Hr);
    const LD fd_rr = (up - 2 * u0 + un) / (Hr * Hr);

    const detail::TermScales sc = detail::term_scales(bp, spec, r, t);
    auto relerr = [](double analytic, LD fd, double scale) {
      const double d = std::abs(analytic - static_cast<double>(fd));
      const double den = std::max(std::abs(analytic), scale);
      return den > 0.0 ? d / den : d;
    };
    out.max_rel_du_dt = std::max(out.max_rel_du_dt, relerr(ev.du_dt, fd_t, sc.du_dt));
    out.max_rel_dum_dr = std::max(out.max_rel_dum_dr, relerr(ev.dum_dr, fd_r, sc.dum_dr));
    out.max_rel_d2um_dr2 =
        std::max(out.max_rel_d2um_dr2, relerr(ev.d2um_dr2, fd_rr, sc.d2um_dr2));
    ++out.samples;
  }
  out.max_rel_error = std::max({out.max_rel_du_dt, out.max_rel_dum_dr, out.max_rel_d2um_dr2});
  return out;
}

}  // namespace wpme
