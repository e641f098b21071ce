#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "wpme/barrier_params.hpp"
#include "wpme/errors.hpp"
#include "wpme/model.hpp"

namespace wpme {

enum class Region { PositiveCore, Cutoff, InnerBall };

inline std::string_view to_string(Region r) {
  switch (r) {
    case Region::PositiveCore: return "core";
    case Region::Cutoff: return "cutoff";
    case Region::InnerBall: return "inner";
  }
  return "?";
}

/// Value and exact derivatives of a barrier at one (r, t).
/// `profile` is F (log branches), G (inner quadratic branch) or (r + r0)^{-b/m}.
struct BarrierEval {
  double value = 0.0;
  double du_dt = 0.0;
  double dum_dr = 0.0;
  double d2um_dr2 = 0.0;
  double lap_um = 0.0;
  double profile = 0.0;
  Region region = Region::Cutoff;
};

namespace detail {

struct TimeFactors {
  double zeta;
  double dzeta;
  double eta;
  double deta;
};

inline TimeFactors forward_factors(const BarrierParams& bp, double t) {
  const double tau = bp.T + t;
  return {std::pow(tau, -bp.alpha), -bp.alpha * std::pow(tau, -bp.alpha - 1.0),
          std::pow(tau, -bp.beta), -bp.beta * std::pow(tau, -bp.beta - 1.0)};
}

inline TimeFactors backward_factors(const BarrierParams& bp, double t) {
  if (!(t < bp.T)) throw TimeAtOrBeyondHorizon("sub_q2: t must be < T");
  const double tau = bp.T - t;
  return {std::pow(tau, -bp.alpha), bp.alpha * std::pow(tau, -bp.alpha - 1.0),
          std::pow(tau, -bp.beta), bp.beta * std::pow(tau, -bp.beta - 1.0)};
}

inline double radial_laplacian(int N, double r, double d1, double d2) {
  if (r > 0.0) return d2 + (N - 1) / r * d1;
  // (N-1)/r d1 -> (N-1) d2 when d1(0) = 0; otherwise the limit is unbounded.
  if (d1 == 0.0) return N * d2;
  return std::copysign(std::numeric_limits<double>::infinity(), d1);
}

/// u = C zeta P^{1/(m-1)} with P = P(r, t) given with its partial derivatives.
inline BarrierEval power_of_profile(double C, double m, int N, double r, const TimeFactors& tf,
                                    double P, double P_t, double P_r, double P_rr,
                                    Region region) {
  BarrierEval ev;
  ev.profile = P;
  if (!(P > 0.0)) return ev;
  const double s = 1.0 / (m - 1.0);
  const double Ps = std::pow(P, s);
  const double Ps1 = Ps / P;
  const double Cm_zm = std::pow(C * tf.zeta, m);
  ev.region = region;
  ev.value = C * tf.zeta * Ps;
  ev.du_dt = C * tf.dzeta * Ps + C * tf.zeta * s * Ps1 * P_t;
  ev.dum_dr = Cm_zm * (1.0 + s) * Ps * P_r;
  ev.d2um_dr2 = Cm_zm * (1.0 + s) * (s * Ps1 * P_r * P_r + Ps * P_rr);
  ev.lap_um = radial_laplacian(N, r, ev.dum_dr, ev.d2um_dr2);
  return ev;
}

/// Exterior (log) branch of the subsolution, valid for r >= e.
inline BarrierEval sub_outer(const BarrierParams& bp, const ProblemSpec& spec, double r,
                             double t) {
  const TimeFactors tf = backward_factors(bp, t);
  const double L = std::log(r);
  const double F = 1.0 - L * tf.eta / bp.a;
  return power_of_profile(bp.C, spec.m, spec.N, r, tf, F, -L * tf.deta / bp.a,
                          -tf.eta / (bp.a * r), tf.eta / (bp.a * r * r), Region::PositiveCore);
}

/// Inner (quadratic) branch of the subsolution, valid for r < e. `amplitude_scale`
/// multiplies C in this branch only; anything but 1 breaks the gluing at r = e.
inline BarrierEval sub_inner(const BarrierParams& bp, const ProblemSpec& spec, double r, double t,
                             double amplitude_scale = 1.0) {
  const TimeFactors tf = backward_factors(bp, t);
  const double e2 = kE * kE;
  const double S = (r * r + e2) / (2.0 * e2);
  const double G = 1.0 - S * tf.eta / bp.a;
  return power_of_profile(amplitude_scale * bp.C, spec.m, spec.N, r, tf, G, -S * tf.deta / bp.a,
                          -r * tf.eta / (bp.a * e2), -tf.eta / (bp.a * e2), Region::InnerBall);
}

inline void require_family(const BarrierParams& bp, BarrierFamily f) {
  if (bp.family != f) throw DomainError("barrier: parameter family mismatch");
}

}  // namespace detail

/// q = 2 supersolution C (T+t)^{-alpha} [1 - log(r + r0)(T+t)^{-beta}/a]_+^{1/(m-1)}.
inline BarrierEval eval_super_q2(const BarrierParams& bp, const ProblemSpec& spec, double r,
                                 double t) {
  detail::require_family(bp, BarrierFamily::SuperQ2);
  const detail::TimeFactors tf = detail::forward_factors(bp, t);
  const double L = std::log(r + bp.r0);
  const double F = 1.0 - L * tf.eta / bp.a;
  const double s = r + bp.r0;
  return detail::power_of_profile(bp.C, spec.m, spec.N, r, tf, F, -L * tf.deta / bp.a,
                                  -tf.eta / (bp.a * s), tf.eta / (bp.a * s * s),
                                  Region::PositiveCore);
}

/// q = 2 blow-up subsolution: log branch for r >= e, quadratic branch inside B_e.
inline BarrierEval eval_sub_q2(const BarrierParams& bp, const ProblemSpec& spec, double r,
                               double t) {
  detail::require_family(bp, BarrierFamily::SubQ2);
  return r >= kE ? detail::sub_outer(bp, spec, r, t) : detail::sub_inner(bp, spec, r, t);
}

/// q > 2 supersolution C (T+t)^alpha (r + r0)^{-b/m}.
inline BarrierEval eval_super_qgt2(const BarrierParams& bp, const ProblemSpec& spec, double r,
                                   double t) {
  detail::require_family(bp, BarrierFamily::SuperQgt2);
  const double m = spec.m;
  const double b = bp.b_bar;
  const double s = r + bp.r0;
  const double zeta = std::pow(bp.T + t, bp.alpha);
  const double dzeta = bp.alpha == 0.0 ? 0.0 : bp.alpha * std::pow(bp.T + t, bp.alpha - 1.0);
  const double W = std::pow(s, -b / m);
  const double Cm_zm = std::pow(bp.C * zeta, m);
  BarrierEval ev;
  ev.region = Region::PositiveCore;
  ev.profile = W;
  ev.value = bp.C * zeta * W;
  ev.du_dt = bp.C * dzeta * W;
  ev.dum_dr = -b * Cm_zm * std::pow(s, -b - 1.0);
  ev.d2um_dr2 = b * (b + 1.0) * Cm_zm * std::pow(s, -b - 2.0);
  ev.lap_um = detail::radial_laplacian(spec.N, r, ev.dum_dr, ev.d2um_dr2);
  return ev;
}

inline BarrierEval eval_barrier(const BarrierParams& bp, const ProblemSpec& spec, double r,
                                double t) {
  switch (bp.family) {
    case BarrierFamily::SuperQ2: return eval_super_q2(bp, spec, r, t);
    case BarrierFamily::SubQ2: return eval_sub_q2(bp, spec, r, t);
    case BarrierFamily::SuperQgt2: return eval_super_qgt2(bp, spec, r, t);
  }
  return {};
}

/// Closed-form barrier value only, in any floating type. Kept separate from the
/// derivative formulas so finite differences of it form an independent check.
template <class Real>
Real barrier_value(const BarrierParams& bp, const ProblemSpec& spec, Real r, Real t) {
  using std::exp;
  using std::log;
  using std::pow;
  const Real m = spec.m;
  const Real C = bp.C;
  const Real a = bp.a;
  const Real T = bp.T;
  const Real alpha = bp.alpha;
  const Real beta = bp.beta;
  const Real r0 = bp.r0;
  switch (bp.family) {
    case BarrierFamily::SuperQ2: {
      const Real F = Real(1) - log(r + r0) * pow(T + t, -beta) / a;
      return F > 0 ? C * pow(T + t, -alpha) * pow(F, Real(1) / (m - Real(1))) : Real(0);
    }
    case BarrierFamily::SubQ2: {
      const Real e = exp(Real(1));
      const Real S = r >= e ? log(r) : (r * r + e * e) / (Real(2) * e * e);
      const Real F = Real(1) - S * pow(T - t, -beta) / a;
      return F > 0 ? C * pow(T - t, -alpha) * pow(F, Real(1) / (m - Real(1))) : Real(0);
    }
    case BarrierFamily::SuperQgt2:
      return C * pow(T + t, alpha) * pow(r + r0, -Real(bp.b_bar) / m);
  }
  return Real(0);
}

/// Radius of the positivity set {u > 0} of the barrier at time t
/// (+infinity for the q > 2 family, whose profile never vanishes).
inline double support_radius(const BarrierParams& bp, double t) {
  switch (bp.family) {
    case BarrierFamily::SuperQ2:
      return std::max(0.0, std::exp(bp.a * std::pow(bp.T + t, bp.beta)) - bp.r0);
    case BarrierFamily::SubQ2: {
      if (!(t < bp.T)) throw TimeAtOrBeyondHorizon("support_radius: t must be < T");
      // front where s(r) = a (T - t)^beta
      const double level = bp.a * std::pow(bp.T - t, bp.beta);
      if (level >= 1.0) return std::exp(level);
      if (level > 0.5) return kE * std::sqrt(2.0 * level - 1.0);
      return 0.0;
    }
    case BarrierFamily::SuperQgt2: return std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

/// sup_r of the subsolution at time t: C zeta (1 - eta/(2a))_+^{1/(m-1)}, attained at r = 0.
inline double sub_sup_norm(const BarrierParams& bp, const ProblemSpec& spec, double t) {
  detail::require_family(bp, BarrierFamily::SubQ2);
  const detail::TimeFactors tf = detail::backward_factors(bp, t);
  const double G0 = 1.0 - 0.5 * tf.eta / bp.a;
  return G0 > 0.0 ? bp.C * tf.zeta * std::pow(G0, 1.0 / (spec.m - 1.0)) : 0.0;
}

/// First time at which the subsolution vanishes identically: eta(t) = 2a.
inline double sub_collapse_time(const BarrierParams& bp) {
  detail::require_family(bp, BarrierFamily::SubQ2);
  return bp.T - std::pow(2.0 * bp.a, -1.0 / bp.beta);
}

struct InterfaceJump {
  double value;
  double flux;
};

/// Mismatch of value and of the radial flux of u^m between the two subsolution branches at r = e.
inline InterfaceJump interface_flux_match(const BarrierParams& bp, const ProblemSpec& spec,
                                          double t, double inner_amplitude_scale = 1.0) {
  detail::require_family(bp, BarrierFamily::SubQ2);
  const BarrierEval out = detail::sub_outer(bp, spec, kE, t);
  const BarrierEval in = detail::sub_inner(bp, spec, kE, t, inner_amplitude_scale);
  return {std::abs(out.value - in.value), std::abs(out.dum_dr - in.dum_dr)};
}

/// Largest initial datum admitted by the q = 2 global-existence theorem (the supersolution at t = 0).
inline RadialFunction initial_datum_supersolution_q2(const BarrierParams& bp,
                                                     const ProblemSpec& spec) {
  detail::require_family(bp, BarrierFamily::SuperQ2);
  if (!bp.certificate) throw InfeasibleParams("initial datum: parameters are not certified");
  return [bp, spec](double r) { return eval_super_q2(bp, spec, r, 0.0).value; };
}

/// Smallest initial datum of the q = 2 blow-up theorem (the subsolution at t = 0).
inline RadialFunction initial_datum_subsolution_q2(const BarrierParams& bp,
                                                   const ProblemSpec& spec) {
  detail::require_family(bp, BarrierFamily::SubQ2);
  if (!bp.certificate) throw InfeasibleParams("initial datum: parameters are not certified");
  return [bp, spec](double r) { return eval_sub_q2(bp, spec, r, 0.0).value; };
}

/// C T^alpha (r + r0)^{-b/m}, the cap of the q > 2 theorem.
inline RadialFunction initial_datum_supersolution_qgt2(const BarrierParams& bp,
                                                       const ProblemSpec& spec) {
  detail::require_family(bp, BarrierFamily::SuperQgt2);
  if (!bp.certificate) throw InfeasibleParams("initial datum: parameters are not certified");
  return [bp, spec](double r) { return eval_super_qgt2(bp, spec, r, 0.0).value; };
}

}  // namespace wpme
