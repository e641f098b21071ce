#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "wpme/barrier_params.hpp"
#include "wpme/errors.hpp"
#include "wpme/model.hpp"

namespace wpme {

/// One inequality lhs >= rhs (or lhs > rhs when strict); margin = lhs - rhs.
struct Check {
  std::string id;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  bool strict = false;
  bool pass = false;
};

inline Check make_check(std::string id, double lhs, double rhs, bool strict = false) {
  Check c{std::move(id), lhs, rhs, lhs - rhs, strict, false};
  c.pass = strict ? c.margin > 0.0 : c.margin >= 0.0;
  return c;
}

struct FeasibilityReport {
  FeasibilitySystem system = FeasibilitySystem::HpC;
  BarrierParams params;
  std::vector<Check> checks;
  bool feasible = false;
  std::vector<std::string> notes;
  // saturation bounds of the omega window (q = 2 families)
  std::optional<double> omega0;
  std::optional<double> omega1;
  /// Saturating amplitude: the smallest admissible C (subsolution, q > 2 with p < m) or the
  /// largest one (q > 2 with p > m).
  std::optional<double> c_bound;

  void finalize() {
    feasible = std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
    if (feasible)
      params.certificate = system;
    else
      params.certificate.reset();
  }

  [[nodiscard]] const Check* find(std::string_view id) const {
    for (const auto& c : checks)
      if (c.id == id) return &c;
    return nullptr;
  }

  [[nodiscard]] double min_margin() const {
    double mm = std::numeric_limits<double>::infinity();
    for (const auto& c : checks) mm = std::min(mm, c.margin);
    return mm;
  }
};

/// Raised by a solver when the system has no solution for the given problem.
class Infeasible : public InfeasibleParams {
 public:
  explicit Infeasible(FeasibilityReport report)
      : InfeasibleParams("infeasible: " + std::string(to_string(report.system))),
        report_(std::move(report)) {}
  [[nodiscard]] const FeasibilityReport& report() const { return report_; }

 private:
  FeasibilityReport report_;
};

inline double compute_K(double m, double p) {
  if (!(m > 1.0)) throw DomainError("K: need m > 1");
  if (!(p > 1.0)) throw DomainError("K: need p > 1");
  const double x = (m - 1.0) / (p + m - 2.0);
  return std::pow(x, (m - 1.0) / (p - 1.0)) - std::pow(x, (p + m - 2.0) / (p - 1.0));
}

namespace detail {

inline void require_q(const ProblemSpec& spec, bool q_is_two, const char* what) {
  const bool is_two = spec.density.q() == 2.0;
  if (is_two != q_is_two)
    throw PreconditionError(std::string(what) + (q_is_two ? ": needs q = 2" : ": needs q > 2"));
}

/// m/(m-1) [k1 (N-2) - k2/((m-1) log r0)]
inline double super_q2_X(const ProblemSpec& spec) {
  const ShiftedEnvelope env = spec.density.hpsup();
  const double m = spec.m;
  return m / (m - 1.0) * (env.k1 * (spec.N - 2) - env.k2 / ((m - 1.0) * std::log(env.r0)));
}

}  // namespace detail

// ---------------------------------------------------------------- q = 2, supersolution

inline std::vector<Check> hpC_checks(const ProblemSpec& spec) {
  const ShiftedEnvelope env = spec.density.hpsup();
  const double m = spec.m;
  const double p = spec.p;
  std::vector<Check> out;
  out.push_back(make_check("hpC.r0", env.r0, kE, true));
  out.push_back(make_check("hpC.ratio",
                           (spec.N - 2) * (m - 1.0) * ((p - m) / (p - 1.0)) * std::log(env.r0),
                           env.k2 / env.k1, true));
  return out;
}

inline FeasibilityReport check_hpC(const ProblemSpec& spec) {
  spec.validate();
  detail::require_q(spec, true, "check_hpC");
  FeasibilityReport rep;
  rep.system = FeasibilitySystem::HpC;
  rep.checks = hpC_checks(spec);
  rep.feasible =
      std::all_of(rep.checks.begin(), rep.checks.end(), [](const Check& c) { return c.pass; });
  return rep;
}

/// hpC plus the two parameter inequalities on (omega, C).
inline FeasibilityReport check_super_q2(const BarrierParams& bp, const ProblemSpec& spec) {
  spec.validate();
  detail::require_q(spec, true, "check_super_q2");
  if (bp.family != BarrierFamily::SuperQ2) throw DomainError("check_super_q2: wrong family");
  const ShiftedEnvelope env = spec.density.hpsup();
  const double m = spec.m;
  const double p = spec.p;
  FeasibilityReport rep;
  rep.system = FeasibilitySystem::SuperQ2;
  rep.params = bp;
  rep.checks = hpC_checks(spec);
  rep.checks.push_back(make_check("omega.upper", (p - m) / (p - 1.0),
                                  bp.omega * m / (m - 1.0) * env.k2 / std::log(env.r0)));
  rep.checks.push_back(make_check("omega.lower", bp.omega * detail::super_q2_X(spec),
                                  std::pow(bp.C, p - 1.0) + 1.0 / (p - 1.0)));
  rep.finalize();
  return rep;
}

/// Constructive solution of the q = 2 supersolution system. Throws Infeasible if hpC fails.
inline FeasibilityReport solve_super_q2(const ProblemSpec& spec) {
  FeasibilityReport hp = check_hpC(spec);
  if (!hp.feasible) {
    hp.system = FeasibilitySystem::SuperQ2;
    hp.notes.emplace_back("hpC fails: no omega satisfies both inequalities");
    throw Infeasible(std::move(hp));
  }
  const ShiftedEnvelope env = spec.density.hpsup();
  const double m = spec.m;
  const double p = spec.p;
  const double logr0 = std::log(env.r0);
  const double X = detail::super_q2_X(spec);
  const double omega_lo = 1.0 / ((p - 1.0) * X);
  const double omega_hi = (p - m) / (p - 1.0) * (m - 1.0) * logr0 / (m * env.k2);
  double omega = 0.9 * std::min(omega_hi, 2.0 * omega_lo);
  if (omega <= omega_lo) omega = 0.5 * (omega_lo + omega_hi);
  const double C = 0.9 * std::min(1.0, std::pow(omega * X - 1.0 / (p - 1.0), 1.0 / (p - 1.0)));
  const double a = std::pow(C, m - 1.0) / omega;
  const double beta = (p - m) / (p - 1.0);
  // F(0, 0) = 1/2
  const double T = std::pow(2.0 * logr0 / a, 1.0 / beta);
  BarrierParams bp = BarrierParams::super_q2(C, a, T, m, p, env.r0);
  FeasibilityReport rep = check_super_q2(bp, spec);
  rep.omega0 = omega_lo;
  rep.omega1 = omega_hi;
  if (!rep.feasible) throw Infeasible(std::move(rep));
  return rep;
}

struct EndpointMargins {
  double cond1;  // -eta'/eta^2 - omega zeta^{m-1} m/(m-1) k2/log r0, normalized
  double cond2;  // zeta' + omega zeta^m m/(m-1) eta [..] - C^{p-1} zeta^p, normalized
  double phi0;   // -delta
  double phi1;   // sigma - delta - gamma
};

/// Endpoint values of phi for the supersolution, with the (T+t) powers divided out.
inline EndpointMargins check_endpoint_conditions_super_q2(const BarrierParams& bp,
                                                          const ProblemSpec& spec, double t) {
  if (bp.family != BarrierFamily::SuperQ2) throw DomainError("endpoint conditions: wrong family");
  if (!(t >= 0.0)) throw DomainError("endpoint conditions: t must be >= 0");
  const ShiftedEnvelope env = spec.density.hpsup();
  const double m = spec.m;
  const double p = spec.p;
  const double tau = bp.T + t;
  const double zeta = std::pow(tau, -bp.alpha);
  const double dzeta = -bp.alpha * std::pow(tau, -bp.alpha - 1.0);
  const double eta = std::pow(tau, -bp.beta);
  const double deta_over_eta = -bp.beta / tau;
  const double deta = deta_over_eta * eta;
  const double logr0 = std::log(env.r0);
  const double omega = std::pow(bp.C, m - 1.0) / bp.a;

  const double c1 = -deta / (eta * eta) -
                    omega * std::pow(zeta, m - 1.0) * m / (m - 1.0) * env.k2 / logr0;
  const double c2 = dzeta +
                    omega * std::pow(zeta, m) * m / (m - 1.0) * eta *
                        ((spec.N - 2) * env.k1 - env.k2 / ((m - 1.0) * logr0)) -
                    std::pow(bp.C, p - 1.0) * std::pow(zeta, p);
  const double sigma = dzeta + zeta / (m - 1.0) * deta_over_eta +
                       omega * std::pow(zeta, m) * m / (m - 1.0) * eta * env.k1 * (spec.N - 2);
  const double delta = zeta / (m - 1.0) * deta_over_eta +
                       std::pow(bp.C, m - 1.0) * std::pow(zeta, m) * m /
                           ((m - 1.0) * (m - 1.0)) * eta / bp.a * env.k2 / logr0;
  const double gamma = std::pow(bp.C, p - 1.0) * std::pow(zeta, p);

  const double n1 = std::pow(tau, bp.alpha * (m - 1.0));
  const double n2 = std::pow(tau, bp.alpha * p);
  return {c1 * n1, c2 * n2, -delta * n2, (sigma - delta - gamma) * n2};
}

// ---------------------------------------------------------------- q = 2, subsolution

/// Bounds entering the subsolution system: k2 of the exterior hypothesis at R = e and
/// the sup of 1/rho on the closed ball B_e.
struct SubBounds {
  double k2;
  double rho2;

  static SubBounds from(const DensityModel& d) { return {d.hpsub(kE).k2, d.rho2(kE)}; }
};

namespace detail {

struct SubAB {
  double A;  // 1 + m k2 omega (N - 2 + 1/(m-1))
  double B;  // 1 + m rho2 omega N / e^2
};

inline SubAB sub_AB(const ProblemSpec& spec, const SubBounds& b, double omega) {
  const double m = spec.m;
  return {1.0 + m * b.k2 * omega * (spec.N - 2 + 1.0 / (m - 1.0)),
          1.0 + m * b.rho2 * omega * spec.N / (kE * kE)};
}

}  // namespace detail

inline FeasibilityReport check_sub_q2(const BarrierParams& bp, const ProblemSpec& spec,
                                      const SubBounds& bounds) {
  spec.validate();
  detail::require_q(spec, true, "check_sub_q2");
  if (bp.family != BarrierFamily::SubQ2) throw DomainError("check_sub_q2: wrong family");
  const double m = spec.m;
  const double p = spec.p;
  const double e = (p + m - 2.0) / (p - 1.0);
  const double omega = std::pow(bp.C, m - 1.0) / bp.a;
  const auto [A, B] = detail::sub_AB(spec, bounds, omega);
  const double K = compute_K(m, p);
  const double lhs_amp = (p + m - 2.0) * std::pow(bp.C, p - 1.0);
  const double lhs_max = (p - m) / ((m - 1.0) * (p - 1.0)) * std::pow(bp.C, m - 1.0);
  const double k_max = K / std::pow(m - 1.0, e);
  FeasibilityReport rep;
  rep.system = FeasibilitySystem::SubQ2;
  rep.params = bp;
  rep.checks.push_back(make_check("p>m", p, m, true));
  rep.checks.push_back(make_check("amplitude.exterior", lhs_amp, A));
  rep.checks.push_back(make_check("amplitude.inner", lhs_amp, B));
  rep.checks.push_back(make_check("max.exterior", lhs_max, k_max * std::pow(A, e)));
  rep.checks.push_back(make_check("max.inner", lhs_max, k_max * std::pow(B, e)));
  if (std::holds_alternative<Perturbed>(spec.density.profile()))
    rep.notes.emplace_back("perturbed density: k2 and rho2 are envelope bounds");
  rep.finalize();
  return rep;
}

inline FeasibilityReport check_sub_q2(const BarrierParams& bp, const ProblemSpec& spec) {
  return check_sub_q2(bp, spec, SubBounds::from(spec.density));
}

/// omega = 1, C = 1.1 max(C_amp, C_max), a = C^{m-1}.
inline FeasibilityReport solve_sub_q2(const ProblemSpec& spec, const SubBounds& bounds,
                                      double T = 1.0) {
  spec.validate();
  detail::require_q(spec, true, "solve_sub_q2");
  const double m = spec.m;
  const double p = spec.p;
  if (!(p > m)) throw PreconditionError("solve_sub_q2: needs p > m");
  if (!(m > 1.0)) throw PreconditionError("solve_sub_q2: needs m > 1");
  if (!(T > 0.0)) throw DomainError("solve_sub_q2: T must be > 0");
  const double omega = 1.0;
  const auto [A, B] = detail::sub_AB(spec, bounds, omega);
  const double mx = std::max(A, B);
  const double e = (p + m - 2.0) / (p - 1.0);
  const double C_amp = std::pow(mx / (p + m - 2.0), 1.0 / (p - 1.0));
  const double C_max = std::pow(compute_K(m, p) / std::pow(m - 1.0, e) * std::pow(mx, e) /
                                  ((p - m) / ((m - 1.0) * (p - 1.0))),
                              1.0 / (m - 1.0));
  const double C = 1.1 * std::max(C_amp, C_max);
  BarrierParams bp = BarrierParams::sub_q2(C, std::pow(C, m - 1.0) / omega, T, m, p);
  FeasibilityReport rep = check_sub_q2(bp, spec, bounds);
  rep.omega0 = omega;
  rep.omega1 = omega;
  rep.c_bound = std::max(C_amp, C_max);
  rep.notes.push_back("C_amp = " + std::to_string(C_amp) + ", C_max = " + std::to_string(C_max));
  if (!rep.feasible) throw Infeasible(std::move(rep));
  return rep;
}

inline FeasibilityReport solve_sub_q2(const ProblemSpec& spec, double T = 1.0) {
  return solve_sub_q2(spec, SubBounds::from(spec.density), T);
}

/// sigma, delta, gamma, sigma0 of the subsolution with (T-t)^{-p/(p-1)} divided out.
struct SubCoefficients {
  double sigma;
  double delta;
  double gamma;
  double sigma0;
};

inline SubCoefficients sub_coefficients(const BarrierParams& bp, const ProblemSpec& spec,
                                        const SubBounds& bounds, double t, bool normalized) {
  if (bp.family != BarrierFamily::SubQ2) throw DomainError("sub coefficients: wrong family");
  if (!(t < bp.T)) throw TimeAtOrBeyondHorizon("sub coefficients: t must be < T");
  const double m = spec.m;
  const double p = spec.p;
  const double tau = bp.T - t;
  const double zeta = std::pow(tau, -bp.alpha);
  const double dzeta = bp.alpha * std::pow(tau, -bp.alpha - 1.0);
  const double eta = std::pow(tau, -bp.beta);
  const double deta_over_eta = bp.beta / tau;
  const double omega = std::pow(bp.C, m - 1.0) / bp.a;
  const double zm_eta = std::pow(zeta, m) * eta;
  SubCoefficients c{};
  c.sigma = dzeta + zeta / (m - 1.0) * deta_over_eta +
            omega * zm_eta * m / (m - 1.0) * bounds.k2 * (spec.N - 2 + 1.0 / (m - 1.0));
  c.delta = zeta / (m - 1.0) * deta_over_eta;
  c.gamma = std::pow(bp.C, p - 1.0) * std::pow(zeta, p);
  c.sigma0 = dzeta + zeta / (m - 1.0) * deta_over_eta +
             spec.N / (kE * kE) * bounds.rho2 * omega * zm_eta * m / (m - 1.0);
  if (normalized) {
    const double n = std::pow(tau, p / (p - 1.0));
    c.sigma *= n;
    c.delta *= n;
    c.gamma *= n;
    c.sigma0 *= n;
  }
  return c;
}

struct MaxConditions {
  std::vector<Check> checks;  // exterior and inner-ball conditions, with positivity of sigma and sigma0
  double F0;
  double G0;
  [[nodiscard]] bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }
};

/// Interior-maximum conditions of phi(F) = sigma F - delta - gamma F^{(p+m-2)/(m-1)} and its
/// inner-ball analogue; margins are t-independent for the power time factors.
inline MaxConditions check_max_conditions_sub_q2(const BarrierParams& bp, const ProblemSpec& spec,
                                                 const SubBounds& bounds, double t) {
  const double m = spec.m;
  const double p = spec.p;
  const SubCoefficients c = sub_coefficients(bp, spec, bounds, t, true);
  const double K = compute_K(m, p);
  const double e = (p + m - 2.0) / (p - 1.0);
  const double rhs = c.delta * std::pow(c.gamma, (m - 1.0) / (p - 1.0));
  MaxConditions out;
  out.checks.push_back(make_check("exterior.sigma", c.sigma, 0.0, true));
  out.checks.push_back(make_check("exterior.max", rhs, K * std::pow(c.sigma, e)));
  out.checks.push_back(make_check("exterior.slope", (p + m - 2.0) * c.gamma, (m - 1.0) * c.sigma));
  out.checks.push_back(make_check("inner.sigma", c.sigma0, 0.0, true));
  out.checks.push_back(make_check("inner.max", rhs, K * std::pow(c.sigma0, e)));
  out.checks.push_back(make_check("inner.slope", (p + m - 2.0) * c.gamma, (m - 1.0) * c.sigma0));
  const double ex = (m - 1.0) / (p - 1.0);
  out.F0 = std::pow((m - 1.0) * c.sigma / ((p + m - 2.0) * c.gamma), ex);
  out.G0 = std::pow((m - 1.0) * c.sigma0 / ((p + m - 2.0) * c.gamma), ex);
  return out;
}

inline MaxConditions check_max_conditions_sub_q2(const BarrierParams& bp, const ProblemSpec& spec,
                                                 double t) {
  return check_max_conditions_sub_q2(bp, spec, SubBounds::from(spec.density), t);
}

/// phi(F) = sigma F - delta - gamma F^{(p+m-2)/(m-1)}.
inline double sub_phi(const SubCoefficients& c, double m, double p, double F) {
  return c.sigma * F - c.delta - c.gamma * std::pow(F, (p + m - 2.0) / (m - 1.0));
}

// ---------------------------------------------------------------- q > 2

struct BbarCbar {
  double b_bar;
  double c_bar;
};

inline BbarCbar choose_bbar_cbar(const ProblemSpec& spec) {
  spec.validate();
  const double q = spec.density.q();
  if (!(q > 2.0)) throw DomainError("choose_bbar_cbar: needs q > 2");
  const double b = std::min<double>(spec.N - 2, q - 2.0) / 2.0;
  return {b, std::pow(spec.density.hpsup().r0, -b * spec.p / spec.m)};
}

namespace detail {

inline double qgt2_X(const ProblemSpec& spec, double b_bar) {
  return b_bar * spec.density.hpsup().k1 * (spec.N - 2 - b_bar);
}

inline FeasibilitySystem qgt2_system(const ProblemSpec& spec) {
  if (spec.p < spec.m) return FeasibilitySystem::SuperQgt2_pLTm;
  if (spec.p > spec.m) return FeasibilitySystem::SuperQgt2_pGTm;
  return FeasibilitySystem::SuperQgt2_pEQm;
}

}  // namespace detail

/// Smallest r0 with r0^{-b p/m} <= b k1 (N - 2 - b), the p = m condition.
inline double minimal_r0_peqm(const ProblemSpec& spec, double b_bar) {
  return std::pow(detail::qgt2_X(spec, b_bar), -spec.m / (b_bar * spec.p));
}

inline FeasibilityReport check_super_qgt2(const BarrierParams& bp, const ProblemSpec& spec) {
  spec.validate();
  detail::require_q(spec, false, "check_super_qgt2");
  if (bp.family != BarrierFamily::SuperQgt2) throw DomainError("check_super_qgt2: wrong family");
  const double m = spec.m;
  const double p = spec.p;
  const double q = spec.density.q();
  const double r0 = spec.density.hpsup().r0;
  const double b = bp.b_bar;
  const double X = detail::qgt2_X(spec, b);
  FeasibilityReport rep;
  rep.system = detail::qgt2_system(spec);
  rep.params = bp;
  rep.checks.push_back(make_check("hpS.lower", b, 0.0, true));
  rep.checks.push_back(make_check("hpS.upper", std::min<double>(spec.N - 2, q - 2.0), b, true));
  rep.checks.push_back(make_check("c_bar", bp.c_bar, std::pow(r0, -b * p / m)));
  const double Cm = std::pow(bp.C, m);
  const double Cp = std::pow(bp.C, p);
  switch (rep.system) {
    case FeasibilitySystem::SuperQgt2_pLTm:
      if (!(m > 1.0)) rep.checks.push_back(make_check("m>1", m, 1.0, true));
      rep.checks.push_back(make_check("alpha", bp.alpha, 0.0, true));
      rep.checks.push_back(make_check("T>1", bp.T, 1.0, true));
      rep.checks.push_back(make_check("amplitude", X * Cm, bp.c_bar * Cp));
      break;
    case FeasibilitySystem::SuperQgt2_pGTm:
      rep.checks.push_back(make_check("alpha", -std::abs(bp.alpha), 0.0));
      rep.checks.push_back(make_check("amplitude", X * Cm, bp.c_bar * Cp));
      break;
    default:
      rep.checks.push_back(make_check("alpha=0", -std::abs(bp.alpha), 0.0));
      rep.checks.push_back(make_check("r0", X, std::pow(r0, -b * p / m)));
      break;
  }
  if (r0 < 1.0) rep.notes.emplace_back("r0 < 1: the wall bound (r + r0)^{q-b-2} >= 1 fails near 0");
  rep.finalize();
  return rep;
}

inline FeasibilityReport solve_super_qgt2(const ProblemSpec& spec, double b_bar, double c_bar) {
  spec.validate();
  detail::require_q(spec, false, "solve_super_qgt2");
  const double m = spec.m;
  const double p = spec.p;
  const double r0 = spec.density.hpsup().r0;
  const double X = detail::qgt2_X(spec, b_bar);
  BarrierParams bp;
  FeasibilityReport rep;
  std::optional<double> bound;
  switch (detail::qgt2_system(spec)) {
    case FeasibilitySystem::SuperQgt2_pLTm:
      bound = std::pow(c_bar / X, 1.0 / (m - p));
      bp = BarrierParams::super_qgt2(1.1 * *bound, 2.0, 1.0, b_bar, c_bar, r0);
      break;
    case FeasibilitySystem::SuperQgt2_pGTm:
      bound = std::pow(X / c_bar, 1.0 / (p - m));
      bp = BarrierParams::super_qgt2(0.9 * *bound, 1.0, 0.0, b_bar, c_bar, r0);
      break;
    default:
      bp = BarrierParams::super_qgt2(1.0, 1.0, 0.0, b_bar, c_bar, r0);
      break;
  }
  rep = check_super_qgt2(bp, spec);
  rep.c_bound = bound;
  if (!rep.feasible) {
    if (rep.system == FeasibilitySystem::SuperQgt2_pEQm && X > 0.0)
      rep.notes.push_back("minimal r0 = " + std::to_string(minimal_r0_peqm(spec, b_bar)));
    throw Infeasible(std::move(rep));
  }
  return rep;
}

inline FeasibilityReport solve_super_qgt2(const ProblemSpec& spec) {
  const BbarCbar bc = choose_bbar_cbar(spec);
  return solve_super_qgt2(spec, bc.b_bar, bc.c_bar);
}

}  // namespace wpme
