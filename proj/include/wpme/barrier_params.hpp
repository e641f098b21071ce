#pragma once

#include <cmath>
#include <optional>
#include <string_view>

#include "wpme/errors.hpp"

namespace wpme {

enum class BarrierFamily { SuperQ2, SubQ2, SuperQgt2 };

/// The inequality systems a parameter set can be certified against.
enum class FeasibilitySystem { HpC, SuperQ2, SubQ2, SuperQgt2_pLTm, SuperQgt2_pGTm, SuperQgt2_pEQm };

inline std::string_view to_string(BarrierFamily f) {
  switch (f) {
    case BarrierFamily::SuperQ2: return "super_q2";
    case BarrierFamily::SubQ2: return "sub_q2";
    case BarrierFamily::SuperQgt2: return "super_qgt2";
  }
  return "?";
}

inline std::string_view to_string(FeasibilitySystem s) {
  switch (s) {
    case FeasibilitySystem::HpC: return "hpC";
    case FeasibilitySystem::SuperQ2: return "super_q2";
    case FeasibilitySystem::SubQ2: return "sub_q2";
    case FeasibilitySystem::SuperQgt2_pLTm: return "super_qgt2_p_lt_m";
    case FeasibilitySystem::SuperQgt2_pGTm: return "super_qgt2_p_gt_m";
    case FeasibilitySystem::SuperQgt2_pEQm: return "super_qgt2_p_eq_m";
  }
  return "?";
}

/// Parameters of one barrier. The q = 2 families use (C, a, omega, T, alpha, beta);
/// the q > 2 family uses (C, T, alpha, b_bar, c_bar). r0 is copied from the density.
struct BarrierParams {
  BarrierFamily family = BarrierFamily::SuperQ2;
  double C = 1.0;
  double a = 1.0;
  double omega = 1.0;  // C^{m-1} / a
  double T = 1.0;
  double alpha = 0.0;
  double beta = 0.0;
  double b_bar = 0.0;
  double c_bar = 0.0;
  double r0 = 1.0;
  /// Set only by a passing feasibility check.
  std::optional<FeasibilitySystem> certificate;

  /// C zeta(t) [1 - log(r + r0) eta(t) / a]_+^{1/(m-1)}, zeta = (T+t)^-alpha, eta = (T+t)^-beta.
  static BarrierParams super_q2(double C, double a, double T, double m, double p, double r0) {
    check_q2_exponents(m, p);
    BarrierParams bp;
    bp.family = BarrierFamily::SuperQ2;
    bp.C = C;
    bp.a = a;
    bp.omega = std::pow(C, m - 1.0) / a;
    bp.T = T;
    bp.alpha = 1.0 / (p - 1.0);
    bp.beta = (p - m) / (p - 1.0);
    bp.r0 = r0;
    return bp;
  }

  /// Piecewise log / quadratic profile glued at |x| = e, zeta = (T-t)^-alpha, eta = (T-t)^-beta.
  static BarrierParams sub_q2(double C, double a, double T, double m, double p) {
    check_q2_exponents(m, p);
    BarrierParams bp;
    bp.family = BarrierFamily::SubQ2;
    bp.C = C;
    bp.a = a;
    bp.omega = std::pow(C, m - 1.0) / a;
    bp.T = T;
    bp.alpha = 1.0 / (p - 1.0);
    bp.beta = (p - m) / (p - 1.0);
    bp.r0 = 0.0;
    return bp;
  }

  /// C (T+t)^alpha (r + r0)^{-b_bar/m}.
  static BarrierParams super_qgt2(double C, double T, double alpha, double b_bar, double c_bar,
                                  double r0) {
    BarrierParams bp;
    bp.family = BarrierFamily::SuperQgt2;
    bp.C = C;
    bp.a = 0.0;
    bp.omega = 0.0;
    bp.T = T;
    bp.alpha = alpha;
    bp.beta = 0.0;
    bp.b_bar = b_bar;
    bp.c_bar = c_bar;
    bp.r0 = r0;
    return bp;
  }

 private:
  static void check_q2_exponents(double m, double p) {
    if (!(m > 1.0)) throw DomainError("q = 2 barriers need m > 1");
    if (!(p > 1.0)) throw DomainError("q = 2 barriers need p > 1");
  }
};

}  // namespace wpme
