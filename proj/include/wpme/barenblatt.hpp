#pragma once

#include <cmath>

#include "wpme/errors.hpp"

namespace wpme {

/// Self-similar solution of u_t = Delta(u^m) in R^N:
/// B(r, t) = t^{-k} (C0 - kappa r^2 t^{-2k/N})_+^{1/(m-1)}, k = N/(N(m-1)+2), kappa = (m-1)k/(2mN).
struct Barenblatt {
  int N = 3;
  double m = 2.0;
  double C0 = 1.0;

  [[nodiscard]] double k() const { return N / (N * (m - 1.0) + 2.0); }
  [[nodiscard]] double kappa() const { return (m - 1.0) * k() / (2.0 * m * N); }

  [[nodiscard]] double operator()(double r, double t) const {
    if (!(m > 1.0)) throw DomainError("barenblatt: needs m > 1");
    if (!(t > 0.0)) throw DomainError("barenblatt: needs t > 0");
    const double base = C0 - kappa() * r * r * std::pow(t, -2.0 * k() / N);
    return base > 0.0 ? std::pow(t, -k()) * std::pow(base, 1.0 / (m - 1.0)) : 0.0;
  }

  [[nodiscard]] double front(double t) const {
    return std::sqrt(C0 / kappa()) * std::pow(t, k() / N);
  }
};

}  // namespace wpme
