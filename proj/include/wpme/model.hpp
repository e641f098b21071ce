#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "wpme/errors.hpp"

namespace wpme {

/// Euler's number; the radius of the inner ball and the gluing point of the s-profile.
inline constexpr double kE = std::numbers::e;

using RadialFunction = std::function<double(double)>;

/// 1/rho(x) = k (|x| + r0)^q (or k max(|x|, r0)^q for a clamped envelope).
struct ExactPower {
  double k = 1.0;
};

/// Deterministic bounded oscillation between the two envelope walls.
struct Perturbed {
  std::uint64_t seed = 0;
};

using DensityProfile = std::variant<ExactPower, Perturbed>;

/// Shape of the envelope walls w(r) in k1 w(r) <= 1/rho <= k2 w(r).
///   Shifted: w(r) = (r + r0)^q, the two-sided hypothesis used by the supersolutions.
///   Clamped: w(r) = max(r, r0)^q, i.e. pure |x|^q outside B_{r0}; with r0 = e this is
///            the exterior-ball normalization used by the blow-up barrier.
enum class EnvelopeShape { Shifted, Clamped };

/// Envelope constants in the shifted form k1 (r + r0)^q <= 1/rho <= k2 (r + r0)^q.
struct ShiftedEnvelope {
  double k1;
  double k2;
  double r0;
};

/// Envelope constants in the exterior form k1 r^q <= 1/rho <= k2 r^q for r >= R.
struct ExteriorEnvelope {
  double k1;
  double k2;
  double R;
};

class DensityModel {
 public:
  DensityModel(double q, double k1, double k2, double r0, DensityProfile profile,
               EnvelopeShape shape = EnvelopeShape::Shifted)
      : q_(q), k1_(k1), k2_(k2), r0_(r0), profile_(profile), shape_(shape) {
    if (!(q >= 2.0)) throw DomainError("density: decay order q must be >= 2");
    if (!(k1 > 0.0) || !(k2 >= k1)) throw DomainError("density: need 0 < k1 <= k2");
    if (!(r0 > 0.0)) throw DomainError("density: shift r0 must be > 0");
    if (const auto* ep = std::get_if<ExactPower>(&profile_)) {
      if (ep->k < k1 || ep->k > k2)
        throw DomainError("density: ExactPower k must lie in [k1, k2]");
    } else {
      seed_phases(std::get<Perturbed>(profile_).seed);
    }
  }

  /// The default realization: both envelope walls coincide.
  static DensityModel exact_power(double q, double k, double r0,
                                  EnvelopeShape shape = EnvelopeShape::Shifted) {
    return DensityModel(q, k, k, r0, ExactPower{k}, shape);
  }

  /// Same envelope, different realization.
  [[nodiscard]] DensityModel with_profile(DensityProfile profile) const {
    return DensityModel(q_, k1_, k2_, r0_, profile, shape_);
  }

  [[nodiscard]] double q() const { return q_; }
  [[nodiscard]] double k1() const { return k1_; }
  [[nodiscard]] double k2() const { return k2_; }
  [[nodiscard]] double r0() const { return r0_; }
  [[nodiscard]] EnvelopeShape shape() const { return shape_; }
  [[nodiscard]] const DensityProfile& profile() const { return profile_; }

  [[nodiscard]] double wall(double r) const {
    return shape_ == EnvelopeShape::Shifted ? std::pow(r + r0_, q_)
                                            : std::pow(std::max(r, r0_), q_);
  }

  /// 1/rho(r).
  [[nodiscard]] double inverse_density(double r) const {
    if (const auto* ep = std::get_if<ExactPower>(&profile_)) return ep->k * wall(r);
    return wall(r) * (k1_ + (k2_ - k1_) * oscillation(r));
  }

  /// rho(r).
  [[nodiscard]] double operator()(double r) const { return 1.0 / inverse_density(r); }

  /// Lower bound of 1/rho on the closed ball of radius R (walls are nondecreasing in r).
  [[nodiscard]] double rho1(double R) const {
    if (!(R > 0.0)) throw DomainError("rho1: R must be > 0");
    if (const auto* ep = std::get_if<ExactPower>(&profile_)) return ep->k * wall(0.0);
    return k1_ * wall(0.0);
  }

  /// Upper bound of 1/rho on the closed ball of radius R.
  [[nodiscard]] double rho2(double R) const {
    if (!(R > 0.0)) throw DomainError("rho2: R must be > 0");
    if (const auto* ep = std::get_if<ExactPower>(&profile_)) return ep->k * wall(R);
    return k2_ * wall(R);
  }

  /// Constants of the shifted two-sided hypothesis satisfied by this envelope.
  /// For the clamped shape max(r, r0) >= (r + r0)/2 and max(r, r0) <= r + r0.
  [[nodiscard]] ShiftedEnvelope hpsup() const {
    if (shape_ == EnvelopeShape::Shifted) return {k1_, k2_, r0_};
    return {k1_ * std::pow(0.5, q_), k2_, r0_};
  }

  /// Constants of the exterior hypothesis k1 r^q <= 1/rho <= k2 r^q for r >= R.
  [[nodiscard]] ExteriorEnvelope hpsub(double R = kE) const {
    if (shape_ == EnvelopeShape::Shifted) return {k1_, k2_ * std::pow(1.0 + r0_ / R, q_), R};
    return {k1_, k2_ * std::pow(std::max(1.0, r0_ / R), q_), R};
  }

 private:
  // theta(r) in [0, 1]
  [[nodiscard]] double oscillation(double r) const {
    return 0.5 + 0.25 * std::sin(freq_[0] * r + phase_[0]) +
           0.25 * std::sin(freq_[1] * std::log1p(r) + phase_[1]);
  }

  void seed_phases(std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    auto unit = [&gen] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
    freq_ = {0.5 + 2.5 * unit(), 1.0 + 4.0 * unit()};
    phase_ = {2.0 * std::numbers::pi * unit(), 2.0 * std::numbers::pi * unit()};
  }

  double q_;
  double k1_;
  double k2_;
  double r0_;
  DensityProfile profile_;
  EnvelopeShape shape_;
  std::array<double, 2> freq_{};
  std::array<double, 2> phase_{};
};

/// rho at radius r >= 0.
inline double eval_density(const DensityModel& model, double r) {
  if (!(r >= 0.0)) throw DomainError("eval_density: radius must be >= 0");
  return model(r);
}

struct ProblemSpec {
  int N = 3;
  double m = 2.0;
  double p = 3.0;
  DensityModel density = DensityModel::exact_power(2.0, 1.0, kE * kE);

  void validate() const {
    if (N < 3) throw DomainError("problem: dimension N must be >= 3");
    if (!(p > 1.0)) throw DomainError("problem: reaction exponent p must be > 1");
    if (!(m >= 1.0)) throw DomainError("problem: diffusion exponent m must be >= 1");
  }
};

/// Uniform nodes r_i = i h, i = 0..n_cells, on [0, r_max].
struct RadialGrid {
  double r_max = 1.0;
  int n_cells = 100;

  [[nodiscard]] double h() const { return r_max / n_cells; }
  [[nodiscard]] double node(int i) const { return i == n_cells ? r_max : i * h(); }
  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(n_cells) + 1; }

  void validate() const {
    if (!(r_max > 0.0)) throw DomainError("grid: r_max must be > 0");
    if (n_cells < 2) throw DomainError("grid: need at least two cells");
  }
};

/// s(x) = log|x| outside B_e, (|x|^2 + e^2)/(2 e^2) inside; C^1 across |x| = e.
inline double s_profile(double r) {
  return r >= kE ? std::log(r) : (r * r + kE * kE) / (2.0 * kE * kE);
}

inline double s_profile_dr(double r) { return r >= kE ? 1.0 / r : r / (kE * kE); }

/// Values of a radial function at every grid node.
inline std::vector<double> sample(const RadialFunction& f, const RadialGrid& grid) {
  std::vector<double> out(grid.size());
  for (int i = 0; i <= grid.n_cells; ++i) out[i] = f(grid.node(i));
  return out;
}

}  // namespace wpme
