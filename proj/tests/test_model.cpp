#include <gtest/gtest.h>

#include <random>

#include "wpme/barriers.hpp"
#include "wpme/feasibility.hpp"
#include "wpme/model.hpp"

using namespace wpme;

TEST(Density, ExactPowerValues) {
  const auto d = DensityModel::exact_power(2.0, 1.0, kE * kE);
  EXPECT_NEAR(eval_density(d, 0.0), 0.0183156388887342, 1e-15);
  EXPECT_DOUBLE_EQ(eval_density(DensityModel::exact_power(2.0, 1.0, 1.0), 0.0), 1.0);
  EXPECT_THROW(eval_density(d, -1.0), DomainError);
}

TEST(Density, RejectsBadEnvelope) {
  EXPECT_THROW(DensityModel(1.5, 1.0, 1.0, 1.0, ExactPower{1.0}), DomainError);
  EXPECT_THROW(DensityModel(2.0, 2.0, 1.0, 1.0, ExactPower{1.5}), DomainError);
  EXPECT_THROW(DensityModel(2.0, 1.0, 2.0, 0.0, ExactPower{1.5}), DomainError);
  EXPECT_THROW(DensityModel(2.0, 1.0, 2.0, 1.0, ExactPower{3.0}), DomainError);
}

TEST(Density, PerturbedStaysBetweenWalls) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> ur(0.0, 200.0);
  std::uniform_int_distribution<std::uint64_t> us(0, 1000000);
  long violations = 0;
  for (int i = 0; i < 10000; ++i) {
    const double r = ur(gen);
    const DensityModel d(3.0, 0.5, 4.0, 1.5, Perturbed{us(gen)});
    const double rho = eval_density(d, r);
    const double wall = std::pow(r + 1.5, 3.0);
    if (!(rho > 0.0) || !std::isfinite(rho)) ++violations;
    if (1.0 / rho < 0.5 * wall * (1 - 1e-14) || 1.0 / rho > 4.0 * wall * (1 + 1e-14)) ++violations;
  }
  EXPECT_EQ(violations, 0);
}

TEST(Density, PerturbedSeedSevenInEnvelope) {
  const DensityModel d(2.0, 1.0, 3.0, 2.0, Perturbed{7});
  for (double r : {0.0, 0.3, 1.0, 10.0, 1e3}) {
    const double rho = d(r);
    EXPECT_GE(rho, 1.0 / (3.0 * std::pow(r + 2.0, 2)) * (1 - 1e-14));
    EXPECT_LE(rho, 1.0 / (1.0 * std::pow(r + 2.0, 2)) * (1 + 1e-14));
  }
  EXPECT_EQ(d(3.3), DensityModel(2.0, 1.0, 3.0, 2.0, Perturbed{7})(3.3));
}

TEST(Density, BallBoundsHold) {
  for (auto shape : {EnvelopeShape::Shifted, EnvelopeShape::Clamped}) {
    const DensityModel d(2.0, 1.0, 2.0, 1.0, Perturbed{3}, shape);
    for (double R : {0.5, kE, 10.0})
      for (int i = 0; i <= 200; ++i) {
        const double r = R * i / 200.0;
        EXPECT_LE(d.rho1(R), d.inverse_density(r) * (1 + 1e-14));
        EXPECT_GE(d.rho2(R), d.inverse_density(r) * (1 - 1e-14));
      }
  }
}

TEST(Density, ClampedEnvelopeForms) {
  const auto d = DensityModel::exact_power(2.0, 1.0, kE, EnvelopeShape::Clamped);
  EXPECT_DOUBLE_EQ(d.inverse_density(1.0), kE * kE);
  EXPECT_DOUBLE_EQ(d.inverse_density(5.0), 25.0);
  EXPECT_DOUBLE_EQ(d.hpsub(kE).k2, 1.0);
  EXPECT_DOUBLE_EQ(d.rho2(kE), kE * kE);
  const ShiftedEnvelope env = d.hpsup();
  for (double r : {0.0, 1.0, 3.0, 50.0}) {
    EXPECT_GE(d.inverse_density(r), env.k1 * std::pow(r + env.r0, 2) * (1 - 1e-14));
    EXPECT_LE(d.inverse_density(r), env.k2 * std::pow(r + env.r0, 2) * (1 + 1e-14));
  }
}

TEST(ProblemSpec, Validation) {
  ProblemSpec s;
  EXPECT_NO_THROW(s.validate());
  s.N = 2;
  EXPECT_THROW(s.validate(), DomainError);
  s.N = 3;
  s.p = 1.0;
  EXPECT_THROW(s.validate(), DomainError);
}

TEST(Grid, UniformNodes) {
  const RadialGrid g{5.0, 50};
  EXPECT_EQ(g.node(0), 0.0);
  EXPECT_EQ(g.node(50), 5.0);
  for (int i = 1; i <= 50; ++i) {
    EXPECT_GT(g.node(i), g.node(i - 1));
    EXPECT_NEAR(g.node(i) - g.node(i - 1), 0.1, 1e-14);
  }
  EXPECT_THROW((RadialGrid{-1.0, 10}.validate()), DomainError);
}

TEST(SProfile, GluedC1AtE) {
  const double below = std::nextafter(kE, 0.0);
  EXPECT_NEAR(s_profile(below), s_profile(kE), 1e-14);
  EXPECT_NEAR(s_profile(kE), 1.0, 1e-14);
  EXPECT_NEAR(s_profile_dr(below), 1.0 / kE, 1e-14);
  EXPECT_NEAR(s_profile_dr(kE), 1.0 / kE, 1e-14);
  EXPECT_DOUBLE_EQ(s_profile(0.0), 0.5);
}

TEST(InitialData, SupersolutionCap) {
  ProblemSpec spec{3, 2.0, 3.0, DensityModel::exact_power(2.0, 1.0, kE * kE)};
  BarrierParams bp = BarrierParams::super_q2(1.0, 4.0, 1.0, 2.0, 3.0, kE * kE);
  EXPECT_THROW(initial_datum_supersolution_q2(bp, spec), InfeasibleParams);
  bp.certificate = FeasibilitySystem::SuperQ2;
  const auto u0 = initial_datum_supersolution_q2(bp, spec);
  EXPECT_NEAR(u0(0.0), 0.5, 1e-15);
  const double edge = std::exp(4.0) - kE * kE;
  EXPECT_NEAR(u0(edge), 0.0, 1e-12);
  EXPECT_EQ(u0(edge + 1.0), 0.0);
  double prev = u0(0.0);
  for (int i = 1; i <= 500; ++i) {
    const double v = u0(60.0 * i / 500);
    EXPECT_LE(v, prev);
    prev = v;
  }
}

TEST(InitialData, SubsolutionFloor) {
  ProblemSpec spec{3, 2.0, 3.0, DensityModel::exact_power(2.0, 1.0, kE, EnvelopeShape::Clamped)};
  BarrierParams bp = BarrierParams::sub_q2(15.0, 15.0, 1.0, 2.0, 3.0);
  EXPECT_THROW(initial_datum_subsolution_q2(bp, spec), InfeasibleParams);
  bp.certificate = FeasibilitySystem::SubQ2;
  const auto u0 = initial_datum_subsolution_q2(bp, spec);
  EXPECT_NEAR(u0(0.0), 14.5, 1e-13);
  EXPECT_NEAR(u0(kE), 14.0, 1e-13);
  EXPECT_NEAR(u0(std::exp(15.0)), 0.0, 1e-12);
  EXPECT_EQ(u0(std::exp(15.5)), 0.0);
  double prev = u0(0.0);
  for (int i = 1; i <= 2000; ++i) {
    const double v = u0(std::exp(16.0 * i / 2000) - 1.0);
    EXPECT_LE(v, prev);
    prev = v;
  }
}
