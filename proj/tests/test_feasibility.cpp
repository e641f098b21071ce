#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "draws.hpp"
#include "wpme/feasibility.hpp"

using namespace wpme;
using wpme::testing::Regime;

namespace {

ProblemSpec worked(double r0 = kE * kE) { return {4, 2.0, 3.0, DensityModel::exact_power(2.0, 1.0, r0)}; }

ProblemSpec qgt2(double m, double p, double r0 = 2.0) {
  return {5, m, p, DensityModel::exact_power(4.0, 1.0, r0)};
}

}  // namespace

TEST(K, Values) {
  EXPECT_NEAR(compute_K(2.0, 3.0), 0.384900179459750, 1e-12);
  EXPECT_NEAR(compute_K(2.0, 2.0), 0.25, 1e-15);
  EXPECT_NEAR(compute_K(1.0 + 1e-9, 3.0), 1.0, 1e-6);
  EXPECT_THROW(compute_K(1.0, 3.0), DomainError);
  EXPECT_THROW(compute_K(2.0, 1.0), DomainError);
}

TEST(K, PositiveOnGrid) {
  for (int i = 1; i <= 50; ++i)
    for (int j = 1; j <= 50; ++j) {
      const double m = 1.0 + 4.0 * i / 50.0;
      const double p = 1.0 + 4.0 * j / 50.0;
      EXPECT_GT(compute_K(m, p), 0.0) << m << " " << p;
    }
}

TEST(HpC, Cases) {
  auto rep = check_hpC(worked());
  EXPECT_TRUE(rep.feasible);
  EXPECT_NEAR(rep.find("hpC.ratio")->lhs, 2.0, 1e-14);
  EXPECT_FALSE(check_hpC(worked(kE)).feasible);
  EXPECT_FALSE(check_hpC(worked(kE)).find("hpC.r0")->pass);
  ProblemSpec eq = worked();
  eq.p = 2.0;
  EXPECT_FALSE(check_hpC(eq).find("hpC.ratio")->pass);
  EXPECT_THROW(check_hpC(qgt2(2.0, 3.0)), PreconditionError);
}

TEST(SuperQ2, HandInstanceMargins) {
  const auto spec = worked();
  const auto bp = BarrierParams::super_q2(0.5, 1.0, 1.0, 2.0, 3.0, kE * kE);
  EXPECT_DOUBLE_EQ(bp.omega, 0.5);
  const auto rep = check_super_q2(bp, spec);
  EXPECT_TRUE(rep.feasible);
  EXPECT_NEAR(rep.find("omega.upper")->margin, 0.0, 1e-15);
  EXPECT_NEAR(rep.find("omega.lower")->margin, 0.75, 1e-15);
  for (double t : {0.0, 10.0}) {
    const auto em = check_endpoint_conditions_super_q2(bp, spec, t);
    EXPECT_NEAR(em.cond1, 0.0, 1e-14) << t;
    EXPECT_NEAR(em.cond2, 0.75, 1e-14) << t;
    EXPECT_GE(em.phi0, -1e-14);
    EXPECT_GE(em.phi1, 0.0);
  }
}

TEST(SuperQ2, DoubledOmegaBreaksFirstCondition) {
  const auto bp = BarrierParams::super_q2(0.5, 0.5, 1.0, 2.0, 3.0, kE * kE);
  EXPECT_LT(check_endpoint_conditions_super_q2(bp, worked(), 0.0).cond1, 0.0);
  EXPECT_FALSE(check_super_q2(bp, worked()).feasible);
  EXPECT_FALSE(check_super_q2(bp, worked()).params.certificate.has_value());
}

TEST(SuperQ2, Solve) {
  const auto rep = solve_super_q2(worked());
  EXPECT_TRUE(rep.feasible);
  ASSERT_TRUE(rep.params.certificate.has_value());
  EXPECT_NEAR(rep.params.omega, 0.3, 1e-14);
  EXPECT_NEAR(rep.params.C, 0.569209978830308, 1e-12);
  EXPECT_NEAR(rep.params.a, 1.89736659610103, 1e-12);
  EXPECT_NEAR(*rep.omega0, 1.0 / 6.0, 1e-14);
  EXPECT_NEAR(*rep.omega1, 0.5, 1e-14);
  EXPECT_GE(rep.min_margin(), 0.0);
}

TEST(SuperQ2, InfeasibleCases) {
  ProblemSpec eq = worked();
  eq.p = 2.0;
  EXPECT_THROW(solve_super_q2(eq), InfeasibleParams);
  ProblemSpec ratio{4, 2.0, 3.0, DensityModel(2.0, 1.0, 10.0, std::exp(1.1), ExactPower{1.0})};
  EXPECT_FALSE(check_hpC(ratio).feasible);
  try {
    solve_super_q2(ratio);
    FAIL();
  } catch (const Infeasible& e) {
    EXPECT_FALSE(e.report().feasible);
    EXPECT_FALSE(e.report().find("hpC.ratio")->pass);
  }
}

TEST(SuperQ2, MarginsDependOnOmegaAndCOnly) {
  const auto spec = worked();
  const auto a = BarrierParams::super_q2(0.5, 1.0, 1.0, 2.0, 3.0, kE * kE);
  const auto b = BarrierParams::super_q2(0.8, 1.6, 3.0, 2.0, 3.0, kE * kE);
  ASSERT_DOUBLE_EQ(a.omega, b.omega);
  const auto ra = check_super_q2(a, spec);
  const auto rb = check_super_q2(b, spec);
  EXPECT_NEAR(ra.find("omega.upper")->margin, rb.find("omega.upper")->margin, 1e-15);
  EXPECT_NEAR(ra.find("omega.lower")->margin + a.C * a.C, rb.find("omega.lower")->margin + b.C * b.C, 1e-14);
}

TEST(SubQ2, WorkedInstance) {
  const auto spec = worked();
  const auto rep = solve_sub_q2(spec, SubBounds{1.0, 1.0});
  EXPECT_TRUE(rep.feasible);
  EXPECT_NEAR(*rep.c_bound, 14.257, 1e-3);
  EXPECT_NEAR(rep.params.C, 15.6825923782933, 1e-10);
  EXPECT_NEAR(rep.params.a, rep.params.C, 1e-12);
  EXPECT_NEAR(rep.find("amplitude.exterior")->margin, 3.0 * rep.params.C * rep.params.C - 7.0, 1e-9);
  EXPECT_GT(rep.find("max.exterior")->margin, 0.0);
}

TEST(SubQ2, PreconditionsAndDefaults) {
  ProblemSpec eq = worked();
  eq.p = 2.0;
  EXPECT_THROW(solve_sub_q2(eq), PreconditionError);
  eq.p = 1.5;
  EXPECT_THROW(solve_sub_q2(eq), PreconditionError);
  const ProblemSpec clamped{4, 2.0, 3.0,
                            DensityModel(2.0, 1.0, 1.0, kE, ExactPower{1.0}, EnvelopeShape::Clamped)};
  const auto b = SubBounds::from(clamped.density);
  EXPECT_NEAR(b.k2, 1.0, 1e-15);
  EXPECT_NEAR(b.rho2, kE * kE, 1e-12);
  EXPECT_NEAR(solve_sub_q2(clamped).params.C, 22.8630706599092, 1e-9);
}

TEST(SubQ2, PerturbedDensityIsFlagged) {
  const ProblemSpec s{4, 2.0, 3.0,
                      DensityModel(2.0, 1.0, 1.5, kE, Perturbed{7}, EnvelopeShape::Clamped)};
  EXPECT_GE(solve_sub_q2(s).notes.size(), 2u);
}

TEST(SubQ2, HalvedCBreaksSecondCondition) {
  const auto spec = worked();
  const SubBounds b{1.0, 1.0};
  auto bp = solve_sub_q2(spec, b).params;
  bp = BarrierParams::sub_q2(bp.C / 2.0, bp.C / 2.0, 1.0, 2.0, 3.0);
  const auto rep = check_sub_q2(bp, spec, b);
  EXPECT_FALSE(rep.feasible);
  EXPECT_LT(rep.find("max.exterior")->margin, 0.0);
  EXPECT_FALSE(check_max_conditions_sub_q2(bp, spec, b, 0.0).all_pass());
}

TEST(SubQ2, MaxConditionsTimeUniform) {
  const auto spec = worked();
  const SubBounds b{1.0, 1.0};
  const auto bp = solve_sub_q2(spec, b).params;
  const auto m0 = check_max_conditions_sub_q2(bp, spec, b, 0.0);
  EXPECT_TRUE(m0.all_pass());
  EXPECT_GT(m0.F0, 0.0);
  EXPECT_LE(m0.F0, 1.0);
  EXPECT_GT(m0.G0, 0.0);
  EXPECT_LE(m0.G0, 1.0);
  for (double t : {0.5 * bp.T, 0.99 * bp.T}) {
    const auto mt = check_max_conditions_sub_q2(bp, spec, b, t);
    ASSERT_EQ(mt.checks.size(), m0.checks.size());
    for (std::size_t i = 0; i < mt.checks.size(); ++i)
      EXPECT_NEAR(mt.checks[i].margin, m0.checks[i].margin, 1e-10 * (1.0 + std::abs(m0.checks[i].margin)))
          << mt.checks[i].id << " t=" << t;
    EXPECT_NEAR(mt.F0, m0.F0, 1e-10);
  }
  EXPECT_THROW(check_max_conditions_sub_q2(bp, spec, b, bp.T), TimeAtOrBeyondHorizon);
}

TEST(SubQ2, F0IsStationaryPoint) {
  const auto spec = worked();
  const SubBounds b{1.0, 1.0};
  const auto bp = solve_sub_q2(spec, b).params;
  const auto c = sub_coefficients(bp, spec, b, 0.3, true);
  const double F0 = check_max_conditions_sub_q2(bp, spec, b, 0.3).F0;
  const double h = 1e-6 * F0;
  const double d = (sub_phi(c, 2.0, 3.0, F0 + h) - sub_phi(c, 2.0, 3.0, F0 - h)) / (2.0 * h);
  EXPECT_LT(std::abs(d), 1e-10 * (1.0 + c.sigma));
  EXPECT_LE(sub_phi(c, 2.0, 3.0, F0), 0.0);
}

TEST(SuperQ2, EndpointMarginsTimeUniform) {
  const auto spec = worked();
  const auto bp = solve_super_q2(spec).params;
  const auto m0 = check_endpoint_conditions_super_q2(bp, spec, 0.0);
  for (double t : {0.5 * bp.T, 0.99 * bp.T, 40.0}) {
    const auto mt = check_endpoint_conditions_super_q2(bp, spec, t);
    EXPECT_NEAR(mt.cond1, m0.cond1, 1e-10 * (1.0 + std::abs(m0.cond1)));
    EXPECT_NEAR(mt.cond2, m0.cond2, 1e-10 * (1.0 + std::abs(m0.cond2)));
    EXPECT_NEAR(mt.phi1, m0.phi1, 1e-10 * (1.0 + std::abs(m0.phi1)));
  }
}

TEST(Qgt2, BbarCbar) {
  const auto bc = choose_bbar_cbar(qgt2(2.0, 3.0));
  EXPECT_DOUBLE_EQ(bc.b_bar, 1.0);
  EXPECT_NEAR(bc.c_bar, 0.353553390593274, 1e-12);
  EXPECT_NEAR(choose_bbar_cbar(qgt2(1.7, 4.2, 1.0)).c_bar, 1.0, 1e-15);
  EXPECT_THROW(choose_bbar_cbar(worked()), DomainError);
}

TEST(Qgt2, WorkedInstance) {
  const auto rep = solve_super_qgt2(qgt2(2.0, 3.0));
  EXPECT_EQ(rep.system, FeasibilitySystem::SuperQgt2_pGTm);
  EXPECT_NEAR(*rep.c_bound, 5.65685424949238, 1e-10);
  EXPECT_NEAR(rep.params.C, 5.09116882454314, 1e-10);
  EXPECT_DOUBLE_EQ(rep.params.alpha, 0.0);
  EXPECT_TRUE(rep.find("amplitude")->pass);
}

TEST(Qgt2, PLessThanM) {
  const auto spec = qgt2(2.0, 1.5);
  const auto rep = solve_super_qgt2(spec);
  EXPECT_EQ(rep.system, FeasibilitySystem::SuperQgt2_pLTm);
  EXPECT_DOUBLE_EQ(rep.params.alpha, 1.0);
  EXPECT_DOUBLE_EQ(rep.params.T, 2.0);
  EXPECT_GT(rep.find("amplitude")->margin, 0.0);
  EXPECT_GT(rep.params.C, *rep.c_bound);
}

TEST(Qgt2, PEqualsM) {
  EXPECT_NEAR(minimal_r0_peqm(qgt2(2.0, 2.0), 1.0), 0.5, 1e-15);
  EXPECT_TRUE(solve_super_qgt2(qgt2(2.0, 2.0, 2.0)).feasible);
  EXPECT_TRUE(solve_super_qgt2(qgt2(2.0, 2.0, 0.5)).feasible);
  try {
    solve_super_qgt2(qgt2(2.0, 2.0, 0.4));
    FAIL();
  } catch (const Infeasible& e) {
    EXPECT_FALSE(e.report().find("r0")->pass);
    ASSERT_FALSE(e.report().notes.empty());
    EXPECT_NE(e.report().notes.back().find("minimal r0 = 0.5"), std::string::npos);
  }
}

TEST(Qgt2, DoubledCBreaksSmallBranch) {
  const auto spec = qgt2(2.0, 3.0);
  auto bp = solve_super_qgt2(spec).params;
  bp.C = 2.0 * 5.65685424949238;
  EXPECT_FALSE(check_super_qgt2(bp, spec).feasible);
  EXPECT_THROW(check_super_qgt2(bp, worked()), PreconditionError);
}

class RoundTrip : public ::testing::TestWithParam<Regime> {};

TEST_P(RoundTrip, SolveThenCheck) {
  std::mt19937_64 gen(20240611);
  for (int i = 0; i < 200; ++i) {
    const ProblemSpec s = wpme::testing::draw(GetParam(), gen);
    const FeasibilityReport rep = wpme::testing::solve(GetParam(), s);
    ASSERT_TRUE(rep.feasible) << i;
    ASSERT_TRUE(rep.params.certificate.has_value());
    const FeasibilityReport again = wpme::testing::check(GetParam(), rep.params, s);
    EXPECT_TRUE(again.feasible) << i;
    for (const auto& c : again.checks) EXPECT_GE(c.margin, 0.0) << c.id << " draw " << i;
  }
}

INSTANTIATE_TEST_SUITE_P(Regimes, RoundTrip, ::testing::ValuesIn(wpme::testing::kRegimes),
                         [](const auto& info) {
                           std::string out;
                           for (char ch : std::string(wpme::testing::name(info.param))) {
                             if (ch == '<') out += "lt";
                             else if (ch == '>') out += "gt";
                             else if (ch == '=') out += "eq";
                             else out += ch;
                           }
                           return out;
                         });
