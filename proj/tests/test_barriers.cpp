#include <gtest/gtest.h>

#include <random>

#include "wpme/barriers.hpp"
#include "wpme/feasibility.hpp"
#include "wpme/verifier.hpp"

using namespace wpme;

namespace {

ProblemSpec q2_spec(int N = 3) {
  return {N, 2.0, 3.0, DensityModel::exact_power(2.0, 1.0, kE * kE)};
}

BarrierParams super_example() { return BarrierParams::super_q2(1.0, 4.0, 1.0, 2.0, 3.0, kE * kE); }
BarrierParams sub_example() { return BarrierParams::sub_q2(15.0, 15.0, 1.0, 2.0, 3.0); }
BarrierParams qgt2_example() { return BarrierParams::super_qgt2(1.0, 1.0, 0.0, 1.0, 0.5, 2.0); }

}  // namespace

TEST(Params, OmegaAndExponents) {
  const auto bp = BarrierParams::super_q2(1.7, 2.3, 1.0, 1.6, 3.4, 9.0);
  EXPECT_NEAR(bp.omega * bp.a, std::pow(1.7, 0.6), 1e-12 * std::pow(1.7, 0.6));
  EXPECT_DOUBLE_EQ(bp.alpha, 1.0 / 2.4);
  EXPECT_DOUBLE_EQ(bp.beta, 1.8 / 2.4);
  EXPECT_THROW(BarrierParams::sub_q2(1.0, 1.0, 1.0, 1.0, 3.0), DomainError);
}

TEST(SuperQ2, WorkedValues) {
  const auto spec = q2_spec();
  const auto bp = super_example();
  const auto ev = eval_super_q2(bp, spec, 0.0, 0.0);
  EXPECT_NEAR(ev.value, 0.5, 1e-15);
  EXPECT_NEAR(ev.profile, 0.5, 1e-15);
  EXPECT_EQ(ev.region, Region::PositiveCore);
  EXPECT_LT(eval_super_q2(bp, spec, 0.0, 1e6).value, 2e-3);
  const double edge = support_radius(bp, 0.0);
  EXPECT_NEAR(edge, 47.2090939342136, 1e-10);
  const auto cut = eval_super_q2(bp, spec, edge * (1 + 1e-12), 0.0);
  EXPECT_EQ(cut.region, Region::Cutoff);
  EXPECT_EQ(cut.value, 0.0);
  EXPECT_EQ(cut.du_dt, 0.0);
  EXPECT_EQ(cut.dum_dr, 0.0);
  EXPECT_EQ(cut.d2um_dr2, 0.0);
  EXPECT_EQ(cut.lap_um, 0.0);
}

TEST(SuperQ2, DecaysLikeInverseSqrt) {
  const auto spec = q2_spec();
  const auto bp = super_example();
  const double v1 = eval_super_q2(bp, spec, 1.0, 1e4).value;
  const double v2 = eval_super_q2(bp, spec, 1.0, 4e4).value;
  EXPECT_NEAR(v1 / v2, 2.0, 0.05);
}

TEST(SubQ2, WorkedValues) {
  const auto spec = q2_spec();
  const auto bp = sub_example();
  EXPECT_NEAR(eval_sub_q2(bp, spec, kE, 0.0).value, 14.0, 1e-13);
  EXPECT_NEAR(eval_sub_q2(bp, spec, std::nextafter(kE, 0.0), 0.0).value, 14.0, 1e-13);
  const auto c = eval_sub_q2(bp, spec, 0.0, 0.0);
  EXPECT_NEAR(c.value, 14.5, 1e-13);
  EXPECT_EQ(c.region, Region::InnerBall);
  EXPECT_EQ(eval_sub_q2(bp, spec, 3.0, 0.0).region, Region::PositiveCore);
  EXPECT_THROW(eval_sub_q2(bp, spec, 0.0, 1.0), TimeAtOrBeyondHorizon);
  EXPECT_THROW(eval_sub_q2(bp, spec, 0.0, 2.0), TimeAtOrBeyondHorizon);
  EXPECT_NEAR(std::log(support_radius(bp, 0.0)), 15.0, 1e-12);
  EXPECT_THROW(support_radius(bp, 1.0), TimeAtOrBeyondHorizon);
}

TEST(SubQ2, SupNormPeaksThenCollapses) {
  const auto spec = q2_spec();
  const auto bp = sub_example();
  const double tc = sub_collapse_time(bp);
  EXPECT_NEAR(tc, 1.0 - 1.0 / 900.0, 1e-15);
  for (double t : {0.0, 0.5, 0.9, 0.99, tc - 1e-5}) {
    double sup = 0.0;
    for (int i = 0; i <= 4000; ++i) sup = std::max(sup, eval_sub_q2(bp, spec, 4.0 * kE * i / 4000, t).value);
    EXPECT_NEAR(sup, sub_sup_norm(bp, spec, t), 1e-12 * (1.0 + sup));
    EXPECT_NEAR(sub_sup_norm(bp, spec, t), eval_sub_q2(bp, spec, 0.0, t).value, 1e-12);
  }
  // grows past any fixed threshold before the collapse time
  EXPECT_GT(sub_sup_norm(bp, spec, 1.0 - 1.0 / 30.0 / 30.0 / 4.0 * 4.0 - 1e-4), 15.0);
  EXPECT_GT(sub_sup_norm(bp, spec, 0.995), 100.0);
  EXPECT_EQ(sub_sup_norm(bp, spec, tc + 1e-6), 0.0);
  EXPECT_EQ(support_radius(bp, tc + 1e-6), 0.0);
}

TEST(SuperQgt2, WorkedValues) {
  const ProblemSpec spec{5, 2.0, 3.0, DensityModel::exact_power(4.0, 1.0, 2.0)};
  const auto bp = qgt2_example();
  for (double t : {0.0, 1.0, 100.0}) {
    const auto ev = eval_super_qgt2(bp, spec, 0.0, t);
    EXPECT_NEAR(ev.value, 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(ev.dum_dr, -0.25, 1e-15);
    EXPECT_EQ(ev.du_dt, 0.0);
  }
  EXPECT_TRUE(std::isinf(support_radius(bp, 0.0)));
}

TEST(Barriers, LaplacianDefinition) {
  const auto spec = q2_spec(4);
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> ur(0.05, 40.0);
  const ProblemSpec s5{5, 2.0, 3.0, DensityModel::exact_power(4.0, 1.0, 2.0)};
  for (int i = 0; i < 200; ++i) {
    const double r = ur(gen);
    for (const auto& [bp, sp] : {std::pair{super_example(), spec}, std::pair{sub_example(), spec},
                                 std::pair{qgt2_example(), s5}}) {
      const auto ev = eval_barrier(bp, sp, r, 0.3);
      EXPECT_NEAR(ev.lap_um, ev.d2um_dr2 + (sp.N - 1) / r * ev.dum_dr,
                  1e-13 * (1 + std::abs(ev.lap_um)));
    }
  }
  // inner branch at the origin: N (v^m)_rr
  const auto c = eval_sub_q2(sub_example(), spec, 0.0, 0.0);
  EXPECT_EQ(c.dum_dr, 0.0);
  EXPECT_DOUBLE_EQ(c.lap_um, 4 * c.d2um_dr2);
}

TEST(Barriers, NonincreasingInR) {
  const auto spec = q2_spec();
  const ProblemSpec s5{5, 2.0, 3.0, DensityModel::exact_power(4.0, 1.0, 2.0)};
  for (const auto& [bp, sp] : {std::pair{super_example(), spec}, std::pair{sub_example(), spec},
                               std::pair{qgt2_example(), s5}}) {
    for (double t : {0.0, 0.5}) {
      double prev = eval_barrier(bp, sp, 0.0, t).value;
      for (int i = 1; i <= 3000; ++i) {
        const double v = eval_barrier(bp, sp, std::exp(20.0 * i / 3000) - 1.0, t).value;
        EXPECT_LE(v, prev);
        prev = v;
      }
    }
  }
}

TEST(Barriers, CutoffContinuity) {
  for (double m : {1.5, 2.0, 3.0}) {
    const ProblemSpec spec{3, m, 3.0, DensityModel::exact_power(2.0, 1.0, kE * kE)};
    const auto bp = BarrierParams::super_q2(1.0, 4.0, 1.0, m, 3.0, kE * kE);
    const double zeta = 1.0;
    for (double eps : {1e-2, 1e-4, 1e-8}) {
      // log(r + r0) = a (1 - eps)
      const double r = std::exp(4.0 * (1.0 - eps)) - kE * kE;
      const auto ev = eval_super_q2(bp, spec, r, 0.0);
      EXPECT_LE(ev.value, std::pow(eps, 1.0 / (m - 1.0)) * bp.C * zeta * (1 + 1e-6));
      EXPECT_LE(ev.dum_dr, 0.0);
    }
  }
}

TEST(Barriers, TemplatedValueMatches) {
  const auto spec = q2_spec();
  const ProblemSpec s5{5, 2.0, 3.0, DensityModel::exact_power(4.0, 1.0, 2.0)};
  for (double r : {0.0, 1.0, kE, 7.0, 30.0}) {
    EXPECT_NEAR(barrier_value<long double>(super_example(), spec, r, 0.4),
                eval_super_q2(super_example(), spec, r, 0.4).value, 1e-14);
    EXPECT_NEAR(barrier_value<long double>(sub_example(), spec, r, 0.4),
                eval_sub_q2(sub_example(), spec, r, 0.4).value, 1e-12);
    EXPECT_NEAR(barrier_value<double>(qgt2_example(), s5, r, 0.4),
                eval_super_qgt2(qgt2_example(), s5, r, 0.4).value, 1e-14);
  }
}

TEST(Interface, GluingIdentity) {
  const auto spec = q2_spec(4);
  const auto bp = sub_example();
  for (double t : {0.0, 0.25, 0.5, 0.75}) {
    const auto j = interface_flux_match(bp, spec, t);
    EXPECT_LE(j.value, 1e-12);
    EXPECT_LE(j.flux, 1e-12);
  }
  const auto bad = interface_flux_match(bp, spec, 0.0, 1.01);
  EXPECT_GT(bad.value, 0.1);
  EXPECT_GT(bad.flux, 1e-3);
  EXPECT_THROW(interface_flux_match(bp, spec, 1.0), TimeAtOrBeyondHorizon);
}

TEST(Interface, CommonFluxFormula) {
  const auto spec = q2_spec(4);
  const auto bp = sub_example();
  const double t = 0.3;
  const double zeta = std::pow(1.0 - t, -bp.alpha);
  const double eta = std::pow(1.0 - t, -bp.beta);
  const double expect = -std::pow(bp.C * zeta, 2.0) * 2.0 / kE * eta / bp.a * (1.0 - eta / bp.a);
  EXPECT_NEAR(eval_sub_q2(bp, spec, kE, t).dum_dr, expect, 1e-11 * std::abs(expect));
}

TEST(Derivatives, FiniteDifferenceCrossCheck) {
  const auto spec = q2_spec(4);
  const ProblemSpec s5{5, 2.0, 3.0, DensityModel::exact_power(4.0, 1.0, 2.0)};
  EXPECT_LE(crosscheck_derivatives(super_example(), spec, 300).max_rel_error, 1e-6);
  EXPECT_LE(crosscheck_derivatives(sub_example(), spec, 300).max_rel_error, 1e-6);
  EXPECT_LE(crosscheck_derivatives(qgt2_example(), s5, 300).max_rel_error, 1e-6);
  const auto pq = BarrierParams::super_qgt2(0.3, 2.0, 1.0, 1.0, 0.5, 2.0);
  const ProblemSpec s5b{5, 2.0, 1.5, DensityModel::exact_power(4.0, 1.0, 2.0)};
  EXPECT_LE(crosscheck_derivatives(pq, s5b, 300).max_rel_error, 1e-6);
}

TEST(Derivatives, OtherDiffusionExponents) {
  for (double m : {1.3, 1.7, 2.5}) {
    const ProblemSpec spec{4, m, 3.5, DensityModel::exact_power(2.0, 1.0, kE * kE)};
    const auto sup = BarrierParams::super_q2(0.7, 3.0, 2.0, m, 3.5, kE * kE);
    const auto sub = BarrierParams::sub_q2(9.0, 6.0, 1.0, m, 3.5);
    EXPECT_LE(crosscheck_derivatives(sup, spec, 200).max_rel_error, 1e-6) << m;
    EXPECT_LE(crosscheck_derivatives(sub, spec, 200).max_rel_error, 1e-6) << m;
  }
}
