#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "blayer/manifold_tracer.hpp"
#include "canonical.hpp"
#include "expect_error.hpp"

using namespace blayer;

namespace {

Curve sigma(const SystemData& s, TraceOptions opts = {}) { return trace_sigma(s, transonic_frame(s), opts); }

Curve gamma(const SystemData& s, CurveLabel b, TraceOptions opts = {}) {
  return trace_gamma(s, eigen_2x2(s.A), b, opts);
}

// Piecewise-linear value of the secondary coordinate at param, or NAN.
double linear_at(const Curve& c, double param) {
  for (std::size_t i = 1; i < c.samples.size(); ++i) {
    const PhasePoint a = c.samples[i - 1], b = c.samples[i];
    const double xa = c.by_u() ? a.u : a.theta, xb = c.by_u() ? b.u : b.theta;
    const double ya = c.by_u() ? a.theta : a.u, yb = c.by_u() ? b.theta : b.u;
    if ((param - xa) * (param - xb) <= 0.0 && xa != xb) return ya + (yb - ya) * (param - xa) / (xb - xa);
  }
  return NAN;
}

// Sup of the secondary-coordinate gap between two traces over the interior of a.
double sup_gap(const Curve& a, const Curve& b) {
  double worst = 0.0;
  for (std::size_t i = 2; i + 1 < a.samples.size(); ++i) {
    const PhasePoint p = a.samples[i];
    const double v = linear_at(b, a.by_u() ? p.u : p.theta);
    if (std::isnan(v)) continue;
    worst = std::max(worst, std::abs(v - (a.by_u() ? p.theta : p.u)));
  }
  return worst;
}

void expect_monotone(const Curve& c) {
  const double du = c.label == CurveLabel::Gamma2 ? 1.0 : -1.0;
  for (std::size_t i = 1; i < c.samples.size(); ++i) {
    const PhasePoint a = c.samples[i - 1], b = c.samples[i];
    ASSERT_GT(du * (b.u - a.u), 0.0) << to_string(c.label) << " sample " << i;
    ASSERT_LT(du * (b.theta - a.theta), 0.0) << to_string(c.label) << " sample " << i;
  }
  for (std::size_t i = 0; i + 1 < c.samples.size(); ++i) {
    EXPECT_GT(c.samples[i].u, 0.0);
    EXPECT_GT(c.samples[i].theta, 0.0);
  }
}

void expect_field_signs(const Curve& c) {
  const double su = c.label == CurveLabel::Gamma2 ? -1.0 : 1.0;
  for (std::size_t i = 1; i + 1 < c.samples.size(); ++i) {
    const PhasePoint v = rhs_poly(c.samples[i], c.system);
    ASSERT_GT(su * v.u, 0.0) << to_string(c.label) << " sample " << i;
    ASSERT_LT(su * v.theta, 0.0) << to_string(c.label) << " sample " << i;
  }
}

// Secant slope from S1 to the first sample at least dist * u+ away in u.
double secant_slope(const Curve& c, double dist) {
  const PhasePoint s1 = c.system.s1();
  for (const PhasePoint& p : c.samples)
    if (std::abs(p.u - s1.u) >= dist * c.system.u_plus) return (p.theta - s1.theta) / (p.u - s1.u);
  return NAN;
}

}  // namespace

TEST(TraceSigma, CanonicalTerminal) {
  const SystemData s = canon::system(canon::kSonicU);
  const Curve c = sigma(s);
  EXPECT_EQ(c.label, CurveLabel::Sigma);
  ASSERT_EQ(c.terminal, TerminalKind::HitUAxis);
  EXPECT_LE(std::abs(c.terminal_point.u), 1e-10);
  EXPECT_GT(c.terminal_point.theta, s.theta_plus);
  EXPECT_LT(c.terminal_point.theta, nullcline_h2(0.0, s));
  EXPECT_NEAR(c.terminal_point.theta, 1.30043159622, 1e-8);
  EXPECT_EQ(c.samples.front(), s.s1());
  EXPECT_EQ(c.samples.back(), c.terminal_point);
  EXPECT_EQ(c.samples.size(), c.elapsed.size());
  EXPECT_EQ(c.seed_offset, 1e-6 * s.scale());
}

TEST(TraceSigma, MonotoneInsideRegionI) {
  const Curve c = sigma(canon::system(canon::kSonicU));
  expect_monotone(c);
  expect_field_signs(c);
  for (std::size_t i = 1; i + 1 < c.samples.size(); ++i)
    EXPECT_GT(region_margin(c.samples[i], Region::I, c.system), 0.0) << i;
}

TEST(TraceSigma, TangentToTau) {
  const SystemData s = canon::system(canon::kSonicU);
  const Curve c = sigma(s);
  EXPECT_NEAR(secant_slope(c, 1e-3), frozen::kTauSlope, 0.01 * std::abs(frozen::kTauSlope));
}

TEST(TraceSigma, SeedHalving) {
  const SystemData s = canon::system(canon::kSonicU);
  const Curve a = sigma(s);
  TraceOptions half;
  half.seed_offset = 0.5 * a.seed_offset;
  const Curve b = sigma(s, half);
  EXPECT_LT(sup_gap(a, b), 1e-6 * s.theta_plus);
  EXPECT_LT(std::abs(a.terminal_point.theta - b.terminal_point.theta), 1e-6 * s.theta_plus);
}

TEST(TraceSigma, AlgebraicApproachToS1) {
  // Along the tail 1/(u+ - u) falls linearly in backward xi with slope -a2,
  // so xi_eff (u+ - u) -> 1/a2 with xi_eff the forward distance to the
  // fitted origin.
  const SystemData s = canon::system(canon::kSonicU);
  const Curve c = sigma(s);
  std::vector<double> x, y;
  for (std::size_t i = 1; i < c.samples.size(); ++i) {
    const double gap = s.u_plus - c.samples[i].u;
    if (gap > 1e-3 * s.u_plus) break;
    x.push_back(c.elapsed[i]);
    y.push_back(1.0 / gap);
  }
  ASSERT_GE(x.size(), 50u);
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double slope = -(n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double origin = (sy + slope * sx) / n / slope;
  EXPECT_NEAR(slope, frozen::kTransA2, 0.1 * frozen::kTransA2);
  for (std::size_t i = 0; i < x.size(); ++i)
    EXPECT_NEAR((origin - x[i]) / y[i], frozen::kTransInvA2, 0.1 * frozen::kTransInvA2) << i;
}

TEST(TraceSigma, RejectsOtherRegimes) {
  const SystemData sub = canon::system(1.0);
  EXPECT_ERROR_CODE(trace_sigma(sub, transonic_frame(canon::system(canon::kSonicU)), {}), ErrorCode::WrongRegime);
}

TEST(TraceGamma, CanonicalGamma1) {
  const SystemData s = canon::system(1.0);
  const Curve c = gamma(s, CurveLabel::Gamma1);
  ASSERT_EQ(c.terminal, TerminalKind::HitUAxis);
  EXPECT_LE(std::abs(c.terminal_point.u), 1e-10);
  EXPECT_GT(c.terminal_point.theta, 1.0);
  EXPECT_LT(c.terminal_point.theta, 1.6);
  EXPECT_NEAR(nullcline_h2(0.0, s), 1.6, 1e-15);
  EXPECT_NEAR(c.terminal_point.theta, 1.23680146856, 1e-8);
  expect_monotone(c);
  expect_field_signs(c);
}

TEST(TraceGamma, CanonicalGamma2ConvergesToS2) {
  const SystemData s = canon::system(1.0);
  const Curve c = gamma(s, CurveLabel::Gamma2);
  ASSERT_EQ(c.terminal, TerminalKind::ConvergedToS2);
  EXPECT_NEAR(c.terminal_point.u, 4.0 / 3.0, 1e-4 * 4.0 / 3.0);
  EXPECT_NEAR(c.terminal_point.theta, 8.0 / 9.0, 1e-4 * 8.0 / 9.0);
  expect_monotone(c);
  expect_field_signs(c);
  for (std::size_t i = 1; i + 1 < c.samples.size(); ++i)
    EXPECT_GT(region_margin(c.samples[i], Region::II, s), 0.0) << i;
}

TEST(TraceGamma, SubcaseB) {
  const SystemData s = canon::system(0.3);
  EXPECT_NEAR(s.alpha2, frozen::kSubcaseBAlpha2, 1e-12);
  const Curve g2 = gamma(s, CurveLabel::Gamma2);
  ASSERT_EQ(g2.terminal, TerminalKind::HitThetaAxis);
  EXPECT_LE(std::abs(g2.terminal_point.theta), 1e-10);
  EXPECT_GT(g2.terminal_point.u, s.u_plus);
  EXPECT_LT(g2.terminal_point.u, s.alpha1 * s.u_plus);
  EXPECT_NEAR(g2.terminal_point.u, 1.86900, 1e-4);
  expect_monotone(g2);
  expect_field_signs(g2);
  const Curve g1 = gamma(s, CurveLabel::Gamma1);
  ASSERT_EQ(g1.terminal, TerminalKind::HitUAxis);
  EXPECT_NEAR(g1.terminal_point.theta, 1.03848, 1e-4);
  expect_monotone(g1);
}

TEST(TraceGamma, TangentToStableDirection) {
  for (double up : {1.0, 0.3}) {
    const SystemData s = canon::system(up);
    const double slope = tangent_line(s, eigen_2x2(s.A)).slope;
    for (CurveLabel b : {CurveLabel::Gamma1, CurveLabel::Gamma2}) {
      const Curve c = gamma(s, b);
      EXPECT_NEAR(secant_slope(c, 1e-3), slope, 0.01 * std::abs(slope)) << up << " " << to_string(b);
    }
  }
}

TEST(TraceGamma, SeedHalving) {
  for (double up : {1.0, 0.3}) {
    const SystemData s = canon::system(up);
    for (CurveLabel b : {CurveLabel::Gamma1, CurveLabel::Gamma2}) {
      const Curve a = gamma(s, b);
      TraceOptions half;
      half.seed_offset = 0.5 * a.seed_offset;
      const Curve h = gamma(s, b, half);
      const double unit = a.by_u() ? s.theta_plus : s.u_plus;
      EXPECT_LT(sup_gap(a, h), 1e-6 * unit) << up << " " << to_string(b);
    }
  }
}

TEST(TraceGamma, SampleSpacing) {
  const Curve c = gamma(canon::system(1.0), CurveLabel::Gamma1);
  for (std::size_t i = 2; i < c.samples.size(); ++i) {
    const PhasePoint d = c.samples[i] - c.samples[i - 1];
    const double g = std::max(std::abs(d.u), std::abs(d.theta));
    EXPECT_LE(g, 2e-4 * (1 + 1e-9)) << i;
    if (i + 1 < c.samples.size()) {
      EXPECT_GE(g, 1e-5 * (1 - 1e-9)) << i;
    }
  }
}

TEST(TraceGamma, TerminalFollowsSignOfAlpha2) {
  const double boundary = frozen::kAlpha2ZeroMach;
  std::vector<double> machs{0.1, 0.2, 0.3, 0.35, 0.37, 0.385, 0.4, 0.5, 0.7, 0.9, 0.99};
  for (double d : {1e-2, 1e-3, 1e-4}) {
    machs.push_back(boundary - d);
    machs.push_back(boundary + d);
  }
  for (double M : machs) {
    const SystemData s = canon::system(M * canon::kSonicU);
    const Curve c = gamma(s, CurveLabel::Gamma2);
    EXPECT_EQ(c.terminal, s.alpha2 > 0 ? TerminalKind::ConvergedToS2 : TerminalKind::HitThetaAxis) << M;
    EXPECT_EQ(s.alpha2 > 0, M > boundary) << M;
    expect_monotone(c);
  }
}

TEST(TraceGamma, RandomSubsonicSets) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> g(1.1, 2.5), pos(0.5, 2.0), M(0.15, 0.95);
  for (int i = 0; i < 20; ++i) {
    const GasParams gas(g(rng), pos(rng), pos(rng), pos(rng));
    const double theta = pos(rng);
    const SystemData s = build_system(gas, EndState(pos(rng), M(rng) * std::sqrt(gas.R() * gas.gamma() * theta), theta));
    for (const Curve& c : trace_all(s)) {
      expect_monotone(c);
      expect_field_signs(c);
      if (c.label == CurveLabel::Gamma1) {
        EXPECT_EQ(c.terminal, TerminalKind::HitUAxis);
        EXPECT_GT(c.terminal_point.theta, s.theta_plus);
        EXPECT_LT(c.terminal_point.theta, nullcline_h2(0.0, s));
      }
    }
  }
}

TEST(TraceGamma, RandomTransonicSets) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> g(1.1, 2.5), pos(0.5, 2.0);
  for (int i = 0; i < 10; ++i) {
    const GasParams gas(g(rng), pos(rng), pos(rng), pos(rng));
    const double theta = pos(rng);
    const SystemData s = build_system(gas, EndState(pos(rng), std::sqrt(gas.R() * gas.gamma() * theta), theta));
    const std::vector<Curve> cs = trace_all(s);
    ASSERT_EQ(cs.size(), 1u);
    expect_monotone(cs[0]);
    expect_field_signs(cs[0]);
    EXPECT_EQ(cs[0].terminal, TerminalKind::HitUAxis);
    EXPECT_GT(cs[0].terminal_point.theta, s.theta_plus);
    EXPECT_LT(cs[0].terminal_point.theta, nullcline_h2(0.0, s));
  }
}

TEST(TraceAll, ByRegime) {
  EXPECT_TRUE(trace_all(canon::system(2.0)).empty());
  EXPECT_EQ(trace_all(canon::system(canon::kSonicU)).size(), 1u);
  const auto sub = trace_all(canon::system(1.0));
  ASSERT_EQ(sub.size(), 2u);
  EXPECT_EQ(sub[0].label, CurveLabel::Gamma1);
  EXPECT_EQ(sub[1].label, CurveLabel::Gamma2);
  const SystemData sup = canon::system(2.0);
  EXPECT_ERROR_CODE(trace_gamma(sup, eigen_2x2(sup.A), CurveLabel::Gamma1), ErrorCode::WrongRegime);
}

TEST(CurveMembership, StoredSamplesAreOnCurve) {
  for (const Curve& c : trace_all(canon::system(1.0))) {
    for (std::size_t i = 0; i + 1 < c.samples.size(); i += 97) {
      const Membership m = curve_membership(c, c.samples[i], 1e-6);
      EXPECT_TRUE(m.on_curve) << to_string(c.label) << " " << i << " " << m.distance;
    }
  }
  const Curve s = sigma(canon::system(canon::kSonicU));
  for (std::size_t i = 0; i + 1 < s.samples.size(); i += 97) EXPECT_TRUE(curve_membership(s, s.samples[i], 1e-6).on_curve);
}

TEST(CurveMembership, S1IsAMember) {
  const Curve c = gamma(canon::system(1.0), CurveLabel::Gamma1);
  const Membership m = curve_membership(c, {1.0, 1.0}, 1e-6);
  EXPECT_TRUE(m.on_curve);
  EXPECT_EQ(m.parameter, 1.0);
}

TEST(CurveMembership, PerturbationIsOffCurve) {
  const Curve c = gamma(canon::system(1.0), CurveLabel::Gamma1);
  const PhasePoint p = c.samples[c.samples.size() / 2];
  const Membership m = curve_membership(c, {p.u, p.theta + 0.05}, 1e-6);
  EXPECT_FALSE(m.on_curve);
  EXPECT_NEAR(m.distance, 0.05, 1e-9);
  EXPECT_FALSE(m.refined);
  const Membership below = curve_membership(c, {p.u, p.theta - 0.05}, 1e-6);
  EXPECT_NEAR(below.distance, -0.05, 1e-9);
  // Gamma2 distances are measured in u.
  const Curve g2 = gamma(canon::system(1.0), CurveLabel::Gamma2);
  const PhasePoint q = g2.samples[g2.samples.size() / 2];
  const Membership m2 = curve_membership(g2, {q.u + 0.05, q.theta}, 1e-6);
  EXPECT_FALSE(m2.on_curve);
  EXPECT_NEAR(m2.distance, 0.05, 1e-9);
  EXPECT_EQ(m2.parameter, q.theta);
}

TEST(CurveMembership, MidpointsAreOnCurveAfterRefinement) {
  const Curve c = gamma(canon::system(1.0), CurveLabel::Gamma1);
  for (std::size_t i = 2; i + 2 < c.samples.size(); i += 211) {
    const PhasePoint mid = 0.5 * (c.samples[i] + c.samples[i + 1]);
    const Membership m = curve_membership(c, mid, 1e-6);
    EXPECT_TRUE(m.on_curve) << i << " " << m.distance;
    EXPECT_TRUE(m.refined);
  }
}

TEST(CurveMembership, BorderlineDecidedByRefinement) {
  const Curve c = gamma(canon::system(1.0), CurveLabel::Gamma1);
  const PhasePoint p = c.samples[c.samples.size() / 3];
  const Membership in = curve_membership(c, {p.u, p.theta + 0.5e-6}, 1e-6);
  EXPECT_TRUE(in.on_curve);
  EXPECT_TRUE(in.refined);
  const Membership out = curve_membership(c, {p.u, p.theta + 2e-6}, 1e-6);
  EXPECT_FALSE(out.on_curve);
  EXPECT_TRUE(out.refined);
  EXPECT_NEAR(out.distance, 2e-6, 1e-9);
}

TEST(CurveMembership, OutOfRange) {
  const SystemData s = canon::system(1.0);
  const Curve g1 = gamma(s, CurveLabel::Gamma1);
  EXPECT_ERROR_CODE(curve_membership(g1, {1.2, 0.9}, 1e-6), ErrorCode::OutOfRange);
  // The axis terminal is excluded.
  EXPECT_ERROR_CODE(curve_membership(g1, g1.terminal_point, 1e-6), ErrorCode::OutOfRange);
  const Curve g2 = gamma(s, CurveLabel::Gamma2);
  EXPECT_ERROR_CODE(curve_membership(g2, {1.1, 0.5}, 1e-6), ErrorCode::OutOfRange);
}

TEST(CurveMembership, SecondaryLookup) {
  const Curve g1 = gamma(canon::system(1.0), CurveLabel::Gamma1);
  const PhasePoint p = g1.samples[g1.samples.size() / 2];
  const auto u = curve_value_secondary(g1, p.theta);
  ASSERT_TRUE(u.has_value());
  EXPECT_NEAR(*u, p.u, 1e-12);
  EXPECT_FALSE(curve_value_secondary(g1, 5.0).has_value());
}
