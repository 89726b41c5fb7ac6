#include <gtest/gtest.h>

#include <cmath>
#include <thread>
#include <vector>

#include "blayer/existence_engine.hpp"
#include "canonical.hpp"
#include "expect_error.hpp"

using namespace blayer;

namespace {

const Curve& curve_of(const ExistenceEngine& eng, double up, CurveLabel label) {
  static thread_local std::shared_ptr<const std::vector<Curve>> keep;
  keep = eng.curves(canon::gas(), canon::far(up));
  for (const Curve& c : *keep)
    if (c.label == label) return c;
  throw std::logic_error("curve not traced");
}

PhasePoint sample_at(const Curve& c, double fraction) {
  return c.samples[static_cast<std::size_t>(fraction * static_cast<double>(c.samples.size() - 1))];
}

void expect_profile_shape(const Profile& p, const Query& q, double sign_u) {
  ASSERT_GE(p.xi.size(), 2u);
  EXPECT_EQ(p.xi.front(), 0.0);
  for (std::size_t i = 1; i < p.xi.size(); ++i) ASSERT_GT(p.xi[i], p.xi[i - 1]);
  const double ratio = q.right.v() / q.right.u();
  for (std::size_t i = 0; i < p.xi.size(); ++i) {
    EXPECT_NEAR(p.V[i], ratio * p.U[i], 1e-12 * std::abs(p.V[i]));
    EXPECT_GT(p.U[i], 0.0);
    EXPECT_GT(p.Theta[i], 0.0);
  }
  EXPECT_NEAR(p.U.front(), q.left.u(), 10 * q.tol.tol_member * q.right.u());
  EXPECT_NEAR(p.Theta.front(), q.left.theta(), 10 * q.tol.tol_member * q.right.theta());
  EXPECT_NEAR(p.U.back(), q.right.u(), 1e-8);
  EXPECT_NEAR(p.Theta.back(), q.right.theta(), 1e-8);
  for (std::size_t i = 1; i < p.xi.size(); ++i) {
    ASSERT_GT(sign_u * (p.U[i] - p.U[i - 1]), 0.0) << i;
    ASSERT_GT(sign_u * (p.V[i] - p.V[i - 1]), 0.0) << i;
    ASSERT_LT(sign_u * (p.Theta[i] - p.Theta[i - 1]), 0.0) << i;
  }
  EXPECT_TRUE(p.metrics.monotone_ok);
  EXPECT_LE(p.metrics.residual_sup, 1e-8);
}

}  // namespace

TEST(Decide, TrivialLayer) {
  const Query q{canon::far(1.0), canon::far(1.0), canon::gas()};
  const Verdict v = decide(q);
  EXPECT_TRUE(v.exists());
  EXPECT_TRUE(v.trivial);
  EXPECT_EQ(v.regime.tag, RegimeKind::Subsonic);
  const Profile p = compute_profile(q, v);
  EXPECT_TRUE(p.trivial());
  EXPECT_EQ(verify_residual(p, canon::system(1.0)), 0.0);
  EXPECT_EQ(verify_decay(p, canon::system(1.0)).kind, DecayKind::NotApplicable);
  // Also for supersonic and sonic far fields.
  for (double up : {2.0, canon::kSonicU}) EXPECT_TRUE(decide({canon::far(up), canon::far(up), canon::gas()}).trivial);
}

TEST(Decide, Gamma1RoundTrip) {
  ExistenceEngine eng;
  const Curve& g1 = curve_of(eng, 1.0, CurveLabel::Gamma1);
  const Query q = canon::query_at(sample_at(g1, 0.5), 1.0);
  const Verdict v = eng.decide(q);
  ASSERT_TRUE(v.exists());
  EXPECT_EQ(v.regime.tag, RegimeKind::Subsonic);
  EXPECT_EQ(v.curve, CurveLabel::Gamma1);
  EXPECT_FALSE(v.trivial);
  const Profile p = compute_profile(q, v);
  expect_profile_shape(p, q, +1.0);
  EXPECT_EQ(p.metrics.decay.kind, DecayKind::Exponential);
  EXPECT_NEAR(p.metrics.decay.fitted, -frozen::kSubLambda2, 0.05 * -frozen::kSubLambda2);
  EXPECT_TRUE(p.metrics.decay.ok());
}

TEST(Decide, Gamma2RoundTrip) {
  ExistenceEngine eng;
  const Curve& g2 = curve_of(eng, 1.0, CurveLabel::Gamma2);
  const Query q = canon::query_at(sample_at(g2, 0.7), 1.0);
  const Verdict v = eng.decide(q);
  ASSERT_TRUE(v.exists());
  EXPECT_EQ(v.curve, CurveLabel::Gamma2);
  const Profile p = compute_profile(q, v);
  expect_profile_shape(p, q, -1.0);
  EXPECT_TRUE(p.metrics.decay.ok());
}

TEST(Decide, SubcaseBRoundTrips) {
  ExistenceEngine eng;
  for (CurveLabel label : {CurveLabel::Gamma1, CurveLabel::Gamma2}) {
    const Curve& c = curve_of(eng, 0.3, label);
    for (double f : {0.1, 0.5, 0.95}) {
      const Query q = canon::query_at(sample_at(c, f), 0.3);
      const Verdict v = eng.decide(q);
      ASSERT_TRUE(v.exists()) << to_string(label) << " " << f;
      EXPECT_EQ(v.curve, label);
      expect_profile_shape(compute_profile(q, v), q, label == CurveLabel::Gamma1 ? 1.0 : -1.0);
    }
  }
}

TEST(Decide, SigmaRoundTrip) {
  ExistenceEngine eng;
  const Curve& sig = curve_of(eng, canon::kSonicU, CurveLabel::Sigma);
  const Query q = canon::query_at(sample_at(sig, 0.5), canon::kSonicU);
  const Verdict v = eng.decide(q);
  ASSERT_TRUE(v.exists());
  EXPECT_EQ(v.regime.tag, RegimeKind::Transonic);
  EXPECT_EQ(v.curve, CurveLabel::Sigma);
  const Profile p = compute_profile(q, v);
  expect_profile_shape(p, q, +1.0);
  const DecayReport& d = p.metrics.decay;
  EXPECT_EQ(d.kind, DecayKind::Algebraic);
  EXPECT_NEAR(d.fitted, -1.0, 0.1);
  EXPECT_NEAR(d.derivative_fitted, -2.0, 0.2);
  EXPECT_NEAR(d.product_expected, frozen::kTransInvA2, 1e-12);
  EXPECT_GE(d.product_min, 0.9 * frozen::kTransInvA2);
  EXPECT_LE(d.product_max, 1.1 * frozen::kTransInvA2);
  EXPECT_TRUE(d.ok());
}

TEST(Decide, PerturbedIsOffCurve) {
  ExistenceEngine eng;
  const Curve& g1 = curve_of(eng, 1.0, CurveLabel::Gamma1);
  const PhasePoint p = sample_at(g1, 0.5);
  const Verdict v = eng.decide(canon::query_at({p.u, p.theta * 1.05}, 1.0));
  EXPECT_FALSE(v.exists());
  EXPECT_EQ(v.reason, Reason::OffCurve);
  EXPECT_EQ(v.curve, CurveLabel::Gamma1);
  ASSERT_TRUE(v.distance.has_value());
  EXPECT_NEAR(*v.distance, 0.05 * p.theta, 1e-9);
}

TEST(Decide, OffCurveDistanceGrowsWithPerturbation) {
  ExistenceEngine eng;
  const PhasePoint p = sample_at(curve_of(eng, 1.0, CurveLabel::Gamma1), 0.3);
  double prev = 0.0;
  for (double d : {1e-4, 1e-3, 1e-2}) {
    const Verdict v = eng.decide(canon::query_at({p.u, p.theta + d}, 1.0));
    ASSERT_EQ(v.reason, Reason::OffCurve);
    EXPECT_GT(std::abs(*v.distance), prev);
    prev = std::abs(*v.distance);
  }
}

TEST(Decide, OutsideCurveRange) {
  const Verdict v = decide(canon::query_at({3.0, 3.0}, 1.0));
  EXPECT_FALSE(v.exists());
  EXPECT_EQ(v.reason, Reason::OutsideCurveRange);
  // Points just inside the axis still belong to Gamma1.
  ExistenceEngine eng;
  const Curve& g1 = curve_of(eng, 1.0, CurveLabel::Gamma1);
  EXPECT_TRUE(eng.decide(canon::query_at({1e-9, g1.terminal_point.theta}, 1.0)).exists());
}

TEST(Decide, Supersonic) {
  for (PhasePoint p : {PhasePoint{1.0, 1.0}, PhasePoint{0.5, 2.0}, PhasePoint{3.0, 0.1}}) {
    const Verdict v = decide(canon::query_at(p, 2.0));
    EXPECT_FALSE(v.exists());
    EXPECT_EQ(v.reason, Reason::Supersonic);
    EXPECT_EQ(v.regime.tag, RegimeKind::Supersonic);
  }
}

TEST(Decide, MassFluxMismatch) {
  const Query q{EndState(1.0, 0.5, 1.2), canon::far(1.0), canon::gas()};
  const Verdict v = decide(q);
  EXPECT_FALSE(v.exists());
  EXPECT_EQ(v.reason, Reason::MassFluxMismatch);
  ASSERT_TRUE(v.flux_gap.has_value());
  EXPECT_NEAR(*v.flux_gap, 0.5, 1e-15);
}

TEST(Decide, NonpositiveFarFieldVelocity) {
  for (double up : {0.0, -1.0}) {
    const Verdict v = decide({EndState(1.0, 0.5, 1.0), EndState(1.0, up, 1.0), canon::gas()});
    EXPECT_FALSE(v.exists());
    EXPECT_EQ(v.reason, Reason::NonpositiveUPlus);
  }
}

TEST(Decide, RejectsOutflowBoundary) {
  EXPECT_ERROR_CODE(decide({EndState(1.0, -0.5, 1.0), canon::far(1.0), canon::gas()}), ErrorCode::InvalidBoundary);
  EXPECT_ERROR_CODE(decide({EndState(1.0, 0.0, 1.0), canon::far(1.0), canon::gas()}), ErrorCode::InvalidBoundary);
}

TEST(Decide, DependsOnLeftVolumeOnlyThroughFlux) {
  ExistenceEngine eng;
  const PhasePoint p = sample_at(curve_of(eng, 1.0, CurveLabel::Gamma1), 0.4);
  const Verdict a = eng.decide({EndState(p.u * 1.0 / 1.0, p.u, p.theta), canon::far(1.0), canon::gas()});
  const Verdict b = eng.decide({EndState(p.u / (1.0 / 1.0), p.u, p.theta), canon::far(1.0), canon::gas()});
  EXPECT_EQ(a.outcome, b.outcome);
  EXPECT_EQ(a.curve, b.curve);
  EXPECT_EQ(a.parameter, b.parameter);
  EXPECT_EQ(a.distance, b.distance);
}

TEST(Decide, DeterministicAndThreadSafe) {
  ExistenceEngine eng;
  const Curve& g1 = curve_of(eng, 1.0, CurveLabel::Gamma1);
  std::vector<Query> qs;
  for (double f : {0.1, 0.3, 0.6, 0.9}) {
    const PhasePoint p = sample_at(g1, f);
    qs.push_back(canon::query_at(p, 1.0));
    qs.push_back(canon::query_at({p.u, p.theta + 1e-3}, 1.0));
  }
  std::vector<Verdict> serial;
  for (const Query& q : qs) serial.push_back(eng.decide(q));

  ExistenceEngine fresh;
  std::vector<std::vector<Verdict>> par(4);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < par.size(); ++t)
    pool.emplace_back([&, t] {
      for (const Query& q : qs) par[t].push_back(fresh.decide(q));
    });
  for (auto& th : pool) th.join();
  for (const auto& run : par) {
    ASSERT_EQ(run.size(), serial.size());
    for (std::size_t i = 0; i < run.size(); ++i) {
      EXPECT_EQ(run[i].outcome, serial[i].outcome);
      EXPECT_EQ(run[i].reason, serial[i].reason);
      EXPECT_EQ(run[i].distance, serial[i].distance);
    }
  }
  EXPECT_EQ(fresh.curves(canon::gas(), canon::far(1.0)).get(), fresh.curves(canon::gas(), canon::far(1.0)).get());
}

TEST(ComputeProfile, Errors) {
  const Query off = canon::query_at({0.5, 3.0}, 1.0);
  const Verdict no = decide(off);
  EXPECT_ERROR_CODE(compute_profile(off, no), ErrorCode::InvalidParameter);
  // A forged verdict for a point well off the curve cannot be shot.
  Verdict forged;
  forged.outcome = Outcome::Exists;
  forged.curve = CurveLabel::Gamma1;
  forged.regime = no.regime;
  ExistenceEngine eng;
  const PhasePoint p = sample_at(curve_of(eng, 1.0, CurveLabel::Gamma1), 0.5);
  EXPECT_ERROR_CODE(compute_profile(canon::query_at({p.u, p.theta + 1e-3}, 1.0), forged), ErrorCode::ProfileDiverged);
}

TEST(VerifyResidual, DetectsCorruption) {
  ExistenceEngine eng;
  const Query q = canon::query_at(sample_at(curve_of(eng, 1.0, CurveLabel::Gamma1), 0.5), 1.0);
  Profile p = compute_profile(q, eng.decide(q));
  const SystemData s = canon::system(1.0);
  EXPECT_LE(verify_residual(p, s), 1e-8);
  for (double& t : p.Theta) t *= 1.01;
  EXPECT_GT(verify_residual(p, s), 1e-3);
}

TEST(VerifyMonotone, DetectsReversal) {
  ExistenceEngine eng;
  const Query q = canon::query_at(sample_at(curve_of(eng, 1.0, CurveLabel::Gamma1), 0.5), 1.0);
  Profile p = compute_profile(q, eng.decide(q));
  EXPECT_TRUE(verify_monotone(p));
  std::swap(p.U[3], p.U[4]);
  EXPECT_FALSE(verify_monotone(p));
}

TEST(VerifyDecay, TailTooShort) {
  ExistenceEngine eng;
  const Query q = canon::query_at(sample_at(curve_of(eng, 1.0, CurveLabel::Gamma1), 0.5), 1.0);
  Profile p = compute_profile(q, eng.decide(q));
  const std::size_t keep = 20;
  for (auto* v : {&p.xi, &p.V, &p.U, &p.Theta, &p.dU, &p.dTheta}) v->resize(keep);
  EXPECT_ERROR_CODE(verify_decay(p, canon::system(1.0)), ErrorCode::TailTooShort);
}

TEST(Decide, EveryStoredSampleRoundTrips) {
  ExistenceEngine eng;
  for (double up : {1.0, canon::kSonicU, 0.3}) {
    for (const Curve& c : *eng.curves(canon::gas(), canon::far(up))) {
      for (std::size_t i = 0; i + 1 < c.samples.size(); i += 37) {
        const Verdict v = eng.decide(canon::query_at(c.samples[i], up));
        ASSERT_TRUE(v.exists()) << up << " " << to_string(c.label) << " " << i;
        if (i > 0) EXPECT_EQ(v.curve, c.label);
      }
    }
  }
}
