#include "blayer/existence_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "blayer/error.hpp"
#include "blayer/integrator.hpp"
#include "blayer/linearization.hpp"

namespace blayer {

std::string_view to_string(Outcome o) { return o == Outcome::Exists ? "Exists" : "NotExists"; }

std::string_view to_string(Reason r) {
  switch (r) {
    case Reason::None: return "None";
    case Reason::MassFluxMismatch: return "MassFluxMismatch";
    case Reason::NonpositiveUPlus: return "NonpositiveUPlus";
    case Reason::Supersonic: return "Supersonic";
    case Reason::OffCurve: return "OffCurve";
    case Reason::OutsideCurveRange: return "OutsideCurveRange";
  }
  return "Unknown";
}

std::string_view to_string(DecayKind k) {
  switch (k) {
    case DecayKind::NotApplicable: return "NotApplicable";
    case DecayKind::Exponential: return "Exponential";
    case DecayKind::Algebraic: return "Algebraic";
  }
  return "Unknown";
}

bool DecayReport::ok() const {
  switch (kind) {
    case DecayKind::NotApplicable: return true;
    case DecayKind::Exponential: return rate_ok && derivative_ok;
    case DecayKind::Algebraic: return rate_ok && derivative_ok && product_ok;
  }
  return false;
}

ExistenceEngine::ExistenceEngine(TraceOptions opts) : opts_(opts) {}

std::shared_ptr<const std::vector<Curve>> ExistenceEngine::curves(const GasParams& gas, const EndState& right,
                                                                  double tol_M) const {
  const Key key{gas.gamma(), gas.R(), gas.mu(), gas.kappa(), right.v(), right.u(), right.theta(), tol_M};
  // Tracing happens under the lock: a single writer fills each entry once.
  std::lock_guard lock(mutex_);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  TraceOptions opts = opts_;
  opts.tol_M = tol_M;
  auto traced = std::make_shared<const std::vector<Curve>>(trace_all(build_system(gas, right), opts));
  cache_.emplace(key, traced);
  return traced;
}

namespace {

bool same_state(double a, double b) {
  return std::abs(a - b) <= 64.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b));
}

struct Candidate {
  CurveLabel label;
  std::optional<double> parameter;
  double distance;  ///< raw units
  double normalized;
};

}  // namespace

Verdict ExistenceEngine::decide(const Query& q) const {
  const EndState& L = q.left;
  const EndState& Rt = q.right;
  if (!(L.u() > 0.0))
    throw Error(ErrorCode::InvalidBoundary, "u- = " + std::to_string(L.u()) + " is not an inflow boundary (need u- > 0)");

  Verdict v;
  v.regime = classify_regime(mach(Rt, q.gas), q.tol.tol_M);
  if (!(Rt.u() > 0.0)) {
    v.reason = Reason::NonpositiveUPlus;
    return v;
  }
  const FluxCheck flux = check_flux_condition(L, Rt, q.tol.tol_A);
  v.flux_gap = flux.gap;
  if (!flux.ok) {
    v.reason = Reason::MassFluxMismatch;
    return v;
  }
  if (same_state(L.u(), Rt.u()) && same_state(L.theta(), Rt.theta())) {
    v.outcome = Outcome::Exists;
    v.trivial = true;
    v.distance = 0.0;
    return v;
  }
  if (v.regime.tag == RegimeKind::Supersonic) {
    v.reason = Reason::Supersonic;
    return v;
  }

  const auto traced = curves(q.gas, Rt, q.tol.tol_M);
  const PhasePoint p{L.u(), L.theta()};
  std::optional<Candidate> nearest;
  auto consider = [&](Candidate c) {
    if (!nearest || c.normalized < nearest->normalized) nearest = c;
  };
  for (const Curve& c : *traced) {
    const double u_unit = c.system.u_plus, t_unit = c.system.theta_plus;
    try {
      const Membership m = curve_membership(c, p, q.tol.tol_member);
      if (m.on_curve) {
        v.outcome = Outcome::Exists;
        v.curve = c.label;
        v.parameter = m.parameter;
        v.distance = m.distance;
        return v;
      }
      consider({c.label, m.parameter, m.distance, std::abs(m.distance) / (c.by_u() ? t_unit : u_unit)});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::OutOfRange) throw;
      // Measure along the other coordinate when the primary one is out of span.
      const double secondary = c.by_u() ? p.theta : p.u;
      if (auto value = curve_value_secondary(c, secondary)) {
        const double d = (c.by_u() ? p.u : p.theta) - *value;
        consider({c.label, std::nullopt, d, std::abs(d) / (c.by_u() ? u_unit : t_unit)});
      }
    }
  }
  if (nearest) {
    v.reason = Reason::OffCurve;
    v.curve = nearest->label;
    v.parameter = nearest->parameter;
    v.distance = nearest->distance;
  } else {
    v.reason = Reason::OutsideCurveRange;
  }
  return v;
}

Verdict decide(const Query& q) { return ExistenceEngine{}.decide(q); }

namespace {

constexpr double kSeedFraction = 1e-10;
constexpr double kHandoff = 1e-3;

IntegrationSettings profile_settings() {
  IntegrationSettings st;
  st.rel_tol = 1e-11;
  st.abs_tol = 1e-16;
  st.direction = Direction::Backward;
  return st;
}

struct Shot {
  std::vector<double> xi;  ///< backward-time samples; forward xi from the boundary hit once shifted
  std::vector<PhasePoint> point;
  std::vector<PhasePoint> velocity;
  PhasePoint hit;
};

[[noreturn]] void diverged(const std::string& why) {
  throw Error(ErrorCode::ProfileDiverged, why + "; tighten tol_member or the integration tolerances");
}

// Planar backward shot in increments from d0 until the target level.
void shoot_planar(const SystemData& s, PhasePoint d0, const EventSpec& target, bool region_one, Shot& out) {
  const PhasePoint s1 = s.s1();
  std::vector<EventSpec> events{target};
  events.push_back(left_region([s, s1, region_one](const PhasePoint& d) {
    return region_margin(s1 + d, region_one ? Region::I : Region::II, s);
  }));
  if (!region_one) events.push_back(near_equilibrium(s.s2() - s1, 1e-8 * s.scale()));
  const Trajectory tr =
      integrate([&s](const PhasePoint& d) { return rhs_increment(d, s); }, d0, profile_settings(), events);
  if (tr.event.kind != EventKind::Level)
    diverged("profile shot ended with " + std::string(to_string(tr.event.kind)) + " before reaching the boundary state");
  // The first sample repeats the end of the previous segment.
  for (std::size_t i = out.xi.empty() ? 0 : 1; i < tr.samples.size(); ++i) {
    out.xi.push_back(tr.samples[i].xi);
    out.point.push_back(s1 + tr.samples[i].point);
    out.velocity.push_back(tr.samples[i].velocity);
  }
  out.hit = s1 + tr.event.point;
}

// Shifts segment-local backward times [begin, end) so the last sample of the shot is xi = 0.
void shift(Shot& shot, std::size_t begin, std::size_t end, double by) {
  for (std::size_t i = begin; i < end; ++i) shot.xi[i] -= by;
}

Shot shoot_saddle(const SystemData& s, CurveLabel label, PhasePoint target, double tol_M) {
  const EigenPair eig = eigen_2x2(s.A);
  (void)tol_M;
  const double side = label == CurveLabel::Gamma1 ? -1.0 : 1.0;
  const PhasePoint d0 = (side * kSeedFraction * s.scale()) * eig.e2;
  const PhasePoint goal = target - s.s1();
  const EventSpec level = label == CurveLabel::Gamma1
                              ? level_crossing([goal](const PhasePoint& d) { return d.u - goal.u; })
                              : level_crossing([goal](const PhasePoint& d) { return d.theta - goal.theta; });
  Shot shot;
  shoot_planar(s, d0, level, label == CurveLabel::Gamma1, shot);
  shift(shot, 0, shot.xi.size(), shot.xi.back());
  return shot;
}

Shot shoot_sonic(const SystemData& s, PhasePoint target, double tol_M) {
  const TransonicFrame frame = transonic_frame(s, tol_M);
  const LemmaSystem lemma = w_system(frame, s);
  const double goal_u = target.u - s.u_plus;
  const double w_handoff = kHandoff * s.u_plus;
  const double w_seed = kSeedFraction * s.scale();

  // Reduced center dynamics with events at the boundary value and the handoff radius.
  const EventSpec events[] = {
      level_crossing([&](const PhasePoint& w) { return w.u + center_manifold(lemma, w.u).y - goal_u; }),
      level_crossing([w_handoff](const PhasePoint& w) { return w.u + w_handoff; })};
  IntegrationSettings st = profile_settings();
  st.abs_tol = 1e-6 * st.rel_tol * w_seed;
  st.h_init = 1e-2 / (frame.a2 * w_seed);  // about a 1% change of W1
  const Trajectory slow = integrate(
      [&](const PhasePoint& w) { return PhasePoint{center_manifold(lemma, w.u).rate, 0.0}; }, {-w_seed, 0.0}, st,
      events);
  if (slow.event.kind != EventKind::Level) diverged("sonic tail did not reach the handoff radius");

  Shot shot;
  const double P21 = frame.P.a21, P22 = frame.P.a22;
  for (const Sample& smp : slow.samples) {
    const CenterManifoldPoint cm = center_manifold(lemma, smp.point.u);
    shot.xi.push_back(smp.xi);
    shot.point.push_back(from_w({smp.point.u, cm.y}, frame, s));
    shot.velocity.push_back({(1.0 + cm.slope) * cm.rate, (P21 + P22 * cm.slope) * cm.rate});
  }
  shot.hit = shot.point.back();
  const std::size_t reduced = shot.xi.size();
  if (slow.event.index == 0) {
    shift(shot, 0, reduced, shot.xi.back());
    return shot;
  }
  // Both segments keep their own clocks so the planar part is not rounded
  // against the very long reduced one.
  const EventSpec level = level_crossing([goal_u](const PhasePoint& d) { return d.u - goal_u; });
  shoot_planar(s, shot.point.back() - s.s1(), level, true, shot);
  const double planar_end = shot.xi.back();
  shift(shot, 0, reduced, slow.event.xi + planar_end);
  shift(shot, reduced, shot.xi.size(), planar_end);
  return shot;
}

double scaled_gap(PhasePoint a, PhasePoint b, const SystemData& s) {
  return std::max(std::abs(a.u - b.u) / s.u_plus, std::abs(a.theta - b.theta) / s.theta_plus);
}

}  // namespace

Profile compute_profile(const Query& q, const Verdict& verdict) {
  if (!verdict.exists()) throw Error(ErrorCode::InvalidParameter, "no profile for a NotExists verdict");
  const double ratio = q.right.v() / q.right.u();
  Profile prof;
  if (verdict.trivial) {
    prof.xi = {0.0};
    prof.U = {q.right.u()};
    prof.V = {ratio * q.right.u()};
    prof.Theta = {q.right.theta()};
    prof.dU = {0.0};
    prof.dTheta = {0.0};
    return prof;
  }
  if (!verdict.curve) throw Error(ErrorCode::InvalidParameter, "verdict names no curve");

  const SystemData s = build_system(q.gas, q.right);
  const PhasePoint target{q.left.u(), q.left.theta()};
  const Shot shot = *verdict.curve == CurveLabel::Sigma ? shoot_sonic(s, target, q.tol.tol_M)
                                                        : shoot_saddle(s, *verdict.curve, target, q.tol.tol_M);
  prof.curve = verdict.curve;
  prof.start_gap = scaled_gap(shot.hit, target, s);
  if (prof.start_gap > 10.0 * q.tol.tol_member)
    diverged("profile starts " + std::to_string(prof.start_gap) + " (scaled) away from the boundary state");

  // Reverse the backward shot; the boundary hit is the last sample.
  const std::size_t n = shot.xi.size();
  prof.xi.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = n - 1 - k;
    prof.xi.push_back(shot.xi[i]);
    prof.U.push_back(shot.point[i].u);
    prof.V.push_back(ratio * shot.point[i].u);
    prof.Theta.push_back(shot.point[i].theta);
    prof.dU.push_back(shot.velocity[i].u);
    prof.dTheta.push_back(shot.velocity[i].theta);
  }
  prof.xi.front() = 0.0;

  prof.metrics.monotone_ok = verify_monotone(prof);
  prof.metrics.residual_sup = verify_residual(prof, s);
  prof.metrics.decay = verify_decay(prof, s, q.tol.tol_M);
  return prof;
}

bool verify_monotone(const Profile& p) {
  if (p.trivial()) return true;
  const double su = *p.curve == CurveLabel::Gamma2 ? -1.0 : 1.0;  // sign of U' and V'; Theta' has the opposite
  for (std::size_t i = 0; i < p.xi.size(); ++i) {
    if (!(p.U[i] > 0.0 && p.Theta[i] > 0.0 && p.V[i] > 0.0)) return false;
    if (!(su * p.dU[i] > 0.0 && su * p.dTheta[i] < 0.0)) return false;
    if (i == 0) continue;
    if (!(p.xi[i] > p.xi[i - 1])) return false;
    if (!(su * (p.U[i] - p.U[i - 1]) > 0.0 && su * (p.V[i] - p.V[i - 1]) > 0.0 &&
          su * (p.Theta[i] - p.Theta[i - 1]) < 0.0))
      return false;
  }
  return true;
}

double verify_residual(const Profile& p, const SystemData& s) {
  if (p.trivial()) return 0.0;
  const double R = s.gas.R(), g = s.gas.gamma(), mu = s.gas.mu(), kappa = s.gas.kappa();
  const double sig = s.sigma_minus, up = s.u_plus, tp = s.theta_plus, vp = s.v_plus;
  const double scale = std::max(std::abs(sig) * up, s.p_plus * up);
  double sup = 0.0;
  for (std::size_t i = 0; i < p.xi.size(); ++i) {
    const double V = p.V[i], U = p.U[i], T = p.Theta[i];
    const double r1 = mu * p.dU[i] / V - (-sig * (U - up) + R * (T / V - tp / vp));
    const double r2 = kappa * p.dTheta[i] / V -
                      (-sig * R / (g - 1.0) * (T - tp) + s.p_plus * (U - up) + 0.5 * sig * (U - up) * (U - up));
    sup = std::max({sup, std::abs(r1) / scale, std::abs(r2) / scale});
  }
  return sup;
}

namespace {

struct LineFit {
  double slope;
  double intercept;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

constexpr std::size_t kMinTail = 50;

void require_tail(std::size_t n, std::string_view what) {
  if (n < kMinTail)
    throw Error(ErrorCode::TailTooShort, std::string(what) + ": " + std::to_string(n) + " tail samples, need " +
                                             std::to_string(kMinTail));
}

}  // namespace

DecayReport verify_decay(const Profile& p, const SystemData& s, double tol_M) {
  DecayReport rep;
  if (p.trivial()) return rep;
  const double up = s.u_plus;
  const RegimeKind regime = classify_regime(s.mach_plus, tol_M).tag;

  if (regime == RegimeKind::Subsonic) {
    rep.kind = DecayKind::Exponential;
    rep.expected = -eigen_2x2(s.A).lambda2;
    rep.derivative_expected = rep.expected;
    std::vector<double> x, y, dy;
    for (std::size_t i = 0; i < p.xi.size(); ++i) {
      const double gap = std::abs(p.U[i] - up);
      if (gap >= 1e-8 * up && gap <= 1e-3 * up) {
        x.push_back(p.xi[i]);
        y.push_back(std::log(gap));
        dy.push_back(std::log(std::abs(p.dU[i])));
      }
    }
    rep.tail_samples = x.size();
    require_tail(x.size(), "exponential tail");
    const LineFit f = least_squares(x, y);
    rep.fitted = -f.slope;
    rep.C = std::exp(f.intercept);
    rep.derivative_fitted = -least_squares(x, dy).slope;
    rep.rate_ok = std::abs(rep.fitted - rep.expected) <= 0.05 * rep.expected;
    rep.derivative_ok = std::abs(rep.derivative_fitted - rep.expected) <= 0.05 * rep.expected;
    return rep;
  }
  if (regime != RegimeKind::Transonic) throw Error(ErrorCode::WrongRegime, "no layer decays to a supersonic far field");

  rep.kind = DecayKind::Algebraic;
  rep.expected = -1.0;
  rep.derivative_expected = -2.0;
  const double a2 = transonic_frame(s, tol_M).a2;
  rep.product_expected = 1.0 / a2;
  std::vector<double> x, y, dy;
  rep.product_min = std::numeric_limits<double>::infinity();
  rep.product_max = -rep.product_min;
  for (std::size_t i = 0; i < p.xi.size(); ++i) {
    const double gap = up - p.U[i];
    if (!(gap > 0.0 && gap <= 1e-4 * up && p.xi[i] > 0.0)) continue;
    x.push_back(std::log(p.xi[i]));
    y.push_back(std::log(gap));
    dy.push_back(std::log(std::abs(p.dU[i])));
    if (gap <= 1e-5 * up) {
      rep.product_min = std::min(rep.product_min, p.xi[i] * gap);
      rep.product_max = std::max(rep.product_max, p.xi[i] * gap);
    }
  }
  rep.tail_samples = x.size();
  require_tail(x.size(), "algebraic tail");
  const LineFit f = least_squares(x, y);
  rep.fitted = f.slope;
  rep.C = std::exp(f.intercept);
  rep.derivative_fitted = least_squares(x, dy).slope;
  rep.rate_ok = std::abs(rep.fitted + 1.0) <= 0.1;
  rep.derivative_ok = std::abs(rep.derivative_fitted + 2.0) <= 0.2;
  rep.product_ok = std::abs(rep.product_min - rep.product_expected) <= 0.1 * rep.product_expected &&
                   std::abs(rep.product_max - rep.product_expected) <= 0.1 * rep.product_expected;
  return rep;
}

}  // namespace blayer
