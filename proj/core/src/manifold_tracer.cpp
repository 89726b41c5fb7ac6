#include "blayer/manifold_tracer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "blayer/error.hpp"

namespace blayer {

std::string_view to_string(CurveLabel label) {
  switch (label) {
    case CurveLabel::Sigma: return "Sigma";
    case CurveLabel::Gamma1: return "Gamma1";
    case CurveLabel::Gamma2: return "Gamma2";
  }
  return "Unknown";
}

std::string_view to_string(TerminalKind kind) {
  switch (kind) {
    case TerminalKind::HitUAxis: return "HitUAxis";
    case TerminalKind::HitThetaAxis: return "HitThetaAxis";
    case TerminalKind::ConvergedToS2: return "ConvergedToS2";
    case TerminalKind::Budget: return "Budget";
  }
  return "Unknown";
}

namespace {

// Collects curve samples from dense steps, keeping adjacent samples between
// min_spacing and max_spacing apart.
class Recorder {
 public:
  Recorder(Curve& curve, const TraceOptions& opts) : c_(curve), opts_(opts) {}

  double gap(PhasePoint a, PhasePoint b) const {
    const auto& s = c_.system;
    return std::max(std::abs(a.u - b.u) / s.u_plus, std::abs(a.theta - b.theta) / s.theta_plus);
  }

  void push(PhasePoint p, double elapsed) {
    c_.samples.push_back(p);
    c_.elapsed.push_back(elapsed);
  }

  /// Records the dense step; to_point maps integrator state to the phase plane.
  void step(const DenseStep& d, const std::function<PhasePoint(PhasePoint)>& to_point) {
    const PhasePoint end = to_point(d(d.xi_end()));
    const double g = gap(c_.samples.back(), end);
    if (g < opts_.min_spacing) return;
    // Equal xi pieces, doubled until no piece is wider than max_spacing.
    int pieces = static_cast<int>(std::ceil(g / opts_.max_spacing));
    std::vector<std::pair<double, PhasePoint>> pts;
    for (int round = 0; round < 20; ++round, pieces *= 2) {
      pts.clear();
      PhasePoint prev = c_.samples.back();
      bool fits = true;
      for (int k = 1; k <= pieces; ++k) {
        const double xi = k == pieces ? d.xi_end() : d.xi_begin() + (d.xi_end() - d.xi_begin()) * k / pieces;
        const PhasePoint p = k == pieces ? end : to_point(d(xi));
        fits = fits && gap(prev, p) <= opts_.max_spacing;
        pts.emplace_back(xi, p);
        prev = p;
      }
      if (fits) break;
    }
    for (const auto& [xi, p] : pts) push(p, base_ - xi);
  }

  /// Elapsed backward xi at integrator time zero.
  void set_base(double elapsed) { base_ = elapsed; }

  void finish(PhasePoint terminal, double elapsed) {
    // Keep S1 and the seed; otherwise drop a last sample crowding the terminal point.
    if (c_.samples.size() > 2 && gap(c_.samples.back(), terminal) < opts_.min_spacing) {
      c_.samples.pop_back();
      c_.elapsed.pop_back();
    }
    if (!(c_.samples.back() == terminal)) push(terminal, elapsed);
  }

 private:
  Curve& c_;
  const TraceOptions& opts_;
  double base_ = 0.0;
};

IntegrationSettings backward(const TraceOptions& opts) {
  IntegrationSettings st = opts.integration;
  st.direction = Direction::Backward;
  st.record = false;
  return st;
}

double seed_offset(const SystemData& s, const TraceOptions& opts) {
  return opts.seed_offset > 0.0 ? opts.seed_offset : 1e-6 * s.scale();
}

double capture_radius(const SystemData& s, const TraceOptions& opts) {
  return opts.capture_radius > 0.0 ? opts.capture_radius : 1e-8 * s.scale();
}

// Planar backward shot in increment coordinates d = p - S1.
Event shoot(const SystemData& s, PhasePoint start, double elapsed0, std::vector<EventSpec> events,
            const TraceOptions& opts, Recorder& rec) {
  const PhasePoint s1 = s.s1();
  auto to_point = [s1](PhasePoint d) { return s1 + d; };
  Field field = [s](const PhasePoint& d) { return rhs_increment(d, s); };
  // Restart the clock so event bisection stays accurate after a long reduced phase.
  rec.set_base(elapsed0);
  const Trajectory tr = integrate(field, start - s1, backward(opts), events,
                                  [&](const DenseStep& d) { rec.step(d, to_point); });
  Event ev = tr.event;
  ev.point = s1 + ev.point;
  ev.xi -= elapsed0;
  return ev;
}

EventSpec region_exit(const SystemData& s, Region region) {
  const PhasePoint s1 = s.s1();
  return left_region([s, s1, region](const PhasePoint& d) { return region_margin(s1 + d, region, s); });
}

TerminalKind terminal_of(const Event& ev, const Curve& c) {
  switch (ev.kind) {
    case EventKind::UCrossesZero: return TerminalKind::HitUAxis;
    case EventKind::ThetaCrossesZero: return TerminalKind::HitThetaAxis;
    case EventKind::NearEquilibrium: return TerminalKind::ConvergedToS2;
    case EventKind::Budget: return TerminalKind::Budget;
    case EventKind::LeftRegion:
      throw Error(ErrorCode::TraceFailed, std::string(to_string(c.label)) + " left its region at (u, theta) = (" +
                                              std::to_string(ev.point.u) + ", " + std::to_string(ev.point.theta) +
                                              "); tighten the integration tolerances");
    case EventKind::Level: break;
  }
  throw Error(ErrorCode::TraceFailed, "unexpected event while tracing");
}

}  // namespace

Curve trace_sigma(const SystemData& s, const TransonicFrame& frame, const TraceOptions& opts) {
  if (classify_regime(s.mach_plus, opts.tol_M).tag != RegimeKind::Transonic)
    throw Error(ErrorCode::WrongRegime, "Sigma exists only for a sonic far field");
  const double eps = seed_offset(s, opts);
  const double w_handoff = opts.handoff * s.u_plus;
  if (!(eps < w_handoff)) throw Error(ErrorCode::InvalidParameter, "seed offset must be below the handoff radius");

  Curve c{CurveLabel::Sigma, {}, {}, TerminalKind::Budget, {}, eps, s};
  Recorder rec(c, opts);
  const LemmaSystem lemma = w_system(frame, s);
  auto on_manifold = [&](double w1) { return from_w({w1, center_manifold(lemma, w1).y}, frame, s); };

  rec.push(s.s1(), 0.0);
  rec.push(on_manifold(-eps), 0.0);

  // Reduced center dynamics W1' = g1(W1, h(W1)), run backward; W1 < 0 grows in magnitude.
  Field reduced = [&](const PhasePoint& w) { return PhasePoint{center_manifold(lemma, w.u).rate, 0.0}; };
  IntegrationSettings st = backward(opts);
  st.abs_tol = 1e-6 * st.rel_tol * eps;
  st.h_init = 1e-2 / (frame.a2 * eps);
  const EventSpec handoff = level_crossing([w_handoff](const PhasePoint& w) { return w.u + w_handoff; });
  const Trajectory slow = integrate(reduced, {-eps, 0.0}, st, std::span(&handoff, 1),
                                    [&](const DenseStep& d) { rec.step(d, [&](PhasePoint w) { return on_manifold(w.u); }); });
  if (slow.event.kind == EventKind::Budget) {
    c.terminal = TerminalKind::Budget;
    c.terminal_point = on_manifold(slow.event.point.u);
    rec.finish(c.terminal_point, -slow.event.xi);
    return c;
  }
  const PhasePoint start = on_manifold(slow.event.point.u);
  const double elapsed = -slow.event.xi;

  std::vector<EventSpec> events{u_crosses_zero(), region_exit(s, Region::I)};
  events[0].g = [up = s.u_plus](const PhasePoint& d) { return d.u + up; };
  const Event ev = shoot(s, start, elapsed, events, opts, rec);
  c.terminal = terminal_of(ev, c);
  c.terminal_point = ev.point;
  rec.finish(ev.point, -ev.xi);
  return c;
}

Curve trace_gamma(const SystemData& s, const EigenPair& eig, CurveLabel branch, const TraceOptions& opts) {
  if (branch == CurveLabel::Sigma) throw Error(ErrorCode::InvalidParameter, "use trace_sigma for Sigma");
  if (classify_regime(s.mach_plus, opts.tol_M).tag != RegimeKind::Subsonic)
    throw Error(ErrorCode::WrongRegime, "Gamma1/Gamma2 exist only for a subsonic far field");
  if (!(eig.lambda2 < 0.0 && eig.lambda1 > 0.0))
    throw Error(ErrorCode::WrongRegime, "S1 is not a saddle for the given eigen-structure");

  const double eps = seed_offset(s, opts);
  Curve c{branch, {}, {}, TerminalKind::Budget, {}, eps, s};
  Recorder rec(c, opts);

  const double side = branch == CurveLabel::Gamma1 ? -1.0 : 1.0;
  PhasePoint dir = eig.e2;  // unit, u-component non-negative
  if (dir.u == 0.0) throw Error(ErrorCode::TraceFailed, "stable direction is vertical");
  dir = side * dir;
  const PhasePoint seed = s.s1() + eps * dir;
  rec.push(s.s1(), 0.0);
  rec.push(seed, 0.0);

  const double up = s.u_plus, tp = s.theta_plus;
  std::vector<EventSpec> events;
  if (branch == CurveLabel::Gamma1) {
    EventSpec axis = u_crosses_zero();
    axis.g = [up](const PhasePoint& d) { return d.u + up; };
    events = {axis, region_exit(s, Region::I)};
  } else {
    const PhasePoint s2_inc = s.s2() - s.s1();
    EventSpec axis = theta_crosses_zero();
    axis.g = [tp](const PhasePoint& d) { return d.theta + tp; };
    events = {near_equilibrium(s2_inc, capture_radius(s, opts)), axis, region_exit(s, Region::II)};
  }
  const Event ev = shoot(s, seed, 0.0, events, opts, rec);
  c.terminal = terminal_of(ev, c);
  c.terminal_point = ev.point;
  rec.finish(ev.point, -ev.xi);

  if (branch == CurveLabel::Gamma2) {
    // S2 on the axis itself (alpha2 = 0) belongs to the axis-hitting subcase.
    if (c.terminal == TerminalKind::ConvergedToS2 && s.alpha2 <= 0.0 &&
        s.s2().theta <= capture_radius(s, opts))
      c.terminal = TerminalKind::HitThetaAxis;
    const bool expect_s2 = s.alpha2 > 0.0;
    if ((c.terminal == TerminalKind::ConvergedToS2 && !expect_s2) ||
        (c.terminal == TerminalKind::HitThetaAxis && expect_s2))
      throw Error(ErrorCode::UnexpectedTerminal,
                  "Gamma2 ended with " + std::string(to_string(c.terminal)) + " but alpha2 = " +
                      std::to_string(s.alpha2));
  }
  return c;
}

std::vector<Curve> trace_all(const SystemData& s, const TraceOptions& opts) {
  switch (classify_regime(s.mach_plus, opts.tol_M).tag) {
    case RegimeKind::Supersonic: return {};
    case RegimeKind::Transonic: return {trace_sigma(s, transonic_frame(s, opts.tol_M), opts)};
    case RegimeKind::Subsonic: {
      const EigenPair eig = eigen_2x2(s.A);
      return {trace_gamma(s, eig, CurveLabel::Gamma1, opts), trace_gamma(s, eig, CurveLabel::Gamma2, opts)};
    }
  }
  return {};
}

namespace {

// Nodes of a strictly monotone curve coordinate, sorted ascending.
struct Nodes {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<std::size_t> index;  ///< sample index of each node
};

Nodes nodes(const Curve& c, bool param_is_u) {
  Nodes n;
  const std::size_t count = c.samples.size();
  n.x.reserve(count);
  n.y.reserve(count);
  n.index.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const PhasePoint p = c.samples[i];
    n.x.push_back(param_is_u ? p.u : p.theta);
    n.y.push_back(param_is_u ? p.theta : p.u);
    n.index.push_back(i);
  }
  if (n.x.size() > 1 && n.x.front() > n.x.back()) {
    std::reverse(n.x.begin(), n.x.end());
    std::reverse(n.y.begin(), n.y.end());
    std::reverse(n.index.begin(), n.index.end());
  }
  return n;
}

double sgn(double v) { return (v > 0.0) - (v < 0.0); }

// Fritsch-Carlson derivative at node k.
double pchip_slope(const Nodes& n, std::size_t k) {
  const std::size_t last = n.x.size() - 1;
  auto h = [&](std::size_t i) { return n.x[i + 1] - n.x[i]; };
  auto delta = [&](std::size_t i) { return (n.y[i + 1] - n.y[i]) / h(i); };
  if (last == 1) return delta(0);
  if (k == 0 || k == last) {
    const std::size_t a = k == 0 ? 0 : last - 1;
    const std::size_t b = k == 0 ? 1 : last - 2;
    const double h0 = h(a), h1 = h(b);
    const double d0 = delta(a), d1 = delta(b);
    double d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (sgn(d) != sgn(d0))
      d = 0.0;
    else if (sgn(d0) != sgn(d1) && std::abs(d) > std::abs(3.0 * d0))
      d = 3.0 * d0;
    return d;
  }
  const double d0 = delta(k - 1), d1 = delta(k);
  if (d0 * d1 <= 0.0) return 0.0;
  const double w1 = 2.0 * h(k) + h(k - 1);
  const double w2 = h(k) + 2.0 * h(k - 1);
  return (w1 + w2) / (w1 / d0 + w2 / d1);
}

struct Lookup {
  double value;
  std::size_t lo;  ///< node bracket [lo, lo + 1]
};

std::optional<Lookup> interpolate(const Nodes& n, double x) {
  if (n.x.size() < 2 || x < n.x.front() || x > n.x.back()) return std::nullopt;
  std::size_t hi = static_cast<std::size_t>(std::upper_bound(n.x.begin(), n.x.end(), x) - n.x.begin());
  hi = std::clamp<std::size_t>(hi, 1, n.x.size() - 1);
  const std::size_t lo = hi - 1;
  const double h = n.x[hi] - n.x[lo];
  const double t = (x - n.x[lo]) / h;
  const double m0 = pchip_slope(n, lo) * h;
  const double m1 = pchip_slope(n, hi) * h;
  const double t2 = t * t, t3 = t2 * t;
  const double v = (2 * t3 - 3 * t2 + 1) * n.y[lo] + (t3 - 2 * t2 + t) * m0 + (-2 * t3 + 3 * t2) * n.y[hi] +
                   (t3 - t2) * m1;
  return Lookup{v, lo};
}

// Re-integrates backward from a stored sample to the exact parameter value.
std::optional<double> refine(const Curve& c, std::size_t from_sample, double param) {
  const SystemData& s = c.system;
  const bool by_u = c.by_u();
  IntegrationSettings st;
  st.rel_tol = 1e-12;
  st.abs_tol = 1e-14 * s.scale();
  st.direction = Direction::Backward;
  st.max_steps = 200'000;
  st.record = false;
  const EventSpec level =
      level_crossing([by_u, param](const PhasePoint& p) { return by_u ? p.u - param : p.theta - param; });
  const Trajectory tr = integrate([&s](const PhasePoint& p) { return rhs_poly(p, s); }, c.samples[from_sample], st,
                                  std::span(&level, 1));
  if (tr.event.kind != EventKind::Level) return std::nullopt;
  return by_u ? tr.event.point.theta : tr.event.point.u;
}

}  // namespace

Membership curve_membership(const Curve& c, PhasePoint p, double tol) {
  const bool by_u = c.by_u();
  const SystemData& s = c.system;
  const double param = by_u ? p.u : p.theta;
  const double query = by_u ? p.theta : p.u;
  const double unit = by_u ? s.theta_plus : s.u_plus;

  const Nodes n = nodes(c, by_u);
  // Axis terminal points are not part of the curve.
  const bool axis_end = c.terminal == TerminalKind::HitUAxis || c.terminal == TerminalKind::HitThetaAxis;
  const double lo_end = n.x.front();
  const auto found = interpolate(n, param);
  if (!found || (axis_end && param <= lo_end))
    throw Error(ErrorCode::OutOfRange, std::string(to_string(c.label)) + " does not span parameter " +
                                           std::to_string(param));

  Membership m{false, param, found->value, query - found->value, false};
  if (std::abs(m.distance) <= 10.0 * tol * unit) {
    // Start from the bracket end nearer S1 (smaller sample index); the
    // S1-seed chord is already the tangent line.
    const std::size_t a = n.index[found->lo], b = n.index[found->lo + 1];
    const std::size_t from = std::min(a, b);
    if (from >= 1) {
      if (auto exact = refine(c, from, param)) {
        m.curve_value = *exact;
        m.distance = query - *exact;
        m.refined = true;
      }
    }
  }
  m.on_curve = std::abs(m.distance) <= tol * unit;
  return m;
}

std::optional<double> curve_value_secondary(const Curve& c, double param) {
  const Nodes n = nodes(c, !c.by_u());
  const auto found = interpolate(n, param);
  if (!found) return std::nullopt;
  return found->value;
}

}  // namespace blayer
