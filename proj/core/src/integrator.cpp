#include "blayer/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "blayer/error.hpp"

namespace blayer {

// Dormand-Prince 5(4) tableau with Shampine's continuous extension.
namespace dp {
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
}  // namespace dp

class StepperAccess {
 public:
  static DenseStep make(double xi0, double h, PhasePoint r1, PhasePoint r2, PhasePoint r3, PhasePoint r4,
                        PhasePoint r5) {
    DenseStep s;
    s.xi0_ = xi0;
    s.h_ = h;
    s.xi_stop_ = xi0 + h;
    s.r1_ = r1;
    s.r2_ = r2;
    s.r3_ = r3;
    s.r4_ = r4;
    s.r5_ = r5;
    return s;
  }
  static void truncate(DenseStep& s, double xi_stop) { s.xi_stop_ = xi_stop; }
  static double fraction(const DenseStep& s, double xi) { return (xi - s.xi0_) / s.h_; }
};

PhasePoint DenseStep::operator()(double xi) const {
  const double th = (xi - xi0_) / h_;
  const double th1 = 1.0 - th;
  return r1_ + th * (r2_ + th1 * (r3_ + th * (r4_ + th1 * r5_)));
}

void IntegrationSettings::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
    throw Error(ErrorCode::InvalidParameter, "integration tolerances must be positive");
  if (max_steps < 1) throw Error(ErrorCode::InvalidParameter, "max_steps must be at least 1");
  if (!(h_max > 0.0)) throw Error(ErrorCode::InvalidParameter, "h_max must be positive");
  if (!(xi_span > 0.0)) throw Error(ErrorCode::InvalidParameter, "xi_span must be positive");
  if (h_init < 0.0) throw Error(ErrorCode::InvalidParameter, "h_init must be non-negative");
}

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::UCrossesZero: return "UCrossesZero";
    case EventKind::ThetaCrossesZero: return "ThetaCrossesZero";
    case EventKind::NearEquilibrium: return "NearEquilibrium";
    case EventKind::LeftRegion: return "LeftRegion";
    case EventKind::Level: return "Level";
    case EventKind::Budget: return "Budget";
  }
  return "Unknown";
}

EventSpec u_crosses_zero() {
  return {EventKind::UCrossesZero, [](const PhasePoint& p) { return p.u; }};
}

EventSpec theta_crosses_zero() {
  return {EventKind::ThetaCrossesZero, [](const PhasePoint& p) { return p.theta; }};
}

EventSpec near_equilibrium(PhasePoint target, double radius) {
  return {EventKind::NearEquilibrium, [target, radius](const PhasePoint& p) { return norm(p - target) - radius; }};
}

EventSpec left_region(std::function<double(const PhasePoint&)> margin) {
  return {EventKind::LeftRegion, std::move(margin)};
}

EventSpec level_crossing(std::function<double(const PhasePoint&)> g) { return {EventKind::Level, std::move(g)}; }

namespace {

constexpr double kMaxStep = 1e200;

PhasePoint eval(const Field& f, PhasePoint y, double sign) {
  const PhasePoint v = f(y);
  if (!v.finite()) throw Error(ErrorCode::NonFinite, "field returned a non-finite value");
  return sign * v;
}

double error_norm(PhasePoint err, PhasePoint y0, PhasePoint y1, const IntegrationSettings& st) {
  const double s1 = st.abs_tol + st.rel_tol * std::max(std::abs(y0.u), std::abs(y1.u));
  const double s2 = st.abs_tol + st.rel_tol * std::max(std::abs(y0.theta), std::abs(y1.theta));
  const double a = err.u / s1;
  const double b = err.theta / s2;
  return std::sqrt(0.5 * (a * a + b * b));
}

double initial_step(const Field& f, PhasePoint y0, PhasePoint f0, double sign, const IntegrationSettings& st) {
  auto sc_norm = [&](PhasePoint v) {
    const double a = v.u / (st.abs_tol + st.rel_tol * std::abs(y0.u));
    const double b = v.theta / (st.abs_tol + st.rel_tol * std::abs(y0.theta));
    return std::sqrt(0.5 * (a * a + b * b));
  };
  const double d0 = sc_norm(y0);
  const double d1 = sc_norm(f0);
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, st.h_max);
  const PhasePoint y1 = y0 + h0 * f0;
  const PhasePoint f1 = eval(f, y1, sign);
  const double d2 = sc_norm(f1 - f0) / h0;
  const double dm = std::max(d1, d2);
  const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 1.0 / 5.0);
  return std::min({100.0 * h0, h1, st.h_max});
}

}  // namespace

Trajectory integrate(const Field& field, PhasePoint start, const IntegrationSettings& st,
                     std::span<const EventSpec> events, const StepObserver& observer, double xi0) {
  st.validate();
  if (!start.finite()) throw Error(ErrorCode::NonFinite, "start point is not finite");

  const double sign = st.direction == Direction::Forward ? 1.0 : -1.0;
  Trajectory out;
  auto xi_of = [&](double t) { return xi0 + sign * t; };

  PhasePoint y = start;
  PhasePoint k1 = eval(field, y, sign);
  if (st.record) out.samples.push_back({xi0, y, sign * k1});

  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i].g(y) <= 0.0) {
      out.event = {events[i].kind, i, xi0, y};
      return out;
    }
  }

  double t = 0.0;
  double h = st.h_init > 0.0 ? std::min(st.h_init, st.h_max) : initial_step(field, y, k1, sign, st);
  double fac_old = 1e-4;
  bool last_rejected = false;

  while (true) {
    if (out.steps >= st.max_steps || st.xi_span - t <= 1e-13 * (1.0 + std::abs(xi_of(t)))) {
      out.event = {EventKind::Budget, 0, xi_of(t), y};
      return out;
    }
    h = std::min({h, st.h_max, kMaxStep, st.xi_span - t});
    if (h < 1e-14 * (1.0 + std::abs(xi_of(t))))
      throw Error(ErrorCode::StepUnderflow, "step size underflow at xi = " + std::to_string(xi_of(t)));

    const PhasePoint k2 = eval(field, y + h * dp::a21 * k1, sign);
    const PhasePoint k3 = eval(field, y + h * (dp::a31 * k1 + dp::a32 * k2), sign);
    const PhasePoint k4 = eval(field, y + h * (dp::a41 * k1 + dp::a42 * k2 + dp::a43 * k3), sign);
    const PhasePoint k5 =
        eval(field, y + h * (dp::a51 * k1 + dp::a52 * k2 + dp::a53 * k3 + dp::a54 * k4), sign);
    const PhasePoint k6 =
        eval(field, y + h * (dp::a61 * k1 + dp::a62 * k2 + dp::a63 * k3 + dp::a64 * k4 + dp::a65 * k5), sign);
    const PhasePoint y_new =
        y + h * (dp::a71 * k1 + dp::a73 * k3 + dp::a74 * k4 + dp::a75 * k5 + dp::a76 * k6);
    const PhasePoint k7 = eval(field, y_new, sign);
    const PhasePoint err =
        h * (dp::e1 * k1 + dp::e3 * k3 + dp::e4 * k4 + dp::e5 * k5 + dp::e6 * k6 + dp::e7 * k7);
    const double en = error_norm(err, y, y_new, st);

    // Lund-stabilised step control (beta = 0.04).
    constexpr double beta = 0.04;
    const double fac11 = std::pow(std::max(en, 1e-300), 0.2 - 0.75 * beta);
    double fac = fac11 / std::pow(fac_old, beta);
    fac = std::clamp(fac / 0.9, 0.2, 10.0);

    if (!(en <= 1.0)) {
      ++out.rejected;
      h /= std::min(1.0 / 0.2, fac11 / 0.9);
      last_rejected = true;
      continue;
    }

    fac_old = std::max(en, 1e-4);
    ++out.steps;

    const PhasePoint ydiff = y_new - y;
    const PhasePoint bspl = h * k1 - ydiff;
    DenseStep dense = StepperAccess::make(
        xi_of(t), sign * h, y, ydiff, bspl, ydiff - h * k7 - bspl,
        h * (dp::d1 * k1 + dp::d3 * k3 + dp::d4 * k4 + dp::d5 * k5 + dp::d6 * k6 + dp::d7 * k7));

    // Earliest sign change among the events.
    std::optional<std::size_t> hit;
    double hit_hi = 1.0;
    for (std::size_t i = 0; i < events.size(); ++i) {
      if (events[i].g(y_new) > 0.0) continue;
      double lo = 0.0, hi = 1.0;
      const double tol = 1e-12 * (1.0 + std::abs(xi_of(t + h))) / h;
      while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (events[i].g(dense(xi_of(t + mid * h))) <= 0.0)
          hi = mid;
        else
          lo = mid;
      }
      if (!hit || hi < hit_hi) {
        hit = i;
        hit_hi = hi;
      }
    }

    if (hit) {
      double xi_event = xi_of(t + hit_hi * h);
      PhasePoint p = hit_hi >= 1.0 ? y_new : dense(xi_event);
      // The interpolant can land marginally on the positive side; fall back to the step end.
      if (events[*hit].g(p) > 0.0) {
        p = y_new;
        xi_event = xi_of(t + h);
      }
      StepperAccess::truncate(dense, xi_event);
      if (observer) observer(dense);
      if (st.record) out.samples.push_back({xi_event, p, eval(field, p, 1.0)});
      out.event = {events[*hit].kind, *hit, xi_event, p};
      return out;
    }

    if (observer) observer(dense);
    t += h;
    y = y_new;
    k1 = k7;
    if (st.record) out.samples.push_back({xi_of(t), y, sign * k1});

    h = last_rejected ? std::min(h, h / fac) : h / fac;
    last_rejected = false;
  }
}

}  // namespace blayer
