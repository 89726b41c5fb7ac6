#include "blayer/layer_system.hpp"

#include <algorithm>
#include <string>

#include "blayer/error.hpp"

namespace blayer {

Matrix2 Matrix2::inverse() const {
  const double d = det();
  if (d == 0.0) throw Error(ErrorCode::DefectiveMatrix, "singular 2x2 matrix");
  return {a22 / d, -a12 / d, -a21 / d, a11 / d};
}

SystemData build_system(const GasParams& gas, const EndState& right) {
  if (!(right.u() > 0.0))
    throw Error(ErrorCode::DomainError,
                "far-field velocity u+ = " + std::to_string(right.u()) + " must be positive");
  const double g = gas.gamma();
  const double R = gas.R();
  const double up = right.u();
  const double tp = right.theta();
  const double m = mach(right, gas);
  const double m2 = m * m;

  // M+^2 gamma = u+^2 / (R theta+), so (M^2 g - 1)/(M^2 g) = 1 - R theta+/u+^2.
  Matrix2 A;
  A.a11 = (up - R * tp / up) / gas.mu();
  A.a12 = R / gas.mu();
  A.a21 = R * tp / gas.kappa();
  A.a22 = R * up / (gas.kappa() * (g - 1.0));

  const double alpha1 = (m2 * g - m2 + 2.0) / (m2 * (g + 1.0));
  const double alpha2 = 1.0 - 2.0 * (1.0 - m2) * (m2 * g + 1.0) * (g - 1.0) / (m2 * (g + 1.0) * (g + 1.0));

  return SystemData{gas,        up,         tp,     right.v(), -up / right.v(), pressure(right, gas),
                    A,          alpha1,     alpha2, m};
}

double det_A_closed_form(const SystemData& s) {
  const auto& gas = s.gas;
  const double m2 = s.mach_plus * s.mach_plus;
  return gas.R() * s.u_plus * s.u_plus * (m2 - 1.0) / (m2 * gas.mu() * gas.kappa() * (gas.gamma() - 1.0));
}

double trace_A_closed_form(const SystemData& s) {
  const auto& gas = s.gas;
  const double g = gas.gamma();
  const double m2 = s.mach_plus * s.mach_plus;
  const double b1 = gas.R() * s.u_plus / (gas.kappa() * (g - 1.0));
  const double b2 = (m2 - 1.0) * s.u_plus / (m2 * gas.mu());
  const double b3 = (g - 1.0) * s.u_plus / (m2 * g * gas.mu());
  return b1 + b2 + b3;
}

PhasePoint rhs_exact(PhasePoint p, const SystemData& s) {
  if (!(p.u > 0.0))
    throw Error(ErrorCode::DomainError, "rational form requires u > 0, got u = " + std::to_string(p.u));
  const auto& gas = s.gas;
  const double R = gas.R();
  const double V = s.v_plus / s.u_plus * p.u;
  const double du = p.u - s.u_plus;
  const double dtheta = p.theta - s.theta_plus;
  const double sig = s.sigma_minus;
  const double u_rate = V / gas.mu() * (-sig * du + R * (p.theta / V - s.theta_plus / s.v_plus));
  const double t_rate =
      V / gas.kappa() * (-sig * R / (gas.gamma() - 1.0) * dtheta + s.p_plus * du + 0.5 * sig * du * du);
  return {u_rate, t_rate};
}

PhasePoint nonlinear_terms(PhasePoint d, const SystemData& s) {
  const auto& gas = s.gas;
  const double R = gas.R();
  const double k = gas.kappa();
  const double x = d.u;
  const double y = d.theta;
  const double f1 = x * x / gas.mu();
  const double f2 = (R * s.theta_plus / (k * s.u_plus) - s.u_plus / (2.0 * k)) * x * x +
                    R / (k * (gas.gamma() - 1.0)) * x * y - x * x * x / (2.0 * k);
  return {f1, f2};
}

PhasePoint rhs_increment(PhasePoint d, const SystemData& s) { return s.A * d + nonlinear_terms(d, s); }

Matrix2 jacobian(PhasePoint p, const SystemData& s) {
  const auto& gas = s.gas;
  const double R = gas.R();
  const double k = gas.kappa();
  const double x = p.u - s.u_plus;
  const double y = p.theta - s.theta_plus;
  const double c2 = R * s.theta_plus / (k * s.u_plus) - s.u_plus / (2.0 * k);
  const double cxy = R / (k * (gas.gamma() - 1.0));
  return {s.A.a11 + 2.0 * x / gas.mu(), s.A.a12,
          s.A.a21 + 2.0 * c2 * x + cxy * y - 1.5 * x * x / k, s.A.a22 + cxy * x};
}

double nullcline_h1(double u, const SystemData& s) {
  const double R = s.gas.R();
  // u+/(M+^2 gamma) = R theta+ / u+
  return -(u - s.u_plus) * (u - R * s.theta_plus / s.u_plus) / R + s.theta_plus;
}

double nullcline_h2(double u, const SystemData& s) {
  const double R = s.gas.R();
  // (M+^2 gamma + 2) u+ / (M+^2 gamma) = u+ + 2 R theta+ / u+
  return (s.gas.gamma() - 1.0) / (2.0 * R) * (u - s.u_plus) * (u - s.u_plus - 2.0 * R * s.theta_plus / s.u_plus) +
         s.theta_plus;
}

double region_margin(PhasePoint p, Region which, const SystemData& s) {
  const double between =
      -(p.theta - nullcline_h1(p.u, s)) * (p.theta - nullcline_h2(p.u, s)) / (s.theta_plus * s.theta_plus);
  if (which == Region::I) return std::min(between, (s.u_plus - p.u) / s.u_plus);
  return std::min({between, (p.u - s.u_plus) / s.u_plus, (s.alpha1 * s.u_plus - p.u) / s.u_plus});
}

bool region_contains(PhasePoint p, Region which, const SystemData& s) {
  if (which == Region::II) {
    if (!(s.mach_plus < 1.0)) throw Error(ErrorCode::WrongRegime, "Region II exists only for M+ < 1");
    return region_margin(p, which, s) > 0.0;
  }
  return p.u > 0.0 && region_margin(p, which, s) > 0.0;
}

}  // namespace blayer
