#pragma once

#include <cmath>

#include "blayer/gas_params.hpp"

namespace blayer {

/// A point (u, theta) of the phase plane. Phase velocities (U', Theta') and
/// increments from an equilibrium reuse the same type.
struct PhasePoint {
  double u{};
  double theta{};

  friend PhasePoint operator+(PhasePoint a, PhasePoint b) { return {a.u + b.u, a.theta + b.theta}; }
  friend PhasePoint operator-(PhasePoint a, PhasePoint b) { return {a.u - b.u, a.theta - b.theta}; }
  friend PhasePoint operator*(double s, PhasePoint a) { return {s * a.u, s * a.theta}; }
  friend bool operator==(PhasePoint, PhasePoint) = default;

  bool finite() const { return std::isfinite(u) && std::isfinite(theta); }
};

inline double norm(PhasePoint p) { return std::hypot(p.u, p.theta); }

struct Matrix2 {
  double a11{}, a12{}, a21{}, a22{};

  double det() const { return a11 * a22 - a12 * a21; }
  double trace() const { return a11 + a22; }
  Matrix2 inverse() const;

  friend PhasePoint operator*(const Matrix2& m, PhasePoint x) {
    return {m.a11 * x.u + m.a12 * x.theta, m.a21 * x.u + m.a22 * x.theta};
  }
  friend Matrix2 operator*(const Matrix2& a, const Matrix2& b) {
    return {a.a11 * b.a11 + a.a12 * b.a21, a.a11 * b.a12 + a.a12 * b.a22,
            a.a21 * b.a11 + a.a22 * b.a21, a.a21 * b.a12 + a.a22 * b.a22};
  }
};

/// Everything the planar layer field needs, derived once from the gas
/// constants and the far-field state. The field depends on the far field
/// only through (u+, theta+); v+ enters sigma_minus and p_plus.
struct SystemData {
  GasParams gas;
  double u_plus;
  double theta_plus;
  double v_plus;
  double sigma_minus;  ///< -u+/v+, equal to -u-/v- under the flux condition
  double p_plus;       ///< R theta+ / v+
  Matrix2 A;           ///< linear part at S1
  double alpha1;
  double alpha2;
  double mach_plus;

  PhasePoint s1() const { return {u_plus, theta_plus}; }
  PhasePoint s2() const { return {alpha1 * u_plus, alpha2 * theta_plus}; }
  static constexpr PhasePoint origin() { return {0.0, 0.0}; }
  double scale() const { return u_plus > theta_plus ? u_plus : theta_plus; }
};

/// Throws ErrorCode::DomainError when right.u() <= 0.
SystemData build_system(const GasParams& gas, const EndState& right);

/// Closed forms for det A and tr A, independent of the matrix entries.
double det_A_closed_form(const SystemData& s);
double trace_A_closed_form(const SystemData& s);

/// Integrated rational form with V eliminated through V = (v+/u+) U.
/// Throws ErrorCode::DomainError when p.u <= 0.
PhasePoint rhs_exact(PhasePoint p, const SystemData& s);

/// Nonlinear part F(d) = (F1, F2) of the polynomial form, d = (U - u+, Theta - theta+).
PhasePoint nonlinear_terms(PhasePoint d, const SystemData& s);

/// Polynomial form A d + F(d), evaluated directly from the increment
/// d = (U - u+, Theta - theta+) so that nothing cancels near S1.
PhasePoint rhs_increment(PhasePoint d, const SystemData& s);

/// Polynomial form at an absolute point; valid on the whole plane.
inline PhasePoint rhs_poly(PhasePoint p, const SystemData& s) { return rhs_increment(p - s.s1(), s); }

/// Analytic Jacobian of rhs_poly.
Matrix2 jacobian(PhasePoint p, const SystemData& s);

/// U' = 0 nullcline.
double nullcline_h1(double u, const SystemData& s);
/// Theta' = 0 nullcline (away from u = 0).
double nullcline_h2(double u, const SystemData& s);

enum class Region { I, II };

/// Signed margin that is positive strictly inside the region and crosses
/// zero on its nullcline or vertical boundaries. Region I's u = 0 side is
/// left to the caller.
double region_margin(PhasePoint p, Region which, const SystemData& s);

/// Open-region membership: Region I is 0 < u < u+, Region II is
/// u+ < u < alpha1 u+, both with theta strictly between h1 and h2.
/// Region II requires a subsonic far field (ErrorCode::WrongRegime otherwise).
bool region_contains(PhasePoint p, Region which, const SystemData& s);

}  // namespace blayer
