#include "blayer/linearization.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "blayer/error.hpp"

namespace blayer {
namespace {

PhasePoint canonical_direction(PhasePoint v) {
  const double n = norm(v);
  v = (1.0 / n) * v;
  if (v.u < 0.0 || (v.u == 0.0 && v.theta < 0.0)) v = -1.0 * v;
  return v;
}

PhasePoint null_vector(const Matrix2& A, double lambda, double scale) {
  const PhasePoint r1{A.a11 - lambda, A.a12};
  const PhasePoint r2{A.a21, A.a22 - lambda};
  const PhasePoint r = norm(r1) >= norm(r2) ? r1 : r2;
  if (norm(r) <= 1e-14 * scale) return {};
  return canonical_direction({r.theta, -r.u});
}

struct LineFit {
  double slope;
  double intercept;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {slope, (sy - slope * sx) / n};
}

// Least-squares c0 + c1 x + c2 x^2; returns c0.
double quadratic_intercept(const std::vector<double>& x, const std::vector<double>& y) {
  std::array<std::array<double, 4>, 3> m{};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::array<double, 3> b{1.0, x[i], x[i] * x[i]};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) m[r][c] += b[r] * b[c];
      m[r][3] += b[r] * y[i];
    }
  }
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    std::swap(m[col], m[piv]);
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      const double f = m[r][col] / m[col][col];
      for (int c = col; c < 4; ++c) m[r][c] -= f * m[col][c];
    }
  }
  return m[0][3] / m[0][0];
}

}  // namespace

EigenPair eigen_2x2(const Matrix2& A) {
  const double scale = std::max({std::abs(A.a11), std::abs(A.a12), std::abs(A.a21), std::abs(A.a22)});
  const double half_diff = 0.5 * (A.a11 - A.a22);
  double disc = half_diff * half_diff + A.a12 * A.a21;
  if (disc < -1e-12 * scale * scale)
    throw Error(ErrorCode::DefectiveMatrix, "complex eigenvalues (discriminant " + std::to_string(disc) + ")");
  disc = std::max(disc, 0.0);
  const double mean = 0.5 * A.trace();
  const double root = std::sqrt(disc);
  double l1, l2;
  // Larger-magnitude root first, the other from the determinant.
  if (mean >= 0.0) {
    l1 = mean + root;
    l2 = l1 != 0.0 ? A.det() / l1 : mean - root;
  } else {
    l2 = mean - root;
    l1 = A.det() / l2;
  }
  if (l1 < l2) std::swap(l1, l2);

  EigenPair out{l1, l2, null_vector(A, l1, scale), null_vector(A, l2, scale)};
  if (norm(out.e1) == 0.0 || norm(out.e2) == 0.0 || (l1 == l2 && out.e1 == out.e2)) {
    const bool scalar = std::abs(A.a12) <= 1e-14 * scale && std::abs(A.a21) <= 1e-14 * scale &&
                        std::abs(A.a11 - A.a22) <= 1e-14 * scale;
    if (!scalar) throw Error(ErrorCode::DefectiveMatrix, "repeated eigenvalue with a single eigenvector");
    out.e1 = {1.0, 0.0};
    out.e2 = {0.0, 1.0};
  }
  return out;
}

TransonicFrame transonic_frame(const SystemData& s, double tol_M) {
  if (classify_regime(s.mach_plus, tol_M).tag != RegimeKind::Transonic)
    throw Error(ErrorCode::WrongRegime,
                "transonic frame needs M+ = 1, got M+ = " + std::to_string(s.mach_plus));
  const auto& gas = s.gas;
  const double g = gas.gamma();
  const double R = gas.R();
  const double mu = gas.mu();
  const double kappa = gas.kappa();
  const double k1 = (g - 1.0) * s.u_plus / (R * g);
  const double k2 = mu * s.u_plus / (kappa * (g - 1.0));
  const double detP = k1 + k2;

  TransonicFrame f;
  f.P = {1.0, 1.0, -k1, k2};
  f.P_inv = {k2 / detP, -1.0 / detP, k1 / detP, 1.0 / detP};
  f.lambda2 = ((g - 1.0) / (g * mu) + R / (kappa * (g - 1.0))) * s.u_plus;
  f.a2 = R * g * (g + 1.0) / (2.0 * (R * g * mu + kappa * (g - 1.0) * (g - 1.0)));
  return f;
}

WPoint to_w(PhasePoint p, const TransonicFrame& f, const SystemData& s) {
  const PhasePoint w = f.P_inv * (p - s.s1());
  return {w.u, w.theta};
}

PhasePoint from_w(WPoint w, const TransonicFrame& f, const SystemData& s) {
  return s.s1() + f.P * PhasePoint{w.w1, w.w2};
}

LemmaSystem w_system(const TransonicFrame& f, const SystemData& s) {
  auto pushed = [f, s](double w1, double w2) {
    return f.P_inv * nonlinear_terms(f.P * PhasePoint{w1, w2}, s);
  };
  return {[pushed](double x, double y) { return pushed(x, y).u; },
          [pushed](double x, double y) { return pushed(x, y).theta; }, f.lambda2};
}

double solve_slaved(const LemmaSystem& sys, double x, double rhs, double guess) {
  auto residual = [&](double z) { return sys.lambda * z + sys.g2(x, z) - rhs; };
  double z = guess;
  double r = residual(z);
  for (int it = 0; it < 60; ++it) {
    if (r == 0.0) return z;
    const double eta = 1e-7 * std::max({std::abs(z), std::abs(x), 1e-300});
    const double slope = (residual(z + eta) - residual(z - eta)) / (2.0 * eta);
    if (!std::isfinite(slope) || slope == 0.0) break;
    double step = -r / slope;
    double z_new = z + step;
    double r_new = residual(z_new);
    for (int damp = 0; damp < 30 && !(std::abs(r_new) <= std::abs(r)); ++damp) {
      step *= 0.5;
      z_new = z + step;
      r_new = residual(z_new);
    }
    if (!std::isfinite(z_new)) break;
    z = z_new;
    r = r_new;
    if (std::abs(step) <= 1e-13 * std::max(std::abs(z), 1e-300)) return z;
  }
  throw Error(ErrorCode::NewtonDiverged, "no solution of lambda*phi + g2(x, phi) = 0 at x = " + std::to_string(x));
}

std::string_view to_string(DegenerateKind kind) {
  switch (kind) {
    case DegenerateKind::UnstableNode: return "UnstableNode";
    case DegenerateKind::Saddle: return "Saddle";
    case DegenerateKind::SaddleNodeNegAxis: return "SaddleNodeNegAxis";
    case DegenerateKind::SaddleNodePosAxis: return "SaddleNodePosAxis";
  }
  return "Unknown";
}

DegenerateClass classify_degenerate(const LemmaSystem& sys, double delta) {
  if (!(sys.lambda > 0.0)) throw Error(ErrorCode::InvalidParameter, "lemma system needs lambda > 0");
  if (!(delta > 0.0)) throw Error(ErrorCode::InvalidParameter, "probe radius must be positive");

  constexpr int kPoints = 41;
  std::vector<double> xs, psis;
  std::array<std::vector<double>, 2> log_x, log_psi;
  std::array<int, 2> sign{0, 0};
  for (int side = 0; side < 2; ++side) {
    const double dir = side == 0 ? 1.0 : -1.0;
    double phi = 0.0;
    for (int i = 0; i < kPoints; ++i) {
      const double mag = delta * std::pow(10.0, -2.0 + 2.0 * i / (kPoints - 1));
      const double x = dir * mag;
      phi = solve_slaved(sys, x, 0.0, phi);
      const double psi = sys.g1(x, phi);
      if (!std::isfinite(psi) || psi == 0.0)
        throw Error(ErrorCode::FitAmbiguous, "psi vanishes or is not finite on the probe grid");
      const int sg = psi > 0.0 ? 1 : -1;
      if (sign[side] == 0) sign[side] = sg;
      if (sign[side] != sg) throw Error(ErrorCode::FitAmbiguous, "psi changes sign on one side of the origin");
      xs.push_back(x);
      psis.push_back(psi);
      log_x[side].push_back(std::log(mag));
      log_psi[side].push_back(std::log(std::abs(psi)));
    }
  }

  const double e_pos = fit_line(log_x[0], log_psi[0]).slope;
  const double e_neg = fit_line(log_x[1], log_psi[1]).slope;
  const int m_pos = static_cast<int>(std::lround(e_pos));
  const int m_neg = static_cast<int>(std::lround(e_neg));
  if (std::abs(e_pos - m_pos) > 0.1 || std::abs(e_neg - m_neg) > 0.1 || m_pos != m_neg)
    throw Error(ErrorCode::FitAmbiguous, "fitted exponents " + std::to_string(e_pos) + ", " +
                                             std::to_string(e_neg) + " are not a common integer");
  const int m = m_pos;
  if (m < 2) throw Error(ErrorCode::FitAmbiguous, "leading order below 2");
  const bool even = m % 2 == 0;
  if (even != (sign[0] == sign[1])) throw Error(ErrorCode::FitAmbiguous, "psi parity contradicts the order");

  std::vector<double> scaled(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) scaled[i] = psis[i] / std::pow(xs[i], m);
  const double a_m = quadratic_intercept(xs, scaled);

  DegenerateKind kind;
  if (even)
    kind = a_m > 0.0 ? DegenerateKind::SaddleNodeNegAxis : DegenerateKind::SaddleNodePosAxis;
  else
    kind = a_m > 0.0 ? DegenerateKind::UnstableNode : DegenerateKind::Saddle;
  return {m, a_m, kind, 0.5 * (e_pos + e_neg)};
}

double default_probe_radius(const SystemData& s) { return 1e-2 * std::max(1.0, s.u_plus); }

CenterManifoldPoint center_manifold(const LemmaSystem& sys, double x) {
  if (x == 0.0) return {0.0, 0.0, 0.0};
  const double phi = solve_slaved(sys, x);
  const double eta = 1e-3 * std::abs(x);
  const double slope = (solve_slaved(sys, x + eta, 0.0, phi) - solve_slaved(sys, x - eta, 0.0, phi)) / (2.0 * eta);
  // One correction of the invariance equation h' g1 = lambda h + g2.
  const double y = solve_slaved(sys, x, slope * sys.g1(x, phi), phi);
  return {y, slope, sys.g1(x, y)};
}

TangentLine tangent_line(const SystemData& s, const TransonicFrame&) {
  const double slope = -(s.gas.gamma() - 1.0) * s.u_plus / (s.gas.R() * s.gas.gamma());
  PhasePoint dir{-1.0, -slope};
  return {s.s1(), (1.0 / norm(dir)) * dir, slope, true};
}

TangentLine tangent_line(const SystemData& s, const EigenPair& eig, double tol_M) {
  const Regime regime = classify_regime(s.mach_plus, tol_M);
  if (regime.tag == RegimeKind::Supersonic)
    throw Error(ErrorCode::WrongRegime, "no tangent line at a supersonic far field");
  if (regime.tag == RegimeKind::Transonic) return tangent_line(s, transonic_frame(s, tol_M));
  const auto& gas = s.gas;
  const double m2g = s.mach_plus * s.mach_plus * gas.gamma();
  const double lambda_neg = eig.lambda2;
  const double slope =
      -s.u_plus * s.u_plus / (m2g * gas.kappa() * (gas.R() * s.u_plus / (gas.kappa() * (gas.gamma() - 1.0)) - lambda_neg));
  PhasePoint dir{1.0, slope};
  return {s.s1(), (1.0 / norm(dir)) * dir, slope, false};
}

}  // namespace blayer
