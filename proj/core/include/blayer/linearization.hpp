#pragma once

#include <functional>
#include <string_view>

#include "blayer/gas_params.hpp"
#include "blayer/layer_system.hpp"

namespace blayer {

/// Real eigen-decomposition of a 2x2 matrix. lambda1 >= lambda2; the
/// eigenvectors are unit length with their first nonzero component positive.
struct EigenPair {
  double lambda1;
  double lambda2;
  PhasePoint e1;
  PhasePoint e2;
};

/// Throws ErrorCode::DefectiveMatrix for complex spectra (discriminant below
/// -1e-12, relative) or a repeated eigenvalue without two eigenvectors.
EigenPair eigen_2x2(const Matrix2& A);

/// Diagonalising frame at a sonic far field: columns of P are the kernel
/// direction and the eigenvector of the positive eigenvalue lambda2.
struct TransonicFrame {
  Matrix2 P;
  Matrix2 P_inv;
  double lambda2;
  double a2;  ///< quadratic coefficient of the reduced center dynamics
};

/// Throws ErrorCode::WrongRegime unless |M+ - 1| <= tol_M.
TransonicFrame transonic_frame(const SystemData& s, double tol_M = kDefaultTolMach);

/// Coordinates W = P^{-1} (U - u+, Theta - theta+).
struct WPoint {
  double w1{};
  double w2{};
};

WPoint to_w(PhasePoint p, const TransonicFrame& f, const SystemData& s);
PhasePoint from_w(WPoint w, const TransonicFrame& f, const SystemData& s);

/// Planar system x' = g1(x, y), y' = lambda y + g2(x, y) with g1, g2 of
/// order at least two at the origin and lambda > 0.
struct LemmaSystem {
  std::function<double(double, double)> g1;
  std::function<double(double, double)> g2;
  double lambda;
};

/// The layer field in W coordinates. The linear part is taken as exactly
/// diag(0, lambda2), so g = P^{-1} F(P W).
LemmaSystem w_system(const TransonicFrame& f, const SystemData& s);

/// Solves lambda z + g2(x, z) = rhs for z by damped Newton.
/// Throws ErrorCode::NewtonDiverged.
double solve_slaved(const LemmaSystem& sys, double x, double rhs = 0.0, double guess = 0.0);

enum class DegenerateKind { UnstableNode, Saddle, SaddleNodeNegAxis, SaddleNodePosAxis };

std::string_view to_string(DegenerateKind kind);

struct DegenerateClass {
  int m;
  double a_m;
  DegenerateKind kind;
  double exponent;  ///< fitted, before rounding
};

/// Numerical classification of a degenerate equilibrium with one zero and one
/// positive eigenvalue. Solves lambda phi + g2(x, phi) = 0 on a log grid
/// |x| in [delta/100, delta], fits psi(x) = g1(x, phi(x)) ~ a_m x^m and maps
/// (m parity, sign a_m) to the equilibrium type.
/// Throws ErrorCode::FitAmbiguous when the exponent is not within 0.1 of an
/// integer >= 2 or the two sides disagree, ErrorCode::NewtonDiverged.
DegenerateClass classify_degenerate(const LemmaSystem& sys, double delta);

/// 1e-2 max(1, u+).
double default_probe_radius(const SystemData& s);

/// Point (x, h(x)) of the center manifold through the origin of a lemma
/// system, accurate to O(x^4), with slope dh/dx and the reduced rate x'.
struct CenterManifoldPoint {
  double y;
  double slope;
  double rate;
};

CenterManifoldPoint center_manifold(const LemmaSystem& sys, double x);

/// Tangent line at S1: through S1 with the given slope dtheta/du. For the
/// sonic case it is the half line u <= u+.
struct TangentLine {
  PhasePoint through;
  PhasePoint direction;  ///< unit; into u < u+ for a half line
  double slope;
  bool half_line;
};

/// Sonic tangent (gamma-1) u+ (u - u+) + R gamma (theta - theta+) = 0, u <= u+.
TangentLine tangent_line(const SystemData& s, const TransonicFrame& f);

/// Subsonic tangent u+^2 (u - u+) + M+^2 gamma kappa (R u+/(kappa(gamma-1)) - lambda2)(theta - theta+) = 0
/// with lambda2 the negative eigenvalue; delegates to the sonic form inside
/// the transonic band. Throws ErrorCode::WrongRegime when supersonic.
TangentLine tangent_line(const SystemData& s, const EigenPair& eig, double tol_M = kDefaultTolMach);

}  // namespace blayer
