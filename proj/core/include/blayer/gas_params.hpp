#pragma once

#include <string_view>

namespace blayer {

inline constexpr double kDefaultTolMach = 1e-8;
inline constexpr double kDefaultTolFlux = 1e-10;

/// Constants of an ideal polytropic gas: adiabatic exponent, gas constant,
/// viscosity and heat conductivity. Construction rejects gamma <= 1 and
/// non-positive R, mu, kappa with ErrorCode::InvalidParameter.
class GasParams {
 public:
  GasParams(double gamma, double R, double mu, double kappa);

  double gamma() const noexcept { return gamma_; }
  double R() const noexcept { return R_; }
  double mu() const noexcept { return mu_; }
  double kappa() const noexcept { return kappa_; }

  /// Internal energy per unit mass up to an additive constant.
  double internal_energy(double theta) const noexcept { return R_ * theta / (gamma_ - 1.0); }

 private:
  double gamma_;
  double R_;
  double mu_;
  double kappa_;
};

/// Specific volume, velocity and temperature at the boundary or far field.
/// v and theta must be positive; u is signed.
class EndState {
 public:
  EndState(double v, double u, double theta);

  double v() const noexcept { return v_; }
  double u() const noexcept { return u_; }
  double theta() const noexcept { return theta_; }

  /// Mass flux u/v.
  double flux() const noexcept { return u_ / v_; }

 private:
  double v_;
  double u_;
  double theta_;
};

enum class RegimeKind { Supersonic, Transonic, Subsonic };

std::string_view to_string(RegimeKind kind);

struct Regime {
  RegimeKind tag;
  double mach_plus;
};

double pressure(const EndState& state, const GasParams& gas);
double sound_speed(const EndState& state, const GasParams& gas);
double mach(const EndState& state, const GasParams& gas);

/// Transonic inside the band |M - 1| <= tol_M, otherwise by side.
Regime classify_regime(double mach_plus, double tol_M = kDefaultTolMach);

struct FluxCheck {
  bool ok;
  double gap;          ///< |u-/v- - u+/v+|
  double sigma_minus;  ///< boundary speed -u-/v-
};

/// Mass-flux compatibility u-/v- = u+/v+ to relative tolerance tol_A.
/// Throws ErrorCode::InvalidBoundary when left.u() <= 0 (not an inflow problem).
FluxCheck check_flux_condition(const EndState& left, const EndState& right,
                               double tol_A = kDefaultTolFlux);

}  // namespace blayer
