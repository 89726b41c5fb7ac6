#include "blayer/gas_params.hpp"

#include <cmath>
#include <string>

#include "blayer/error.hpp"

namespace blayer {
namespace {

void require(bool cond, ErrorCode code, const char* what) {
  if (!cond) throw Error(code, what);
}

bool finite_all(std::initializer_list<double> xs) {
  for (double x : xs)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

GasParams::GasParams(double gamma, double R, double mu, double kappa)
    : gamma_(gamma), R_(R), mu_(mu), kappa_(kappa) {
  require(finite_all({gamma, R, mu, kappa}), ErrorCode::InvalidParameter,
          "gas constants must be finite");
  require(gamma > 1.0, ErrorCode::InvalidParameter, "gamma must exceed 1");
  require(R > 0.0, ErrorCode::InvalidParameter, "R must be positive");
  require(mu > 0.0, ErrorCode::InvalidParameter, "mu must be positive");
  require(kappa > 0.0, ErrorCode::InvalidParameter, "kappa must be positive");
}

EndState::EndState(double v, double u, double theta) : v_(v), u_(u), theta_(theta) {
  require(finite_all({v, u, theta}), ErrorCode::InvalidParameter, "end state must be finite");
  require(v > 0.0, ErrorCode::InvalidParameter, "specific volume must be positive");
  require(theta > 0.0, ErrorCode::InvalidParameter, "temperature must be positive");
}

std::string_view to_string(RegimeKind kind) {
  switch (kind) {
    case RegimeKind::Supersonic: return "Supersonic";
    case RegimeKind::Transonic: return "Transonic";
    case RegimeKind::Subsonic: return "Subsonic";
  }
  return "Unknown";
}

double pressure(const EndState& state, const GasParams& gas) {
  return gas.R() * state.theta() / state.v();
}

double sound_speed(const EndState& state, const GasParams& gas) {
  return std::sqrt(gas.R() * gas.gamma() * state.theta());
}

double mach(const EndState& state, const GasParams& gas) {
  return std::abs(state.u()) / sound_speed(state, gas);
}

Regime classify_regime(double mach_plus, double tol_M) {
  if (std::abs(mach_plus - 1.0) <= tol_M) return {RegimeKind::Transonic, mach_plus};
  if (mach_plus > 1.0) return {RegimeKind::Supersonic, mach_plus};
  return {RegimeKind::Subsonic, mach_plus};
}

FluxCheck check_flux_condition(const EndState& left, const EndState& right, double tol_A) {
  if (!(left.u() > 0.0))
    throw Error(ErrorCode::InvalidBoundary,
                "boundary velocity u- = " + std::to_string(left.u()) +
                    " is not positive; only the inflow problem is supported");
  const double fl = left.flux();
  const double gap = std::abs(fl - right.flux());
  return {gap <= tol_A * fl, gap, -fl};
}

}  // namespace blayer
