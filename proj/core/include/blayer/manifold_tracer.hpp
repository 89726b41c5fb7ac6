#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "blayer/integrator.hpp"
#include "blayer/layer_system.hpp"
#include "blayer/linearization.hpp"

namespace blayer {

enum class CurveLabel { Sigma, Gamma1, Gamma2 };
enum class TerminalKind { HitUAxis, HitThetaAxis, ConvergedToS2, Budget };

std::string_view to_string(CurveLabel label);
std::string_view to_string(TerminalKind kind);

struct TraceOptions {
  /// Distance of the seed from S1; 0 selects 1e-6 max(u+, theta+).
  double seed_offset = 0.0;
  /// Adjacent samples are at least min_spacing and at most max_spacing
  /// apart, measured as max(|du|/u+, |dtheta|/theta+).
  double min_spacing = 1e-5;
  double max_spacing = 2e-4;
  /// Capture radius around S2; 0 selects 1e-8 max(u+, theta+).
  double capture_radius = 0.0;
  /// |W1| / u+ at which the sonic trace leaves the center-manifold reduction
  /// for the planar integration.
  double handoff = 1e-3;
  double tol_M = kDefaultTolMach;
  /// Tolerances and budget; the direction is always backward.
  IntegrationSettings integration{};
};

/// A traced existence curve. samples[0] is S1, samples[1] the seed, and the
/// rest follow the backward-in-xi orbit outward to the terminal point, which
/// is the last sample.
struct Curve {
  CurveLabel label;
  std::vector<PhasePoint> samples;
  std::vector<double> elapsed;  ///< backward xi elapsed since the seed, per sample
  TerminalKind terminal;
  PhasePoint terminal_point;
  double seed_offset;
  SystemData system;

  /// Sigma and Gamma1 are graphs over u, Gamma2 over theta.
  bool by_u() const { return label != CurveLabel::Gamma2; }
};

/// Sonic saddle-node orbit: seeded on the center manifold tangent to the
/// negative W1 axis, followed by the reduced center dynamics out to the
/// handoff radius and by planar backward integration until u = 0.
/// Throws ErrorCode::TraceFailed if the orbit leaves Region I.
Curve trace_sigma(const SystemData& s, const TransonicFrame& frame, const TraceOptions& opts = {});

/// Subsonic stable-manifold branch of the saddle S1: Gamma1 into Region I
/// (u < u+), Gamma2 into Region II (u > u+).
/// Throws ErrorCode::TraceFailed on region exit, ErrorCode::UnexpectedTerminal
/// when Gamma2's end contradicts the sign of alpha2.
Curve trace_gamma(const SystemData& s, const EigenPair& eig, CurveLabel branch, const TraceOptions& opts = {});

/// Convenience: traces every curve of the far-field regime (none when supersonic).
std::vector<Curve> trace_all(const SystemData& s, const TraceOptions& opts = {});

struct Membership {
  bool on_curve;
  double parameter;    ///< u for Sigma/Gamma1, theta for Gamma2
  double curve_value;  ///< theta-hat(u) or u-hat(theta)
  double distance;     ///< signed: query minus curve value, in raw units
  bool refined;        ///< decided after local re-integration
};

/// Monotone piecewise-cubic lookup of the curve along its parameter, with a
/// local re-integration when the query is within 10 tol of the curve.
/// On-curve iff |distance| <= tol theta+ (tol u+ for Gamma2).
/// Throws ErrorCode::OutOfRange when the parameter is outside the traced span.
Membership curve_membership(const Curve& c, PhasePoint p, double tol);

/// Curve value along the other coordinate (theta for Gamma2, u otherwise),
/// or nullopt outside the span. Used for distances when the primary
/// parameter is out of range.
std::optional<double> curve_value_secondary(const Curve& c, double param);

}  // namespace blayer
