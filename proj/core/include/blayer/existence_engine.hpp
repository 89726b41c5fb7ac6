#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string_view>
#include <tuple>
#include <vector>

#include "blayer/gas_params.hpp"
#include "blayer/layer_system.hpp"
#include "blayer/manifold_tracer.hpp"

namespace blayer {

struct Tolerances {
  double tol_A = kDefaultTolFlux;
  double tol_M = kDefaultTolMach;
  double tol_member = 1e-6;
};

/// Boundary data (left, u > 0) and far field (right).
struct Query {
  EndState left;
  EndState right;
  GasParams gas;
  Tolerances tol{};
};

enum class Outcome { Exists, NotExists };
enum class Reason { None, MassFluxMismatch, NonpositiveUPlus, Supersonic, OffCurve, OutsideCurveRange };

std::string_view to_string(Outcome o);
std::string_view to_string(Reason r);

struct Verdict {
  Outcome outcome = Outcome::NotExists;
  Reason reason = Reason::None;
  Regime regime{};
  bool trivial = false;                ///< left = right in (u, theta): the constant layer
  std::optional<CurveLabel> curve;     ///< containing curve, or nearest one for OffCurve
  std::optional<double> parameter;     ///< curve parameter of the query point
  std::optional<double> distance;      ///< signed distance to the curve, raw units
  std::optional<double> flux_gap;      ///< |u-/v- - u+/v+|

  bool exists() const { return outcome == Outcome::Exists; }
};

enum class DecayKind { NotApplicable, Exponential, Algebraic };
std::string_view to_string(DecayKind k);

/// Exponential: |U - u+| ~ C exp(-c xi), compared with c = |lambda2|.
/// Algebraic: u+ - U ~ C xi^p, compared with p = -1, plus xi (u+ - U) -> 1/a2.
/// The derivative fit uses U' (rate c, resp. exponent -2).
struct DecayReport {
  DecayKind kind = DecayKind::NotApplicable;
  std::size_t tail_samples = 0;
  double expected = 0.0;  ///< |lambda2| or -1
  double fitted = 0.0;    ///< fitted rate c or exponent p
  double C = 0.0;
  double derivative_expected = 0.0;
  double derivative_fitted = 0.0;
  double product_expected = 0.0;  ///< 1/a2 (algebraic only)
  double product_min = 0.0;
  double product_max = 0.0;
  bool rate_ok = false;
  bool derivative_ok = false;
  bool product_ok = false;

  bool ok() const;
};

struct ProfileMetrics {
  bool monotone_ok = true;
  double residual_sup = 0.0;
  DecayReport decay{};
};

/// Layer profile on the integrator's adaptive grid, xi increasing from 0.
struct Profile {
  std::vector<double> xi;
  std::vector<double> V;
  std::vector<double> U;
  std::vector<double> Theta;
  std::vector<double> dU;      ///< U'(xi) from the field
  std::vector<double> dTheta;  ///< Theta'(xi) from the field
  std::optional<CurveLabel> curve;  ///< empty for the constant layer
  double start_gap = 0.0;  ///< scaled distance between (U, Theta)(0) and (u-, theta-)
  ProfileMetrics metrics{};

  bool trivial() const { return !curve.has_value(); }
};

/// Decision procedure with a cache of traced curves keyed by far field, gas
/// constants and tol_M. Safe for concurrent use.
class ExistenceEngine {
 public:
  explicit ExistenceEngine(TraceOptions opts = {});

  /// Throws ErrorCode::InvalidBoundary when left.u <= 0; tracing errors propagate.
  Verdict decide(const Query& q) const;

  /// Curves of the far-field regime, traced once and shared.
  std::shared_ptr<const std::vector<Curve>> curves(const GasParams& gas, const EndState& right,
                                                   double tol_M = kDefaultTolMach) const;

  const TraceOptions& trace_options() const { return opts_; }

 private:
  using Key = std::tuple<double, double, double, double, double, double, double, double>;
  TraceOptions opts_;
  mutable std::mutex mutex_;
  mutable std::map<Key, std::shared_ptr<const std::vector<Curve>>> cache_;
};

/// One-shot decision with a private engine.
Verdict decide(const Query& q);

/// Profile of an existing layer, shot backward from the far field onto
/// (u-, theta-) and reported in forward xi. Fills all metrics.
/// Throws ErrorCode::InvalidParameter for a NotExists verdict,
/// ErrorCode::ProfileDiverged when the shot misses (u-, theta-) by more than
/// 10 tol_member.
Profile compute_profile(const Query& q, const Verdict& verdict);

/// Tail decay fit. Throws ErrorCode::TailTooShort with fewer than 50 tail samples.
DecayReport verify_decay(const Profile& p, const SystemData& s, double tol_M = kDefaultTolMach);

/// Sup over samples of both integrated-equation residuals, divided by
/// max(|sigma-| u+, p+ u+).
double verify_residual(const Profile& p, const SystemData& s);

/// Strict sign check of V', U', Theta' (field values and finite differences).
bool verify_monotone(const Profile& p);

}  // namespace blayer
