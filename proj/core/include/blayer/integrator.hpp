#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "blayer/layer_system.hpp"

namespace blayer {

enum class Direction { Forward, Backward };

struct IntegrationSettings {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double h_init = 0.0;  ///< 0 selects an initial step automatically
  double h_max = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 1'000'000;
  Direction direction = Direction::Forward;
  /// Largest |xi - xi0| covered before a Budget event.
  double xi_span = std::numeric_limits<double>::infinity();
  /// Keep every accepted step in Trajectory::samples.
  bool record = true;

  /// Throws ErrorCode::InvalidParameter on non-positive tolerances or a zero budget.
  void validate() const;
};

/// Autonomous planar field, must be pure.
using Field = std::function<PhasePoint(const PhasePoint&)>;

enum class EventKind { UCrossesZero, ThetaCrossesZero, NearEquilibrium, LeftRegion, Level, Budget };

std::string_view to_string(EventKind kind);

/// An event fires when its indicator g, positive at the start, reaches g <= 0.
/// If g <= 0 already holds at the start point the event fires immediately.
struct EventSpec {
  EventKind kind;
  std::function<double(const PhasePoint&)> g;
};

EventSpec u_crosses_zero();
EventSpec theta_crosses_zero();
EventSpec near_equilibrium(PhasePoint target, double radius);
EventSpec left_region(std::function<double(const PhasePoint&)> margin);
EventSpec level_crossing(std::function<double(const PhasePoint&)> g);

struct Event {
  EventKind kind = EventKind::Budget;
  std::size_t index = 0;  ///< position in the event list; unused for Budget
  double xi = 0.0;
  PhasePoint point;
};

struct Sample {
  double xi;
  PhasePoint point;
  PhasePoint velocity;  ///< d(point)/d(xi)
};

/// Continuous extension of one accepted step, valid on [xi_begin, xi_end]
/// (xi_end is the event location when the step was truncated).
class DenseStep {
 public:
  double xi_begin() const { return xi0_; }
  double xi_end() const { return xi_stop_; }
  PhasePoint operator()(double xi) const;

 private:
  friend class StepperAccess;
  double xi0_ = 0.0;
  double h_ = 0.0;  ///< signed step in xi
  double xi_stop_ = 0.0;
  PhasePoint r1_, r2_, r3_, r4_, r5_;
};

using StepObserver = std::function<void(const DenseStep&)>;

struct Trajectory {
  std::vector<Sample> samples;  ///< in integration order
  Event event;
  std::size_t steps = 0;
  std::size_t rejected = 0;
};

/// Adaptive Dormand-Prince 5(4) integration with dense output. Stops at the
/// first event (located by bisection on the interpolant to
/// 1e-12 (1 + |xi|)) or when the step/xi budget runs out.
/// Throws ErrorCode::StepUnderflow and ErrorCode::NonFinite.
Trajectory integrate(const Field& field, PhasePoint start, const IntegrationSettings& settings,
                     std::span<const EventSpec> events = {}, const StepObserver& observer = {},
                     double xi0 = 0.0);

}  // namespace blayer
