#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "blayer/existence_engine.hpp"
#include "blayer/manifold_tracer.hpp"

namespace blayer {

/// `index,u,theta`, one row per sample from S1 outward.
void write_curve_csv(std::ostream& os, const Curve& c);

/// Label, terminal kind and point, seed offset, and the samples as [u, theta] pairs.
std::string curve_json(const Curve& c, int indent = 2);

/// `xi,V,U,Theta`.
void write_profile_csv(std::ostream& os, const Profile& p);

/// outcome, reason, regime, mach_plus, curve, distance, decay (null unless given).
std::string verdict_json(const Verdict& v, const std::optional<DecayReport>& decay = std::nullopt, int indent = 2);

}  // namespace blayer
