#pragma once

#include <string>
#include <vector>

#include "blayer/layer_system.hpp"
#include "blayer/manifold_tracer.hpp"

namespace blayer::cli {

struct PortraitOptions {
  int trajectories = 4;  ///< generic trajectories per side of the seed grid
  double width = 800.0;
  double height = 600.0;
  double tol_M = kDefaultTolMach;
};

/// SVG phase portrait: nullclines (ids h1, h2), boundary pieces l1-l5,
/// equilibria (eq-O, eq-S1, eq-S2), traced curves (curve-<label>) with their
/// axis endpoints (Z0, Z1, Z2), the tangent line at S1 and generic
/// trajectories (class trajectory). Every element carries its phase-plane
/// coordinates in data-* attributes; the group #plot records the mapping.
std::string render_portrait(const SystemData& s, const std::vector<Curve>& curves, const PortraitOptions& opts = {});

}  // namespace blayer::cli
