#pragma once

// Standalone SVG drawing of a scenario and a footstep plan.

#include <string>
#include <vector>

#include "footfall/env.hpp"
#include "footfall/plan.hpp"

namespace footfall {

struct RenderOptions {
  double pixels_per_meter{150.0};
  double margin_px{20.0};
};

struct RenderResult {
  std::string svg;
  std::vector<std::string> warnings;  // e.g. footsteps outside the arena
};

/// Draws the arena, the obstacle, one rectangle per plan footstep (class
/// "foot left" or "foot right") and the target outline (class "target").
/// Throws std::invalid_argument when a non-empty plan does not start at the
/// scenario's start footstep.
RenderResult render_svg(const Scenario& sc, const FootstepPlan& plan, const RobotSpec& spec,
                        const RenderOptions& opt = {});

}  // namespace footfall
