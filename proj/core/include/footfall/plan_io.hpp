#pragma once

// Plan text format:
//
//   reached <0|1>
//   <foot> <x> <y> <theta>     one line per footstep, starting with the support
//
// Angles in radians; `#` starts a comment.

#include <filesystem>
#include <string>
#include <string_view>

#include "footfall/plan.hpp"

namespace footfall {

std::string format_plan(const FootstepPlan& plan);
/// The collision count is not stored and reads back as 0.
FootstepPlan parse_plan(std::string_view text, const std::string& source = "<plan>");

FootstepPlan load_plan(const std::filesystem::path& path);
void save_plan(const std::filesystem::path& path, const FootstepPlan& plan);

}  // namespace footfall
