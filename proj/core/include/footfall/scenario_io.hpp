#pragma once

// Scenario text format, one record per file:
//
//   start <foot> <x> <y> <theta>
//   target <foot> <x> <y> <theta>
//   obstacle <x> <y> <rho>
//   area_half <v>
//
// Angles in radians; `#` starts a comment. The obstacle and area_half lines
// are optional (no obstacle, 2.0 m).

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "footfall/env.hpp"

namespace footfall {

std::string format_scenario(const Scenario& sc);
Scenario parse_scenario(std::string_view text, const std::string& source = "<scenario>");

Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const std::filesystem::path& path, const Scenario& sc);

std::string format_footstep(const Footstep& f);
/// Parses `<foot> <x> <y> <theta>` from already-split fields.
Footstep parse_footstep_fields(const std::vector<std::string_view>& fields, std::size_t first,
                               const std::string& source, std::size_t line);

}  // namespace footfall
