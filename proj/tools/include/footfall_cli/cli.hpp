#pragma once

// The fsn command-line interface, callable in-process.

#include <iosfwd>
#include <string>
#include <vector>

#include "footfall/bench.hpp"

namespace footfall::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;      // malformed input, I/O or runtime error
inline constexpr int kUsage = 2;        // bad or missing flags
inline constexpr int kNotReached = 3;   // `plan --full` without reaching the target

/// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Radians, or degrees with a `deg` suffix ("30deg").
double parse_angle(const std::string& text);

std::string format_planning_summary(const PlanStats& stats);
std::string format_forecast_summary(const ForecastStats& stats, Situation situation, double rho);

}  // namespace footfall::cli
