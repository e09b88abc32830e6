#include "footfall/scenario_io.hpp"

#include <optional>

#include "footfall/text_io.hpp"

namespace footfall {

std::string format_footstep(const Footstep& f) {
  return std::string(to_string(f.foot)) + " " + format_double(f.pose.x) + " " +
         format_double(f.pose.y) + " " + format_double(f.pose.theta);
}

Footstep parse_footstep_fields(const std::vector<std::string_view>& fields, std::size_t first,
                               const std::string& source, std::size_t line) {
  if (fields.size() != first + 4) {
    throw ParseError(source, line, "expected '<foot> <x> <y> <theta>'");
  }
  Footstep f;
  f.foot = parse_foot(fields[first], source, line);
  f.pose.x = parse_double(fields[first + 1], source, line);
  f.pose.y = parse_double(fields[first + 2], source, line);
  f.pose.theta = wrap_angle(parse_double(fields[first + 3], source, line));
  return f;
}

std::string format_scenario(const Scenario& sc) {
  std::string out;
  out += "start " + format_footstep(sc.start) + "\n";
  out += "target " + format_footstep(sc.target) + "\n";
  out += "obstacle " + format_double(sc.obstacle.x) + " " + format_double(sc.obstacle.y) + " " +
         format_double(sc.obstacle.rho) + "\n";
  out += "area_half " + format_double(sc.area_half) + "\n";
  return out;
}

Scenario parse_scenario(std::string_view text, const std::string& source) {
  Scenario sc;
  std::optional<Footstep> start;
  std::optional<Footstep> target;
  bool have_obstacle = false;
  bool have_area = false;

  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view raw = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;

    const auto fields = split_fields(strip_comment(raw));
    if (fields.empty()) continue;
    const std::string_view key = fields[0];
    if (key == "start" || key == "target") {
      auto& slot = key == "start" ? start : target;
      if (slot) throw ParseError(source, line_no, "duplicate '" + std::string(key) + "' record");
      slot = parse_footstep_fields(fields, 1, source, line_no);
    } else if (key == "obstacle") {
      if (have_obstacle) throw ParseError(source, line_no, "duplicate 'obstacle' record");
      if (fields.size() != 4) throw ParseError(source, line_no, "expected 'obstacle <x> <y> <rho>'");
      sc.obstacle = {parse_double(fields[1], source, line_no), parse_double(fields[2], source, line_no),
                     parse_double(fields[3], source, line_no)};
      if (sc.obstacle.rho < 0.0) throw ParseError(source, line_no, "obstacle radius must be >= 0");
      have_obstacle = true;
    } else if (key == "area_half") {
      if (have_area) throw ParseError(source, line_no, "duplicate 'area_half' record");
      if (fields.size() != 2) throw ParseError(source, line_no, "expected 'area_half <v>'");
      sc.area_half = parse_double(fields[1], source, line_no);
      if (!(sc.area_half > 0.0)) throw ParseError(source, line_no, "area_half must be > 0");
      have_area = true;
    } else {
      throw ParseError(source, line_no, "unknown record '" + std::string(key) + "'");
    }
  }
  if (!start) throw ParseError(source, 0, "missing 'start' record");
  if (!target) throw ParseError(source, 0, "missing 'target' record");
  sc.start = *start;
  sc.target = *target;
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_text_file(path), path.string());
}

void save_scenario(const std::filesystem::path& path, const Scenario& sc) {
  write_file_atomic(path, format_scenario(sc));
}

}  // namespace footfall
