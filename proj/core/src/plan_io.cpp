#include "footfall/plan_io.hpp"

#include "footfall/scenario_io.hpp"
#include "footfall/text_io.hpp"

namespace footfall {

std::string format_plan(const FootstepPlan& plan) {
  std::string out = plan.reached ? "reached 1\n" : "reached 0\n";
  for (const Footstep& f : plan.steps) out += format_footstep(f) + "\n";
  return out;
}

FootstepPlan parse_plan(std::string_view text, const std::string& source) {
  FootstepPlan plan;
  bool have_header = false;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    const std::string_view raw = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    const auto fields = split_fields(strip_comment(raw));
    if (fields.empty()) continue;
    if (!have_header) {
      if (fields.size() != 2 || fields[0] != "reached" || (fields[1] != "0" && fields[1] != "1")) {
        throw ParseError(source, line_no, "expected header 'reached <0|1>'");
      }
      plan.reached = fields[1] == "1";
      have_header = true;
      continue;
    }
    plan.steps.push_back(parse_footstep_fields(fields, 0, source, line_no));
  }
  if (!have_header) throw ParseError(source, 0, "missing 'reached' header");
  plan.length = plan.steps.empty() ? 0 : static_cast<int>(plan.steps.size()) - 1;
  return plan;
}

FootstepPlan load_plan(const std::filesystem::path& path) {
  return parse_plan(read_text_file(path), path.string());
}

void save_plan(const std::filesystem::path& path, const FootstepPlan& plan) {
  write_file_atomic(path, format_plan(plan));
}

}  // namespace footfall
