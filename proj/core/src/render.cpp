#include "footfall/render.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace footfall {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s(buf);
  if (s == "-0.000") s = "0.000";
  return s;
}

class Canvas {
 public:
  Canvas(double area_half, const RenderOptions& opt) : a_(area_half), opt_(opt) {}

  double size() const { return 2.0 * a_ * opt_.pixels_per_meter + 2.0 * opt_.margin_px; }
  double px(double x) const { return opt_.margin_px + (x + a_) * opt_.pixels_per_meter; }
  double py(double y) const { return opt_.margin_px + (a_ - y) * opt_.pixels_per_meter; }
  double len(double d) const { return d * opt_.pixels_per_meter; }

  std::string foot_rect(const Footstep& f, const RobotSpec& spec, const std::string& attrs) const {
    const double cx = px(f.pose.x);
    const double cy = py(f.pose.y);
    const double w = len(spec.foot_length);
    const double h = len(spec.foot_width);
    return "<rect " + attrs + " x=\"" + num(cx - 0.5 * w) + "\" y=\"" + num(cy - 0.5 * h) + "\" width=\"" +
           num(w) + "\" height=\"" + num(h) + "\" transform=\"rotate(" + num(-rad_to_deg(f.pose.theta)) + " " +
           num(cx) + " " + num(cy) + ")\"/>\n";
  }

 private:
  double a_;
  RenderOptions opt_;
};

bool same_footstep(const Footstep& a, const Footstep& b) {
  const PoseError e = pose_error(a, b);
  return a.foot == b.foot && e.delta_p <= 1e-6 && e.delta_theta <= 1e-6;
}

}  // namespace

RenderResult render_svg(const Scenario& sc, const FootstepPlan& plan, const RobotSpec& spec,
                        const RenderOptions& opt) {
  if (!plan.steps.empty() && !same_footstep(plan.steps.front(), sc.start)) {
    throw std::invalid_argument("plan does not start at the scenario's start footstep");
  }
  RenderResult out;
  const Canvas c(sc.area_half, opt);
  const std::string size = num(c.size());
  std::string& svg = out.svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + size + "\" height=\"" + size +
         "\" viewBox=\"0 0 " + size + " " + size + "\">\n";
  svg += "<rect class=\"arena\" x=\"" + num(c.px(-sc.area_half)) + "\" y=\"" + num(c.py(sc.area_half)) +
         "\" width=\"" + num(c.len(2.0 * sc.area_half)) + "\" height=\"" + num(c.len(2.0 * sc.area_half)) +
         "\" fill=\"#f4f4f0\" stroke=\"#333333\" stroke-width=\"2\"/>\n";
  if (sc.obstacle.enabled()) {
    svg += "<circle class=\"obstacle\" cx=\"" + num(c.px(sc.obstacle.x)) + "\" cy=\"" + num(c.py(sc.obstacle.y)) +
           "\" r=\"" + num(c.len(sc.obstacle.rho)) + "\" fill=\"#888888\"/>\n";
  }
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const Footstep& f = plan.steps[i];
    if (std::abs(f.pose.x) > sc.area_half || std::abs(f.pose.y) > sc.area_half) {
      out.warnings.push_back("footstep " + std::to_string(i) + " lies outside the arena");
    }
    const bool left = f.foot == Foot::Left;
    svg += c.foot_rect(f, spec,
                       std::string("class=\"foot ") + (left ? "left" : "right") + "\" fill=\"" +
                           (left ? "#3b6fd1" : "#d1453b") + "\" fill-opacity=\"0.6\" stroke=\"#222222\"");
  }
  svg += c.foot_rect(sc.target, spec,
                     "class=\"target\" fill=\"none\" stroke=\"#1a8a2e\" stroke-width=\"2\" stroke-dasharray=\"4 2\"");
  svg += "</svg>\n";
  return out;
}

}  // namespace footfall
