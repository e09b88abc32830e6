#include "footfall/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace footfall {

double wrap_angle(double angle) {
  double a = std::remainder(angle, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

const char* to_string(Foot foot) { return foot == Foot::Left ? "left" : "right"; }

void FeasibleSet::validate() const {
  if (!(dx_fwd_max > 0.0 && dx_bwd_max > 0.0 && dy_max > 0.0 && dtheta_max > 0.0)) {
    throw std::invalid_argument("feasible set bounds must be strictly positive");
  }
}

double FeasibleSet::radius(const Displacement& d) const {
  const double nx = d.dx / (d.dx >= 0.0 ? dx_fwd_max : dx_bwd_max);
  const double ny = d.dy / dy_max;
  const double nt = d.dtheta / dtheta_max;
  return std::sqrt(nx * nx + ny * ny + nt * nt);
}

void RobotSpec::validate() const {
  feasible.validate();
  if (!(foot_length > 0.0 && foot_width > 0.0)) {
    throw std::invalid_argument("foot dimensions must be strictly positive");
  }
  if (!(f_dist > foot_width)) {
    throw std::invalid_argument("f_dist must exceed the foot width");
  }
}

Pose2 se2_compose(const Pose2& a, const Pose2& b) {
  const double c = std::cos(a.theta);
  const double s = std::sin(a.theta);
  return {a.x + c * b.x - s * b.y, a.y + s * b.x + c * b.y, wrap_angle(a.theta + b.theta)};
}

Pose2 se2_inverse(const Pose2& a) {
  const double c = std::cos(a.theta);
  const double s = std::sin(a.theta);
  return {-(c * a.x + s * a.y), s * a.x - c * a.y, wrap_angle(-a.theta)};
}

Pose2 to_frame(const Pose2& world, const Pose2& ref) {
  // Same as se2_compose(se2_inverse(ref), world) with fewer roundings; the
  // expression is odd in (y, theta) so mirrored inputs give mirrored outputs
  // bit-for-bit.
  const double c = std::cos(ref.theta);
  const double s = std::sin(ref.theta);
  const double dx = world.x - ref.x;
  const double dy = world.y - ref.y;
  return {c * dx + s * dy, c * dy - s * dx, wrap_angle(world.theta - ref.theta)};
}

Displacement clip_to_feasible(const Displacement& d, const FeasibleSet& fs) {
  const double r = fs.radius(d);
  if (r <= 1.0) return d;
  double scale = 1.0 / r;
  Displacement out{d.dx * scale, d.dy * scale, d.dtheta * scale};
  while (fs.radius(out) > 1.0) {
    scale = std::nextafter(scale, 0.0);
    out = {d.dx * scale, d.dy * scale, d.dtheta * scale};
  }
  return out;
}

Footstep apply_displacement(const Footstep& support, const Displacement& d,
                            const RobotSpec& spec) {
  const Pose2 local{d.dx, apply_symmetry(support.foot, spec.f_dist + d.dy),
                    apply_symmetry(support.foot, d.dtheta)};
  return {mirror(support.foot), se2_compose(support.pose, local)};
}

Displacement displacement_between(const Footstep& support, const Footstep& next,
                                  const RobotSpec& spec) {
  const Pose2 local = to_frame(next.pose, support.pose);
  return {local.x, apply_symmetry(support.foot, local.y) - spec.f_dist,
          apply_symmetry(support.foot, local.theta)};
}

bool footstep_collides(const Footstep& f, const Obstacle& o, const RobotSpec& spec) {
  if (!o.enabled()) return false;
  const Pose2 center = to_frame({o.x, o.y, 0.0}, f.pose);
  const double hx = 0.5 * spec.foot_length;
  const double hy = 0.5 * spec.foot_width;
  const double ex = center.x - std::clamp(center.x, -hx, hx);
  const double ey = center.y - std::clamp(center.y, -hy, hy);
  return ex * ex + ey * ey <= o.rho * o.rho;
}

PoseError pose_error(const Footstep& current, const Footstep& target) {
  return {std::hypot(target.pose.x - current.pose.x, target.pose.y - current.pose.y),
          std::abs(wrap_angle(target.pose.theta - current.pose.theta))};
}

Footstep mirror_footstep(const Footstep& f) {
  return {mirror(f.foot), {f.pose.x, -f.pose.y, wrap_angle(-f.pose.theta)}};
}

Obstacle mirror_obstacle(const Obstacle& o) { return {o.x, -o.y, o.rho}; }

}  // namespace footfall
