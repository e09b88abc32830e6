#pragma once

// Planar footstep geometry: SE(2) algebra, displacement integration, the
// left/right symmetry operator, the ellipsoidal feasible set and
// foot/obstacle collision.

#include <numbers>

namespace footfall {

inline constexpr double kPi = std::numbers::pi;

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle to (-pi, pi].
double wrap_angle(double angle);

struct Pose2 {
  double x{0.0};
  double y{0.0};
  double theta{0.0};

  friend bool operator==(const Pose2&, const Pose2&) = default;
};

enum class Foot { Left, Right };

constexpr Foot mirror(Foot foot) {
  return foot == Foot::Left ? Foot::Right : Foot::Left;
}

const char* to_string(Foot foot);

struct Footstep {
  Foot foot{Foot::Right};
  Pose2 pose;

  friend bool operator==(const Footstep&, const Footstep&) = default;
};

/// Pose of the swing foot in the support-foot frame, measured from the
/// nominal lateral offset f_dist. Canonical convention: right support.
struct Displacement {
  double dx{0.0};
  double dy{0.0};
  double dtheta{0.0};

  friend bool operator==(const Displacement&, const Displacement&) = default;
};

/// Ellipsoidal bound on displacements. The x axis uses a different radius
/// for forward and backward steps; both halves share the y and theta radii.
struct FeasibleSet {
  double dx_fwd_max{0.08};
  double dx_bwd_max{0.03};
  double dy_max{0.04};
  double dtheta_max{deg_to_rad(20.0)};

  /// Throws std::invalid_argument unless all bounds are strictly positive.
  void validate() const;

  /// Normalized ellipsoid radius; the displacement is feasible iff <= 1.
  double radius(const Displacement& d) const;
  bool contains(const Displacement& d, double slack = 1e-9) const {
    return radius(d) <= 1.0 + slack;
  }

  friend bool operator==(const FeasibleSet&, const FeasibleSet&) = default;
};

struct RobotSpec {
  double foot_length{0.14};
  double foot_width{0.08};
  double f_dist{0.15};
  FeasibleSet feasible;

  /// Kid-size humanoid defaults (0.14 x 0.08 m feet, 0.15 m apart).
  static RobotSpec sigmaban() { return RobotSpec{}; }

  void validate() const;

  friend bool operator==(const RobotSpec&, const RobotSpec&) = default;
};

/// Disk obstacle. rho == 0 disables it.
struct Obstacle {
  double x{0.0};
  double y{0.0};
  double rho{0.0};

  bool enabled() const { return rho > 0.0; }

  friend bool operator==(const Obstacle&, const Obstacle&) = default;
};

/// Rigid composition: pose b expressed through frame a.
Pose2 se2_compose(const Pose2& a, const Pose2& b);
Pose2 se2_inverse(const Pose2& a);
/// Expresses a world pose in the frame of ref.
Pose2 to_frame(const Pose2& world, const Pose2& ref);

/// Identity for right support, negation for left support.
constexpr double apply_symmetry(Foot support, double value) {
  return support == Foot::Right ? value : -value;
}

/// Radial projection onto the feasible ellipsoid. Inputs already inside are
/// returned unchanged, and outputs are guaranteed inside, so the projection
/// is exactly idempotent.
Displacement clip_to_feasible(const Displacement& d, const FeasibleSet& fs);

/// Places the swing foot. The returned footstep belongs to the other foot.
Footstep apply_displacement(const Footstep& support, const Displacement& d,
                            const RobotSpec& spec);

/// Inverse of apply_displacement: the displacement that moves `support`
/// onto `next` (which must be on the other foot).
Displacement displacement_between(const Footstep& support, const Footstep& next,
                                  const RobotSpec& spec);

/// Oriented foot rectangle vs disk.
bool footstep_collides(const Footstep& f, const Obstacle& o, const RobotSpec& spec);

struct PoseError {
  double delta_p{0.0};
  double delta_theta{0.0};
};

PoseError pose_error(const Footstep& current, const Footstep& target);

/// Reflection about the world x axis, including the foot label.
Footstep mirror_footstep(const Footstep& f);
Obstacle mirror_obstacle(const Obstacle& o);

}  // namespace footfall
