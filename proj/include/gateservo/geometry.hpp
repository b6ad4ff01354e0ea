#pragma once

#include <Eigen/Dense>

#include <array>
#include <optional>

namespace gateservo {

inline constexpr double kPi = 3.14159265358979323846;

/// Wrap an angle to (-pi, pi].
double wrap_angle(double a);

/// Rigid position + yaw in the world frame (z up).
/// Body axes: x forward, y left, z up, rotated about world z by yaw.
struct Pose {
  Eigen::Vector3d position{0.0, 0.0, 0.0};
  double yaw{0.0};
};

/// Pinhole intrinsics. The camera is body-fixed, forward-looking, with no
/// mounting offset: z forward (body x), x right (body -y), y down (body -z).
struct CameraModel {
  double fx{80.0};
  double fy{80.0};
  double cx{80.0};
  double cy{80.0};
  int width{160};
  int height{160};
  double min_depth{0.05};  // corners at or below this depth are invisible
};

/// Sinusoidal displacement applied to a gate center.
struct MotionLaw {
  Eigen::Vector3d axis{0.0, 0.0, 1.0};  // unit vector
  double amplitude{0.0};                // m
  double period{1.0};                   // s
  double phase{0.0};                    // rad

  Eigen::Vector3d displacement(double t) const;
};

/// Square gate: inner opening of side `side` centered on pose.position,
/// lying in the plane orthogonal to the pose's forward axis.
struct GateSpec {
  Pose pose;
  double side{1.0};
  double frame_band{0.05};  // physical frame width around the opening
  std::optional<MotionLaw> motion;

  Pose pose_at(double t) const;
};

/// Pixel coordinates of the four gate corners, ordered TL, TR, BR, BL as
/// seen from the drone's side of the gate plane.
struct FeatureVec {
  std::array<double, 8> coords{};  // u1,v1,u2,v2,u3,v3,u4,v4
  std::array<bool, 4> visible{};

  int visible_count() const;
};

enum class ProjectionMode {
  kExtrapolated,  // keep the mathematical projection outside the image
  kClamped,       // clamp coords into the image rectangle
};

enum class TraversalEvent { kNone, kTraversed, kCollided };

Eigen::Vector3d body_to_world(double yaw, const Eigen::Vector3d& v);
Eigen::Vector3d world_to_body(double yaw, const Eigen::Vector3d& v);

/// Express a world point in the camera frame of a drone at `drone_pose`.
Eigen::Vector3d world_to_camera(const Pose& drone_pose,
                                const Eigen::Vector3d& point);

/// Inverse of the projection: pixel (u,v) at camera depth z back to a world
/// point.
Eigen::Vector3d back_project(const Pose& drone_pose, const CameraModel& cam,
                             double u, double v, double depth);

/// World positions of the gate corners at time t, ordered TL,TR,BR,BL as
/// seen from `viewer`. Viewers exactly on the gate plane see the front-side
/// ordering.
std::array<Eigen::Vector3d, 4> gate_corners(const GateSpec& gate, double t,
                                            const Eigen::Vector3d& viewer);

/// Project the gate corners into the image. A corner with camera depth at or
/// below cam.min_depth is invisible and its coordinates are set to the
/// principal point. In clamped mode, visibility additionally requires the
/// projection to fall inside [0,width-1]x[0,height-1] and coordinates are
/// clamped to that rectangle.
FeatureVec project_corners(const Pose& drone_pose, const GateSpec& gate,
                           double t, const CameraModel& cam,
                           ProjectionMode mode);

/// Classify the segment prev_pos -> new_pos against the gate at time t:
/// kTraversed if it crosses the gate plane inside the opening shrunk by
/// drone_radius, kCollided if the crossing lies within the physical frame
/// band, kNone otherwise (including degenerate zero-length segments).
TraversalEvent traversal_check(const Eigen::Vector3d& prev_pos,
                               const Eigen::Vector3d& new_pos,
                               const GateSpec& gate, double t,
                               double drone_radius = 0.06);

}  // namespace gateservo
