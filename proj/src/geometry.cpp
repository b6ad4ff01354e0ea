#include "gateservo/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace gateservo {

double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  if (a > kPi) a -= 2.0 * kPi;
  return a;
}

Eigen::Vector3d MotionLaw::displacement(double t) const {
  return axis * (amplitude * std::sin(2.0 * kPi * t / period + phase));
}

Pose GateSpec::pose_at(double t) const {
  Pose p = pose;
  if (motion) p.position += motion->displacement(t);
  return p;
}

int FeatureVec::visible_count() const {
  int n = 0;
  for (bool b : visible) n += b ? 1 : 0;
  return n;
}

Eigen::Vector3d body_to_world(double yaw, const Eigen::Vector3d& v) {
  const double c = std::cos(yaw), s = std::sin(yaw);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y(), v.z()};
}

Eigen::Vector3d world_to_body(double yaw, const Eigen::Vector3d& v) {
  const double c = std::cos(yaw), s = std::sin(yaw);
  return {c * v.x() + s * v.y(), -s * v.x() + c * v.y(), v.z()};
}

Eigen::Vector3d world_to_camera(const Pose& drone_pose,
                                const Eigen::Vector3d& point) {
  const Eigen::Vector3d body =
      world_to_body(drone_pose.yaw, point - drone_pose.position);
  // camera: x right = -body y, y down = -body z, z forward = body x
  return {-body.y(), -body.z(), body.x()};
}

Eigen::Vector3d back_project(const Pose& drone_pose, const CameraModel& cam,
                             double u, double v, double depth) {
  const double xc = (u - cam.cx) / cam.fx * depth;
  const double yc = (v - cam.cy) / cam.fy * depth;
  const Eigen::Vector3d body{depth, -xc, -yc};
  return drone_pose.position + body_to_world(drone_pose.yaw, body);
}

std::array<Eigen::Vector3d, 4> gate_corners(const GateSpec& gate, double t,
                                            const Eigen::Vector3d& viewer) {
  const Pose p = gate.pose_at(t);
  const Eigen::Vector3d normal = body_to_world(p.yaw, {1.0, 0.0, 0.0});
  const Eigen::Vector3d left = body_to_world(p.yaw, {0.0, 1.0, 0.0});
  const Eigen::Vector3d up{0.0, 0.0, 1.0};
  // Seen from the front (+normal side), the viewer's image-left is the
  // gate's -left axis; from the back it flips.
  const double side_sign = (viewer - p.position).dot(normal) >= 0.0 ? 1.0 : -1.0;
  const double h = gate.side / 2.0;
  return {p.position - side_sign * h * left + h * up,
          p.position + side_sign * h * left + h * up,
          p.position + side_sign * h * left - h * up,
          p.position - side_sign * h * left - h * up};
}

FeatureVec project_corners(const Pose& drone_pose, const GateSpec& gate,
                           double t, const CameraModel& cam,
                           ProjectionMode mode) {
  FeatureVec fv;
  const auto corners = gate_corners(gate, t, drone_pose.position);
  for (int i = 0; i < 4; ++i) {
    const Eigen::Vector3d pc = world_to_camera(drone_pose, corners[i]);
    if (pc.z() <= cam.min_depth) {
      fv.coords[2 * i] = cam.cx;
      fv.coords[2 * i + 1] = cam.cy;
      fv.visible[i] = false;
      continue;
    }
    double u = cam.cx + cam.fx * pc.x() / pc.z();
    double v = cam.cy + cam.fy * pc.y() / pc.z();
    bool vis = true;
    if (mode == ProjectionMode::kClamped) {
      const double umax = cam.width - 1.0, vmax = cam.height - 1.0;
      vis = u >= 0.0 && u <= umax && v >= 0.0 && v <= vmax;
      u = std::clamp(u, 0.0, umax);
      v = std::clamp(v, 0.0, vmax);
    }
    fv.coords[2 * i] = u;
    fv.coords[2 * i + 1] = v;
    fv.visible[i] = vis;
  }
  return fv;
}

TraversalEvent traversal_check(const Eigen::Vector3d& prev_pos,
                               const Eigen::Vector3d& new_pos,
                               const GateSpec& gate, double t,
                               double drone_radius) {
  if (prev_pos == new_pos) return TraversalEvent::kNone;
  const Pose p = gate.pose_at(t);
  const Eigen::Vector3d normal = body_to_world(p.yaw, {1.0, 0.0, 0.0});
  const double d0 = (prev_pos - p.position).dot(normal);
  const double d1 = (new_pos - p.position).dot(normal);
  // Symmetric crossing test so that reversing the segment reports the same
  // event class; endpoints exactly on the plane count as touching it.
  const bool crosses =
      (d0 < 0.0 && d1 > 0.0) || (d0 > 0.0 && d1 < 0.0) ||
      ((d0 == 0.0) != (d1 == 0.0));
  if (!crosses) return TraversalEvent::kNone;
  const double s = d0 / (d0 - d1);
  const Eigen::Vector3d hit = prev_pos + s * (new_pos - prev_pos);
  const Eigen::Vector3d local = world_to_body(p.yaw, hit - p.position);
  const double r = std::max(std::abs(local.y()), std::abs(local.z()));
  const double opening = gate.side / 2.0 - drone_radius;
  const double outer = gate.side / 2.0 + gate.frame_band;
  if (r <= opening) return TraversalEvent::kTraversed;
  if (r <= outer) return TraversalEvent::kCollided;
  return TraversalEvent::kNone;
}

}  // namespace gateservo
