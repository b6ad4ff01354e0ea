#pragma once

#include "gateservo/geometry.hpp"
#include "gateservo/servoing.hpp"

namespace gateservo {

struct DroneState {
  Pose pose;
  Eigen::Vector3d v_world{0.0, 0.0, 0.0};
  double yaw_rate{0.0};
  double t{0.0};
};

/// First-order velocity-tracking lag standing in for the PID cascade.
struct VehicleConfig {
  double tau_v{0.15};       // linear velocity time constant, s
  double tau_w{0.1};        // yaw rate time constant, s
  double physics_dt{0.01};  // s
  double control_rate{30.0};  // Hz
};

/// Advance the state by dt: rotate the body command to world by the current
/// yaw, relax velocities exponentially toward it, then integrate position
/// and yaw semi-implicitly. Altitude is floored at the ground plane.
DroneState step_dynamics(const DroneState& s, const VelocityCommand& cmd,
                         const VehicleConfig& cfg, double dt);

inline DroneState step_dynamics(const DroneState& s, const VelocityCommand& cmd,
                                const VehicleConfig& cfg) {
  return step_dynamics(s, cmd, cfg, cfg.physics_dt);
}

enum class NavPhase { kTakeoff, kGateNavigation, kForwardAndTurn, kSearch, kDone };

const char* nav_phase_name(NavPhase p);

struct NavConfig {
  double takeoff_climb_speed{0.5};  // m/s
  double takeoff_altitude{1.0};     // m
  double forward_speed{0.8};        // m/s, open-loop forward leg
  double forward_distance{1.0};     // m
  double turn_rate{1.5};            // rad/s
  double turn_angle{kPi};           // rad
  double error_threshold_px{8.0};
  int min_visible_corners{2};
  int num_gates{1};
  double control_rate{30.0};        // Hz; one nav_update per control period
};

struct NavState {
  NavPhase phase{NavPhase::kTakeoff};
  double forward_traveled{0.0};  // commanded forward progress, m
  double yaw_turned{0.0};        // commanded yaw progress, rad
  int target_gate{0};
};

struct NavResult {
  NavState nav;
  VelocityCommand cmd;
};

/// One state-machine update per control tick. At most one phase transition
/// per call; the emitted command belongs to the post-transition phase.
NavResult nav_update(const NavState& nav, const DroneState& s,
                     const FeatureVec& perception_out,
                     const IbvsResult& ibvs_out, const NavConfig& cfg);

}  // namespace gateservo
