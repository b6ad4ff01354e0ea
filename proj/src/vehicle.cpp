#include "gateservo/vehicle.hpp"

#include <algorithm>
#include <cmath>

namespace gateservo {

DroneState step_dynamics(const DroneState& s, const VelocityCommand& cmd,
                         const VehicleConfig& cfg, double dt) {
  DroneState out = s;
  const Eigen::Vector3d v_target = body_to_world(s.pose.yaw, cmd.v_body);
  const double av = std::exp(-dt / cfg.tau_v);
  const double aw = std::exp(-dt / cfg.tau_w);
  out.v_world = v_target + (s.v_world - v_target) * av;
  out.yaw_rate = cmd.yaw_rate + (s.yaw_rate - cmd.yaw_rate) * aw;
  out.pose.position += out.v_world * dt;
  out.pose.yaw = wrap_angle(out.pose.yaw + out.yaw_rate * dt);
  if (out.pose.position.z() < 0.0) out.pose.position.z() = 0.0;
  out.t = s.t + dt;
  return out;
}

const char* nav_phase_name(NavPhase p) {
  switch (p) {
    case NavPhase::kTakeoff: return "takeoff";
    case NavPhase::kGateNavigation: return "gate_navigation";
    case NavPhase::kForwardAndTurn: return "forward_and_turn";
    case NavPhase::kSearch: return "search";
    case NavPhase::kDone: return "done";
  }
  return "?";
}

namespace {

VelocityCommand search_command(const IbvsResult& ibvs_out) {
  // The IBVS result already carries the spin-in-place command when it is
  // under-determined; reuse it so there is a single definition.
  return ibvs_out.cmd;
}

}  // namespace

NavResult nav_update(const NavState& nav, const DroneState& s,
                     const FeatureVec& perception_out,
                     const IbvsResult& ibvs_out, const NavConfig& cfg) {
  NavResult res;
  res.nav = nav;
  const double period = 1.0 / cfg.control_rate;

  switch (nav.phase) {
    case NavPhase::kTakeoff: {
      if (s.pose.position.z() >= cfg.takeoff_altitude) {
        res.nav.phase = NavPhase::kGateNavigation;
        res.cmd = ibvs_out.cmd;
      } else {
        res.cmd.v_body = {0.0, 0.0, cfg.takeoff_climb_speed};
        res.cmd.yaw_rate = 0.0;
      }
      return res;
    }

    case NavPhase::kGateNavigation: {
      if (ibvs_out.searching) {
        res.nav.phase = NavPhase::kSearch;
        res.cmd = search_command(ibvs_out);
        return res;
      }
      if (ibvs_out.error_px <= cfg.error_threshold_px) {
        res.nav.phase = NavPhase::kForwardAndTurn;
        res.nav.forward_traveled = 0.0;
        res.nav.yaw_turned = 0.0;
        res.nav.target_gate = (nav.target_gate + 1) % std::max(1, cfg.num_gates);
        res.cmd.v_body = {cfg.forward_speed, 0.0, 0.0};
        res.cmd.yaw_rate = 0.0;
        res.nav.forward_traveled += cfg.forward_speed * period;
        return res;
      }
      res.cmd = ibvs_out.cmd;
      return res;
    }

    case NavPhase::kForwardAndTurn: {
      if (nav.forward_traveled < cfg.forward_distance) {
        res.cmd.v_body = {cfg.forward_speed, 0.0, 0.0};
        res.cmd.yaw_rate = 0.0;
        res.nav.forward_traveled += cfg.forward_speed * period;
        return res;
      }
      if (nav.yaw_turned < cfg.turn_angle) {
        res.cmd.v_body.setZero();
        res.cmd.yaw_rate = cfg.turn_rate;
        res.nav.yaw_turned += cfg.turn_rate * period;
        return res;
      }
      res.nav.phase = NavPhase::kGateNavigation;
      res.cmd = ibvs_out.cmd;
      return res;
    }

    case NavPhase::kSearch: {
      if (perception_out.visible_count() >= cfg.min_visible_corners) {
        res.nav.phase = NavPhase::kGateNavigation;
        res.cmd = ibvs_out.cmd;
        return res;
      }
      res.cmd = search_command(ibvs_out);
      return res;
    }

    case NavPhase::kDone: {
      res.cmd = VelocityCommand{};
      return res;
    }
  }
  return res;
}

}  // namespace gateservo
