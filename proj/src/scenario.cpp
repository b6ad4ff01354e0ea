#include "gateservo/scenario.hpp"

#include "gateservo/log.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace gateservo {

namespace {

void append_double(std::string& out, double v) {
  char buf[40];
  const auto res =
      std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 12);
  out.append(buf, res.ptr);
}

ProjectionMode projection_mode_for(const PerceptionConfig& cfg) {
  // The heatmap codec only represents in-image coordinates; the regression
  // front-ends can output out-of-frame ones.
  return cfg.kind == PerceptionKind::kFeatureMap ? ProjectionMode::kClamped
                                                 : ProjectionMode::kExtrapolated;
}

}  // namespace

void Scenario::validate() const {
  if (gates.empty()) throw std::invalid_argument("scenario: at least one gate required");
  if (!(duration > 0.0)) throw std::invalid_argument("scenario: duration must be > 0");
  if (!(drone_radius >= 0.0)) throw std::invalid_argument("scenario: drone_radius must be >= 0");
  if (!(camera.fx > 0.0) || !(camera.fy > 0.0)) {
    throw std::invalid_argument("camera: focal lengths must be > 0");
  }
  if (camera.cx < 0.0 || camera.cx >= camera.width || camera.cy < 0.0 ||
      camera.cy >= camera.height) {
    throw std::invalid_argument("camera: principal point must lie inside the image");
  }
  for (const auto& g : gates) {
    if (!(g.side > 0.0)) throw std::invalid_argument("gate: side must be > 0");
    if (!(g.frame_band >= 0.0)) throw std::invalid_argument("gate: frame_band must be >= 0");
    if (g.motion) {
      if (!(g.motion->period > 0.0)) throw std::invalid_argument("motion: period must be > 0");
      if (!(g.motion->amplitude >= 0.0)) throw std::invalid_argument("motion: amplitude must be >= 0");
      if (std::abs(g.motion->axis.norm() - 1.0) > 1e-6) {
        throw std::invalid_argument("motion: axis must have unit norm");
      }
    }
  }
  if (!(perception.sigma_px >= 0.0)) throw std::invalid_argument("perception: sigma_px must be >= 0");
  if (perception.map_size < 2) throw std::invalid_argument("perception: map_size must be >= 2");
  if (perception.latency_steps < 0) throw std::invalid_argument("perception: latency_steps must be >= 0");
  if (!(ibvs.lambda > 0.0)) throw std::invalid_argument("ibvs: lambda must be > 0");
  if (!(ibvs.depth_assumed > 0.0)) throw std::invalid_argument("ibvs: depth_assumed must be > 0");
  if (!(ibvs.error_threshold_px > 0.0)) throw std::invalid_argument("ibvs: error_threshold_px must be > 0");
  if (ibvs.min_visible_corners < 1 || ibvs.min_visible_corners > 4) {
    throw std::invalid_argument("ibvs: min_visible_corners must be in [1,4]");
  }
  if (!(vehicle.tau_v > 0.0) || !(vehicle.tau_w > 0.0)) {
    throw std::invalid_argument("vehicle: time constants must be > 0");
  }
  if (!(vehicle.physics_dt > 0.0)) throw std::invalid_argument("vehicle: physics_dt must be > 0");
  if (!(vehicle.control_rate > 0.0)) throw std::invalid_argument("vehicle: control_rate must be > 0");
  if (vehicle.physics_dt > 1.0 / vehicle.control_rate + 1e-12) {
    throw std::invalid_argument("vehicle: physics_dt must be <= control period");
  }
}

void TrajectoryLog::write_csv(std::ostream& os) const { os << to_csv(); }

std::string TrajectoryLog::to_csv() const {
  std::string out = "t,x,y,z,yaw,vx,vy,vz,yaw_rate,phase,err_px,n_visible,target_gate\n";
  for (const auto& r : rows) {
    append_double(out, r.t);
    out.push_back(',');
    append_double(out, r.position.x());
    out.push_back(',');
    append_double(out, r.position.y());
    out.push_back(',');
    append_double(out, r.position.z());
    out.push_back(',');
    append_double(out, r.yaw);
    out.push_back(',');
    append_double(out, r.v_world.x());
    out.push_back(',');
    append_double(out, r.v_world.y());
    out.push_back(',');
    append_double(out, r.v_world.z());
    out.push_back(',');
    append_double(out, r.yaw_rate);
    out.push_back(',');
    out.append(nav_phase_name(r.phase));
    out.push_back(',');
    append_double(out, r.error_px);
    out.push_back(',');
    out.append(std::to_string(r.n_visible));
    out.push_back(',');
    out.append(std::to_string(r.target_gate));
    out.push_back('\n');
  }
  return out;
}

std::string RunMetrics::to_json() const {
  nlohmann::json j;
  j["gates_passed"] = gates_passed;
  j["distance"] = distance;
  j["peak_speed"] = peak_speed;
  j["crashed"] = crashed;
  j["success"] = success;
  j["elapsed"] = elapsed;
  j["traversal_times"] = traversal_times;
  return j.dump(2);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

RunResult run_scenario(const Scenario& sc) {
  sc.validate();

  NavConfig nav_cfg = sc.nav;
  nav_cfg.num_gates = static_cast<int>(sc.gates.size());
  nav_cfg.control_rate = sc.vehicle.control_rate;
  nav_cfg.error_threshold_px = sc.ibvs.error_threshold_px;
  nav_cfg.min_visible_corners = sc.ibvs.min_visible_corners;

  const ProjectionMode proj_mode = projection_mode_for(sc.perception);
  const double period = 1.0 / sc.vehicle.control_rate;

  GaussianSampler rng(sc.perception.seed != 0 ? sc.perception.seed : sc.seed);
  DroneState state;
  state.pose = sc.start_pose;
  NavState nav;
  NavPhase last_phase = nav.phase;

  RunResult res;
  std::vector<FeatureVec> perception_history;
  double err_px = std::numeric_limits<double>::infinity();
  int n_visible = 0;

  while (!res.metrics.crashed && state.t < sc.duration - 1e-9) {
    const int target = nav.target_gate;
    const FeatureVec truth =
        project_corners(state.pose, sc.gates[target], state.t, sc.camera, proj_mode);
    perception_history.push_back(perceive(truth, sc.perception, rng));
    const std::size_t newest = perception_history.size() - 1;
    const std::size_t idx =
        newest >= static_cast<std::size_t>(sc.perception.latency_steps)
            ? newest - sc.perception.latency_steps
            : 0;
    const FeatureVec& measured = perception_history[idx];

    const FeatureVec desired =
        desired_features(sc.gates[target].side, sc.ibvs.depth_assumed, sc.camera);
    const IbvsResult ibvs_out = ibvs_step(measured, desired, sc.ibvs, sc.camera);
    const NavResult nres = nav_update(nav, state, measured, ibvs_out, nav_cfg);
    nav = nres.nav;
    err_px = ibvs_out.error_px;
    n_visible = measured.visible_count();

    if (nav.phase != last_phase) {
      log::debug("t=%.3f phase %s -> %s (target gate %d, err %.2f px)", state.t,
                 nav_phase_name(last_phase), nav_phase_name(nav.phase),
                 nav.target_gate, err_px);
      last_phase = nav.phase;
    }

    res.log.rows.push_back({state.t, state.pose.position, state.pose.yaw,
                            state.v_world, state.yaw_rate, nav.phase, err_px,
                            n_visible, nav.target_gate});

    // Physics substeps with zero-order hold on the command.
    double remaining = period;
    while (remaining > 1e-12 && !res.metrics.crashed) {
      const double dt = std::min(sc.vehicle.physics_dt, remaining);
      const Eigen::Vector3d prev = state.pose.position;
      state = step_dynamics(state, nres.cmd, sc.vehicle, dt);
      remaining -= dt;

      for (const auto& gate : sc.gates) {
        const TraversalEvent ev = traversal_check(prev, state.pose.position,
                                                  gate, state.t, sc.drone_radius);
        if (ev == TraversalEvent::kTraversed) {
          res.metrics.gates_passed += 1;
          res.metrics.traversal_times.push_back(state.t);
          log::debug("t=%.3f gate traversed (%d total)", state.t,
                     res.metrics.gates_passed);
        } else if (ev == TraversalEvent::kCollided) {
          res.metrics.crashed = true;
          log::info("t=%.3f gate frame collision", state.t);
        }
      }
      if (state.pose.position.z() <= 0.0 && nav.phase != NavPhase::kTakeoff) {
        res.metrics.crashed = true;
        log::info("t=%.3f ground contact", state.t);
      }
      res.metrics.peak_speed =
          std::max(res.metrics.peak_speed, state.v_world.norm());
    }
  }

  res.log.rows.push_back({state.t, state.pose.position, state.pose.yaw,
                          state.v_world, state.yaw_rate, nav.phase, err_px,
                          n_visible, nav.target_gate});

  for (std::size_t i = 1; i < res.log.rows.size(); ++i) {
    res.metrics.distance +=
        (res.log.rows[i].position - res.log.rows[i - 1].position).norm();
  }
  res.metrics.elapsed = state.t;
  res.metrics.success =
      !res.metrics.crashed && state.t >= sc.duration - 1e-9;
  return res;
}

Pose orientation_start_pose(const GateSpec& gate, double orientation_deg,
                            double approach_distance) {
  const double theta = orientation_deg * kPi / 180.0;
  const Eigen::Vector3d normal = body_to_world(gate.pose.yaw, {1.0, 0.0, 0.0});
  const Eigen::Vector3d bearing = body_to_world(theta, normal);
  Pose start;
  start.position = gate.pose.position + approach_distance * bearing;
  start.position.z() = 0.0;
  start.yaw = std::atan2(gate.pose.position.y() - start.position.y(),
                         gate.pose.position.x() - start.position.x());
  return start;
}

std::vector<OrientationRow> orientation_experiment(
    const Scenario& base, std::span<const double> orientations_deg,
    int repeats, double approach_distance) {
  if (repeats < 1) throw std::invalid_argument("orientation: repeats must be >= 1");
  if (base.gates.empty()) throw std::invalid_argument("scenario: at least one gate required");

  std::vector<OrientationRow> table;
  for (std::size_t oi = 0; oi < orientations_deg.size(); ++oi) {
    OrientationRow row;
    row.orientation_deg = orientations_deg[oi];
    row.repeats = repeats;
    row.best_time = std::numeric_limits<double>::quiet_NaN();
    double time_sum = 0.0;
    for (int rep = 0; rep < repeats; ++rep) {
      Scenario sc = base;
      sc.start_pose = orientation_start_pose(base.gates[0], orientations_deg[oi],
                                             approach_distance);
      sc.seed = derive_seed(base.seed, oi * static_cast<std::uint64_t>(repeats) + rep);
      sc.perception.seed = 0;  // all randomness flows from the scenario seed
      const RunResult run = run_scenario(sc);
      const bool ok = run.metrics.gates_passed >= 1 && !run.metrics.crashed;
      row.avg_gates += run.metrics.gates_passed;
      row.best_gates = std::max(row.best_gates, run.metrics.gates_passed);
      row.avg_distance += run.metrics.distance;
      row.best_distance = std::max(row.best_distance, run.metrics.distance);
      if (ok) {
        row.successes += 1;
        const double t0 = run.metrics.traversal_times.front();
        time_sum += t0;
        row.best_time = std::isnan(row.best_time) ? t0 : std::min(row.best_time, t0);
      }
    }
    row.avg_gates /= repeats;
    row.avg_distance /= repeats;
    row.avg_time = row.successes > 0 ? time_sum / row.successes
                                     : std::numeric_limits<double>::quiet_NaN();
    table.push_back(row);
  }
  return table;
}

RunResult moving_gate_experiment(const Scenario& base, const MotionLaw& motion) {
  Scenario sc = base;
  for (auto& g : sc.gates) g.motion = motion;
  return run_scenario(sc);
}

}  // namespace gateservo
