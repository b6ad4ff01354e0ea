#pragma once

#include "gateservo/geometry.hpp"
#include "gateservo/perception.hpp"
#include "gateservo/servoing.hpp"
#include "gateservo/vehicle.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace gateservo {

struct Scenario {
  std::string name{"scenario"};
  std::vector<GateSpec> gates;
  Pose start_pose;
  double duration{240.0};  // s
  std::uint64_t seed{0};
  double drone_radius{0.06};  // m
  CameraModel camera;
  PerceptionConfig perception;
  IbvsConfig ibvs;
  VehicleConfig vehicle;
  NavConfig nav;

  /// Throws std::invalid_argument naming the violated constraint.
  void validate() const;
};

struct LogRow {
  double t{0.0};
  Eigen::Vector3d position{0.0, 0.0, 0.0};
  double yaw{0.0};
  Eigen::Vector3d v_world{0.0, 0.0, 0.0};
  double yaw_rate{0.0};
  NavPhase phase{NavPhase::kTakeoff};
  double error_px{0.0};
  int n_visible{0};
  int target_gate{0};
};

struct TrajectoryLog {
  std::vector<LogRow> rows;

  void write_csv(std::ostream& os) const;
  std::string to_csv() const;
};

struct RunMetrics {
  int gates_passed{0};
  double distance{0.0};    // polyline length of the logged trajectory, m
  double peak_speed{0.0};  // m/s
  bool crashed{false};
  bool success{false};
  double elapsed{0.0};  // s
  std::vector<double> traversal_times;  // s, one entry per gate passed

  std::string to_json() const;
};

struct RunResult {
  RunMetrics metrics;
  TrajectoryLog log;
};

/// Execute the closed loop (project -> perceive -> ibvs -> nav -> dynamics)
/// until the duration elapses or the drone crashes (gate-frame strike, or
/// ground contact outside takeoff).
RunResult run_scenario(const Scenario& sc);

/// Deterministic per-run seed derivation (splitmix64 over seed and stream).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

struct OrientationRow {
  double orientation_deg{0.0};
  int repeats{0};
  int successes{0};          // runs that traversed the gate without crashing
  double avg_time{0.0};      // mean first-traversal time over successful runs
  double best_time{0.0};     // min first-traversal time (NaN if no success)
  double avg_gates{0.0};
  int best_gates{0};
  double avg_distance{0.0};
  double best_distance{0.0};
};

/// Repeat the base scenario from a ring of start poses around the first
/// gate: for each bearing, the drone starts `approach_distance` along that
/// bearing from the gate, on the ground, facing the gate center.
std::vector<OrientationRow> orientation_experiment(
    const Scenario& base, std::span<const double> orientations_deg,
    int repeats, double approach_distance = 2.0);

/// Start pose used by orientation_experiment for one bearing.
Pose orientation_start_pose(const GateSpec& gate, double orientation_deg,
                            double approach_distance);

/// Attach the motion law to every gate and run.
RunResult moving_gate_experiment(const Scenario& base, const MotionLaw& motion);

}  // namespace gateservo
