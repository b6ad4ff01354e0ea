#include <doctest.h>

#include "gateservo/scenario.hpp"

#include <json.hpp>

#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace gateservo;

namespace {

Scenario frontal(double start_x = 2.5, double duration = 15.0) {
  Scenario sc;
  sc.name = "frontal-test";
  GateSpec g;
  g.pose.position = {0.0, 0.0, 1.0};
  sc.gates.push_back(g);
  sc.start_pose.position = {start_x, 0.0, 0.0};
  sc.start_pose.yaw = kPi;
  sc.duration = duration;
  sc.seed = 7;
  return sc;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

TEST_CASE("validate names the violated constraint") {
  Scenario sc = frontal();
  CHECK_NOTHROW(sc.validate());

  Scenario bad = sc;
  bad.gates.clear();
  CHECK_THROWS_WITH_AS(bad.validate(), "scenario: at least one gate required",
                       std::invalid_argument);
  bad = sc;
  bad.duration = 0.0;
  CHECK_THROWS_WITH_AS(bad.validate(), "scenario: duration must be > 0",
                       std::invalid_argument);
  bad = sc;
  bad.gates[0].side = -1.0;
  CHECK_THROWS_WITH_AS(bad.validate(), "gate: side must be > 0",
                       std::invalid_argument);
  bad = sc;
  bad.ibvs.lambda = 0.0;
  CHECK_THROWS_WITH_AS(bad.validate(), "ibvs: lambda must be > 0",
                       std::invalid_argument);
  bad = sc;
  bad.vehicle.physics_dt = 0.5;  // above the control period
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = sc;
  MotionLaw m;
  m.axis = {0.0, 2.0, 0.0};
  bad.gates[0].motion = m;
  CHECK_THROWS_WITH_AS(bad.validate(), "motion: axis must have unit norm",
                       std::invalid_argument);
  bad = sc;
  bad.perception.latency_steps = -1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("derived seeds are deterministic and well spread") {
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 4; ++s) {
    for (std::uint64_t i = 0; i < 64; ++i) seen.insert(derive_seed(s, i));
  }
  CHECK(seen.size() == 256);
}

TEST_CASE("frontal oracle run takes off, converges, and traverses") {
  const RunResult rr = run_scenario(frontal());
  CHECK_FALSE(rr.metrics.crashed);
  CHECK(rr.metrics.success);
  CHECK(rr.metrics.gates_passed >= 1);
  REQUIRE_FALSE(rr.metrics.traversal_times.empty());
  CHECK(rr.metrics.traversal_times.front() < 15.0);
  CHECK(rr.metrics.elapsed == doctest::Approx(15.0).epsilon(1e-6));
  CHECK(rr.metrics.distance > 2.0);
  CHECK(rr.metrics.peak_speed <= 2.0 + 1e-9);
  CHECK(rr.metrics.peak_speed > 0.3);

  // one row per control tick plus the terminal row
  REQUIRE(rr.log.rows.size() == 451);
  for (std::size_t i = 0; i < 451; ++i) {
    CHECK(rr.log.rows[i].t == doctest::Approx(i / 30.0).epsilon(1e-9));
  }
  // the run starts in takeoff and must reach forward_and_turn at some point
  CHECK(rr.log.rows[0].phase == NavPhase::kTakeoff);
  bool saw_ft = false, saw_low_err = false;
  for (const auto& row : rr.log.rows) {
    saw_ft = saw_ft || row.phase == NavPhase::kForwardAndTurn;
    saw_low_err = saw_low_err || row.error_px <= 8.0;
  }
  CHECK(saw_ft);
  CHECK(saw_low_err);
}

TEST_CASE("trajectory csv has the pinned header and parses row by row") {
  const RunResult rr = run_scenario(frontal(2.0, 3.0));
  const std::string csv = rr.log.to_csv();
  std::istringstream is(csv);
  std::string line;
  REQUIRE(std::getline(is, line));
  CHECK(line == "t,x,y,z,yaw,vx,vy,vz,yaw_rate,phase,err_px,n_visible,target_gate");
  std::size_t rows = 0;
  const std::set<std::string> phases{"takeoff", "gate_navigation",
                                     "forward_and_turn", "search", "done"};
  while (std::getline(is, line)) {
    const auto f = split(line, ',');
    REQUIRE(f.size() == 13);
    CHECK(line.find(' ') == std::string::npos);
    CHECK(phases.count(f[9]) == 1);
    CHECK(std::stod(f[0]) >= 0.0);
    CHECK(std::stoi(f[12]) == 0);
    ++rows;
  }
  CHECK(rows == rr.log.rows.size());

  // write_csv goes through the same serializer
  std::ostringstream os;
  rr.log.write_csv(os);
  CHECK(os.str() == csv);
}

TEST_CASE("metrics serialize with the exact field names") {
  const RunResult rr = run_scenario(frontal(2.0, 2.0));
  const nlohmann::json j = nlohmann::json::parse(rr.metrics.to_json());
  REQUIRE(j.is_object());
  CHECK(j.size() == 7);
  CHECK(j.contains("gates_passed"));
  CHECK(j.contains("distance"));
  CHECK(j.contains("peak_speed"));
  CHECK(j.contains("crashed"));
  CHECK(j.contains("success"));
  CHECK(j.contains("elapsed"));
  CHECK(j.contains("traversal_times"));
  CHECK(j["gates_passed"].is_number_integer());
  CHECK(j["crashed"].is_boolean());
  CHECK(j["traversal_times"].is_array());
}

TEST_CASE("identical seeds reproduce byte-identical logs") {
  Scenario sc = frontal();
  sc.perception.kind = PerceptionKind::kGaussianNoise;
  sc.perception.sigma_px = 2.0;
  sc.duration = 6.0;
  const RunResult a = run_scenario(sc);
  const RunResult b = run_scenario(sc);
  CHECK(a.log.to_csv() == b.log.to_csv());
  CHECK(a.metrics.to_json() == b.metrics.to_json());

  Scenario other = sc;
  other.seed = 8;
  const RunResult c = run_scenario(other);
  CHECK(a.log.to_csv() != c.log.to_csv());
}

TEST_CASE("ground contact after takeoff crashes the run") {
  Scenario sc = frontal();
  // a half-buried gate forces the servo to descend through the floor
  sc.gates[0].pose.position.z() = -0.2;
  const RunResult rr = run_scenario(sc);
  CHECK(rr.metrics.crashed);
  CHECK_FALSE(rr.metrics.success);
  CHECK(rr.metrics.elapsed < sc.duration);
  CHECK(rr.log.rows.size() >= 2);
  // the terminal row records the crash time: some whole number of physics
  // substeps past the start of its control period
  const double t_last = rr.log.rows.back().t;
  const double period = 1.0 / sc.vehicle.control_rate;
  const double into_period = t_last - std::floor(t_last / period) * period;
  const double steps = into_period / sc.vehicle.physics_dt;
  CHECK(std::abs(steps - std::round(steps)) < 1e-6);
  CHECK(steps < period / sc.vehicle.physics_dt + 1.0);
}

TEST_CASE("an oversized drone collides with the gate frame") {
  Scenario sc = frontal();
  sc.drone_radius = 0.5;  // opening shrinks to nothing
  const RunResult rr = run_scenario(sc);
  CHECK(rr.metrics.crashed);
  CHECK(rr.metrics.gates_passed == 0);
  CHECK_FALSE(rr.metrics.success);
}

TEST_CASE("tiny duration yields a single-row trivial run") {
  Scenario sc = frontal();
  sc.duration = 1e-9;
  const RunResult rr = run_scenario(sc);
  CHECK(rr.metrics.gates_passed == 0);
  CHECK(rr.metrics.distance == 0.0);
  CHECK(rr.metrics.success);
  CHECK(rr.log.rows.size() == 1);
}

TEST_CASE("perception latency delays the control reaction") {
  Scenario sc = frontal();
  sc.perception.latency_steps = 0;
  const RunResult fresh = run_scenario(sc);
  sc.perception.latency_steps = 8;
  const RunResult stale = run_scenario(sc);
  CHECK_FALSE(stale.metrics.crashed);
  CHECK(stale.metrics.gates_passed >= 1);
  // identical physics, different information: trajectories must differ
  CHECK(fresh.log.to_csv() != stale.log.to_csv());
}

TEST_CASE("orientation start poses ring the gate and face its center") {
  GateSpec g;
  g.pose.position = {0.0, 0.0, 1.0};
  const Pose p0 = orientation_start_pose(g, 0.0, 2.0);
  CHECK(p0.position.x() == doctest::Approx(2.0));
  CHECK(p0.position.y() == doctest::Approx(0.0));
  CHECK(p0.position.z() == 0.0);
  CHECK(p0.yaw == doctest::Approx(kPi));

  const Pose p90 = orientation_start_pose(g, 90.0, 2.0);
  CHECK(p90.position.x() == doctest::Approx(0.0));
  CHECK(p90.position.y() == doctest::Approx(2.0));
  CHECK(p90.yaw == doctest::Approx(-kPi / 2.0));

  GateSpec rotated = g;
  rotated.pose.yaw = kPi / 2.0;
  const Pose pr = orientation_start_pose(rotated, 0.0, 3.0);
  CHECK(pr.position.x() == doctest::Approx(0.0));
  CHECK(pr.position.y() == doctest::Approx(3.0));
}

TEST_CASE("orientation experiment reports one row per bearing") {
  Scenario sc = frontal();
  sc.duration = 15.0;
  const std::vector<double> bearings{-45.0, 0.0, 45.0};
  const auto rows = orientation_experiment(sc, bearings, 2, 2.0);
  REQUIRE(rows.size() == 3);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].orientation_deg == bearings[i]);
    CHECK(rows[i].repeats == 2);
    CHECK(rows[i].successes == 2);  // oracle perception cannot fail
    CHECK(rows[i].avg_gates >= 1.0);
    CHECK(rows[i].best_gates >= 1);
    CHECK(rows[i].best_time <= rows[i].avg_time + 1e-12);
    CHECK(rows[i].avg_time < 15.0);
    CHECK(rows[i].avg_distance > 0.0);
    CHECK(rows[i].best_distance >= rows[i].avg_distance - 1e-12);
  }
  CHECK_THROWS_AS((void)orientation_experiment(sc, bearings, 0, 2.0),
                  std::invalid_argument);
}

TEST_CASE("moving-gate experiment attaches the motion law to every gate") {
  Scenario base = frontal();
  base.duration = 20.0;
  MotionLaw m;
  m.axis = {0.0, 1.0, 0.0};
  m.amplitude = 0.2;
  m.period = 8.0;
  const RunResult rr = moving_gate_experiment(base, m);
  CHECK_FALSE(rr.metrics.crashed);
  CHECK(rr.metrics.gates_passed >= 1);
  CHECK_FALSE(base.gates[0].motion.has_value());  // base untouched

  // the servo must actually follow the moving target: the traversal-time
  // trajectory differs from the static case
  const RunResult still = run_scenario(base);
  CHECK(rr.log.to_csv() != still.log.to_csv());
}
