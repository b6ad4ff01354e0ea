#include "gateservo/config.hpp"

#include <json.hpp>

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>

namespace gateservo {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) {
  throw std::runtime_error("config: " + msg);
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail("\"" + path + "\" must be an object");
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* k : allowed) {
      if (item.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      fail("unknown key \"" + (path.empty() ? item.key() : path + "." + item.key()) + "\"");
    }
  }
}

double get_num(const json& obj, const std::string& path, const char* key,
               double def) {
  const auto it = obj.find(key);
  if (it == obj.end()) return def;
  if (!it->is_number()) fail("\"" + path + "." + key + "\" must be a number");
  return it->get<double>();
}

int get_int(const json& obj, const std::string& path, const char* key, int def) {
  const auto it = obj.find(key);
  if (it == obj.end()) return def;
  if (!it->is_number_integer()) fail("\"" + path + "." + key + "\" must be an integer");
  return it->get<int>();
}

std::uint64_t get_u64(const json& obj, const std::string& path, const char* key,
                      std::uint64_t def) {
  const auto it = obj.find(key);
  if (it == obj.end()) return def;
  if (!it->is_number_unsigned() && !it->is_number_integer()) {
    fail("\"" + path + "." + key + "\" must be a non-negative integer");
  }
  if (it->is_number_integer() && it->get<std::int64_t>() < 0) {
    fail("\"" + path + "." + key + "\" must be a non-negative integer");
  }
  return it->get<std::uint64_t>();
}

std::string get_str(const json& obj, const std::string& path, const char* key,
                    const std::string& def) {
  const auto it = obj.find(key);
  if (it == obj.end()) return def;
  if (!it->is_string()) fail("\"" + path + "." + key + "\" must be a string");
  return it->get<std::string>();
}

Eigen::Vector3d get_vec3(const json& obj, const std::string& path,
                         const char* key, const Eigen::Vector3d& def) {
  const auto it = obj.find(key);
  if (it == obj.end()) return def;
  if (!it->is_array() || it->size() != 3) {
    fail("\"" + path + "." + key + "\" must be an array of 3 numbers");
  }
  Eigen::Vector3d v;
  for (int i = 0; i < 3; ++i) {
    if (!(*it)[i].is_number()) {
      fail("\"" + path + "." + key + "\" must be an array of 3 numbers");
    }
    v[i] = (*it)[i].get<double>();
  }
  return v;
}

MotionLaw parse_motion(const json& j, const std::string& path) {
  require_object(j, path);
  check_keys(j, path, {"axis", "amplitude", "period", "phase"});
  MotionLaw m;
  m.axis = get_vec3(j, path, "axis", {0.0, 1.0, 0.0});
  m.amplitude = get_num(j, path, "amplitude", 0.0);
  m.period = get_num(j, path, "period", 1.0);
  m.phase = get_num(j, path, "phase", 0.0);
  return m;
}

GateSpec parse_gate(const json& j, const std::string& path) {
  require_object(j, path);
  check_keys(j, path, {"position", "yaw", "side", "frame_band", "motion"});
  GateSpec g;
  g.pose.position = get_vec3(j, path, "position", {0.0, 0.0, 1.0});
  g.pose.yaw = get_num(j, path, "yaw", 0.0);
  g.side = get_num(j, path, "side", 1.0);
  g.frame_band = get_num(j, path, "frame_band", 0.05);
  if (const auto it = j.find("motion"); it != j.end()) {
    g.motion = parse_motion(*it, path + ".motion");
  }
  return g;
}

PerceptionKind parse_kind(const std::string& s) {
  if (s == "oracle") return PerceptionKind::kOracle;
  if (s == "gaussian") return PerceptionKind::kGaussianNoise;
  if (s == "featuremap") return PerceptionKind::kFeatureMap;
  fail("\"perception.kind\" must be one of oracle|gaussian|featuremap");
}

DecodeMode parse_decode(const std::string& s) {
  if (s == "bin_center") return DecodeMode::kBinCenter;
  if (s == "endpoint") return DecodeMode::kEndpoint;
  fail("\"perception.decode\" must be one of bin_center|endpoint");
}

}  // namespace

LoadedConfig parse_config(const std::string& text) {
  json root = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (root.is_discarded()) fail("not valid JSON");
  require_object(root, "<root>");
  check_keys(root, "",
             {"schema", "name", "seed", "duration", "drone_radius", "start",
              "gates", "camera", "perception", "ibvs", "vehicle", "nav",
              "experiment"});

  const auto schema_it = root.find("schema");
  if (schema_it == root.end()) fail("missing required key \"schema\"");
  if (!schema_it->is_number_integer() || schema_it->get<int>() != 1) {
    fail("\"schema\" must be the integer 1");
  }

  LoadedConfig lc;
  Scenario& sc = lc.scenario;
  sc.name = get_str(root, "", "name", "scenario");
  sc.seed = get_u64(root, "", "seed", 0);
  sc.duration = get_num(root, "", "duration", sc.duration);
  sc.drone_radius = get_num(root, "", "drone_radius", sc.drone_radius);

  if (const auto it = root.find("start"); it != root.end()) {
    require_object(*it, "start");
    check_keys(*it, "start", {"position", "yaw"});
    sc.start_pose.position = get_vec3(*it, "start", "position", {0.0, 0.0, 0.0});
    sc.start_pose.yaw = get_num(*it, "start", "yaw", 0.0);
  }

  if (const auto it = root.find("gates"); it != root.end()) {
    if (!it->is_array()) fail("\"gates\" must be an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      sc.gates.push_back(parse_gate((*it)[i], "gates[" + std::to_string(i) + "]"));
    }
  }

  if (const auto it = root.find("camera"); it != root.end()) {
    require_object(*it, "camera");
    check_keys(*it, "camera",
               {"fx", "fy", "cx", "cy", "width", "height", "min_depth"});
    CameraModel& c = sc.camera;
    c.fx = get_num(*it, "camera", "fx", c.fx);
    c.fy = get_num(*it, "camera", "fy", c.fy);
    c.cx = get_num(*it, "camera", "cx", c.cx);
    c.cy = get_num(*it, "camera", "cy", c.cy);
    c.width = get_int(*it, "camera", "width", c.width);
    c.height = get_int(*it, "camera", "height", c.height);
    c.min_depth = get_num(*it, "camera", "min_depth", c.min_depth);
  }

  if (const auto it = root.find("perception"); it != root.end()) {
    require_object(*it, "perception");
    check_keys(*it, "perception",
               {"kind", "sigma_px", "map_size", "sigma_bins", "map_noise",
                "decode", "latency_steps", "seed"});
    PerceptionConfig& p = sc.perception;
    p.kind = parse_kind(get_str(*it, "perception", "kind", "oracle"));
    p.sigma_px = get_num(*it, "perception", "sigma_px", p.sigma_px);
    p.map_size = get_int(*it, "perception", "map_size", p.map_size);
    p.sigma_bins = get_num(*it, "perception", "sigma_bins", p.sigma_bins);
    p.map_noise = get_num(*it, "perception", "map_noise", p.map_noise);
    p.decode_mode = parse_decode(get_str(*it, "perception", "decode", "bin_center"));
    p.latency_steps = get_int(*it, "perception", "latency_steps", p.latency_steps);
    p.seed = get_u64(*it, "perception", "seed", p.seed);
  }

  if (const auto it = root.find("ibvs"); it != root.end()) {
    require_object(*it, "ibvs");
    check_keys(*it, "ibvs",
               {"lambda", "depth_assumed", "error_threshold_px",
                "max_linear_speed", "max_yaw_rate", "min_visible_corners",
                "search_yaw_rate"});
    IbvsConfig& b = sc.ibvs;
    b.lambda = get_num(*it, "ibvs", "lambda", b.lambda);
    b.depth_assumed = get_num(*it, "ibvs", "depth_assumed", b.depth_assumed);
    b.error_threshold_px = get_num(*it, "ibvs", "error_threshold_px", b.error_threshold_px);
    b.max_linear_speed = get_num(*it, "ibvs", "max_linear_speed", b.max_linear_speed);
    b.max_yaw_rate = get_num(*it, "ibvs", "max_yaw_rate", b.max_yaw_rate);
    b.min_visible_corners = get_int(*it, "ibvs", "min_visible_corners", b.min_visible_corners);
    b.search_yaw_rate = get_num(*it, "ibvs", "search_yaw_rate", b.search_yaw_rate);
  }

  if (const auto it = root.find("vehicle"); it != root.end()) {
    require_object(*it, "vehicle");
    check_keys(*it, "vehicle", {"tau_v", "tau_w", "physics_dt", "control_rate"});
    VehicleConfig& v = sc.vehicle;
    v.tau_v = get_num(*it, "vehicle", "tau_v", v.tau_v);
    v.tau_w = get_num(*it, "vehicle", "tau_w", v.tau_w);
    v.physics_dt = get_num(*it, "vehicle", "physics_dt", v.physics_dt);
    v.control_rate = get_num(*it, "vehicle", "control_rate", v.control_rate);
  }

  if (const auto it = root.find("nav"); it != root.end()) {
    require_object(*it, "nav");
    check_keys(*it, "nav",
               {"takeoff_climb_speed", "takeoff_altitude", "forward_speed",
                "forward_distance", "turn_rate", "turn_angle_deg"});
    NavConfig& n = sc.nav;
    n.takeoff_climb_speed = get_num(*it, "nav", "takeoff_climb_speed", n.takeoff_climb_speed);
    n.takeoff_altitude = get_num(*it, "nav", "takeoff_altitude", n.takeoff_altitude);
    n.forward_speed = get_num(*it, "nav", "forward_speed", n.forward_speed);
    n.forward_distance = get_num(*it, "nav", "forward_distance", n.forward_distance);
    n.turn_rate = get_num(*it, "nav", "turn_rate", n.turn_rate);
    n.turn_angle = get_num(*it, "nav", "turn_angle_deg", 180.0) * kPi / 180.0;
  }

  if (const auto it = root.find("experiment"); it != root.end()) {
    require_object(*it, "experiment");
    check_keys(*it, "experiment",
               {"type", "orientations_deg", "repeats", "approach_distance"});
    ExperimentSpec& ex = lc.experiment;
    const std::string type = get_str(*it, "experiment", "type", "single");
    if (type == "single") {
      ex.type = ExperimentSpec::Type::kSingle;
    } else if (type == "orientation") {
      ex.type = ExperimentSpec::Type::kOrientation;
    } else {
      fail("\"experiment.type\" must be one of single|orientation");
    }
    if (const auto oit = it->find("orientations_deg"); oit != it->end()) {
      if (!oit->is_array() || oit->empty()) {
        fail("\"experiment.orientations_deg\" must be a non-empty array of numbers");
      }
      ex.orientations_deg.clear();
      for (const auto& v : *oit) {
        if (!v.is_number()) {
          fail("\"experiment.orientations_deg\" must be a non-empty array of numbers");
        }
        ex.orientations_deg.push_back(v.get<double>());
      }
    }
    ex.repeats = get_int(*it, "experiment", "repeats", ex.repeats);
    if (ex.repeats < 1) fail("\"experiment.repeats\" must be >= 1");
    ex.approach_distance = get_num(*it, "experiment", "approach_distance", ex.approach_distance);
    if (!(ex.approach_distance > 0.0)) {
      fail("\"experiment.approach_distance\" must be > 0");
    }
  }

  sc.validate();
  return lc;
}

LoadedConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("config: cannot open \"" + path + "\"");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string(e.what()) + " [" + path + "]");
  }
}

}  // namespace gateservo
