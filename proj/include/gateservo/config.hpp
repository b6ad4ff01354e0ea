#pragma once

#include "gateservo/scenario.hpp"

#include <string>
#include <vector>

namespace gateservo {

/// Batch experiment description, carried alongside the scenario.
struct ExperimentSpec {
  enum class Type { kSingle, kOrientation };
  Type type{Type::kSingle};
  std::vector<double> orientations_deg{-45.0, 0.0, 45.0};
  int repeats{1};
  double approach_distance{2.0};  // m
};

struct LoadedConfig {
  Scenario scenario;
  ExperimentSpec experiment;
};

/// Parse a JSON config. Requires "schema": 1 at the top level; any key not in
/// the documented schema is rejected. Throws std::runtime_error with a
/// message naming the offending key or constraint.
LoadedConfig parse_config(const std::string& text);

/// Read and parse a config file; errors include the file path.
LoadedConfig load_config(const std::string& path);

}  // namespace gateservo
