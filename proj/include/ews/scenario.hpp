#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "ews/attack.hpp"
#include "ews/estimator.hpp"
#include "ews/monitor.hpp"
#include "ews/plant.hpp"
#include "ews/reach.hpp"

namespace ews {

using Json = nlohmann::json;

class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error("config error at '" + key + "': " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct PlantSpec {
  Matrix A, B, C, sigma_w, sigma_v;
  double dt = 1.8;
};

struct ScenarioConfig {
  Json resolved;       // after preset expansion
  std::string digest;  // over the design-relevant sections
  PlantSpec plant;
  ControlLaw law;
  SetpointSchedule y_ref;
  double beta = 0.05;
  double p = 0.95;
  int grid_resolution = 20;
  UnsafeSet unsafe;
  std::optional<AttackSpec> attack;
  int K = 500;
  int l1 = 250;
  int l2 = 30;
  double ratio_threshold = 0.5;
  Step steps = 1000;
  std::uint64_t seed = 1;
  std::optional<Vector> x0;  // defaults to the set-point equilibrium
  std::string trace_path;
  std::string records_path;
  bool plots = false;
};

Json builtin_preset(const std::string& name);

// Expands a "preset" key, validates every section and resolves references.
ScenarioConfig parse_config(const Json& raw);
ScenarioConfig load_config(const std::string& path);

std::string config_digest(const Json& resolved);

// Everything the online side needs, produced once offline.
struct Design {
  LtiModel model;
  Controller ctrl;
  KalmanDesign kalman;
  DetectorConfig detector;
  NoiseBound noise;
  ReachEllipsoid reach;
  EwsConfig ews;
  std::string digest;
};

LtiModel build_model(const ScenarioConfig& cfg);
Design run_design(const ScenarioConfig& cfg);

Json artifact_to_json(const Design& d);
Design artifact_from_json(const Json& j);
void write_artifact(const Design& d, const std::string& path);
Design read_artifact(const std::string& path);

}  // namespace ews
