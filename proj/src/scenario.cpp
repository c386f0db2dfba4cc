#include "ews/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "ews/linalg.hpp"

namespace ews {
namespace {

std::string join(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

std::string index(const std::string& base, size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

void require_object(const Json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "must be an object");
}

void reject_unknown(const Json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(join(path, key), "unknown key");
  }
}

const Json& require_key(const Json& j, const std::string& path, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(join(path, key), "required key is missing");
  return *it;
}

double as_number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
  return v;
}

long as_integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path, "must be an integer");
  return j.get<long>();
}

Vector as_vector(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError(path, "must be a non-empty array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = as_number(j[i], index(path, i));
  return v;
}

Matrix as_matrix(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError(path, "must be a non-empty array of rows");
  const size_t rows = j.size();
  if (!j[0].is_array() || j[0].empty()) throw ConfigError(index(path, 0), "must be a non-empty row");
  const size_t cols = j[0].size();
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (size_t r = 0; r < rows; ++r) {
    const std::string rp = index(path, r);
    if (!j[r].is_array() || j[r].size() != cols) {
      throw ConfigError(rp, "rows must all have " + std::to_string(cols) + " entries");
    }
    for (size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = as_number(j[r][c], index(rp, c));
    }
  }
  return m;
}

Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json vector_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

void require_shape_cfg(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const std::string& path) {
  if (m.rows() != rows || m.cols() != cols) {
    throw ConfigError(path, "must be " + shape_of(rows, cols) + ", got " + shape_of(m.rows(), m.cols()));
  }
}

PlantSpec parse_plant(const Json& j) {
  const std::string path = "plant";
  require_object(j, path);
  reject_unknown(j, path, {"A", "B", "C", "sigma_w", "sigma_v", "dt"});
  PlantSpec p;
  p.A = as_matrix(require_key(j, path, "A"), "plant.A");
  p.B = as_matrix(require_key(j, path, "B"), "plant.B");
  p.C = as_matrix(require_key(j, path, "C"), "plant.C");
  p.sigma_w = as_matrix(require_key(j, path, "sigma_w"), "plant.sigma_w");
  p.sigma_v = as_matrix(require_key(j, path, "sigma_v"), "plant.sigma_v");
  p.dt = as_number(require_key(j, path, "dt"), "plant.dt");
  const Eigen::Index n = p.A.rows();
  require_shape_cfg(p.A, n, n, "plant.A");
  if (p.B.rows() != n) throw ConfigError("plant.B", "must have " + std::to_string(n) + " rows");
  if (p.C.cols() != n) throw ConfigError("plant.C", "must have " + std::to_string(n) + " columns");
  require_shape_cfg(p.sigma_w, n, n, "plant.sigma_w");
  require_shape_cfg(p.sigma_v, p.C.rows(), p.C.rows(), "plant.sigma_v");
  if (!(p.dt > 0.0)) throw ConfigError("plant.dt", "must be positive");
  return p;
}

void parse_controller(const Json& j, Eigen::Index m, Eigen::Index pdim, ControlLaw& law,
                      SetpointSchedule& y_ref) {
  const std::string path = "controller";
  require_object(j, path);
  const Json& type = require_key(j, path, "type");
  if (!type.is_string()) throw ConfigError("controller.type", "must be a string");
  const std::string t = type.get<std::string>();
  if (t == "static") {
    reject_unknown(j, path, {"type", "kg", "y_ref", "schedule"});
    Matrix kg = as_matrix(require_key(j, path, "kg"), "controller.kg");
    require_shape_cfg(kg, pdim, m, "controller.kg");
    law = StaticGain{std::move(kg)};
  } else if (t == "pi") {
    reject_unknown(j, path, {"type", "kp", "ki", "y_ref", "schedule"});
    Matrix kp = as_matrix(require_key(j, path, "kp"), "controller.kp");
    Matrix ki = as_matrix(require_key(j, path, "ki"), "controller.ki");
    require_shape_cfg(kp, pdim, m, "controller.kp");
    require_shape_cfg(ki, pdim, m, "controller.ki");
    law = ProportionalIntegral{std::move(kp), std::move(ki)};
  } else {
    throw ConfigError("controller.type", "must be \"static\" or \"pi\", got \"" + t + "\"");
  }

  const bool has_ref = j.contains("y_ref");
  const bool has_sched = j.contains("schedule");
  if (has_ref == has_sched) {
    throw ConfigError("controller.y_ref", "exactly one of y_ref or schedule must be given");
  }
  if (has_ref) {
    Vector r = as_vector(j["y_ref"], "controller.y_ref");
    if (r.size() != m) throw ConfigError("controller.y_ref", "must have " + std::to_string(m) + " entries");
    y_ref = SetpointSchedule(std::move(r));
    return;
  }
  const Json& s = j["schedule"];
  if (!s.is_array() || s.empty()) throw ConfigError("controller.schedule", "must be a non-empty array");
  std::vector<std::pair<Step, Vector>> segs;
  for (size_t i = 0; i < s.size(); ++i) {
    const std::string sp = index("controller.schedule", i);
    require_object(s[i], sp);
    reject_unknown(s[i], sp, {"k", "y_ref"});
    const Step k = as_integer(require_key(s[i], sp, "k"), join(sp, "k"));
    Vector r = as_vector(require_key(s[i], sp, "y_ref"), join(sp, "y_ref"));
    if (r.size() != m) throw ConfigError(join(sp, "y_ref"), "must have " + std::to_string(m) + " entries");
    if (i == 0 && k != 0) throw ConfigError(join(sp, "k"), "first schedule entry must start at 0");
    if (i > 0 && k <= segs.back().first) throw ConfigError(join(sp, "k"), "schedule steps must increase");
    segs.emplace_back(k, std::move(r));
  }
  y_ref = SetpointSchedule(std::move(segs));
}

UnsafeSet parse_unsafe(const Json& j, Eigen::Index n) {
  const std::string path = "unsafe";
  if (!j.is_array() || j.empty()) throw ConfigError(path, "must be a non-empty array of half-spaces");
  UnsafeSet su;
  for (size_t i = 0; i < j.size(); ++i) {
    const std::string hp = index(path, i);
    require_object(j[i], hp);
    reject_unknown(j[i], hp, {"label", "c", "b"});
    HalfSpace<double> h;
    const Json& label = require_key(j[i], hp, "label");
    if (!label.is_string() || label.get<std::string>().empty()) {
      throw ConfigError(join(hp, "label"), "must be a non-empty string");
    }
    h.label = label.get<std::string>();
    for (const auto& other : su) {
      if (other.label == h.label) throw ConfigError(join(hp, "label"), "duplicate label '" + h.label + "'");
    }
    h.normal = as_vector(require_key(j[i], hp, "c"), join(hp, "c"));
    if (h.normal.size() != n) throw ConfigError(join(hp, "c"), "must have " + std::to_string(n) + " entries");
    if (h.normal.isZero(0)) throw ConfigError(join(hp, "c"), "normal must be non-zero");
    h.bound = as_number(require_key(j[i], hp, "b"), join(hp, "b"));
    su.push_back(std::move(h));
  }
  return su;
}

AttackSpec parse_attack(const Json& j, Eigen::Index m, const UnsafeSet& su) {
  const std::string path = "attack";
  require_object(j, path);
  const Json& type = require_key(j, path, "type");
  if (!type.is_string()) throw ConfigError("attack.type", "must be a string");
  const std::string t = type.get<std::string>();
  AttackSpec spec;
  if (t == "ramp") {
    reject_unknown(j, path, {"type", "g", "slope", "delta_max", "k_start", "k_end", "alarm_budget_rate", "margin"});
    RampAttack ramp;
    ramp.g = as_vector(require_key(j, path, "g"), "attack.g");
    if (ramp.g.size() != m) throw ConfigError("attack.g", "must have " + std::to_string(m) + " entries");
    if (!(ramp.g.norm() > 0.0)) throw ConfigError("attack.g", "direction must be non-zero");
    ramp.slope = as_number(require_key(j, path, "slope"), "attack.slope");
    if (j.contains("delta_max")) {
      ramp.delta_max = as_number(j["delta_max"], "attack.delta_max");
      if (ramp.delta_max < 0.0) throw ConfigError("attack.delta_max", "must be non-negative");
    }
    spec.variant = std::move(ramp);
  } else if (t == "greedy") {
    reject_unknown(j, path, {"type", "target", "eta", "k_start", "k_end", "alarm_budget_rate", "margin"});
    GreedyUnsafeAttack greedy;
    const Json& target = require_key(j, path, "target");
    if (!target.is_string()) throw ConfigError("attack.target", "must name an unsafe label");
    const std::string label = target.get<std::string>();
    bool found = false;
    for (const auto& h : su) {
      if (h.label == label) {
        greedy.target = h;
        found = true;
      }
    }
    if (!found) throw ConfigError("attack.target", "no unsafe half-space labelled '" + label + "'");
    if (j.contains("eta")) greedy.eta = as_number(j["eta"], "attack.eta");
    if (!(greedy.eta > 0.0 && greedy.eta <= 1.0)) throw ConfigError("attack.eta", "must lie in (0, 1]");
    spec.variant = std::move(greedy);
  } else {
    throw ConfigError("attack.type", "must be \"ramp\" or \"greedy\", got \"" + t + "\"");
  }
  if (j.contains("k_start")) spec.k_start = as_integer(j["k_start"], "attack.k_start");
  if (j.contains("k_end")) spec.k_end = as_integer(j["k_end"], "attack.k_end");
  if (spec.k_start < 0) throw ConfigError("attack.k_start", "must be non-negative");
  if (spec.k_end < spec.k_start) throw ConfigError("attack.k_end", "must not precede k_start");
  if (j.contains("alarm_budget_rate")) {
    const double rate = as_number(j["alarm_budget_rate"], "attack.alarm_budget_rate");
    if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError("attack.alarm_budget_rate", "must lie in [0, 1)");
    spec.alarm_budget_rate = rate;
  }
  if (j.contains("margin")) spec.margin = as_number(j["margin"], "attack.margin");
  if (!(spec.margin > 0.0 && spec.margin <= 1.0)) throw ConfigError("attack.margin", "must lie in (0, 1]");
  return spec;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Json reactor_preset() {
  return Json::parse(R"({
    "plant": {
      "A": [[0.97, 0.1], [0.0, 0.8]],
      "B": [[0.0], [0.2]],
      "C": [[1.0, 0.0]],
      "sigma_w": [[0.002, 0.0], [0.0, 0.002]],
      "sigma_v": [[0.01]],
      "dt": 1.8
    },
    "controller": {"type": "pi", "kp": [[-0.05]], "ki": [[-0.002]], "y_ref": [16.55]},
    "detector": {"beta": 0.05},
    "reach": {"p": 0.95, "grid_resolution": 20},
    "unsafe": [
      {"label": "reactor-level-high", "c": [1.0, 0.0], "b": 21.3},
      {"label": "reactor-level-low", "c": [-1.0, 0.0], "b": -11.8}
    ],
    "attack": {"type": "ramp", "g": [-1.0], "slope": 0.002, "delta_max": 7.0,
               "k_start": 500, "margin": 0.95},
    "ews": {"K": 500, "l1": 250, "l2": 30, "ratio_threshold": 0.5},
    "run": {"steps": 4200, "seed": 1},
    "output": {"trace": "trace.csv", "plots": false}
  })");
}

Json random_preset(int n) {
  const int m = std::min(n, 2);
  const int p = std::min(n, 2);
  const LtiModel model = random_stable_system(n, m, p, static_cast<std::uint64_t>(n));
  Json j;
  j["plant"] = {{"A", matrix_json(model.A())}, {"B", matrix_json(model.B())},
                {"C", matrix_json(model.C())}, {"sigma_w", matrix_json(model.sigma_w())},
                {"sigma_v", matrix_json(model.sigma_v())}, {"dt", model.dt()}};
  j["controller"] = {{"type", "static"}, {"kg", matrix_json(Matrix::Zero(p, m))},
                     {"y_ref", vector_json(Vector::Zero(m))}};
  j["detector"] = {{"beta", 0.05}};
  j["reach"] = {{"p", 0.95}, {"grid_resolution", 20}};
  Vector e1 = Vector::Zero(n);
  e1(0) = 1.0;
  j["unsafe"] = Json::array({{{"label", "x1-high"}, {"c", vector_json(e1)}, {"b", 50.0}},
                             {{"label", "x1-low"}, {"c", vector_json(-e1)}, {"b", 50.0}}});
  j["ews"] = {{"K", 500}, {"l1", 250}, {"l2", 30}, {"ratio_threshold", 0.5}};
  j["run"] = {{"steps", 1000}, {"seed", 1}};
  j["output"] = {{"trace", "trace.csv"}, {"plots", false}};
  return j;
}

Json controller_json(const Controller& ctrl) {
  Json j;
  if (const auto* sg = std::get_if<StaticGain>(&ctrl.law())) {
    j["type"] = "static";
    j["kg"] = matrix_json(sg->kg);
  } else {
    const auto& pi = std::get<ProportionalIntegral>(ctrl.law());
    j["type"] = "pi";
    j["kp"] = matrix_json(pi.kp);
    j["ki"] = matrix_json(pi.ki);
  }
  Json sched = Json::array();
  for (const auto& [k, r] : ctrl.y_ref().segments()) sched.push_back({{"k", k}, {"y_ref", vector_json(r)}});
  j["schedule"] = std::move(sched);
  return j;
}

Json unsafe_json(const UnsafeSet& su) {
  Json out = Json::array();
  for (const auto& h : su) out.push_back({{"label", h.label}, {"c", vector_json(h.normal)}, {"b", h.bound}});
  return out;
}

}  // namespace

Json builtin_preset(const std::string& name) {
  if (name == "reactor") return reactor_preset();
  const std::string prefix = "random-";
  if (name.rfind(prefix, 0) == 0) {
    const std::string num = name.substr(prefix.size());
    int n = 0;
    try {
      size_t used = 0;
      n = std::stoi(num, &used);
      if (used != num.size()) n = 0;
    } catch (const std::exception&) {
      n = 0;
    }
    if (n < 1 || n > 200) throw ConfigError("preset", "random-<n> needs 1 <= n <= 200, got '" + name + "'");
    return random_preset(n);
  }
  throw ConfigError("preset", "unknown preset '" + name + "' (expected reactor or random-<n>)");
}

std::string config_digest(const Json& resolved) {
  Json core;
  for (const char* key : {"plant", "controller", "detector", "reach", "unsafe", "ews"}) {
    if (resolved.contains(key)) core[key] = resolved[key];
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(core.dump())));
  return buf;
}

ScenarioConfig parse_config(const Json& raw) {
  require_object(raw, "<root>");
  Json resolved = raw;
  if (raw.contains("preset")) {
    if (!raw["preset"].is_string()) throw ConfigError("preset", "must be a string");
    resolved = builtin_preset(raw["preset"].get<std::string>());
    Json patch = raw;
    patch.erase("preset");
    resolved.merge_patch(patch);
  }
  reject_unknown(resolved, "", {"plant", "controller", "detector", "reach", "unsafe", "attack", "ews", "run", "output"});

  ScenarioConfig cfg;
  cfg.plant = parse_plant(require_key(resolved, "", "plant"));
  const Eigen::Index n = cfg.plant.A.rows();
  const Eigen::Index m = cfg.plant.C.rows();
  const Eigen::Index p = cfg.plant.B.cols();
  parse_controller(require_key(resolved, "", "controller"), m, p, cfg.law, cfg.y_ref);

  if (resolved.contains("detector")) {
    const Json& d = resolved["detector"];
    require_object(d, "detector");
    reject_unknown(d, "detector", {"beta"});
    if (d.contains("beta")) cfg.beta = as_number(d["beta"], "detector.beta");
  }
  if (!(cfg.beta > 0.0 && cfg.beta < 1.0)) throw ConfigError("detector.beta", "must lie in (0, 1)");

  cfg.p = 1.0 - cfg.beta;
  if (resolved.contains("reach")) {
    const Json& r = resolved["reach"];
    require_object(r, "reach");
    reject_unknown(r, "reach", {"p", "grid_resolution"});
    if (r.contains("p")) cfg.p = as_number(r["p"], "reach.p");
    if (r.contains("grid_resolution")) {
      cfg.grid_resolution = static_cast<int>(as_integer(r["grid_resolution"], "reach.grid_resolution"));
    }
  }
  if (!(cfg.p > 0.0 && cfg.p < 1.0)) throw ConfigError("reach.p", "must lie in (0, 1)");
  if (cfg.grid_resolution < 2 || cfg.grid_resolution > 1000) {
    throw ConfigError("reach.grid_resolution", "must lie in [2, 1000]");
  }

  cfg.unsafe = parse_unsafe(require_key(resolved, "", "unsafe"), n);

  if (resolved.contains("attack") && !resolved["attack"].is_null()) {
    cfg.attack = parse_attack(resolved["attack"], m, cfg.unsafe);
  }

  if (resolved.contains("ews")) {
    const Json& e = resolved["ews"];
    require_object(e, "ews");
    reject_unknown(e, "ews", {"K", "l1", "l2", "ratio_threshold"});
    if (e.contains("K")) cfg.K = static_cast<int>(as_integer(e["K"], "ews.K"));
    if (e.contains("l1")) cfg.l1 = static_cast<int>(as_integer(e["l1"], "ews.l1"));
    if (e.contains("l2")) cfg.l2 = static_cast<int>(as_integer(e["l2"], "ews.l2"));
    if (e.contains("ratio_threshold")) cfg.ratio_threshold = as_number(e["ratio_threshold"], "ews.ratio_threshold");
  }
  if (cfg.K < 1 || cfg.K > 1000000) throw ConfigError("ews.K", "must lie in [1, 1000000]");
  if (!(cfg.l1 >= 1 && cfg.l1 <= cfg.K)) throw ConfigError("ews.l1", "must satisfy 0 < l1 <= K");
  if (!(cfg.l2 >= 0 && cfg.l2 < cfg.l1)) throw ConfigError("ews.l2", "must satisfy 0 <= l2 < l1");
  if (!(cfg.ratio_threshold > 0.0 && cfg.ratio_threshold <= 1.0)) {
    throw ConfigError("ews.ratio_threshold", "must lie in (0, 1]");
  }

  if (resolved.contains("run")) {
    const Json& r = resolved["run"];
    require_object(r, "run");
    reject_unknown(r, "run", {"steps", "seed", "x0"});
    if (r.contains("steps")) cfg.steps = as_integer(r["steps"], "run.steps");
    if (r.contains("seed")) {
      if (!r["seed"].is_number_unsigned() && !(r["seed"].is_number_integer() && r["seed"].get<long>() >= 0)) {
        throw ConfigError("run.seed", "must be a non-negative integer");
      }
      cfg.seed = r["seed"].get<std::uint64_t>();
    }
    if (r.contains("x0")) {
      Vector x0 = as_vector(r["x0"], "run.x0");
      if (x0.size() != n) throw ConfigError("run.x0", "must have " + std::to_string(n) + " entries");
      cfg.x0 = std::move(x0);
    }
  }
  if (cfg.steps < 0) throw ConfigError("run.steps", "must be non-negative");

  if (resolved.contains("output")) {
    const Json& o = resolved["output"];
    require_object(o, "output");
    reject_unknown(o, "output", {"trace", "records", "plots"});
    if (o.contains("trace")) {
      if (!o["trace"].is_string()) throw ConfigError("output.trace", "must be a path string");
      cfg.trace_path = o["trace"].get<std::string>();
    }
    if (o.contains("records")) {
      if (!o["records"].is_string()) throw ConfigError("output.records", "must be a path string");
      cfg.records_path = o["records"].get<std::string>();
    }
    if (o.contains("plots")) {
      if (!o["plots"].is_boolean()) throw ConfigError("output.plots", "must be true or false");
      cfg.plots = o["plots"].get<bool>();
    }
  }

  cfg.resolved = std::move(resolved);
  cfg.digest = config_digest(cfg.resolved);
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open config file '" + path + "'");
  Json raw;
  try {
    raw = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(raw);
}

LtiModel build_model(const ScenarioConfig& cfg) {
  try {
    return LtiModel::create(cfg.plant.A, cfg.plant.B, cfg.plant.C, cfg.plant.sigma_w,
                            cfg.plant.sigma_v, cfg.plant.dt);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("plant", e.what());
  }
}

Design run_design(const ScenarioConfig& cfg) {
  LtiModel model = build_model(cfg);
  const double rho = spectral_radius(model.A());
  if (!(rho < 1.0)) {
    std::ostringstream msg;
    msg << "open-loop spectral radius of A is " << rho << "; the reachable ellipsoid needs rho(A) < 1";
    throw SynthesisError(msg.str());
  }
  Controller ctrl = Controller::create(model, cfg.law, cfg.y_ref);
  KalmanDesign kalman = design_kalman(model);
  DetectorConfig detector = DetectorConfig::from_beta(cfg.beta, model.m());
  NoiseBound noise = noise_energy_bound(model.sigma_w(), cfg.p);
  const ErrorSystem es = ErrorSystem::from_design(model, kalman, detector, noise);
  ReachEllipsoid reach = compute_invariant_ellipsoid(es, cfg.grid_resolution);
  reach.p = cfg.p;

  EwsConfig ews;
  ews.K = cfg.K;
  ews.l1 = cfg.l1;
  ews.l2 = cfg.l2;
  ews.ratio_threshold = cfg.ratio_threshold;
  ews.reach = reach;
  ews.su = cfg.unsafe;
  ews.validate(model.n());
  ews = precompute(std::move(ews));

  return Design{std::move(model), std::move(ctrl), std::move(kalman), detector, noise,
                std::move(reach), std::move(ews), cfg.digest};
}

Json artifact_to_json(const Design& d) {
  Json j;
  j["format"] = "ews-design";
  j["version"] = 1;
  j["digest"] = d.digest;
  j["model"] = {{"A", matrix_json(d.model.A())}, {"B", matrix_json(d.model.B())},
                {"C", matrix_json(d.model.C())}, {"sigma_w", matrix_json(d.model.sigma_w())},
                {"sigma_v", matrix_json(d.model.sigma_v())}, {"dt", d.model.dt()}};
  j["controller"] = controller_json(d.ctrl);
  j["unsafe"] = unsafe_json(d.ews.su);
  j["ews"] = {{"K", d.ews.K}, {"l1", d.ews.l1}, {"l2", d.ews.l2}, {"ratio_threshold", d.ews.ratio_threshold}};
  j["detector"] = {{"beta", d.detector.beta}, {"tau", d.detector.tau}, {"dof", d.detector.dof}};
  j["kalman"] = {{"L", matrix_json(d.kalman.L)}, {"P", matrix_json(d.kalman.P)},
                 {"sigma_r", matrix_json(d.kalman.sigma_r)}, {"iterations", d.kalman.iterations}};
  j["noise"] = {{"w_bar", d.noise.w_bar}, {"p", d.noise.p}};
  j["reach"] = {{"Pi", matrix_json(d.reach.Pi)}, {"p", d.reach.p}, {"a", d.reach.a},
                {"b1", d.reach.b1}, {"b2", d.reach.b2}, {"tau", d.reach.tau},
                {"w_bar", d.reach.w_bar}, {"log_det", d.reach.log_det},
                {"residual", d.reach.residual}, {"grid_resolution", d.reach.grid_resolution}};
  return j;
}

Design artifact_from_json(const Json& j) {
  require_object(j, "<artifact>");
  if (j.value("format", "") != "ews-design") throw ConfigError("format", "not an ews-design artifact");
  if (j.value("version", 0) != 1) throw ConfigError("version", "unsupported artifact version");
  const Json& mj = require_key(j, "", "model");
  require_object(mj, "model");
  PlantSpec ps;
  ps.A = as_matrix(require_key(mj, "model", "A"), "model.A");
  ps.B = as_matrix(require_key(mj, "model", "B"), "model.B");
  ps.C = as_matrix(require_key(mj, "model", "C"), "model.C");
  ps.sigma_w = as_matrix(require_key(mj, "model", "sigma_w"), "model.sigma_w");
  ps.sigma_v = as_matrix(require_key(mj, "model", "sigma_v"), "model.sigma_v");
  ps.dt = as_number(require_key(mj, "model", "dt"), "model.dt");

  LtiModel model = [&] {
    try {
      return LtiModel::create(ps.A, ps.B, ps.C, ps.sigma_w, ps.sigma_v, ps.dt);
    } catch (const Error& e) {
      throw ConfigError("model", e.what());
    }
  }();
  const Eigen::Index n = model.n();
  const Eigen::Index m = model.m();

  ControlLaw law;
  SetpointSchedule y_ref;
  parse_controller(require_key(j, "", "controller"), m, model.p(), law, y_ref);
  Controller ctrl = [&] {
    try {
      return Controller::create(model, law, y_ref);
    } catch (const Error& e) {
      throw ConfigError("controller", e.what());
    }
  }();

  Design d{std::move(model), std::move(ctrl), {}, {}, {}, {}, {}, ""};
  const Json& digest = require_key(j, "", "digest");
  if (!digest.is_string()) throw ConfigError("digest", "must be a string");
  d.digest = digest.get<std::string>();

  const Json& dj = require_key(j, "", "detector");
  d.detector.beta = as_number(require_key(dj, "detector", "beta"), "detector.beta");
  d.detector.tau = as_number(require_key(dj, "detector", "tau"), "detector.tau");
  d.detector.dof = static_cast<int>(as_integer(require_key(dj, "detector", "dof"), "detector.dof"));
  if (d.detector.dof != m) throw ConfigError("detector.dof", "must equal m");
  const double expect_tau = chi2_quantile(1.0 - d.detector.beta, d.detector.dof);
  if (!(std::abs(d.detector.tau - expect_tau) <= 1e-9 * expect_tau)) {
    throw ConfigError("detector.tau", "does not match the chi-squared quantile for beta");
  }

  const Json& kj = require_key(j, "", "kalman");
  d.kalman.L = as_matrix(require_key(kj, "kalman", "L"), "kalman.L");
  d.kalman.P = as_matrix(require_key(kj, "kalman", "P"), "kalman.P");
  d.kalman.sigma_r = as_matrix(require_key(kj, "kalman", "sigma_r"), "kalman.sigma_r");
  d.kalman.iterations = static_cast<int>(kj.value("iterations", 0));
  require_shape_cfg(d.kalman.L, n, m, "kalman.L");
  require_shape_cfg(d.kalman.P, n, n, "kalman.P");
  require_shape_cfg(d.kalman.sigma_r, m, m, "kalman.sigma_r");
  if (!is_positive_definite(d.kalman.sigma_r)) throw ConfigError("kalman.sigma_r", "must be positive definite");
  if (!(spectral_radius(d.model.A() - d.kalman.L * d.model.C()) < 1.0)) {
    throw ConfigError("kalman.L", "estimator error dynamics A - L C must be stable");
  }

  const Json& nj = require_key(j, "", "noise");
  d.noise.w_bar = as_number(require_key(nj, "noise", "w_bar"), "noise.w_bar");
  d.noise.p = as_number(require_key(nj, "noise", "p"), "noise.p");

  const Json& rj = require_key(j, "", "reach");
  d.reach.Pi = as_matrix(require_key(rj, "reach", "Pi"), "reach.Pi");
  require_shape_cfg(d.reach.Pi, n, n, "reach.Pi");
  if (!is_positive_definite(d.reach.Pi)) throw ConfigError("reach.Pi", "must be positive definite");
  d.reach.p = as_number(require_key(rj, "reach", "p"), "reach.p");
  d.reach.a = as_number(require_key(rj, "reach", "a"), "reach.a");
  d.reach.b1 = as_number(require_key(rj, "reach", "b1"), "reach.b1");
  d.reach.b2 = as_number(require_key(rj, "reach", "b2"), "reach.b2");
  d.reach.tau = as_number(require_key(rj, "reach", "tau"), "reach.tau");
  d.reach.w_bar = as_number(require_key(rj, "reach", "w_bar"), "reach.w_bar");
  d.reach.log_det = as_number(require_key(rj, "reach", "log_det"), "reach.log_det");
  d.reach.residual = as_number(require_key(rj, "reach", "residual"), "reach.residual");
  d.reach.grid_resolution = static_cast<int>(as_integer(require_key(rj, "reach", "grid_resolution"), "reach.grid_resolution"));

  const Json& ej = require_key(j, "", "ews");
  d.ews.K = static_cast<int>(as_integer(require_key(ej, "ews", "K"), "ews.K"));
  d.ews.l1 = static_cast<int>(as_integer(require_key(ej, "ews", "l1"), "ews.l1"));
  d.ews.l2 = static_cast<int>(as_integer(require_key(ej, "ews", "l2"), "ews.l2"));
  d.ews.ratio_threshold = as_number(require_key(ej, "ews", "ratio_threshold"), "ews.ratio_threshold");
  d.ews.reach = d.reach;
  d.ews.su = parse_unsafe(require_key(j, "", "unsafe"), n);
  try {
    d.ews.validate(static_cast<int>(n));
  } catch (const Error& e) {
    throw ConfigError("ews", e.what());
  }
  d.ews = precompute(std::move(d.ews));
  return d;
}

void write_artifact(const Design& d, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("<artifact>", "cannot write '" + path + "'");
  out << artifact_to_json(d).dump(2) << '\n';
  if (!out) throw ConfigError("<artifact>", "write failed for '" + path + "'");
}

Design read_artifact(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<artifact>", "cannot open '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("<artifact>", std::string("invalid JSON: ") + e.what());
  }
  return artifact_from_json(j);
}

}  // namespace ews
