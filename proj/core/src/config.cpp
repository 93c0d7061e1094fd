#include "quadcatch/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace quadcatch {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

void check_keys(const json& obj, const std::string& where,
                const std::set<std::string>& allowed) {
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) {
      fail(where, "unknown key '" + item.key() + "'");
    }
  }
}

double get_number(const json& obj, const std::string& where, const std::string& key,
                  double fallback) {
  if (!obj.contains(key)) {
    return fallback;
  }
  if (!obj.at(key).is_number()) {
    fail(where + "." + key, "expected a number");
  }
  return obj.at(key).get<double>();
}

int get_int(const json& obj, const std::string& where, const std::string& key,
            int fallback) {
  if (!obj.contains(key)) {
    return fallback;
  }
  if (!obj.at(key).is_number_integer()) {
    fail(where + "." + key, "expected an integer");
  }
  return obj.at(key).get<int>();
}

std::uint64_t get_seed(const json& obj, const std::string& where,
                       const std::string& key, std::uint64_t fallback) {
  if (!obj.contains(key)) {
    return fallback;
  }
  if (!obj.at(key).is_number_unsigned() && !obj.at(key).is_number_integer()) {
    fail(where + "." + key, "expected a non-negative integer");
  }
  return obj.at(key).get<std::uint64_t>();
}

bool get_bool(const json& obj, const std::string& where, const std::string& key,
              bool fallback) {
  if (!obj.contains(key)) {
    return fallback;
  }
  if (!obj.at(key).is_boolean()) {
    fail(where + "." + key, "expected a boolean");
  }
  return obj.at(key).get<bool>();
}

std::string get_string(const json& obj, const std::string& where,
                       const std::string& key, const std::string& fallback) {
  if (!obj.contains(key)) {
    return fallback;
  }
  if (!obj.at(key).is_string()) {
    fail(where + "." + key, "expected a string");
  }
  return obj.at(key).get<std::string>();
}

Vec3 get_vec3(const json& obj, const std::string& where, const std::string& key,
              const Vec3& fallback) {
  if (!obj.contains(key)) {
    return fallback;
  }
  const json& j = obj.at(key);
  if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() ||
      !j[2].is_number()) {
    fail(where + "." + key, "expected an array of three numbers");
  }
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

void parse_camera(const json& j, CameraIntrinsics& camera) {
  check_keys(j, "camera", {"fx", "fy", "ppx", "ppy", "tilt_deg", "offset"});
  camera.fx = get_number(j, "camera", "fx", camera.fx);
  camera.fy = get_number(j, "camera", "fy", camera.fy);
  camera.ppx = get_number(j, "camera", "ppx", camera.ppx);
  camera.ppy = get_number(j, "camera", "ppy", camera.ppy);
  if (j.contains("tilt_deg")) {
    camera.tilt = get_number(j, "camera", "tilt_deg", 0.0) * M_PI / 180.0;
  }
  camera.offset = get_vec3(j, "camera", "offset", camera.offset);
  try {
    camera.validate();
  } catch (const InvalidInputError& e) {
    fail("camera", e.what());
  }
}

void parse_noise(const json& j, const std::string& where, NoiseModel& noise) {
  check_keys(j, where, {"sigma_px", "sigma_depth", "drop_prob", "seed"});
  noise.sigma_px = get_number(j, where, "sigma_px", noise.sigma_px);
  noise.sigma_depth = get_number(j, where, "sigma_depth", noise.sigma_depth);
  noise.drop_prob = get_number(j, where, "drop_prob", noise.drop_prob);
  noise.seed = get_seed(j, where, "seed", noise.seed);
  if (noise.sigma_px < 0.0 || noise.sigma_depth < 0.0) {
    fail(where, "noise sigmas must be non-negative");
  }
  if (noise.drop_prob < 0.0 || noise.drop_prob > 1.0) {
    fail(where, "drop_prob must lie in [0, 1]");
  }
}

void parse_scenario(const json& j, const NoiseModel& base_noise, Scenario& s) {
  check_keys(j, "scenarios[]",
             {"name", "n_throws", "methods", "seed", "noise", "distance",
              "origin_height", "origin_std", "aim_offset", "aim_std", "aim_z_range",
              "speed_min", "speed_max"});
  if (!j.contains("name")) {
    fail("scenarios[]", "scenario needs a name");
  }
  s.name = get_string(j, "scenarios[]", "name", s.name);
  const std::string where = "scenarios[" + s.name + "]";
  s.n_throws = get_int(j, where, "n_throws", s.n_throws);
  if (s.n_throws < 1) {
    fail(where, "n_throws must be at least 1");
  }
  s.seed = get_seed(j, where, "seed", s.seed);
  if (j.contains("methods")) {
    if (!j.at("methods").is_array() || j.at("methods").empty()) {
      fail(where, "methods must be a non-empty array");
    }
    s.methods.clear();
    for (const auto& m : j.at("methods")) {
      if (!m.is_string()) {
        fail(where, "methods entries must be strings");
      }
      try {
        s.methods.push_back(catch_method_from_string(m.get<std::string>()));
      } catch (const InvalidInputError& e) {
        fail(where, e.what());
      }
    }
  }
  s.noise = base_noise;
  if (j.contains("noise")) {
    parse_noise(j.at("noise"), where + ".noise", s.noise);
  }
  s.sampler.distance = get_number(j, where, "distance", s.sampler.distance);
  s.sampler.origin_height =
      get_number(j, where, "origin_height", s.sampler.origin_height);
  s.sampler.origin_std = get_vec3(j, where, "origin_std", s.sampler.origin_std);
  s.sampler.aim_offset = get_vec3(j, where, "aim_offset", s.sampler.aim_offset);
  s.sampler.aim_std = get_vec3(j, where, "aim_std", s.sampler.aim_std);
  if (j.contains("aim_z_range")) {
    const json& r = j.at("aim_z_range");
    if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number() ||
        !(r[0].get<double>() <= r[1].get<double>())) {
      fail(where, "aim_z_range must be [lo, hi] with lo <= hi");
    }
    s.sampler.aim_z_range = {{r[0].get<double>(), r[1].get<double>()}};
  }
  s.sampler.speed_min = get_number(j, where, "speed_min", s.sampler.speed_min);
  s.sampler.speed_max = get_number(j, where, "speed_max", s.sampler.speed_max);
  if (!(s.sampler.speed_min > 0.0) || s.sampler.speed_max < s.sampler.speed_min) {
    fail(where, "speed range must satisfy 0 < speed_min <= speed_max");
  }
}

}  // namespace

FullConfig default_config() {
  FullConfig cfg;
  cfg.camera.tilt = 15.0 * M_PI / 180.0;  // nominal mounting pitch, synthetic
  cfg.scenarios.push_back(make_centered_scenario());
  cfg.scenarios.push_back(make_low_scenario());
  cfg.scenarios.push_back(make_smoke_scenario());
  return cfg;
}

FullConfig parse_config(const std::string& text, const std::string& origin) {
  FullConfig cfg = default_config();

  const auto non_space = text.find_first_not_of(" \t\r\n");
  if (non_space == std::string::npos) {
    return cfg;  // empty file: all defaults
  }

  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into line/column.
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream msg;
    msg << origin << ":" << line << ":" << col << ": " << e.what();
    throw ConfigError(msg.str());
  }
  if (!root.is_object()) {
    fail(origin, "config root must be a JSON object");
  }

  check_keys(root, "config",
             {"camera", "noise", "perception", "predictor", "gmm", "selector",
              "legs", "control", "sim", "scenarios"});

  if (root.contains("camera")) {
    parse_camera(root.at("camera"), cfg.camera);
  }
  if (root.contains("noise")) {
    parse_noise(root.at("noise"), "noise", cfg.noise);
  }

  if (root.contains("perception")) {
    const json& j = root.at("perception");
    check_keys(j, "perception",
               {"fps", "pre_release_frames", "delta_min", "latency_ticks",
                "min_obs_for_trigger"});
    cfg.perception_fps = get_number(j, "perception", "fps", cfg.perception_fps);
    cfg.pre_release_frames =
        get_int(j, "perception", "pre_release_frames", cfg.pre_release_frames);
    cfg.delta_min = get_number(j, "perception", "delta_min", cfg.delta_min);
    cfg.latency_ticks = get_int(j, "perception", "latency_ticks", cfg.latency_ticks);
    cfg.min_obs_for_trigger =
        get_int(j, "perception", "min_obs_for_trigger", cfg.min_obs_for_trigger);
    if (!(cfg.perception_fps > 0.0)) {
      fail("perception", "fps must be positive");
    }
    if (cfg.pre_release_frames < 0 || cfg.latency_ticks < 0 ||
        cfg.min_obs_for_trigger < 3) {
      fail("perception", "counts out of range (min_obs_for_trigger >= 3)");
    }
    if (!(cfg.delta_min > 0.0)) {
      fail("perception", "delta_min must be positive");
    }
  }

  if (root.contains("predictor")) {
    const json& j = root.at("predictor");
    check_keys(j, "predictor", {"lambda", "g"});
    cfg.lambda = get_number(j, "predictor", "lambda", cfg.lambda);
    cfg.g = get_number(j, "predictor", "g", cfg.g);
    if (cfg.lambda < 0.0 || !(cfg.g > 0.0)) {
      fail("predictor", "lambda must be >= 0 and g > 0");
    }
  }

  if (root.contains("gmm")) {
    const json& j = root.at("gmm");
    check_keys(j, "gmm",
               {"k_min", "k_max", "tol", "max_iter", "seed", "covariance_floor",
                "demo_count", "demo_mean_offset", "demo_std", "demo_file",
                "mixture_file"});
    cfg.gmm.k_min = get_int(j, "gmm", "k_min", cfg.gmm.k_min);
    cfg.gmm.k_max = get_int(j, "gmm", "k_max", cfg.gmm.k_max);
    cfg.gmm.em.tol = get_number(j, "gmm", "tol", cfg.gmm.em.tol);
    cfg.gmm.em.max_iter = get_int(j, "gmm", "max_iter", cfg.gmm.em.max_iter);
    cfg.gmm.em.seed = get_seed(j, "gmm", "seed", cfg.gmm.em.seed);
    cfg.gmm.em.covariance_floor =
        get_number(j, "gmm", "covariance_floor", cfg.gmm.em.covariance_floor);
    cfg.gmm.demo_count = get_int(j, "gmm", "demo_count", cfg.gmm.demo_count);
    cfg.gmm.demo_mean_offset =
        get_vec3(j, "gmm", "demo_mean_offset", cfg.gmm.demo_mean_offset);
    cfg.gmm.demo_std = get_vec3(j, "gmm", "demo_std", cfg.gmm.demo_std);
    if (j.contains("demo_file")) {
      cfg.gmm.demo_file = get_string(j, "gmm", "demo_file", "");
    }
    if (j.contains("mixture_file")) {
      cfg.gmm.mixture_file = get_string(j, "gmm", "mixture_file", "");
    }
    if (cfg.gmm.k_min < 1 || cfg.gmm.k_max < cfg.gmm.k_min) {
      fail("gmm", "k range must satisfy 1 <= k_min <= k_max");
    }
    if (cfg.gmm.demo_count < 2 || cfg.gmm.em.max_iter < 1 ||
        !(cfg.gmm.em.tol > 0.0) || !(cfg.gmm.em.covariance_floor > 0.0)) {
      fail("gmm", "fitting parameters out of range");
    }
  }

  if (root.contains("selector")) {
    const json& j = root.at("selector");
    check_keys(j, "selector", {"method", "x_offset", "t_horizon"});
    if (j.contains("method")) {
      try {
        cfg.method = catch_method_from_string(get_string(j, "selector", "method", ""));
      } catch (const InvalidInputError& e) {
        fail("selector", e.what());
      }
    }
    cfg.x_offset = get_number(j, "selector", "x_offset", cfg.x_offset);
    cfg.t_horizon = get_number(j, "selector", "t_horizon", cfg.t_horizon);
    if (!(cfg.t_horizon > 0.0)) {
      fail("selector", "t_horizon must be positive");
    }
  }

  if (root.contains("legs")) {
    const json& j = root.at("legs");
    check_keys(j, "legs",
               {"l_hip", "l_thigh", "l_calf", "shoulder_left", "shoulder_right",
                "q_min", "q_max", "nominal_q"});
    cfg.legs.l_hip = get_number(j, "legs", "l_hip", cfg.legs.l_hip);
    cfg.legs.l_thigh = get_number(j, "legs", "l_thigh", cfg.legs.l_thigh);
    cfg.legs.l_calf = get_number(j, "legs", "l_calf", cfg.legs.l_calf);
    cfg.legs.shoulder_left = get_vec3(j, "legs", "shoulder_left", cfg.legs.shoulder_left);
    cfg.legs.shoulder_right =
        get_vec3(j, "legs", "shoulder_right", cfg.legs.shoulder_right);
    cfg.legs.q_min = get_vec3(j, "legs", "q_min", cfg.legs.q_min);
    cfg.legs.q_max = get_vec3(j, "legs", "q_max", cfg.legs.q_max);
    cfg.legs.nominal_q = get_vec3(j, "legs", "nominal_q", cfg.legs.nominal_q);
    try {
      cfg.legs.validate();
    } catch (const InvalidInputError& e) {
      fail("legs", e.what());
    }
  }

  if (root.contains("control")) {
    const json& j = root.at("control");
    check_keys(j, "control", {"kp", "kd", "kd_joint", "y_opened", "y_closed", "t_thresh"});
    if (j.contains("kp")) {
      cfg.gains.kp = Vec3::Constant(get_number(j, "control", "kp", 0.0));
    }
    if (j.contains("kd")) {
      cfg.gains.kd = Vec3::Constant(get_number(j, "control", "kd", 0.0));
    }
    if (j.contains("kd_joint")) {
      cfg.gains.kd_joint = Vec3::Constant(get_number(j, "control", "kd_joint", 0.0));
    }
    cfg.y_opened = get_number(j, "control", "y_opened", cfg.y_opened);
    cfg.y_closed = get_number(j, "control", "y_closed", cfg.y_closed);
    cfg.t_thresh = get_number(j, "control", "t_thresh", cfg.t_thresh);
    if ((cfg.gains.kp.array() < 0.0).any() || (cfg.gains.kd.array() < 0.0).any() ||
        (cfg.gains.kd_joint.array() < 0.0).any()) {
      fail("control", "gains must be non-negative");
    }
    if (cfg.y_opened < 0.0 || cfg.y_closed < 0.0 || !(cfg.t_thresh > 0.0)) {
      fail("control", "catching offsets/threshold out of range");
    }
  }

  if (root.contains("sim")) {
    const json& j = root.at("sim");
    check_keys(j, "sim",
               {"control_dt", "joint_inertia", "joint_damping", "capture_radius",
                "object_halfwidth", "max_episode_time", "settle_time", "record_trace"});
    cfg.control_dt = get_number(j, "sim", "control_dt", cfg.control_dt);
    cfg.joint_inertia = get_vec3(j, "sim", "joint_inertia", cfg.joint_inertia);
    cfg.joint_damping = get_number(j, "sim", "joint_damping", cfg.joint_damping);
    cfg.capture_radius = get_number(j, "sim", "capture_radius", cfg.capture_radius);
    cfg.object_halfwidth =
        get_number(j, "sim", "object_halfwidth", cfg.object_halfwidth);
    cfg.max_episode_time =
        get_number(j, "sim", "max_episode_time", cfg.max_episode_time);
    cfg.settle_time = get_number(j, "sim", "settle_time", cfg.settle_time);
    cfg.record_trace = get_bool(j, "sim", "record_trace", cfg.record_trace);
    if (!(cfg.control_dt > 0.0) || (cfg.joint_inertia.array() <= 0.0).any() ||
        cfg.joint_damping < 0.0 || !(cfg.capture_radius > 0.0) ||
        cfg.object_halfwidth < 0.0 || !(cfg.max_episode_time > 0.0) ||
        cfg.settle_time < 0.0) {
      fail("sim", "simulation parameters out of range");
    }
  }

  if (root.contains("scenarios")) {
    if (!root.at("scenarios").is_array()) {
      fail("scenarios", "expected an array");
    }
    // A config-provided catalog replaces the built-in one.
    cfg.scenarios.clear();
    for (const auto& js : root.at("scenarios")) {
      if (!js.is_object()) {
        fail("scenarios", "entries must be objects");
      }
      Scenario s;
      s.noise = cfg.noise;
      parse_scenario(js, cfg.noise, s);
      cfg.scenarios.push_back(std::move(s));
    }
  } else {
    // Built-in scenarios inherit the configured noise model.
    for (auto& s : cfg.scenarios) {
      if (s.name != "smoke-1") {
        s.noise = cfg.noise;
      }
    }
  }

  return cfg;
}

FullConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file: " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.string());
}

GaussianMixture FullConfig::build_mixture() const {
  if (gmm.mixture_file) {
    return load_mixture(*gmm.mixture_file);
  }
  DemoDataset demos;
  if (gmm.demo_file) {
    demos = load_demo_dataset(*gmm.demo_file);
  } else {
    const Vec3 mean = nominal_foot_center(legs) + gmm.demo_mean_offset;
    demos = generate_demo_dataset(gmm.demo_count, mean, gmm.demo_std, gmm.em.seed);
  }
  return select_k(demos, gmm.k_min, gmm.k_max, gmm.em);
}

SimConfig FullConfig::make_sim_config() const {
  SimConfig sim;
  sim.control_dt = control_dt;
  sim.perception_fps = perception_fps;
  sim.joint_inertia = joint_inertia;
  sim.joint_damping = joint_damping;
  sim.capture_radius = capture_radius;
  sim.object_halfwidth = object_halfwidth;
  sim.max_episode_time = max_episode_time;
  sim.settle_time = settle_time;
  sim.camera = camera;
  sim.noise = noise;
  sim.pre_release_frames = pre_release_frames;
  sim.delta_min = delta_min;
  sim.latency_ticks = latency_ticks;
  sim.min_obs_for_trigger = min_obs_for_trigger;
  sim.lambda = lambda;
  sim.g = g;
  sim.method = method;
  sim.x_offset = x_offset;
  sim.t_horizon = t_horizon;
  sim.mixture = build_mixture();
  sim.legs = legs;
  sim.gains = gains;
  sim.y_opened = y_opened;
  sim.y_closed = y_closed;
  sim.t_thresh = t_thresh;
  sim.record_trace = record_trace;
  return sim;
}

void save_mixture(const GaussianMixture& mixture, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["weights"] = nlohmann::ordered_json::array();
  j["means"] = nlohmann::ordered_json::array();
  j["covariances"] = nlohmann::ordered_json::array();
  for (const auto& c : mixture.components()) {
    j["weights"].push_back(c.weight);
    j["means"].push_back({c.mean.x(), c.mean.y(), c.mean.z()});
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (int r = 0; r < 3; ++r) {
      rows.push_back({c.covariance(r, 0), c.covariance(r, 1), c.covariance(r, 2)});
    }
    j["covariances"].push_back(std::move(rows));
  }
  std::ofstream out(path);
  if (!out) {
    throw ConfigError("cannot open mixture file for writing: " + path.string());
  }
  out << j.dump(2) << "\n";
}

GaussianMixture load_mixture(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open mixture file: " + path.string());
  }
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("mixture file " + path.string() + ": " + e.what());
  }
  check_keys(j, "mixture", {"weights", "means", "covariances"});
  if (!j.contains("weights") || !j.contains("means") || !j.contains("covariances")) {
    throw ConfigError("mixture file must contain weights, means, covariances");
  }
  const auto& weights = j.at("weights");
  const auto& means = j.at("means");
  const auto& covs = j.at("covariances");
  if (weights.size() != means.size() || weights.size() != covs.size() ||
      weights.empty()) {
    throw ConfigError("mixture arrays must be non-empty and of equal length");
  }
  std::vector<GaussianComponent> comps;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    GaussianComponent c;
    c.weight = weights[i].get<double>();
    c.mean = Vec3(means[i][0].get<double>(), means[i][1].get<double>(),
                  means[i][2].get<double>());
    for (int r = 0; r < 3; ++r) {
      for (int cidx = 0; cidx < 3; ++cidx) {
        c.covariance(r, cidx) = covs[i][r][cidx].get<double>();
      }
    }
    comps.push_back(std::move(c));
  }
  try {
    return GaussianMixture(std::move(comps));
  } catch (const InvalidInputError& e) {
    throw ConfigError("mixture file " + path.string() + ": " + e.what());
  }
}

}  // namespace quadcatch
