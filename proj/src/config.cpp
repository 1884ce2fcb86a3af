#include "seatrack/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace seatrack {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

// Pulls typed fields out of one JSON object, remembers which keys were
// consumed, and rejects the rest in finish(). Every error names the full
// dotted path of the field.
class Reader {
 public:
  Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) fail(path_, "expected an object");
  }

  bool has(const char* key) const { return obj_.contains(key); }

  double number(const char* key, double def) {
    return has(key) ? number(key) : def;
  }
  double number(const char* key) {
    const json& v = field(key);
    if (!v.is_number()) fail(sub(key), "expected a number");
    return v.get<double>();
  }

  int integer(const char* key, int def) {
    return has(key) ? integer(key) : def;
  }
  int integer(const char* key) {
    const json& v = field(key);
    if (!v.is_number_integer()) fail(sub(key), "expected an integer");
    return v.get<int>();
  }

  std::uint64_t u64(const char* key, std::uint64_t def) {
    if (!has(key)) return def;
    const json& v = field(key);
    if (!v.is_number_unsigned() && !v.is_number_integer()) {
      fail(sub(key), "expected a non-negative integer");
    }
    if (v.is_number_integer() && v.get<std::int64_t>() < 0) {
      fail(sub(key), "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  Vec3 vec3(const char* key, const Vec3& def) {
    return has(key) ? vec3(key) : def;
  }
  Vec3 vec3(const char* key) {
    const json& v = field(key);
    return parse_vec3(v, sub(key));
  }

  const json& array(const char* key) {
    const json& v = field(key);
    if (!v.is_array()) fail(sub(key), "expected an array");
    return v;
  }

  std::optional<Reader> object(const char* key) {
    if (!has(key)) return std::nullopt;
    const json& v = field(key);
    if (!v.is_object()) fail(sub(key), "expected an object");
    return Reader(v, sub(key));
  }

  std::string sub(const char* key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const std::string& path() const { return path_; }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) fail(sub(it.key().c_str()), "unknown key");
    }
  }

  static Vec3 parse_vec3(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 3) fail(path, "expected an array of 3 numbers");
    Vec3 out;
    for (int i = 0; i < 3; ++i) {
      if (!v[i].is_number()) fail(path, "expected an array of 3 numbers");
      out[i] = v[i].get<double>();
    }
    return out;
  }

 private:
  const json& field(const char* key) {
    if (!obj_.contains(key)) fail(sub(key), "missing required field");
    seen_.insert(key);
    return obj_.at(key);
  }

  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

ExtrinsicConfig parse_extrinsic(Reader r, const ExtrinsicConfig& def) {
  ExtrinsicConfig out = def;
  out.translation = r.vec3("translation", def.translation);
  out.yaw_deg = r.number("yaw_deg", def.yaw_deg);
  out.pitch_deg = r.number("pitch_deg", def.pitch_deg);
  out.roll_deg = r.number("roll_deg", def.roll_deg);
  r.finish();
  return out;
}

json emit_vec3(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json emit_extrinsic(const ExtrinsicConfig& e) {
  return {{"translation", emit_vec3(e.translation)},
          {"yaw_deg", e.yaw_deg},
          {"pitch_deg", e.pitch_deg},
          {"roll_deg", e.roll_deg}};
}

// Re-raise constraint violations from the section validators with the
// section path prefixed; validator messages start with the bare key, so the
// joined text reads like "mission.r_h must be positive".
template <typename F>
void check(const std::string& path, F&& body) {
  try {
    body();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + "." + e.what());
  }
}

}  // namespace

int RatesConfig::ticks_per_comm() const {
  return static_cast<int>(std::lround(tick_hz / comm_hz));
}

int RatesConfig::ticks_per_alloc() const {
  return static_cast<int>(std::lround(tick_hz / alloc_hz));
}

void RatesConfig::validate() const {
  if (!(tick_hz > 0.0)) throw std::invalid_argument("tick_hz must be positive");
  if (!(comm_hz > 0.0)) throw std::invalid_argument("comm_hz must be positive");
  if (!(alloc_hz > 0.0)) throw std::invalid_argument("alloc_hz must be positive");
  if (gps_every < 1 || imu_every < 1) {
    throw std::invalid_argument("gps_every and imu_every must be at least 1");
  }
  const double ratio_comm = tick_hz / comm_hz;
  const double ratio_alloc = tick_hz / alloc_hz;
  if (std::abs(ratio_comm - std::lround(ratio_comm)) > 1e-9 || ratio_comm < 1.0) {
    throw std::invalid_argument("comm_hz must divide tick_hz");
  }
  if (std::abs(ratio_alloc - std::lround(ratio_alloc)) > 1e-9 || ratio_alloc < 1.0) {
    throw std::invalid_argument("alloc_hz must divide tick_hz");
  }
}

void WorldConfig::validate() const {
  if (bob_amplitude < 0.0) throw std::invalid_argument("bob_amplitude must be non-negative");
  if (!(bob_period > 0.0)) throw std::invalid_argument("bob_period must be positive");
}

RigidTransform ExtrinsicConfig::transform() const {
  return RigidTransform::from_ypr(deg2rad(yaw_deg), deg2rad(pitch_deg),
                                  deg2rad(roll_deg), translation);
}

ExtrinsicConfig default_camera_extrinsic() {
  ExtrinsicConfig e;
  e.yaw_deg = -90.0;
  e.roll_deg = 180.0;
  return e;
}

void AgentConfig::validate() const {
  if (id == 0) throw std::invalid_argument("id must be nonzero (0 is the vessel)");
  if (!(v_max > 0.0)) throw std::invalid_argument("v_max must be positive");
}

void SensorConfig::validate() const {
  camera.validate();
  detector.validate();
  if (!(range_noise.sigma0 > 0.0) || range_noise.k < 0.0) {
    throw std::invalid_argument("sigma0 must be > 0 and k >= 0");
  }
}

void MissionConfig::validate(std::size_t num_agents) const {
  ring.validate();
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (!(arrive_tol > 0.0)) throw std::invalid_argument("arrive_tol must be positive");
  if (!(tau_gain >= 0.0)) throw std::invalid_argument("tau_gain must be non-negative");
  if (!patrol.empty() && patrol.size() != 1 && patrol.size() != num_agents) {
    throw std::invalid_argument("patrol needs one shared route or one per agent");
  }
  for (const auto& route : patrol) {
    if (route.empty()) throw std::invalid_argument("patrol routes must be non-empty");
  }
}

void BusConfig::validate() const {
  if (drop_prob < 0.0 || drop_prob > 1.0) {
    throw std::invalid_argument("drop_prob must be in [0, 1]");
  }
}

void ScenarioConfig::validate() const {
  if (!(duration > 0.0)) throw std::invalid_argument("duration must be positive");
  check("rates", [&] { rates.validate(); });
  check("world", [&] { world.validate(); });
  check("nav", [&] { nav.validate(); });
  check("sensor.camera", [&] { sensor.camera.validate(); });
  check("sensor.detector", [&] { sensor.detector.validate(); });
  check("sensor.range_noise", [&] {
    if (!(sensor.range_noise.sigma0 > 0.0) || sensor.range_noise.k < 0.0) {
      throw std::invalid_argument("sigma0 must be > 0 and k >= 0");
    }
  });
  check("mot", [&] { mot.validate(); });
  check("fuse", [&] { fuse.validate(); });
  check("alloc", [&] { alloc.validate(); });
  check("mission", [&] { mission.validate(agents.size()); });
  check("bus", [&] { bus.validate(); });
  std::set<AgentId> agent_ids;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    check("agents[" + std::to_string(i) + "]", [&] { agents[i].validate(); });
    if (!agent_ids.insert(agents[i].id).second) {
      fail("agents[" + std::to_string(i) + "].id", "duplicate agent id");
    }
  }
  std::set<std::uint64_t> container_ids;
  for (std::size_t i = 0; i < containers.size(); ++i) {
    if (!container_ids.insert(containers[i].id).second) {
      fail("containers[" + std::to_string(i) + "].id", "duplicate container id");
    }
  }
}

const std::vector<Vec3>& ScenarioConfig::patrol_route(std::size_t agent_index) const {
  static const std::vector<Vec3> kEmpty;
  if (mission.patrol.empty()) return kEmpty;
  if (mission.patrol.size() == 1) return mission.patrol.front();
  return mission.patrol.at(agent_index);
}

ScenarioConfig parse_config_json(const json& j) {
  ScenarioConfig cfg;
  Reader root(j, "");
  cfg.seed = root.u64("seed", cfg.seed);
  cfg.duration = root.number("duration", cfg.duration);

  if (auto r = root.object("rates")) {
    cfg.rates.tick_hz = r->number("tick_hz", cfg.rates.tick_hz);
    cfg.rates.comm_hz = r->number("comm_hz", cfg.rates.comm_hz);
    cfg.rates.alloc_hz = r->number("alloc_hz", cfg.rates.alloc_hz);
    cfg.rates.gps_every = r->integer("gps_every", cfg.rates.gps_every);
    cfg.rates.imu_every = r->integer("imu_every", cfg.rates.imu_every);
    r->finish();
  }
  if (auto r = root.object("world")) {
    cfg.world.bob_amplitude = r->number("bob_amplitude", cfg.world.bob_amplitude);
    cfg.world.bob_period = r->number("bob_period", cfg.world.bob_period);
    r->finish();
  }
  if (auto r = root.object("nav")) {
    cfg.nav.process_psd = r->vec3("process_psd", cfg.nav.process_psd);
    cfg.nav.gps_pos_std = r->number("gps_pos_std", cfg.nav.gps_pos_std);
    cfg.nav.imu_acc_std = r->number("imu_acc_std", cfg.nav.imu_acc_std);
    cfg.nav.maneuver_inflation = r->number("maneuver_inflation", cfg.nav.maneuver_inflation);
    cfg.nav.maneuver_speed_threshold = r->number("maneuver_speed_threshold", cfg.nav.maneuver_speed_threshold);
    cfg.nav.init_pos_var = r->number("init_pos_var", cfg.nav.init_pos_var);
    cfg.nav.init_vel_var = r->number("init_vel_var", cfg.nav.init_vel_var);
    cfg.nav.init_acc_var = r->number("init_acc_var", cfg.nav.init_acc_var);
    r->finish();
  }
  if (auto r = root.object("sensor")) {
    if (auto c = r->object("camera")) {
      cfg.sensor.camera.f = c->number("f", cfg.sensor.camera.f);
      cfg.sensor.camera.cx = c->number("cx", cfg.sensor.camera.cx);
      cfg.sensor.camera.cy = c->number("cy", cfg.sensor.camera.cy);
      cfg.sensor.camera.baseline = c->number("baseline", cfg.sensor.camera.baseline);
      cfg.sensor.camera.width = c->integer("width", cfg.sensor.camera.width);
      cfg.sensor.camera.height = c->integer("height", cfg.sensor.camera.height);
      cfg.sensor.camera.d_min = c->number("d_min", cfg.sensor.camera.d_min);
      cfg.sensor.camera.d_max = c->number("d_max", cfg.sensor.camera.d_max);
      cfg.sensor.camera.z_min = c->number("z_min", cfg.sensor.camera.z_min);
      cfg.sensor.camera.z_max = c->number("z_max", cfg.sensor.camera.z_max);
      cfg.sensor.camera.z_clamp_slack = c->number("z_clamp_slack", cfg.sensor.camera.z_clamp_slack);
      c->finish();
    }
    if (auto d = r->object("detector")) {
      cfg.sensor.detector.p_det = d->number("p_det", cfg.sensor.detector.p_det);
      cfg.sensor.detector.sigma_d = d->number("sigma_d", cfg.sensor.detector.sigma_d);
      cfg.sensor.detector.lambda_fp = d->number("lambda_fp", cfg.sensor.detector.lambda_fp);
      cfg.sensor.detector.conf_lo = d->number("conf_lo", cfg.sensor.detector.conf_lo);
      cfg.sensor.detector.conf_hi = d->number("conf_hi", cfg.sensor.detector.conf_hi);
      cfg.sensor.detector.patch_size = d->integer("patch_size", cfg.sensor.detector.patch_size);
      cfg.sensor.detector.min_support = d->integer("min_support", cfg.sensor.detector.min_support);
      cfg.sensor.detector.bbox_size = d->number("bbox_size", cfg.sensor.detector.bbox_size);
      d->finish();
    }
    if (auto n = r->object("range_noise")) {
      cfg.sensor.range_noise.sigma0 = n->number("sigma0", cfg.sensor.range_noise.sigma0);
      cfg.sensor.range_noise.k = n->number("k", cfg.sensor.range_noise.k);
      n->finish();
    }
    r->finish();
  }
  if (auto r = root.object("mot")) {
    cfg.mot.gate_d2 = r->number("gate_d2", cfg.mot.gate_d2);
    cfg.mot.n_confirm = r->integer("n_confirm", cfg.mot.n_confirm);
    cfg.mot.t_prune = r->number("t_prune", cfg.mot.t_prune);
    cfg.mot.logdet_prune = r->number("logdet_prune", cfg.mot.logdet_prune);
    cfg.mot.process_psd = r->vec3("process_psd", cfg.mot.process_psd);
    cfg.mot.init_vel_var = r->number("init_vel_var", cfg.mot.init_vel_var);
    r->finish();
  }
  if (auto r = root.object("fuse")) {
    cfg.fuse.gate_d2 = r->number("gate_d2", cfg.fuse.gate_d2);
    r->finish();
  }
  if (auto r = root.object("alloc")) {
    cfg.alloc.weights.eta = r->number("eta", cfg.alloc.weights.eta);
    cfg.alloc.weights.beta = r->number("beta", cfg.alloc.weights.beta);
    cfg.alloc.weights.rho = r->number("rho", cfg.alloc.weights.rho);
    cfg.alloc.weights.gamma = r->number("gamma", cfg.alloc.weights.gamma);
    cfg.alloc.weights.kappa = r->number("kappa", cfg.alloc.weights.kappa);
    cfg.alloc.d_max = r->number("d_max", cfg.alloc.d_max);
    cfg.alloc.r_safe = r->number("r_safe", cfg.alloc.r_safe);
    cfg.alloc.capacity = r->integer("capacity", cfg.alloc.capacity);
    r->finish();
  }
  if (auto r = root.object("mission")) {
    cfg.mission.ring.radius = r->number("r_h", cfg.mission.ring.radius);
    cfg.mission.ring.altitude = r->number("h", cfg.mission.ring.altitude);
    cfg.mission.ring.count = r->integer("ring_count", cfg.mission.ring.count);
    cfg.mission.eps = r->number("eps", cfg.mission.eps);
    cfg.mission.tau_logdet = r->number("tau_logdet", cfg.mission.tau_logdet);
    cfg.mission.tau_gain = r->number("tau_gain", cfg.mission.tau_gain);
    cfg.mission.arrive_tol = r->number("arrive_tol", cfg.mission.arrive_tol);
    if (r->has("patrol")) {
      const json& routes = r->array("patrol");
      for (std::size_t i = 0; i < routes.size(); ++i) {
        const std::string route_path = r->sub("patrol") + "[" + std::to_string(i) + "]";
        if (!routes[i].is_array()) fail(route_path, "expected an array of waypoints");
        std::vector<Vec3> route;
        for (std::size_t w = 0; w < routes[i].size(); ++w) {
          route.push_back(Reader::parse_vec3(routes[i][w],
                                             route_path + "[" + std::to_string(w) + "]"));
        }
        cfg.mission.patrol.push_back(std::move(route));
      }
    }
    r->finish();
  }
  if (auto r = root.object("bus")) {
    cfg.bus.drop_prob = r->number("drop_prob", cfg.bus.drop_prob);
    r->finish();
  }
  if (auto r = root.object("vessel")) {
    cfg.vessel.start = r->vec3("start", cfg.vessel.start);
    cfg.vessel.velocity = r->vec3("velocity", cfg.vessel.velocity);
    if (auto e = r->object("odom_from_base")) {
      cfg.vessel.odom_from_base = parse_extrinsic(std::move(*e), cfg.vessel.odom_from_base);
    }
    r->finish();
  }
  if (root.has("agents")) {
    const json& arr = root.array("agents");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string path = "agents[" + std::to_string(i) + "]";
      if (!arr[i].is_object()) fail(path, "expected an object");
      Reader a(arr[i], path);
      AgentConfig agent;
      agent.id = a.u64("id", 0);
      if (agent.id == 0) fail(path + ".id", "missing or zero agent id");
      agent.start = a.vec3("start", agent.start);
      agent.yaw_deg = a.number("yaw_deg", agent.yaw_deg);
      agent.v_max = a.number("v_max", agent.v_max);
      if (auto e = a.object("odom_from_body")) {
        agent.odom_from_body = parse_extrinsic(std::move(*e), agent.odom_from_body);
      }
      if (auto e = a.object("body_from_camera")) {
        agent.body_from_camera = parse_extrinsic(std::move(*e), agent.body_from_camera);
      }
      a.finish();
      cfg.agents.push_back(agent);
    }
  }
  if (root.has("containers")) {
    const json& arr = root.array("containers");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string path = "containers[" + std::to_string(i) + "]";
      if (!arr[i].is_object()) fail(path, "expected an object");
      Reader c(arr[i], path);
      ContainerConfig container;
      container.id = c.u64("id", 0);
      if (container.id == 0) fail(path + ".id", "missing or zero container id");
      container.start = c.vec3("start", container.start);
      container.drift = c.vec3("drift", container.drift);
      c.finish();
      cfg.containers.push_back(container);
    }
  }
  root.finish();

  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

ScenarioConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error in " + path.string() + ": " + e.what());
  }
  return parse_config_json(j);
}

json emit_config(const ScenarioConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["duration"] = cfg.duration;
  j["rates"] = {{"tick_hz", cfg.rates.tick_hz},
                {"comm_hz", cfg.rates.comm_hz},
                {"alloc_hz", cfg.rates.alloc_hz},
                {"gps_every", cfg.rates.gps_every},
                {"imu_every", cfg.rates.imu_every}};
  j["world"] = {{"bob_amplitude", cfg.world.bob_amplitude},
                {"bob_period", cfg.world.bob_period}};
  j["nav"] = {{"process_psd", emit_vec3(cfg.nav.process_psd)},
              {"gps_pos_std", cfg.nav.gps_pos_std},
              {"imu_acc_std", cfg.nav.imu_acc_std},
              {"maneuver_inflation", cfg.nav.maneuver_inflation},
              {"maneuver_speed_threshold", cfg.nav.maneuver_speed_threshold},
              {"init_pos_var", cfg.nav.init_pos_var},
              {"init_vel_var", cfg.nav.init_vel_var},
              {"init_acc_var", cfg.nav.init_acc_var}};
  j["sensor"] = {
      {"camera",
       {{"f", cfg.sensor.camera.f},
        {"cx", cfg.sensor.camera.cx},
        {"cy", cfg.sensor.camera.cy},
        {"baseline", cfg.sensor.camera.baseline},
        {"width", cfg.sensor.camera.width},
        {"height", cfg.sensor.camera.height},
        {"d_min", cfg.sensor.camera.d_min},
        {"d_max", cfg.sensor.camera.d_max},
        {"z_min", cfg.sensor.camera.z_min},
        {"z_max", cfg.sensor.camera.z_max},
        {"z_clamp_slack", cfg.sensor.camera.z_clamp_slack}}},
      {"detector",
       {{"p_det", cfg.sensor.detector.p_det},
        {"sigma_d", cfg.sensor.detector.sigma_d},
        {"lambda_fp", cfg.sensor.detector.lambda_fp},
        {"conf_lo", cfg.sensor.detector.conf_lo},
        {"conf_hi", cfg.sensor.detector.conf_hi},
        {"patch_size", cfg.sensor.detector.patch_size},
        {"min_support", cfg.sensor.detector.min_support},
        {"bbox_size", cfg.sensor.detector.bbox_size}}},
      {"range_noise",
       {{"sigma0", cfg.sensor.range_noise.sigma0}, {"k", cfg.sensor.range_noise.k}}}};
  j["mot"] = {{"gate_d2", cfg.mot.gate_d2},
              {"n_confirm", cfg.mot.n_confirm},
              {"t_prune", cfg.mot.t_prune},
              {"logdet_prune", cfg.mot.logdet_prune},
              {"process_psd", emit_vec3(cfg.mot.process_psd)},
              {"init_vel_var", cfg.mot.init_vel_var}};
  j["fuse"] = {{"gate_d2", cfg.fuse.gate_d2}};
  j["alloc"] = {{"eta", cfg.alloc.weights.eta},
                {"beta", cfg.alloc.weights.beta},
                {"rho", cfg.alloc.weights.rho},
                {"gamma", cfg.alloc.weights.gamma},
                {"kappa", cfg.alloc.weights.kappa},
                {"d_max", cfg.alloc.d_max},
                {"r_safe", cfg.alloc.r_safe},
                {"capacity", cfg.alloc.capacity}};
  json patrol = json::array();
  for (const auto& route : cfg.mission.patrol) {
    json r = json::array();
    for (const auto& wp : route) r.push_back(emit_vec3(wp));
    patrol.push_back(std::move(r));
  }
  j["mission"] = {{"r_h", cfg.mission.ring.radius},
                  {"h", cfg.mission.ring.altitude},
                  {"ring_count", cfg.mission.ring.count},
                  {"eps", cfg.mission.eps},
                  {"tau_logdet", cfg.mission.tau_logdet},
                  {"tau_gain", cfg.mission.tau_gain},
                  {"arrive_tol", cfg.mission.arrive_tol},
                  {"patrol", std::move(patrol)}};
  j["bus"] = {{"drop_prob", cfg.bus.drop_prob}};
  j["vessel"] = {{"start", emit_vec3(cfg.vessel.start)},
                 {"velocity", emit_vec3(cfg.vessel.velocity)},
                 {"odom_from_base", emit_extrinsic(cfg.vessel.odom_from_base)}};
  j["agents"] = json::array();
  for (const AgentConfig& a : cfg.agents) {
    j["agents"].push_back({{"id", a.id},
                           {"start", emit_vec3(a.start)},
                           {"yaw_deg", a.yaw_deg},
                           {"v_max", a.v_max},
                           {"odom_from_body", emit_extrinsic(a.odom_from_body)},
                           {"body_from_camera", emit_extrinsic(a.body_from_camera)}});
  }
  j["containers"] = json::array();
  for (const ContainerConfig& c : cfg.containers) {
    j["containers"].push_back(
        {{"id", c.id}, {"start", emit_vec3(c.start)}, {"drift", emit_vec3(c.drift)}});
  }
  return j;
}

}  // namespace seatrack
