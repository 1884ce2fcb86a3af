#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "seatrack/alloc.hpp"
#include "seatrack/fuse.hpp"
#include "seatrack/geom.hpp"
#include "seatrack/mathutil.hpp"
#include "seatrack/mot.hpp"
#include "seatrack/nav_ekf.hpp"
#include "seatrack/percept.hpp"
#include "seatrack/view.hpp"

namespace seatrack {

// Raised for any scenario-file problem; the message starts with the
// dotted path of the offending field.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct RatesConfig {
  double tick_hz = 10.0;
  double comm_hz = 2.0;
  double alloc_hz = 1.0;
  int gps_every = 1;  // GPS fix every n-th tick
  int imu_every = 1;

  int ticks_per_comm() const;
  int ticks_per_alloc() const;
  void validate() const;
};

struct WorldConfig {
  double bob_amplitude = 0.0;  // vertical sea-state oscillation of containers
  double bob_period = 5.0;

  void validate() const;
};

struct ExtrinsicConfig {
  Vec3 translation = Vec3::Zero();
  double yaw_deg = 0.0;
  double pitch_deg = 0.0;
  double roll_deg = 0.0;

  RigidTransform transform() const;
};

// Camera slung under the body looking straight down, image top facing the
// body x axis.
ExtrinsicConfig default_camera_extrinsic();

struct AgentConfig {
  AgentId id = 0;
  Vec3 start = Vec3::Zero();
  double yaw_deg = 0.0;
  double v_max = 5.0;
  ExtrinsicConfig odom_from_body;
  ExtrinsicConfig body_from_camera = default_camera_extrinsic();

  void validate() const;
};

struct ContainerConfig {
  std::uint64_t id = 0;
  Vec3 start = Vec3::Zero();
  Vec3 drift = Vec3::Zero();
};

struct VesselConfig {
  Vec3 start = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  ExtrinsicConfig odom_from_base;
};

struct SensorConfig {
  CameraIntrinsics camera;
  DetectorModel detector;
  RangeNoiseModel range_noise;

  void validate() const;
};

struct MissionConfig {
  RingParams ring;
  double eps = 0.1;
  double tau_logdet = -3.0;
  double tau_gain = 0.05;
  double arrive_tol = 0.5;
  // Either one shared route or one route per agent, in agent order.
  std::vector<std::vector<Vec3>> patrol;

  void validate(std::size_t num_agents) const;
};

struct BusConfig {
  double drop_prob = 0.0;

  void validate() const;
};

struct ScenarioConfig {
  std::uint64_t seed = 1;
  double duration = 60.0;
  RatesConfig rates;
  WorldConfig world;
  NavNoiseConfig nav;
  SensorConfig sensor;
  TrackerConfig mot;
  FuserConfig fuse;
  AllocConfig alloc;
  MissionConfig mission;
  BusConfig bus;
  VesselConfig vessel;
  std::vector<AgentConfig> agents;
  std::vector<ContainerConfig> containers;

  void validate() const;
  // Patrol route for the n-th agent (shared route handled transparently).
  const std::vector<Vec3>& patrol_route(std::size_t agent_index) const;
};

ScenarioConfig parse_config_json(const nlohmann::json& j);
ScenarioConfig parse_config(const std::filesystem::path& path);
nlohmann::json emit_config(const ScenarioConfig& cfg);

}  // namespace seatrack
