#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "seatrack/alloc.hpp"
#include "seatrack/bus.hpp"
#include "seatrack/config.hpp"
#include "seatrack/fuse.hpp"
#include "seatrack/mot.hpp"
#include "seatrack/nav_ekf.hpp"
#include "seatrack/runlog.hpp"
#include "seatrack/view.hpp"

namespace seatrack {

struct PhysicalUav {
  AgentId id = 0;
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 goal = Vec3::Zero();
  double v_max = 5.0;
};

struct ContainerState {
  std::uint64_t id = 0;
  Vec3 base = Vec3::Zero();  // drift-integrated position, bob excluded
  Vec3 drift = Vec3::Zero();
};

// Sea-surface position at time t: the drift-integrated base plus the
// sinusoidal bob, phase-shifted per container.
Vec3 container_position(const ContainerState& c, double t, const WorldConfig& world);

struct PhysicalWorld {
  double t = 0.0;
  std::vector<PhysicalUav> uavs;
  std::vector<ContainerState> containers;
  Vec3 vessel_position = Vec3::Zero();
  Vec3 vessel_velocity = Vec3::Zero();
};

// One Euler step: containers drift, UAVs fly straight at their goal with
// speed clamped to v_max, the vessel holds its course.
void step_world(PhysicalWorld& w, double dt, const WorldConfig& world);

// Estimator and decision state carried per UAV alongside the physical world.
struct AgentRuntime {
  AgentConfig cfg;
  NavState nav;
  bool nav_ready = false;
  Vec3 prev_cmd_vel = Vec3::Zero();
  Tracker tracker;
  ModeState mode;
  std::optional<FusedId> prev_primary;
  Rng sensor_rng;
  Rng nav_rng;
};

struct WorldState {
  std::int64_t k = 0;
  PhysicalWorld phys;
  std::vector<AgentRuntime> agents;
  NavState vessel_nav;
  bool vessel_nav_ready = false;
  Fuser fuser;
  AssignmentSet assignment;
};

class Simulation {
 public:
  explicit Simulation(const ScenarioConfig& cfg);

  // Runs the whole mission and returns the complete log. Pure function of
  // the config: equal seeds give byte-identical logs.
  RunLog run();

 private:
  void process_tick();
  void sense_and_track(std::size_t idx);
  void comm_round();
  void alloc_round();
  void update_goals();
  void log_tick();
  RigidTransform camera_pose(const AgentRuntime& a, const Vec3& body_position) const;

  ScenarioConfig cfg_;
  double dt_;
  std::int64_t ticks_;
  WorldState w_;
  Rng bus_rng_;
  Rng vessel_rng_;
  BusStats bus_stats_;
  RunLog log_;
};

RunLog run_scenario(const ScenarioConfig& cfg);

}  // namespace seatrack
