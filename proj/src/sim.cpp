#include "seatrack/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "seatrack/geom.hpp"
#include "seatrack/percept.hpp"

namespace seatrack {

namespace {

constexpr double kGoldenAngle = 2.399963229728653;  // de-phases container bob

double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

}  // namespace

Vec3 container_position(const ContainerState& c, double t, const WorldConfig& world) {
  Vec3 p = c.base;
  if (world.bob_amplitude > 0.0) {
    const double phase = kGoldenAngle * static_cast<double>(c.id);
    p.z() += world.bob_amplitude *
             std::sin(2.0 * std::numbers::pi * t / world.bob_period + phase);
  }
  return p;
}

void step_world(PhysicalWorld& w, double dt, const WorldConfig& world) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_world: dt must be > 0");
  world.validate();
  w.t += dt;
  for (ContainerState& c : w.containers) c.base += c.drift * dt;
  for (PhysicalUav& u : w.uavs) {
    const Vec3 delta = u.goal - u.position;
    const double dist = delta.norm();
    Vec3 next = u.position;
    if (dist > 1e-12) {
      const double step = std::min(u.v_max * dt, dist);
      next += delta * (step / dist);
    }
    u.velocity = (next - u.position) / dt;
    u.position = next;
  }
  w.vessel_position += w.vessel_velocity * dt;
}

Simulation::Simulation(const ScenarioConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  dt_ = 1.0 / cfg_.rates.tick_hz;
  ticks_ = static_cast<std::int64_t>(std::llround(cfg_.duration * cfg_.rates.tick_hz));

  w_.fuser = Fuser(cfg_.fuse);
  w_.phys.vessel_position = cfg_.vessel.start;
  w_.phys.vessel_velocity = cfg_.vessel.velocity;
  for (std::size_t i = 0; i < cfg_.agents.size(); ++i) {
    const AgentConfig& ac = cfg_.agents[i];
    PhysicalUav u;
    u.id = ac.id;
    u.position = ac.start;
    u.v_max = ac.v_max;
    const auto& route = cfg_.patrol_route(i);
    u.goal = route.empty() ? ac.start : route.front();
    w_.phys.uavs.push_back(u);

    AgentRuntime a;
    a.cfg = ac;
    a.tracker = Tracker(cfg_.mot);
    a.sensor_rng = make_rng(cfg_.seed, 1000 + ac.id);
    a.nav_rng = make_rng(cfg_.seed, 2000 + ac.id);
    w_.agents.push_back(std::move(a));
  }
  for (const ContainerConfig& cc : cfg_.containers) {
    w_.phys.containers.push_back({cc.id, cc.start, cc.drift});
  }
  bus_rng_ = make_rng(cfg_.seed, 3000);
  vessel_rng_ = make_rng(cfg_.seed, 2000);
  log_.config_echo = emit_config(cfg_);
}

RigidTransform Simulation::camera_pose(const AgentRuntime& a, const Vec3& body_position) const {
  FrameTree tree;
  tree.set(world_frame(), odom_frame(a.cfg.id),
           RigidTransform(rot_z(deg2rad(a.cfg.yaw_deg)), body_position));
  tree.set(odom_frame(a.cfg.id), body_frame(a.cfg.id), a.cfg.odom_from_body.transform());
  tree.set(body_frame(a.cfg.id), camera_frame(a.cfg.id), a.cfg.body_from_camera.transform());
  return tree.camera_to_world_transform(a.cfg.id);
}

void Simulation::sense_and_track(std::size_t idx) {
  AgentRuntime& a = w_.agents[idx];
  if (!a.nav_ready) return;
  const PhysicalUav& u = w_.phys.uavs[idx];
  const double t = w_.phys.t;

  const RigidTransform true_cam = camera_pose(a, u.position);
  const RigidTransform est_cam = camera_pose(a, a.nav.position());

  std::vector<Vec3> targets;
  targets.reserve(w_.phys.containers.size());
  for (const ContainerState& c : w_.phys.containers) {
    targets.push_back(container_position(c, t, cfg_.world));
  }
  const auto detections = synth_detect(targets, true_cam, cfg_.sensor.camera,
                                       cfg_.sensor.detector, a.sensor_rng);
  const auto measurements =
      lift_detections(detections, est_cam, cfg_.sensor.camera, cfg_.sensor.range_noise,
                      cfg_.sensor.detector, a.cfg.id, t);
  a.tracker.step(measurements, t);
}

void Simulation::comm_round() {
  const double t = w_.phys.t;
  std::vector<std::vector<TrackSummary>> per_agent;
  per_agent.reserve(w_.agents.size());
  for (const AgentRuntime& a : w_.agents) {
    std::vector<TrackSummary> summaries;
    for (const Track& tr : a.tracker.confirmed()) {
      // Broadcast only tracks refreshed this tick. A coasting track's mean
      // drifts with its stale velocity while its covariance balloons, which
      // would both pollute the fused state and let the cross-agent gate
      // capture summaries of a neighboring target.
      if (tr.last_update < t - 0.5 * dt_) continue;
      TrackSummary s;
      s.agent = a.cfg.id;
      s.local_id = tr.id;
      s.timestamp = t;
      s.mean = tr.position();
      s.covariance = tr.position_cov();
      summaries.push_back(std::move(s));
    }
    per_agent.push_back(std::move(summaries));
  }

  const BusStats before = bus_stats_;
  const auto delivered = broadcast_round(per_agent, cfg_.bus.drop_prob, bus_rng_, &bus_stats_);
  w_.fuser.round(delivered, t);

  BusRecord br;
  br.k = w_.k;
  br.t = t;
  br.sent = bus_stats_.sent - before.sent;
  br.delivered = bus_stats_.delivered - before.delivered;
  br.dropped = bus_stats_.dropped - before.dropped;
  br.bytes = bus_stats_.bytes_sent - before.bytes_sent;
  br.total_sent = bus_stats_.sent;
  br.total_bytes = bus_stats_.bytes_sent;
  log_.bus.push_back(br);

  for (std::size_t i = 0; i < w_.agents.size(); ++i) {
    TracksRecord tr;
    tr.k = w_.k;
    tr.t = t;
    tr.agent = w_.agents[i].cfg.id;
    for (const Track& trk : w_.agents[i].tracker.confirmed()) {
      tr.tracks.push_back({trk.id, trk.position(), logdet_spd(trk.position_cov())});
    }
    log_.tracks.push_back(std::move(tr));
  }

  FusedRecord fr;
  fr.k = w_.k;
  fr.t = t;
  for (const FusedTrack& f : w_.fuser.tracks()) {
    fr.tracks.push_back({f.id, f.mean, f.logdet, f.done});
  }
  log_.fused.push_back(std::move(fr));
}

void Simulation::alloc_round() {
  const double t = w_.phys.t;
  const std::size_t n = w_.agents.size();

  const auto estimated_position = [&](std::size_t i) {
    return w_.agents[i].nav_ready ? w_.agents[i].nav.position() : w_.phys.uavs[i].position;
  };

  // Termination sweep over the live fused set.
  for (const FusedTrack& f : w_.fuser.active()) {
    std::vector<double> gains;
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<Vec3> blocked;
      for (std::size_t o = 0; o < n; ++o) {
        if (o == j) continue;
        blocked.push_back(estimated_position(o));
        if (w_.agents[o].mode.hover_pose) blocked.push_back(*w_.agents[o].mode.hover_pose);
      }
      double best = -1.0;
      for (const HoverCandidate& cand : ring_candidates(f.mean, cfg_.mission.ring)) {
        bool feasible = true;
        for (const Vec3& b : blocked) {
          if ((cand.pose - b).norm() < cfg_.alloc.r_safe) {
            feasible = false;
            break;
          }
        }
        if (!feasible) continue;
        best = std::max(best, viewpoint_gain(f.covariance, cand.pose, f.mean,
                                             cfg_.sensor.range_noise));
      }
      if (best >= 0.0) gains.push_back(best);
    }
    if (check_termination(f.covariance, gains, cfg_.mission.tau_logdet,
                          cfg_.mission.tau_gain)) {
      w_.fuser.mark_done(f.id);
      log_.summary.done.push_back({w_.k, t, f.id});
    }
  }

  const auto remaining = w_.fuser.active();
  std::vector<AllocTargetInput> targets;
  targets.reserve(remaining.size());
  for (const FusedTrack& f : remaining) targets.push_back({f.id, f.mean, f.covariance});

  std::vector<Vec3> uav_positions;
  std::vector<std::optional<std::uint64_t>> prev_primary;
  for (std::size_t i = 0; i < n; ++i) {
    uav_positions.push_back(estimated_position(i));
    prev_primary.push_back(w_.agents[i].prev_primary);
  }
  const CostMatrix cm =
      build_cost_matrix(uav_positions, prev_primary, targets, cfg_.alloc,
                        cfg_.sensor.range_noise);
  w_.assignment = solve_cmcf(cm, cfg_.alloc.capacity);

  ModesRecord mr;
  mr.k = w_.k;
  mr.t = t;
  std::vector<std::optional<Vec3>> claimed(n);
  for (std::size_t i = 0; i < n; ++i) {
    AgentRuntime& a = w_.agents[i];
    ModeInputs in;
    in.assigned = w_.assignment.per_uav[i].targets;
    in.primary = w_.assignment.per_uav[i].primary;
    if (in.primary) {
      for (const FusedTrack& f : remaining) {
        if (f.id == *in.primary) {
          in.primary_position = f.mean;
          in.primary_covariance = f.covariance;
          break;
        }
      }
    }
    if (a.mode.active_target) {
      for (const FusedTrack& f : w_.fuser.tracks()) {
        if (f.id == *a.mode.active_target) {
          in.active_done = f.done;
          break;
        }
      }
    }
    in.uav_position = estimated_position(i);
    in.constraints.r_safe = cfg_.alloc.r_safe;
    for (std::size_t o = 0; o < n; ++o) {
      if (o == i) continue;
      in.constraints.blocked.push_back(estimated_position(o));
      const auto& other_hover = o < i ? claimed[o] : w_.agents[o].mode.hover_pose;
      if (other_hover) in.constraints.blocked.push_back(*other_hover);
    }

    const ModeOutcome out = mode_step(a.mode, in, cfg_.mission.ring,
                                      cfg_.sensor.range_noise, cfg_.mission.eps);
    for (const ModeEvent& e : out.events) {
      if (e.handoff) {
        HandoffEvent h{w_.k, t, a.cfg.id, e.target};
        mr.handoffs.push_back(h);
        log_.summary.handoffs.push_back(h);
      }
    }
    a.mode = out.state;
    claimed[i] = out.state.hover_pose;
    a.prev_primary = w_.assignment.per_uav[i].primary;
  }

  AssignRecord ar;
  ar.k = w_.k;
  ar.t = t;
  for (std::size_t i = 0; i < n; ++i) {
    AssignSnap snap;
    snap.id = w_.agents[i].cfg.id;
    snap.targets = w_.assignment.per_uav[i].targets;
    snap.primary = w_.assignment.per_uav[i].primary;
    ar.uavs.push_back(std::move(snap));
  }
  log_.assigns.push_back(std::move(ar));

  for (std::size_t i = 0; i < n; ++i) {
    const AgentRuntime& a = w_.agents[i];
    mr.uavs.push_back({a.cfg.id, a.mode.mode, a.mode.active_target, a.mode.hover_pose});
  }
  log_.modes.push_back(std::move(mr));
}

void Simulation::update_goals() {
  for (std::size_t i = 0; i < w_.agents.size(); ++i) {
    AgentRuntime& a = w_.agents[i];
    PhysicalUav& u = w_.phys.uavs[i];
    if (a.mode.mode == Mode::kTracking && a.mode.hover_pose) {
      u.goal = *a.mode.hover_pose;
      continue;
    }
    const auto& route = cfg_.patrol_route(i);
    if (route.empty()) {
      u.goal = u.position;
      continue;
    }
    const Vec3 p = a.nav_ready ? a.nav.position() : u.position;
    if ((p - route[a.mode.patrol_index % route.size()]).norm() <= cfg_.mission.arrive_tol) {
      a.mode.patrol_index = (a.mode.patrol_index + 1) % route.size();
    }
    u.goal = route[a.mode.patrol_index % route.size()];
  }
}

void Simulation::log_tick() {
  const double t = w_.phys.t;
  TruthRecord tr;
  tr.k = w_.k;
  tr.t = t;
  for (const PhysicalUav& u : w_.phys.uavs) tr.uavs.push_back({u.id, u.position, u.velocity});
  for (const ContainerState& c : w_.phys.containers) {
    tr.containers.push_back({c.id, container_position(c, t, cfg_.world)});
  }
  tr.vessel = w_.phys.vessel_position;
  log_.truth.push_back(std::move(tr));

  NavRecord nr;
  nr.k = w_.k;
  nr.t = t;
  if (w_.vessel_nav_ready) nr.estimates.push_back({0, w_.vessel_nav.position()});
  for (std::size_t i = 0; i < w_.agents.size(); ++i) {
    if (w_.agents[i].nav_ready) {
      nr.estimates.push_back({w_.agents[i].cfg.id, w_.agents[i].nav.position()});
    }
  }
  log_.nav.push_back(std::move(nr));

  CountersRecord cr;
  cr.k = w_.k;
  cr.t = t;
  for (const AgentRuntime& a : w_.agents) {
    cr.agents.push_back({a.cfg.id, a.tracker.counters().raw, a.tracker.counters().pruned,
                         a.tracker.counters().confirmed_now});
  }
  log_.counters.push_back(std::move(cr));
}

void Simulation::process_tick() {
  w_.k += 1;
  const std::size_t n = w_.agents.size();
  const bool gps_tick = w_.k % cfg_.rates.gps_every == 0;
  const bool imu_tick = w_.k % cfg_.rates.imu_every == 0;

  std::vector<bool> aggressive(n, false);
  std::vector<Vec3> v_old(n);
  for (std::size_t i = 0; i < n; ++i) {
    AgentRuntime& a = w_.agents[i];
    const PhysicalUav& u = w_.phys.uavs[i];
    const Vec3 delta = u.goal - u.position;
    const double dist = delta.norm();
    Vec3 cmd = Vec3::Zero();
    if (dist > 1e-12) cmd = delta * (std::min(u.v_max, dist / dt_) / dist);
    aggressive[i] = (cmd - a.prev_cmd_vel).norm() > cfg_.nav.maneuver_speed_threshold;
    a.prev_cmd_vel = cmd;
    v_old[i] = u.velocity;
  }

  step_world(w_.phys, dt_, cfg_.world);
  w_.phys.t = static_cast<double>(w_.k) * dt_;  // keep tick times exact
  const double t = w_.phys.t;

  for (std::size_t i = 0; i < n; ++i) {
    AgentRuntime& a = w_.agents[i];
    const PhysicalUav& u = w_.phys.uavs[i];
    if (!a.nav_ready) {
      if (gps_tick) {
        const Vec3 z = u.position + draw_normal_vec3(a.nav_rng, cfg_.nav.gps_pos_std);
        a.nav = nav_init(z, cfg_.nav, t);
        a.nav_ready = true;
      }
      continue;
    }
    a.nav = nav_predict(a.nav, dt_, cfg_.nav, aggressive[i]);
    if (gps_tick) {
      const Vec3 z = u.position + draw_normal_vec3(a.nav_rng, cfg_.nav.gps_pos_std);
      a.nav = nav_update(a.nav, z, NavMeasurementKind::kGpsPosition, cfg_.nav);
    }
    if (imu_tick) {
      const Vec3 acc_true = (u.velocity - v_old[i]) / dt_;
      const Vec3 z = acc_true + draw_normal_vec3(a.nav_rng, cfg_.nav.imu_acc_std);
      a.nav = nav_update(a.nav, z, NavMeasurementKind::kImuAcceleration, cfg_.nav);
    }
  }

  if (w_.vessel_nav_ready) {
    w_.vessel_nav = nav_predict(w_.vessel_nav, dt_, cfg_.nav, false);
    if (gps_tick) {
      const Vec3 z =
          w_.phys.vessel_position + draw_normal_vec3(vessel_rng_, cfg_.nav.gps_pos_std);
      w_.vessel_nav = nav_update(w_.vessel_nav, z, NavMeasurementKind::kGpsPosition, cfg_.nav);
    }
  } else if (gps_tick) {
    const Vec3 z =
        w_.phys.vessel_position + draw_normal_vec3(vessel_rng_, cfg_.nav.gps_pos_std);
    w_.vessel_nav = nav_init(z, cfg_.nav, t);
    w_.vessel_nav_ready = true;
  }

  for (std::size_t i = 0; i < n; ++i) sense_and_track(i);

  if (w_.k % cfg_.rates.ticks_per_comm() == 0) comm_round();
  if (w_.k % cfg_.rates.ticks_per_alloc() == 0) alloc_round();
  update_goals();
  log_tick();
}

RunLog Simulation::run() {
  // Tick 0: first GPS fix initializes the filters, one perception pass, log.
  for (std::size_t i = 0; i < w_.agents.size(); ++i) {
    AgentRuntime& a = w_.agents[i];
    const Vec3 z = w_.phys.uavs[i].position + draw_normal_vec3(a.nav_rng, cfg_.nav.gps_pos_std);
    a.nav = nav_init(z, cfg_.nav, 0.0);
    a.nav_ready = true;
  }
  {
    const Vec3 z =
        w_.phys.vessel_position + draw_normal_vec3(vessel_rng_, cfg_.nav.gps_pos_std);
    w_.vessel_nav = nav_init(z, cfg_.nav, 0.0);
    w_.vessel_nav_ready = true;
  }
  for (std::size_t i = 0; i < w_.agents.size(); ++i) sense_and_track(i);
  update_goals();
  log_tick();

  for (std::int64_t k = 1; k <= ticks_; ++k) process_tick();

  log_.summary.ticks = ticks_;
  log_.summary.duration = cfg_.duration;
  log_.summary.bus = bus_stats_;
  ContractionStats& cs = log_.summary.contraction;
  for (const AgentRuntime& a : w_.agents) {
    cs.track_checks += a.tracker.contraction_checks();
    cs.track_violations += a.tracker.contraction_violations();
  }
  cs.ci_checks = w_.fuser.contraction_checks();
  cs.ci_violations = w_.fuser.contraction_violations();
  for (const AgentRuntime& a : w_.agents) {
    log_.summary.final_counters.push_back({a.cfg.id, a.tracker.counters().raw,
                                           a.tracker.counters().pruned,
                                           a.tracker.counters().confirmed_now});
  }
  return std::move(log_);
}

RunLog run_scenario(const ScenarioConfig& cfg) { return Simulation(cfg).run(); }

}  // namespace seatrack
