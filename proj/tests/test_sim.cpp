#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "seatrack/bus.hpp"
#include "seatrack/config.hpp"
#include "seatrack/runlog.hpp"
#include "seatrack/sim.hpp"

using namespace seatrack;
using nlohmann::json;

namespace {

TrackSummary sample_summary(AgentId agent, TrackId local, double t) {
  TrackSummary s;
  s.agent = agent;
  s.local_id = local;
  s.timestamp = t;
  s.mean = Vec3{1.5, -2.25, 0.125};
  Mat3 cov;
  cov << 0.5, 0.1, 0.0,
         0.1, 0.75, -0.05,
         0.0, -0.05, 1.25;
  s.covariance = cov;
  return s;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json noiseless_single_target() {
  return json{
      {"seed", 42},
      {"duration", 30.0},
      {"nav",
       {{"gps_pos_std", 1e-6},
        {"imu_acc_std", 1e-6},
        {"process_psd", {1e-10, 1e-10, 1e-10}}}},
      {"sensor",
       {{"detector", {{"p_det", 1.0}, {"sigma_d", 0.0}, {"lambda_fp", 0.0}}},
        {"range_noise", {{"sigma0", 0.001}, {"k", 0.0}}}}},
      {"mot", {{"process_psd", {1e-8, 1e-8, 1e-8}}, {"init_vel_var", 1e-4}}},
      {"mission",
       {{"r_h", 2.2},
        {"h", 4.0},
        {"tau_logdet", -30.0},
        {"tau_gain", 0.01},
        {"patrol", {{{0.0, 0.0, 6.0}}}}}},
      {"agents", json::array({json{{"id", 1}, {"start", {0.0, 0.0, 6.0}}}})},
      {"containers", json::array({json{{"id", 1}, {"start", {1.0, 0.5, 0.0}}}})},
  };
}

}  // namespace

TEST_CASE("wire messages round-trip exactly through 96 bytes") {
  const TrackSummary s = sample_summary(3, 17, 12.5);
  const BusMessage m = message_from_summary(s);
  const auto buf = encode_message(m);
  static_assert(kBusMessageSize == 96);
  CHECK(buf.size() == 96);

  const BusMessage back = decode_message(buf);
  CHECK(back.sender == 3);
  CHECK(back.track == 17);
  CHECK(back.timestamp == 12.5);

  const TrackSummary s2 = summary_from_message(back);
  CHECK(s2.agent == s.agent);
  CHECK(s2.local_id == s.local_id);
  CHECK((s2.mean - s.mean).cwiseAbs().maxCoeff() == 0.0);
  CHECK((s2.covariance - s.covariance).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("the wire layout is little-endian with the sender first") {
  BusMessage m;
  m.sender = 0x0102030405060708ULL;
  const auto buf = encode_message(m);
  CHECK(buf[0] == 0x08);
  CHECK(buf[1] == 0x07);
  CHECK(buf[7] == 0x01);
}

TEST_CASE("a clean broadcast delivers every message and counts bytes") {
  std::vector<std::vector<TrackSummary>> per_agent(3);
  for (AgentId a = 1; a <= 3; ++a) {
    for (TrackId t = 1; t <= 5; ++t) per_agent[a - 1].push_back(sample_summary(a, t, 1.0));
  }
  BusStats stats;
  Rng rng = make_rng(31, 1);
  const auto delivered = broadcast_round(per_agent, 0.0, rng, &stats);
  CHECK(delivered.size() == 15);
  CHECK(stats.sent == 15);
  CHECK(stats.delivered == 15);
  CHECK(stats.dropped == 0);
  CHECK(stats.bytes_sent == 1440);
  CHECK(stats.per_link_sent.at(1) == 5);

  // Full loss still counts every send.
  const auto none = broadcast_round(per_agent, 1.0, rng, &stats);
  CHECK(none.empty());
  CHECK(stats.sent == 30);
  CHECK(stats.dropped == 15);
  CHECK(stats.bytes_sent == 2880);
}

TEST_CASE("world stepping is a plain Euler integrator with a speed clamp") {
  WorldConfig world;
  PhysicalWorld w;
  w.containers.push_back({1, {0.0, 0.0, 0.0}, {0.1, 0.0, 0.0}});
  PhysicalUav uav;
  uav.id = 1;
  uav.position = Vec3::Zero();
  uav.goal = Vec3{10.0, 0.0, 0.0};
  uav.v_max = 2.0;
  w.uavs.push_back(uav);

  step_world(w, 1.0, world);
  CHECK((w.containers[0].base - Vec3{0.1, 0.0, 0.0}).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((w.uavs[0].position - Vec3{2.0, 0.0, 0.0}).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((w.uavs[0].velocity - Vec3{2.0, 0.0, 0.0}).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(w.t == doctest::Approx(1.0));

  // At the goal with zero drift nothing moves but the clock.
  w.uavs[0].goal = w.uavs[0].position;
  w.containers[0].drift = Vec3::Zero();
  const Vec3 held = w.uavs[0].position;
  step_world(w, 1.0, world);
  CHECK((w.uavs[0].position - held).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(w.t == doctest::Approx(2.0));

  CHECK_THROWS_AS(step_world(w, 0.0, world), std::invalid_argument);
}

TEST_CASE("containers bob vertically when the sea state is on") {
  WorldConfig world;
  world.bob_amplitude = 0.5;
  world.bob_period = 4.0;
  const ContainerState c{1, {2.0, 3.0, 0.0}, Vec3::Zero()};
  const Vec3 now = container_position(c, 0.0, world);
  const Vec3 peak = container_position(c, 1.0, world);   // quarter period later
  const Vec3 cycle = container_position(c, 4.0, world);  // full period
  CHECK(now.x() == 2.0);
  CHECK(std::abs(peak.z() - now.z()) > 0.4);
  CHECK(cycle.z() == doctest::Approx(now.z()).epsilon(1e-9));

  WorldConfig flat;
  const Vec3 off = container_position(c, 1.7, flat);
  CHECK(off.z() == 0.0);
}

TEST_CASE("equal seeds give byte-identical logs and different seeds differ") {
  json j = noiseless_single_target();
  j["duration"] = 5.0;
  j["sensor"]["detector"]["p_det"] = 0.9;
  j["sensor"]["detector"]["lambda_fp"] = 0.3;
  j["sensor"]["detector"]["sigma_d"] = 0.3;
  const ScenarioConfig cfg = parse_config_json(j);

  const auto dir = std::filesystem::temp_directory_path() / "seatrack_det_test";
  std::filesystem::create_directories(dir);
  write_runlog(run_scenario(cfg), dir / "a.jsonl");
  write_runlog(run_scenario(cfg), dir / "b.jsonl");
  CHECK(read_file(dir / "a.jsonl") == read_file(dir / "b.jsonl"));

  json j2 = j;
  j2["seed"] = 43;
  write_runlog(run_scenario(parse_config_json(j2)), dir / "c.jsonl");
  CHECK(read_file(dir / "a.jsonl") != read_file(dir / "c.jsonl"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("an empty sea produces no tracks and only surveillance") {
  json j = noiseless_single_target();
  j["containers"] = json::array();
  j["duration"] = 5.0;
  const RunLog log = run_scenario(parse_config_json(j));

  for (const auto& rec : log.fused) CHECK(rec.tracks.empty());
  for (const auto& rec : log.tracks) CHECK(rec.tracks.empty());
  for (const auto& rec : log.modes) {
    for (const auto& u : rec.uavs) CHECK(u.mode == Mode::kSurveillance);
  }
  for (const auto& rec : log.assigns) {
    for (const auto& u : rec.uavs) CHECK(u.targets.empty());
  }
  CHECK(log.summary.done.empty());
}

TEST_CASE("a noiseless run pins the target essentially exactly") {
  const RunLog log = run_scenario(parse_config_json(noiseless_single_target()));

  REQUIRE_FALSE(log.summary.done.empty());
  CHECK(log.summary.done[0].target == 1);

  // Fused estimate tracks the true (static) container position tightly.
  const TruthRecord& truth = log.truth.back();
  REQUIRE_FALSE(log.fused.empty());
  const FusedRecord& fused = log.fused.back();
  REQUIRE(fused.tracks.size() == 1);
  CHECK(fused.tracks[0].done);
  const Vec3 target_truth = truth.containers[0].position;
  CHECK((fused.tracks[0].position - target_truth).norm() < 1e-3);

  CHECK(log.summary.contraction.track_violations == 0);
  CHECK(log.summary.contraction.ci_violations == 0);
}

TEST_CASE("a noisy run finishes its target and hands the tracker back") {
  const json j = {
      {"seed", 3},
      {"duration", 20.0},
      {"world", {{"bob_amplitude", 0.05}, {"bob_period", 6.0}}},
      {"nav",
       {{"gps_pos_std", 0.35},
        {"imu_acc_std", 0.3},
        {"process_psd", {3.0, 3.0, 3.0}},
        {"maneuver_inflation", 5.0},
        {"maneuver_speed_threshold", 1.0}}},
      {"sensor",
       {{"detector", {{"p_det", 0.95}, {"sigma_d", 0.3}, {"lambda_fp", 0.2}}},
        {"range_noise", {{"sigma0", 0.3}, {"k", 0.05}}}}},
      {"mot",
       {{"gate_d2", 11.345},
        {"n_confirm", 4},
        {"t_prune", 1.0},
        {"logdet_prune", 3.0},
        {"process_psd", {0.5, 0.5, 0.5}},
        {"init_vel_var", 0.25}}},
      {"mission",
       {{"r_h", 2.2},
        {"h", 4.0},
        {"tau_logdet", -7.6},
        {"tau_gain", 0.02},
        {"arrive_tol", 0.6},
        {"patrol", {{{0.0, 0.0, 6.0}, {8.0, 0.0, 6.0}}}}}},
      {"agents", json::array({json{{"id", 1}, {"start", {0.0, 0.0, 6.0}}, {"v_max", 5.0}}})},
      {"containers",
       json::array({json{{"id", 1}, {"start", {4.0, 1.0, 0.0}}, {"drift", {0.005, 0.002, 0.0}}}})},
  };
  const RunLog log = run_scenario(parse_config_json(j));

  REQUIRE_FALSE(log.summary.done.empty());
  CHECK(log.summary.done[0].target == 1);
  REQUIRE_FALSE(log.summary.handoffs.empty());
  const HandoffEvent& h = log.summary.handoffs[0];
  CHECK(h.uav == 1);
  CHECK(h.target == log.summary.done[0].target);
  CHECK(h.t >= log.summary.done[0].t - 1e-9);

  // After handing the target off the agent goes back to patrolling.
  bool surveillance_after = false;
  for (const auto& rec : log.modes) {
    if (rec.t <= h.t) continue;
    for (const auto& u : rec.uavs) {
      if (u.id == 1 && u.mode == Mode::kSurveillance) surveillance_after = true;
    }
  }
  CHECK(surveillance_after);
}

TEST_CASE("runlogs survive a write and read cycle") {
  json j = noiseless_single_target();
  j["duration"] = 4.0;
  const RunLog log = run_scenario(parse_config_json(j));

  const auto dir = std::filesystem::temp_directory_path() / "seatrack_rt_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "log.jsonl";
  write_runlog(log, path);
  const RunLog back = read_runlog(path);

  CHECK(back.truth.size() == log.truth.size());
  CHECK(back.fused.size() == log.fused.size());
  CHECK(back.summary.ticks == log.summary.ticks);
  CHECK(back.summary.bus.bytes_sent == log.summary.bus.bytes_sent);
  CHECK(back.config_echo == log.config_echo);
  REQUIRE_FALSE(back.truth.empty());
  CHECK((back.truth.back().containers[0].position -
         log.truth.back().containers[0].position).cwiseAbs().maxCoeff() == 0.0);

  // Rewriting the parsed log reproduces the file byte for byte.
  write_runlog(back, dir / "log2.jsonl");
  CHECK(read_file(path) == read_file(dir / "log2.jsonl"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("truncated logs fail with the offending line number") {
  json j = noiseless_single_target();
  j["duration"] = 2.0;
  const auto dir = std::filesystem::temp_directory_path() / "seatrack_trunc_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "log.jsonl";
  write_runlog(run_scenario(parse_config_json(j)), path);

  std::string content = read_file(path);
  content.resize(content.size() / 2);     // cut mid-record
  content += "\n{\"k\": ";                // and force a malformed final line
  std::ofstream out(dir / "cut.jsonl", std::ios::binary);
  out << content;
  out.close();

  try {
    read_runlog(dir / "cut.jsonl");
    FAIL("expected a parse failure");
  } catch (const RunLogError& e) {
    CHECK(std::string(e.what()).find("line") != std::string::npos);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("communication accounting matches the runlog stream") {
  json j = noiseless_single_target();
  j["duration"] = 6.0;
  const RunLog log = run_scenario(parse_config_json(j));
  std::uint64_t total = 0;
  for (const auto& rec : log.bus) {
    total += rec.bytes;
    CHECK(rec.bytes == rec.sent * kBusMessageSize);
    CHECK(rec.total_bytes == total);
  }
  CHECK(log.summary.bus.bytes_sent == total);
  CHECK(log.summary.bus.sent * kBusMessageSize == log.summary.bus.bytes_sent);
}
