#include <doctest.h>

#include <string>

#include <nlohmann/json.hpp>

#include "seatrack/config.hpp"

using namespace seatrack;
using nlohmann::json;

namespace {

json small_scenario() {
  return json{
      {"seed", 5},
      {"duration", 10.0},
      {"agents", json::array({json{{"id", 1}, {"start", {0.0, 0.0, 6.0}}}})},
      {"containers", json::array({json{{"id", 1}, {"start", {2.0, 1.0, 0.0}}}})},
  };
}

std::string error_text(const json& j) {
  try {
    parse_config_json(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("an empty scenario parses with defaults everywhere") {
  const ScenarioConfig cfg = parse_config_json(json::object());
  CHECK(cfg.seed == 1);
  CHECK(cfg.duration == 60.0);
  CHECK(cfg.rates.tick_hz == 10.0);
  CHECK(cfg.rates.comm_hz == 2.0);
  CHECK(cfg.rates.alloc_hz == 1.0);
  CHECK(cfg.sensor.camera.f == 500.0);
  CHECK(cfg.mot.gate_d2 == 11.345);
  CHECK(cfg.agents.empty());
  CHECK(cfg.containers.empty());
}

TEST_CASE("a small scenario fills defaults and keeps declared values") {
  const ScenarioConfig cfg = parse_config_json(small_scenario());
  CHECK(cfg.seed == 5);
  CHECK(cfg.duration == 10.0);
  REQUIRE(cfg.agents.size() == 1);
  CHECK(cfg.agents[0].id == 1);
  CHECK((cfg.agents[0].start - Vec3{0.0, 0.0, 6.0}).cwiseAbs().maxCoeff() == 0.0);
  CHECK(cfg.agents[0].v_max == 5.0);
  REQUIRE(cfg.containers.size() == 1);
  CHECK(cfg.containers[0].id == 1);
}

TEST_CASE("constraint errors carry the dotted field path") {
  json j = small_scenario();
  j["mission"] = {{"r_h", -1.0}};
  CHECK(error_text(j).find("mission.r_h") != std::string::npos);

  json neg = small_scenario();
  neg["duration"] = -5.0;
  CHECK(error_text(neg).find("duration") != std::string::npos);

  json rate = small_scenario();
  rate["rates"] = {{"tick_hz", 0.0}};
  CHECK(error_text(rate).find("rates.tick_hz") != std::string::npos);
}

TEST_CASE("duplicate ids are rejected with their index") {
  json j = small_scenario();
  j["containers"].push_back({{"id", 1}, {"start", {4.0, 4.0, 0.0}}});
  CHECK(error_text(j).find("containers[1].id") != std::string::npos);

  json a = small_scenario();
  a["agents"].push_back({{"id", 1}, {"start", {3.0, 0.0, 6.0}}});
  CHECK(error_text(a).find("agents[1].id") != std::string::npos);
}

TEST_CASE("unknown keys anywhere are rejected") {
  json top = small_scenario();
  top["surprise"] = 1;
  CHECK(error_text(top).find("surprise") != std::string::npos);

  json nested = small_scenario();
  nested["mot"] = {{"gate", 1.0}};
  CHECK(error_text(nested).find("mot.gate") != std::string::npos);

  json agent = small_scenario();
  agent["agents"][0]["vmax"] = 2.0;
  CHECK(error_text(agent).find("vmax") != std::string::npos);
}

TEST_CASE("type mismatches name the offending field") {
  json j = small_scenario();
  j["duration"] = "long";
  CHECK(error_text(j).find("duration") != std::string::npos);

  json vec = small_scenario();
  vec["agents"][0]["start"] = {1.0, 2.0};
  CHECK(error_text(vec).find("start") != std::string::npos);
}

TEST_CASE("patrol accepts one shared route or one per agent") {
  json shared = small_scenario();
  shared["agents"].push_back({{"id", 2}, {"start", {3.0, 0.0, 6.0}}});
  shared["mission"] = {{"patrol", {{{0.0, 0.0, 6.0}, {5.0, 0.0, 6.0}}}}};
  const ScenarioConfig cfg = parse_config_json(shared);
  CHECK(cfg.patrol_route(0).size() == 2);
  CHECK(cfg.patrol_route(1).size() == 2);  // shared route serves every agent

  json per_agent = shared;
  per_agent["mission"]["patrol"].push_back({{9.0, 9.0, 6.0}});
  const ScenarioConfig two = parse_config_json(per_agent);
  CHECK(two.patrol_route(0).size() == 2);
  CHECK(two.patrol_route(1).size() == 1);

  json mismatch = per_agent;  // two routes, about to have three agents
  mismatch["agents"].push_back({{"id", 3}, {"start", {6.0, 0.0, 6.0}}});
  CHECK(error_text(mismatch).find("patrol") != std::string::npos);
}

TEST_CASE("parsing an emitted config round-trips") {
  json j = small_scenario();
  j["mission"] = {{"r_h", 2.2}, {"h", 4.0}, {"tau_logdet", -7.6},
                  {"patrol", {{{0.0, 0.0, 6.0}, {8.0, 0.0, 6.0}}}}};
  j["alloc"] = {{"eta", 1.5}, {"capacity", 2}};
  j["agents"][0]["body_from_camera"] =
      {{"translation", {0.1, 0.0, -0.05}}, {"yaw_deg", -90.0}, {"roll_deg", 180.0}};
  j["world"] = {{"bob_amplitude", 0.05}, {"bob_period", 7.0}};

  const ScenarioConfig first = parse_config_json(j);
  const json emitted = emit_config(first);
  const ScenarioConfig second = parse_config_json(emitted);
  CHECK(emit_config(second) == emitted);
  CHECK(second.mission.ring.radius == 2.2);
  CHECK(second.alloc.weights.eta == 1.5);
  CHECK(second.agents[0].body_from_camera.yaw_deg == -90.0);
}

TEST_CASE("extrinsic transforms follow the declared angles") {
  ExtrinsicConfig e;
  e.yaw_deg = 90.0;
  e.translation = Vec3{1.0, 0.0, 0.0};
  const RigidTransform t = e.transform();
  const Vec3 p = t.apply({1.0, 0.0, 0.0});
  CHECK(p.x() == doctest::Approx(1.0));
  CHECK(p.y() == doctest::Approx(1.0));

  // The stock camera mount looks straight down with image-up along body x.
  const RigidTransform cam = default_camera_extrinsic().transform();
  const Vec3 optical_axis = cam.rotation() * Vec3{0.0, 0.0, 1.0};
  CHECK(optical_axis.z() == doctest::Approx(-1.0));
}

TEST_CASE("rate divisors come out of the declared frequencies") {
  json j = small_scenario();
  j["rates"] = {{"tick_hz", 10.0}, {"comm_hz", 2.0}, {"alloc_hz", 1.0}};
  const ScenarioConfig cfg = parse_config_json(j);
  CHECK(cfg.rates.ticks_per_comm() == 5);
  CHECK(cfg.rates.ticks_per_alloc() == 10);
}
