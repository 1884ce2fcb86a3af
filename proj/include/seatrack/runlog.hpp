#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "seatrack/bus.hpp"
#include "seatrack/fuse.hpp"
#include "seatrack/mathutil.hpp"
#include "seatrack/mot.hpp"
#include "seatrack/view.hpp"

namespace seatrack {

class RunLogError : public std::runtime_error {
 public:
  explicit RunLogError(const std::string& what) : std::runtime_error(what) {}
};

struct TruthUav {
  AgentId id = 0;
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
};

struct TruthContainer {
  std::uint64_t id = 0;
  Vec3 position = Vec3::Zero();
};

struct TruthRecord {
  std::int64_t k = 0;
  double t = 0.0;
  std::vector<TruthUav> uavs;
  std::vector<TruthContainer> containers;
  Vec3 vessel = Vec3::Zero();
};

struct NavEstimate {
  AgentId id = 0;  // 0 is the vessel
  Vec3 position = Vec3::Zero();
};

struct NavRecord {
  std::int64_t k = 0;
  double t = 0.0;
  std::vector<NavEstimate> estimates;
};

struct TrackSnap {
  TrackId id = 0;
  Vec3 position = Vec3::Zero();
  double logdet = 0.0;
};

struct TracksRecord {
  std::int64_t k = 0;
  double t = 0.0;
  AgentId agent = 0;
  std::vector<TrackSnap> tracks;
};

struct FusedSnap {
  FusedId id = 0;
  Vec3 position = Vec3::Zero();
  double logdet = 0.0;
  bool done = false;
};

struct FusedRecord {
  std::int64_t k = 0;
  double t = 0.0;
  std::vector<FusedSnap> tracks;
};

struct BusRecord {
  std::int64_t k = 0;
  double t = 0.0;
  std::uint64_t sent = 0;       // this round
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::uint64_t bytes = 0;
  std::uint64_t total_sent = 0;  // cumulative
  std::uint64_t total_bytes = 0;
};

struct CounterSnap {
  AgentId id = 0;
  std::uint64_t raw = 0;
  std::uint64_t pruned = 0;
  std::uint64_t confirmed = 0;
};

struct CountersRecord {
  std::int64_t k = 0;
  double t = 0.0;
  std::vector<CounterSnap> agents;
};

struct AssignSnap {
  AgentId id = 0;
  std::vector<FusedId> targets;
  std::optional<FusedId> primary;
};

struct AssignRecord {
  std::int64_t k = 0;
  double t = 0.0;
  std::vector<AssignSnap> uavs;
};

struct ModeSnap {
  AgentId id = 0;
  Mode mode = Mode::kSurveillance;
  std::optional<FusedId> target;
  std::optional<Vec3> hover;
};

struct HandoffEvent {
  std::int64_t k = 0;
  double t = 0.0;
  AgentId uav = 0;
  FusedId target = 0;
};

struct DoneEvent {
  std::int64_t k = 0;
  double t = 0.0;
  FusedId target = 0;
};

struct ModesRecord {
  std::int64_t k = 0;
  double t = 0.0;
  std::vector<ModeSnap> uavs;
  std::vector<HandoffEvent> handoffs;  // raised this cycle
};

struct ContractionStats {
  std::uint64_t track_checks = 0;
  std::uint64_t track_violations = 0;
  std::uint64_t ci_checks = 0;
  std::uint64_t ci_violations = 0;
};

struct RunSummary {
  std::int64_t ticks = 0;
  double duration = 0.0;
  BusStats bus;
  ContractionStats contraction;
  std::vector<DoneEvent> done;
  std::vector<HandoffEvent> handoffs;
  std::vector<CounterSnap> final_counters;
};

struct RunLog {
  nlohmann::json config_echo;
  std::vector<TruthRecord> truth;
  std::vector<NavRecord> nav;
  std::vector<TracksRecord> tracks;
  std::vector<FusedRecord> fused;
  std::vector<BusRecord> bus;
  std::vector<CountersRecord> counters;
  std::vector<AssignRecord> assigns;
  std::vector<ModesRecord> modes;
  RunSummary summary;
};

// One JSON object per line, streams interleaved in tick order; the header
// line carries the config echo and the final line the summary. Content is a
// pure function of the scenario, so equal seeds give byte-identical files.
void write_runlog(const RunLog& log, const std::filesystem::path& path);
RunLog read_runlog(const std::filesystem::path& path);

nlohmann::json summary_to_json(const RunSummary& s);

}  // namespace seatrack
