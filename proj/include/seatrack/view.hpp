#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "seatrack/fuse.hpp"
#include "seatrack/mathutil.hpp"
#include "seatrack/percept.hpp"

namespace seatrack {

struct RingParams {
  double radius = 4.0;
  double altitude = 6.0;
  int count = 8;

  void validate() const;
};

struct HoverCandidate {
  double psi = 0.0;
  Vec3 pose = Vec3::Zero();
  double gain = 0.0;
  double travel = 0.0;
  bool feasible = true;
};

// Evenly spaced hover poses on a circle of the given radius around the
// target, at fixed altitude above it; psi_l = 2*pi*l / count starting at
// the +x axis.
std::vector<HoverCandidate> ring_candidates(const Vec3& target,
                                            const RingParams& ring);

// Drop of logdet of the target covariance after a simulated position fix
// taken from the candidate pose.
double viewpoint_gain(const Mat3& covariance, const Vec3& pose,
                      const Vec3& target, const RangeNoiseModel& noise);

struct HoverConstraints {
  std::vector<Vec3> blocked;  // poses other UAVs occupy or claimed
  double r_safe = 2.0;
};

struct HoverSelection {
  HoverCandidate chosen;
  std::vector<HoverCandidate> ring;  // all candidates with gains filled in
};

// Scores the ring by gain per unit travel, gain / (travel + eps), skipping
// candidates within r_safe of a blocked pose; ties resolve to the smallest
// psi. Empty result when every candidate is blocked.
std::optional<HoverSelection> select_hover(const Vec3& uav_position,
                                           const Vec3& target,
                                           const Mat3& covariance,
                                           const HoverConstraints& constraints,
                                           const RingParams& ring,
                                           const RangeNoiseModel& noise,
                                           double eps);

// A target is finished when its covariance is tight enough or no reachable
// viewpoint would improve it meaningfully. Gains over an empty candidate set
// count as zero, so a target nobody can see terminates.
bool check_termination(const Mat3& covariance,
                       const std::vector<double>& best_feasible_gains,
                       double tau_logdet, double tau_gain);

enum class Mode : std::uint8_t { kSurveillance = 0, kTracking = 1 };

struct ModeState {
  Mode mode = Mode::kSurveillance;
  std::optional<FusedId> active_target;
  std::optional<Vec3> hover_pose;
  std::size_t patrol_index = 0;
};

struct ModeEvent {
  FusedId target = 0;
  bool handoff = false;  // target finished while this UAV was on it
};

struct ModeOutcome {
  ModeState state;
  std::vector<ModeEvent> events;
};

struct ModeInputs {
  std::vector<FusedId> assigned;        // cheapest first
  std::optional<FusedId> primary;
  std::optional<Vec3> primary_position;  // fused estimate of the primary
  std::optional<Mat3> primary_covariance;
  bool active_done = false;              // previous active target finished
  Vec3 uav_position = Vec3::Zero();
  HoverConstraints constraints;
};

// One decision step of the per-UAV mode machine, run at the allocation rate.
ModeOutcome mode_step(const ModeState& state, const ModeInputs& in,
                      const RingParams& ring, const RangeNoiseModel& noise,
                      double eps);

}  // namespace seatrack
