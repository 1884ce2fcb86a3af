#pragma once

#include <cstdint>
#include <vector>

#include "seatrack/percept.hpp"

namespace seatrack {

using TrackId = std::uint64_t;

enum class TrackStatus { kTentative, kConfirmed, kPruned };

/// Constant-velocity track: state [position, velocity].
struct Track {
  TrackId id = 0;
  Vec6 mean = Vec6::Zero();
  Mat6 covariance = Mat6::Zero();
  double last_update = 0.0;
  int hit_count = 1;
  TrackStatus status = TrackStatus::kTentative;

  Vec3 position() const { return mean.segment<3>(0); }
  Vec3 velocity() const { return mean.segment<3>(3); }
  Mat3 position_cov() const { return covariance.block<3, 3>(0, 0); }
};

struct TrackerConfig {
  double gate_d2 = 11.345;     // chi-square 3-dof 0.99
  int n_confirm = 3;
  double t_prune = 5.0;        // s without updates before removal
  double logdet_prune = 10.0;  // position-block logdet ceiling
  Vec3 process_psd = Vec3::Constant(0.05);  // white-acceleration PSD per axis
  double init_vel_var = 4.0;

  void validate() const;
};

struct AssociationPair {
  TrackId track;
  int measurement;
  double d2;
};

struct AssociationResult {
  std::vector<AssociationPair> matched;
  std::vector<int> unmatched_measurements;
  std::vector<TrackId> unmatched_tracks;
};

/// Cumulative hypothesis accounting, per agent.
struct TrackCounters {
  std::uint64_t raw = 0;
  std::uint64_t pruned = 0;
  std::uint64_t confirmed_now = 0;
};

Track track_predict(const Track& t, double dt, const TrackerConfig& cfg);

/// d^2 = nu' S^-1 nu with nu = z - H x, S = H P H' + R, H = [I3 0].
double mahalanobis_d2(const Track& t, const Measurement3D& m);

/// Greedy global-minimum-first matching over the gated distance matrix.
/// Ties on d^2 break toward the lower track id, then the lower measurement
/// index, so repeated runs are order-independent.
AssociationResult associate(const std::vector<Track>& tracks,
                            const std::vector<Measurement3D>& measurements,
                            double gate_d2);

/// Joseph-form position update; increments the hit count. The position-block
/// logdet never increases.
Track track_update(const Track& t, const Measurement3D& m);

/// Spawns tentative tracks from unmatched measurements, promotes tentatives
/// at n_confirm hits, prunes on timeout or covariance blow-up. Returns the
/// surviving set and the counter delta.
std::vector<Track> lifecycle_step(std::vector<Track> tracks,
                                  const AssociationResult& assoc,
                                  const std::vector<Measurement3D>& measurements,
                                  double now,
                                  const TrackerConfig& cfg,
                                  TrackId* next_id,
                                  TrackCounters* counters);

/// Per-agent tracker: owns the track set, id allocation, and counters.
class Tracker {
 public:
  Tracker() : Tracker(TrackerConfig{}) {}
  explicit Tracker(const TrackerConfig& cfg) : cfg_(cfg) { cfg_.validate(); }

  /// One tick: predict to `now`, associate, update matched, run lifecycle.
  void step(const std::vector<Measurement3D>& measurements, double now);

  const std::vector<Track>& tracks() const { return tracks_; }
  std::vector<Track> confirmed() const;
  const TrackCounters& counters() const { return counters_; }

  std::uint64_t contraction_checks() const { return contraction_checks_; }
  std::uint64_t contraction_violations() const { return contraction_violations_; }

 private:
  TrackerConfig cfg_;
  std::vector<Track> tracks_;
  TrackId next_id_ = 1;
  double last_time_ = 0.0;
  bool started_ = false;
  TrackCounters counters_;
  std::uint64_t contraction_checks_ = 0;
  std::uint64_t contraction_violations_ = 0;
};

}  // namespace seatrack
