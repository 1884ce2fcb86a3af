#pragma once

#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include "seatrack/mathutil.hpp"
#include "seatrack/mot.hpp"

namespace seatrack {

/// Position marginal shared between robots: everything fusion needs, nothing
/// else crosses the link.
struct TrackSummary {
  AgentId agent = 0;
  TrackId local_id = 0;
  double timestamp = 0.0;
  Vec3 mean = Vec3::Zero();
  Mat3 covariance = Mat3::Identity();
};

using FusedId = std::uint64_t;

struct FusedTrack {
  FusedId id = 0;
  Vec3 mean = Vec3::Zero();
  Mat3 covariance = Mat3::Identity();
  std::set<std::pair<AgentId, TrackId>> contributors;
  double last_fuse_time = 0.0;
  double logdet = 0.0;
  bool done = false;
};

struct CiResult {
  Vec3 mean;
  Mat3 covariance;
  double omega;
};

/// Minimizer of logdet(P_CI(omega)) over [0,1] via golden-section search; the
/// objective is convex for SPD inputs. A flat objective returns 0.5.
double optimize_omega(const Mat3& p1, const Mat3& p2);

/// P_CI^-1 = w P1^-1 + (1-w) P2^-1, mean = P_CI (w P1^-1 m1 + (1-w) P2^-1 m2),
/// with w from optimize_omega.
CiResult ci_fuse_pair(const TrackSummary& a, const TrackSummary& b);

/// Left fold of ci_fuse_pair in canonical (agent, local id) order, so the
/// result is independent of network arrival order. Throws on an empty list.
CiResult ci_fuse_sequential(std::vector<TrackSummary> summaries);

/// Independence-assuming information fusion, P = (P1^-1 + P2^-1)^-1. Kept as
/// a consistency baseline; not used in the mission loop.
CiResult naive_fuse_pair(const TrackSummary& a, const TrackSummary& b);

struct SummaryCluster {
  FusedId fused_id = 0;     // 0 when the cluster needs a fresh id
  std::vector<TrackSummary> members;
};

/// Gate summaries against the existing fused set with
/// d^2 = (mu_s - mu_f)' (P_s + P_f)^-1 (mu_s - mu_f) <= gate, greedy minimum
/// distance first; leftovers cluster among themselves and get new ids.
std::vector<SummaryCluster> cross_agent_associate(const std::vector<TrackSummary>& summaries,
                                                  const std::vector<FusedTrack>& fused,
                                                  double gate_d2);

struct FuserConfig {
  double gate_d2 = 11.345;

  void validate() const;
};

/// Vessel-side reducer: one fusion round per communication cycle.
class Fuser {
 public:
  Fuser() : Fuser(FuserConfig{}) {}
  explicit Fuser(const FuserConfig& cfg) : cfg_(cfg) { cfg_.validate(); }

  /// Re-fuses each cluster of received summaries; fused tracks that receive
  /// nothing this round persist unchanged.
  void round(const std::vector<TrackSummary>& summaries, double now);

  void mark_done(FusedId id);

  const std::vector<FusedTrack>& tracks() const { return tracks_; }
  std::vector<FusedTrack> active() const;  // not-done tracks

  std::uint64_t contraction_checks() const { return contraction_checks_; }
  std::uint64_t contraction_violations() const { return contraction_violations_; }

 private:
  FuserConfig cfg_;
  std::vector<FusedTrack> tracks_;
  FusedId next_id_ = 1;
  std::uint64_t contraction_checks_ = 0;
  std::uint64_t contraction_violations_ = 0;
};

}  // namespace seatrack
