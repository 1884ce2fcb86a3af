#include "seatrack/fuse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace seatrack {

void FuserConfig::validate() const {
  if (!(gate_d2 > 0.0)) throw std::invalid_argument("gate_d2 must be > 0");
}

namespace {

Mat3 spd_inverse(const Mat3& p, const char* what) {
  if ((p - p.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw std::invalid_argument(std::string(what) + ": covariance is not symmetric");
  }
  Eigen::LLT<Mat3> llt(p);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument(std::string(what) + ": covariance is not SPD");
  }
  return llt.solve(Mat3::Identity());
}

// -logdet of the mixed information matrix; convex in omega for SPD inputs.
double neg_logdet_info(double omega, const Mat3& info1, const Mat3& info2) {
  const Mat3 mixed = omega * info1 + (1.0 - omega) * info2;
  return -logdet_spd(mixed);
}

CiResult ci_pair(const Vec3& m1, const Mat3& p1, const Vec3& m2, const Mat3& p2) {
  const double omega = optimize_omega(p1, p2);
  const Mat3 info1 = spd_inverse(p1, "ci_fuse_pair");
  const Mat3 info2 = spd_inverse(p2, "ci_fuse_pair");
  const Mat3 info = omega * info1 + (1.0 - omega) * info2;
  const Mat3 cov = info.llt().solve(Mat3::Identity());
  const Vec3 mean = cov * (omega * (info1 * m1) + (1.0 - omega) * (info2 * m2));
  return {mean, 0.5 * (cov + cov.transpose()), omega};
}

bool canonical_before(const TrackSummary& a, const TrackSummary& b) {
  if (a.agent != b.agent) return a.agent < b.agent;
  return a.local_id < b.local_id;
}

double summary_pair_d2(const Vec3& mu_a, const Mat3& p_a, const Vec3& mu_b, const Mat3& p_b) {
  const Vec3 diff = mu_a - mu_b;
  const Mat3 s = p_a + p_b;
  return diff.dot(s.llt().solve(diff));
}

}  // namespace

double optimize_omega(const Mat3& p1, const Mat3& p2) {
  const Mat3 info1 = spd_inverse(p1, "optimize_omega");
  const Mat3 info2 = spd_inverse(p2, "optimize_omega");

  // Flat objective (e.g. identical inputs): return the symmetric weight.
  double f_min = std::numeric_limits<double>::infinity();
  double f_max = -std::numeric_limits<double>::infinity();
  for (double w : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const double f = neg_logdet_info(w, info1, info2);
    f_min = std::min(f_min, f);
    f_max = std::max(f_max, f);
  }
  if (f_max - f_min <= 1e-12 * (1.0 + std::abs(f_min))) return 0.5;

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = 1.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = neg_logdet_info(c, info1, info2);
  double fd = neg_logdet_info(d, info1, info2);
  while (b - a > 1e-12) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = neg_logdet_info(c, info1, info2);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = neg_logdet_info(d, info1, info2);
    }
  }
  return 0.5 * (a + b);
}

CiResult ci_fuse_pair(const TrackSummary& a, const TrackSummary& b) {
  return ci_pair(a.mean, a.covariance, b.mean, b.covariance);
}

CiResult ci_fuse_sequential(std::vector<TrackSummary> summaries) {
  if (summaries.empty()) throw std::invalid_argument("ci_fuse_sequential: empty summary list");
  std::sort(summaries.begin(), summaries.end(), canonical_before);

  CiResult acc{summaries.front().mean, summaries.front().covariance, 1.0};
  for (std::size_t i = 1; i < summaries.size(); ++i) {
    acc = ci_pair(acc.mean, acc.covariance, summaries[i].mean, summaries[i].covariance);
  }
  return acc;
}

CiResult naive_fuse_pair(const TrackSummary& a, const TrackSummary& b) {
  const Mat3 info1 = spd_inverse(a.covariance, "naive_fuse_pair");
  const Mat3 info2 = spd_inverse(b.covariance, "naive_fuse_pair");
  const Mat3 info = info1 + info2;
  const Mat3 cov = info.llt().solve(Mat3::Identity());
  const Vec3 mean = cov * (info1 * a.mean + info2 * b.mean);
  return {mean, 0.5 * (cov + cov.transpose()), 0.5};
}

std::vector<SummaryCluster> cross_agent_associate(const std::vector<TrackSummary>& summaries,
                                                  const std::vector<FusedTrack>& fused,
                                                  double gate_d2) {
  std::vector<TrackSummary> ordered = summaries;
  std::sort(ordered.begin(), ordered.end(), canonical_before);

  struct Candidate {
    double d2;
    std::size_t summary_idx;
    std::size_t fused_idx;
  };
  std::vector<Candidate> candidates;
  for (std::size_t si = 0; si < ordered.size(); ++si) {
    for (std::size_t fi = 0; fi < fused.size(); ++fi) {
      const double d2 = summary_pair_d2(ordered[si].mean, ordered[si].covariance,
                                        fused[fi].mean, fused[fi].covariance);
      if (d2 <= gate_d2) candidates.push_back({d2, si, fi});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
    if (a.d2 != b.d2) return a.d2 < b.d2;
    if (a.summary_idx != b.summary_idx) return a.summary_idx < b.summary_idx;
    return fused[a.fused_idx].id < fused[b.fused_idx].id;
  });

  // A summary joins at most one cluster; a fused track may absorb several
  // summaries (one per reporting agent, typically).
  std::vector<bool> clustered(ordered.size(), false);
  std::map<FusedId, SummaryCluster> by_fused;
  for (const Candidate& c : candidates) {
    if (clustered[c.summary_idx]) continue;
    clustered[c.summary_idx] = true;
    SummaryCluster& cluster = by_fused[fused[c.fused_idx].id];
    cluster.fused_id = fused[c.fused_idx].id;
    cluster.members.push_back(ordered[c.summary_idx]);
  }

  std::vector<SummaryCluster> out;
  out.reserve(by_fused.size());
  for (auto& [id, cluster] : by_fused) out.push_back(std::move(cluster));

  // Leftovers seed new clusters in canonical order, absorbing any remaining
  // summary that gates against the seed (two agents discovering one target).
  for (std::size_t si = 0; si < ordered.size(); ++si) {
    if (clustered[si]) continue;
    clustered[si] = true;
    SummaryCluster cluster;
    cluster.fused_id = 0;
    cluster.members.push_back(ordered[si]);
    for (std::size_t sj = si + 1; sj < ordered.size(); ++sj) {
      if (clustered[sj]) continue;
      const double d2 = summary_pair_d2(ordered[si].mean, ordered[si].covariance,
                                        ordered[sj].mean, ordered[sj].covariance);
      if (d2 <= gate_d2) {
        clustered[sj] = true;
        cluster.members.push_back(ordered[sj]);
      }
    }
    out.push_back(std::move(cluster));
  }
  return out;
}

void Fuser::round(const std::vector<TrackSummary>& summaries, double now) {
  const auto clusters = cross_agent_associate(summaries, tracks_, cfg_.gate_d2);

  for (const SummaryCluster& cluster : clusters) {
    // Fold step by step so each pairwise fuse can be checked for logdet
    // contraction against its inputs.
    CiResult acc{cluster.members.front().mean, cluster.members.front().covariance, 1.0};
    for (std::size_t i = 1; i < cluster.members.size(); ++i) {
      const TrackSummary& next = cluster.members[i];
      const double prior_min = std::min(logdet_spd(acc.covariance), logdet_spd(next.covariance));
      acc = ci_pair(acc.mean, acc.covariance, next.mean, next.covariance);
      contraction_checks_ += 1;
      if (logdet_spd(acc.covariance) > prior_min + 1e-9) contraction_violations_ += 1;
    }

    FusedTrack* target = nullptr;
    if (cluster.fused_id != 0) {
      for (FusedTrack& t : tracks_) {
        if (t.id == cluster.fused_id) {
          target = &t;
          break;
        }
      }
    }
    if (target == nullptr) {
      tracks_.push_back({});
      target = &tracks_.back();
      target->id = next_id_++;
    }
    target->mean = acc.mean;
    target->covariance = acc.covariance;
    target->last_fuse_time = now;
    target->logdet = logdet_spd(acc.covariance);
    for (const TrackSummary& s : cluster.members) {
      target->contributors.insert({s.agent, s.local_id});
    }
  }
}

void Fuser::mark_done(FusedId id) {
  for (FusedTrack& t : tracks_) {
    if (t.id == id) t.done = true;
  }
}

std::vector<FusedTrack> Fuser::active() const {
  std::vector<FusedTrack> out;
  for (const FusedTrack& t : tracks_) {
    if (!t.done) out.push_back(t);
  }
  return out;
}

}  // namespace seatrack
