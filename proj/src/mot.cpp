#include "seatrack/mot.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace seatrack {

void TrackerConfig::validate() const {
  if (!(gate_d2 > 0.0)) throw std::invalid_argument("gate_d2 must be > 0");
  if (n_confirm < 1) throw std::invalid_argument("n_confirm must be >= 1");
  if (!(t_prune > 0.0)) throw std::invalid_argument("t_prune must be > 0");
  if (!(process_psd.minCoeff() >= 0.0)) throw std::invalid_argument("process_psd must be >= 0");
  if (!(init_vel_var > 0.0)) throw std::invalid_argument("init_vel_var must be > 0");
}

namespace {

Mat6 cv_transition(double dt) {
  Mat6 f = Mat6::Identity();
  f.block<3, 3>(0, 3) = dt * Mat3::Identity();
  return f;
}

// White-acceleration discretization for the CV model, per axis:
//   Q = q * [ dt^3/3  dt^2/2 ]
//           [ dt^2/2  dt     ]
Mat6 cv_process_noise(double dt, const Vec3& psd) {
  const double d2 = dt * dt, d3 = d2 * dt;
  Mat6 q = Mat6::Zero();
  for (int axis = 0; axis < 3; ++axis) {
    q(axis, axis) = psd[axis] * d3 / 3.0;
    q(axis, axis + 3) = psd[axis] * d2 / 2.0;
    q(axis + 3, axis) = psd[axis] * d2 / 2.0;
    q(axis + 3, axis + 3) = psd[axis] * dt;
  }
  return q;
}

}  // namespace

Track track_predict(const Track& t, double dt, const TrackerConfig& cfg) {
  if (!(dt > 0.0)) throw std::invalid_argument("track_predict: dt must be > 0");
  const Mat6 f = cv_transition(dt);
  Track out = t;
  out.mean = f * t.mean;
  out.covariance = f * t.covariance * f.transpose() + cv_process_noise(dt, cfg.process_psd);
  symmetrize(out.covariance);
  return out;
}

double mahalanobis_d2(const Track& t, const Measurement3D& m) {
  const Vec3 innovation = m.position - t.position();
  const Mat3 s = t.position_cov() + m.covariance;
  Eigen::LLT<Mat3> llt(s);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("mahalanobis_d2: innovation covariance is not SPD");
  }
  return innovation.dot(llt.solve(innovation));
}

AssociationResult associate(const std::vector<Track>& tracks,
                            const std::vector<Measurement3D>& measurements,
                            double gate_d2) {
  struct Candidate {
    double d2;
    std::size_t track_idx;
    int meas_idx;
  };
  std::vector<Candidate> candidates;
  for (std::size_t ti = 0; ti < tracks.size(); ++ti) {
    for (int mi = 0; mi < static_cast<int>(measurements.size()); ++mi) {
      const double d2 = mahalanobis_d2(tracks[ti], measurements[mi]);
      if (d2 <= gate_d2) candidates.push_back({d2, ti, mi});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
    if (a.d2 != b.d2) return a.d2 < b.d2;
    if (tracks[a.track_idx].id != tracks[b.track_idx].id) {
      return tracks[a.track_idx].id < tracks[b.track_idx].id;
    }
    return a.meas_idx < b.meas_idx;
  });

  AssociationResult result;
  std::vector<bool> track_used(tracks.size(), false);
  std::vector<bool> meas_used(measurements.size(), false);
  for (const Candidate& c : candidates) {
    if (track_used[c.track_idx] || meas_used[c.meas_idx]) continue;
    track_used[c.track_idx] = true;
    meas_used[c.meas_idx] = true;
    result.matched.push_back({tracks[c.track_idx].id, c.meas_idx, c.d2});
  }
  for (std::size_t ti = 0; ti < tracks.size(); ++ti) {
    if (!track_used[ti]) result.unmatched_tracks.push_back(tracks[ti].id);
  }
  for (int mi = 0; mi < static_cast<int>(measurements.size()); ++mi) {
    if (!meas_used[mi]) result.unmatched_measurements.push_back(mi);
  }
  return result;
}

Track track_update(const Track& t, const Measurement3D& m) {
  Eigen::LLT<Mat3> rchk(m.covariance);
  if ((m.covariance - m.covariance.transpose()).cwiseAbs().maxCoeff() > 1e-9 || rchk.info() != Eigen::Success) {
    throw std::invalid_argument("track_update: measurement covariance is not SPD");
  }
  Eigen::Matrix<double, 3, 6> h = Eigen::Matrix<double, 3, 6>::Zero();
  h.block<3, 3>(0, 0) = Mat3::Identity();

  const Vec3 innovation = m.position - t.position();
  const Mat3 s = t.position_cov() + m.covariance;
  const Eigen::Matrix<double, 6, 3> gain = t.covariance * h.transpose() * s.llt().solve(Mat3::Identity());

  Track out = t;
  out.mean = t.mean + gain * innovation;
  const Mat6 ikh = Mat6::Identity() - gain * h;
  out.covariance = ikh * t.covariance * ikh.transpose() + gain * m.covariance * gain.transpose();
  symmetrize(out.covariance);
  out.last_update = m.timestamp;
  out.hit_count += 1;
  return out;
}

std::vector<Track> lifecycle_step(std::vector<Track> tracks,
                                  const AssociationResult& assoc,
                                  const std::vector<Measurement3D>& measurements,
                                  double now,
                                  const TrackerConfig& cfg,
                                  TrackId* next_id,
                                  TrackCounters* counters) {
  for (int mi : assoc.unmatched_measurements) {
    const Measurement3D& m = measurements[mi];
    Track t;
    t.id = (*next_id)++;
    t.mean.segment<3>(0) = m.position;
    t.covariance.block<3, 3>(0, 0) = m.covariance;
    t.covariance.block<3, 3>(3, 3) = cfg.init_vel_var * Mat3::Identity();
    t.last_update = m.timestamp;
    t.hit_count = 1;
    t.status = TrackStatus::kTentative;
    tracks.push_back(t);
    counters->raw += 1;
  }

  std::vector<Track> kept;
  kept.reserve(tracks.size());
  for (Track& t : tracks) {
    if (t.status == TrackStatus::kTentative && t.hit_count >= cfg.n_confirm) {
      t.status = TrackStatus::kConfirmed;
    }
    const bool timed_out = (now - t.last_update) > cfg.t_prune;
    const bool blown_up = logdet_spd(t.position_cov()) > cfg.logdet_prune;
    if (timed_out || blown_up) {
      t.status = TrackStatus::kPruned;
      counters->pruned += 1;
      continue;
    }
    kept.push_back(t);
  }

  counters->confirmed_now = static_cast<std::uint64_t>(
      std::count_if(kept.begin(), kept.end(),
                    [](const Track& t) { return t.status == TrackStatus::kConfirmed; }));
  return kept;
}

void Tracker::step(const std::vector<Measurement3D>& measurements, double now) {
  if (started_ && now > last_time_) {
    const double dt = now - last_time_;
    for (Track& t : tracks_) t = track_predict(t, dt, cfg_);
  }
  started_ = true;
  last_time_ = now;

  const AssociationResult assoc = associate(tracks_, measurements, cfg_.gate_d2);
  for (const AssociationPair& pair : assoc.matched) {
    auto it = std::find_if(tracks_.begin(), tracks_.end(),
                           [&](const Track& t) { return t.id == pair.track; });
    const double logdet_prior = logdet_spd(it->position_cov());
    *it = track_update(*it, measurements[pair.measurement]);
    const double logdet_post = logdet_spd(it->position_cov());
    contraction_checks_ += 1;
    if (logdet_post > logdet_prior + 1e-9) contraction_violations_ += 1;
  }

  tracks_ = lifecycle_step(std::move(tracks_), assoc, measurements, now, cfg_, &next_id_, &counters_);
}

std::vector<Track> Tracker::confirmed() const {
  std::vector<Track> out;
  for (const Track& t : tracks_) {
    if (t.status == TrackStatus::kConfirmed) out.push_back(t);
  }
  return out;
}

}  // namespace seatrack
