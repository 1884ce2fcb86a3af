#include "seatrack/view.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "seatrack/alloc.hpp"
#include "seatrack/geom.hpp"

namespace seatrack {

void RingParams::validate() const {
  if (!(radius > 0.0)) throw std::invalid_argument("r_h must be positive");
  if (!(altitude > 0.0)) throw std::invalid_argument("h must be positive");
  if (count < 1) throw std::invalid_argument("ring_count must be at least 1");
}

std::vector<HoverCandidate> ring_candidates(const Vec3& target,
                                            const RingParams& ring) {
  ring.validate();
  std::vector<HoverCandidate> out;
  out.reserve(ring.count);
  for (int l = 0; l < ring.count; ++l) {
    HoverCandidate c;
    c.psi = 2.0 * std::numbers::pi * l / ring.count;
    c.pose = target + Vec3(ring.radius * std::cos(c.psi),
                           ring.radius * std::sin(c.psi), ring.altitude);
    out.push_back(c);
  }
  return out;
}

double viewpoint_gain(const Mat3& covariance, const Vec3& pose,
                      const Vec3& target, const RangeNoiseModel& noise) {
  return info_gain_proxy(covariance, (pose - target).norm(), noise);
}

std::optional<HoverSelection> select_hover(const Vec3& uav_position,
                                           const Vec3& target,
                                           const Mat3& covariance,
                                           const HoverConstraints& constraints,
                                           const RingParams& ring,
                                           const RangeNoiseModel& noise,
                                           double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  std::vector<HoverCandidate> ring_out = ring_candidates(target, ring);
  bool any = false;
  double best_score = 0.0;
  std::size_t best = 0;
  for (std::size_t i = 0; i < ring_out.size(); ++i) {
    HoverCandidate& c = ring_out[i];
    c.gain = viewpoint_gain(covariance, c.pose, target, noise);
    c.travel = (c.pose - uav_position).norm();
    for (const Vec3& b : constraints.blocked) {
      if ((c.pose - b).norm() < constraints.r_safe) {
        c.feasible = false;
        break;
      }
    }
    if (!c.feasible) continue;
    const double score = c.gain / (c.travel + eps);
    if (!any || score > best_score) {
      any = true;
      best_score = score;
      best = i;
    }
  }
  if (!any) return std::nullopt;
  HoverSelection sel;
  sel.chosen = ring_out[best];
  sel.ring = std::move(ring_out);
  return sel;
}

bool check_termination(const Mat3& covariance,
                       const std::vector<double>& best_feasible_gains,
                       double tau_logdet, double tau_gain) {
  if (logdet_spd(covariance) <= tau_logdet) return true;
  double best = 0.0;
  for (double gain : best_feasible_gains) best = std::max(best, gain);
  return best <= tau_gain;
}

ModeOutcome mode_step(const ModeState& state, const ModeInputs& in,
                      const RingParams& ring, const RangeNoiseModel& noise,
                      double eps) {
  ModeOutcome out;
  out.state = state;

  if (state.mode == Mode::kTracking && state.active_target && in.active_done) {
    out.events.push_back({*state.active_target, true});
    out.state.mode = Mode::kSurveillance;
    out.state.active_target.reset();
    out.state.hover_pose.reset();
    return out;
  }

  if (in.primary) {
    out.state.mode = Mode::kTracking;
    out.state.active_target = *in.primary;
    out.state.hover_pose.reset();
    if (in.primary_position && in.primary_covariance) {
      const auto sel =
          select_hover(in.uav_position, *in.primary_position,
                       *in.primary_covariance, in.constraints, ring, noise, eps);
      if (sel) out.state.hover_pose = sel->chosen.pose;
    }
  } else {
    out.state.mode = Mode::kSurveillance;
    out.state.active_target.reset();
    out.state.hover_pose.reset();
  }
  return out;
}

}  // namespace seatrack
