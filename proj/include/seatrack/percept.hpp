#pragma once

#include <optional>
#include <vector>

#include "seatrack/geom.hpp"
#include "seatrack/mathutil.hpp"

namespace seatrack {

struct CameraIntrinsics {
  double f = 500.0;          // focal length, px
  double cx = 320.0;
  double cy = 240.0;
  double baseline = 0.2;     // stereo baseline, m
  int width = 640;
  int height = 480;
  double d_min = 1.0;        // valid disparity bounds, px
  double d_max = 100.0;
  double z_min = 1.0;        // depth clamp, m
  double z_max = 60.0;
  double z_clamp_slack = 5.0;

  void validate() const;
};

/// One 2D detection: box center (u, v), size (w, h), confidence, and a small
/// list of disparity samples taken inside the box.
struct Detection {
  double u = 0.0;
  double v = 0.0;
  double w = 0.0;
  double h = 0.0;
  double confidence = 0.0;
  std::vector<double> disparity_patch;
  int class_id = 0;
};

/// World-frame position observation handed to the tracker.
struct Measurement3D {
  Vec3 position = Vec3::Zero();
  Mat3 covariance = Mat3::Identity();
  AgentId source_agent = 0;
  double timestamp = 0.0;
};

/// sigma(d) = sigma0 + k * d, applied isotropically: R(d) = sigma(d)^2 * I3.
struct RangeNoiseModel {
  double sigma0 = 0.5;  // m
  double k = 0.0;       // per m, >= 0

  double sigma(double range) const { return sigma0 + k * range; }
};

struct DetectorModel {
  double p_det = 1.0;          // per-target detection probability inside the frustum
  double sigma_d = 0.0;        // disparity noise std, px
  double lambda_fp = 0.0;      // expected false positives per frame
  double conf_lo = 0.9;
  double conf_hi = 1.0;
  int patch_size = 25;
  int min_support = 9;
  double bbox_size = 24.0;     // synthetic box side, px

  void validate() const;
};

/// Median over patch samples inside [d_min, d_max]; empty optional when fewer
/// than min_support samples survive the filter.
std::optional<double> median_disparity(const Detection& det, const CameraIntrinsics& intr, int min_support);

/// Pinhole stereo lifting: Z = f*B/d, X = (u-cx)Z/f, Y = (v-cy)Z/f, with Z
/// clamped to [z_min, z_max]. Rejects when the unclamped depth is outside the
/// clamp window by more than z_clamp_slack, or the disparity is invalid.
std::optional<Vec3> back_project(double u, double v, double d, const CameraIntrinsics& intr);

/// R(d) = (sigma0 + k d)^2 * I3. Throws on negative range.
Mat3 range_noise(double range, const RangeNoiseModel& model);

/// Synthetic stand-in for the learned detector: targets inside the frustum are
/// detected with probability p_det, their patch carries the true disparity
/// f*B/Z perturbed by noise of std sigma_d, and clutter is injected at
/// Poisson(lambda_fp) per frame. Deterministic given the rng stream.
std::vector<Detection> synth_detect(const std::vector<Vec3>& targets_world,
                                    const RigidTransform& world_T_camera,
                                    const CameraIntrinsics& intr,
                                    const DetectorModel& model,
                                    Rng& rng);

/// Lift detections to world-frame measurements through the agent's estimated
/// camera pose, attaching the range-dependent covariance at the lifted range.
std::vector<Measurement3D> lift_detections(const std::vector<Detection>& detections,
                                           const RigidTransform& world_T_camera,
                                           const CameraIntrinsics& intr,
                                           const RangeNoiseModel& noise,
                                           const DetectorModel& model,
                                           AgentId agent,
                                           double timestamp);

}  // namespace seatrack
